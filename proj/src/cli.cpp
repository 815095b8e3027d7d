#include "fairaudit/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "fairaudit/calibration.hpp"
#include "fairaudit/cohort.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/pipeline.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/serialize.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/trials.hpp"

namespace fairaudit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> policies;
  std::string group_by;
  std::string schema;
  std::string out;
  unsigned threads = 1;
};

struct CohortInputs {
  std::string embeddings;
  std::string attributes;
  std::string trials;
};

struct SynthFlags {
  std::string config;
  std::size_t per_cell = 60;
  std::optional<std::size_t> images;
  std::optional<std::size_t> dim;
  bool simpson = false;
};

struct PairFlags {
  std::string embeddings;
  TrialPolicy policy;
  bool all_positives = false;
};

struct ExplainFlags {
  std::vector<std::string> dependents{"far", "frr"};
  std::vector<std::string> references;
  bool standardize = false;
  std::string ground_truth;
};

json read_json(const fs::path& path, std::string_view module) {
  std::ifstream in(path);
  if (!in) throw_data(module, fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw_data(module, fmt::format("'{}': {}", path.string(), e.what()));
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("cli", fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw_data("cli", fmt::format("cannot write '{}'", path.string()));
}

std::string require_out(const Globals& g, std::string_view command) {
  if (g.out.empty()) throw_usage("cli", fmt::format("{} needs --out", command));
  return g.out;
}

AttributeSchema schema_for(const Globals& g) {
  return g.schema.empty() ? AttributeSchema::face_default() : load_schema(g.schema);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<ThresholdPolicy> policies_for(const std::vector<std::string>& names) {
  std::vector<ThresholdPolicy> out;
  for (const auto& n : names) out.push_back(ThresholdPolicy::parse(n));
  if (out.empty()) out.push_back(ThresholdPolicy::eer());
  return out;
}

TrialSet load_trials(const fs::path& path, const Cohort* cohort) {
  std::ifstream in(path);
  if (!in) throw_data("trials", fmt::format("cannot open '{}'", path.string()));
  if (cohort == nullptr) return read_trials(in, path.string());
  std::unordered_map<std::string, std::string> identity_of;
  for (const auto& rec : cohort->records()) identity_of.emplace(rec.image_id, rec.identity_id);
  return read_trials(in, path.string(), &identity_of);
}

EncodingConfig encoding_for(const ExplainFlags& flags) {
  EncodingConfig enc;
  enc.standardize = flags.standardize;
  for (const auto& r : flags.references) {
    const auto eq = r.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == r.size()) {
      throw_usage("cli", fmt::format("bad --reference '{}' (expected variable=Level)", r));
    }
    enc.reference_levels[r.substr(0, eq)] = r.substr(eq + 1);
  }
  return enc;
}

void attach_expectations(AuditBundle& bundle, const AttributeSchema& schema, const json& truth) {
  const auto expectations = expectations_from_ground_truth(truth, schema);
  const auto attrs = truth.at("config").at("group_attributes").get<std::vector<std::string>>();
  if (!expectations.empty() && attrs != bundle.group_by) {
    bundle.notes.push_back("ground-truth expectations skipped: grouping attributes differ");
  } else {
    for (auto& op : bundle.operating_points) {
      op.expectation_checks = check_expectations(op, schema, expectations);
    }
  }
  bundle.ground_truth = truth;
  if (truth.contains("seed")) bundle.synth_seed = truth.at("seed").get<std::uint64_t>();
}

void print_operating_points(std::ostream& out, const std::vector<OperatingPoint>& ops) {
  for (const auto& op : ops) {
    out << fmt::format("{}: tau={} far={} frr={} (genuine {}, impostor {})\n", op.policy.name(),
                       op.tau, op.far, op.frr, op.genuine_count, op.impostor_count);
  }
}

void write_synth_outputs(const fs::path& dir, const SynthCohort& cohort, const SynthConfig& config,
                         const AttributeSchema& schema) {
  {
    auto out = open_output(dir / "embeddings.bin");
    write_embeddings_binary(out, cohort.records);
  }
  {
    auto out = open_output(dir / "attributes.csv");
    write_attributes(out, cohort.attributes, schema);
  }
  write_text(dir / "ground_truth.json",
             ground_truth_to_json(cohort.truth, config, schema).dump(2) + "\n");
}

int cmd_synth(const Globals& g, const SynthFlags& flags, std::ostream& out) {
  const AttributeSchema schema = schema_for(g);
  const fs::path dir = require_out(g, "synth");
  SynthConfig config;
  if (!flags.config.empty()) {
    config = synth_config_from_json(read_json(flags.config, "synth"), schema);
  } else {
    auto attrs = g.group_by.empty() ? std::vector<std::string>{"gender", "ethnicity"}
                                    : split_list(g.group_by);
    config = SynthConfig::balanced(schema, flags.per_cell, attrs);
    config.group_attributes = attrs;
  }
  if (flags.images) config.images_per_identity = *flags.images;
  if (flags.dim) config.dim = *flags.dim;
  if (flags.simpson) config = plant_simpson(std::move(config), schema);
  if (g.seed) config.seed = *g.seed;
  const SynthCohort cohort = generate(config, schema);
  write_synth_outputs(dir, cohort, config, schema);
  out << fmt::format("synth: {} images of dimension {} written to {}\n", cohort.records.size(),
                     config.dim, dir.string());
  return 0;
}

int cmd_pairs(const Globals& g, PairFlags flags, std::ostream& out) {
  const AttributeSchema schema = schema_for(g);
  const Cohort cohort = load_cohort(flags.embeddings, std::nullopt, schema);
  if (flags.all_positives) flags.policy.positive_mode = PositiveMode::kAllPairs;
  const TrialSet trials = generate_trials(cohort, flags.policy, g.seed.value_or(0));
  auto file = open_output(require_out(g, "pairs"));
  write_trials(file, trials);
  out << fmt::format("pairs: {} trials for {} identities ({} skipped)\n", trials.pair_count(),
                     trials.identities.size(), trials.skipped_identities.size());
  return 0;
}

int cmd_score(const Globals& g, const CohortInputs& in, std::ostream& out) {
  const AttributeSchema schema = schema_for(g);
  const Cohort cohort = load_cohort(in.embeddings, std::nullopt, schema);
  TrialSet trials = score_trials(load_trials(in.trials, &cohort), cohort, g.threads);
  auto file = open_output(require_out(g, "score"));
  write_trials(file, trials);
  out << fmt::format("score: {} trials scored\n", trials.pair_count());
  return 0;
}

int cmd_calibrate(const Globals& g, const CohortInputs& in, std::ostream& out) {
  const TrialSet trials = load_trials(in.trials, nullptr);
  const RocTable roc = sweep_rates(trials);
  std::vector<OperatingPoint> ops;
  for (const auto& p : policies_for(g.policies)) ops.push_back(calibrate(roc, p));
  print_operating_points(out, ops);
  if (!g.out.empty()) write_text(g.out, json{{"operating_points", ops}}.dump(2) + "\n");
  return 0;
}

int cmd_audit(const Globals& g, const CohortInputs& in, const ExplainFlags& flags, bool explain,
              std::ostream& out) {
  const AttributeSchema schema = schema_for(g);
  if (in.attributes.empty()) throw_usage("cli", "audit needs --attributes");
  const Cohort cohort = load_cohort(in.embeddings, fs::path(in.attributes), schema);
  const TrialSet trials = load_trials(in.trials, &cohort);
  AnalysisOptions options;
  options.policies = policies_for(g.policies);
  if (!g.group_by.empty()) options.group_by = split_list(g.group_by);
  options.explain = explain;
  options.dependents.clear();
  for (const auto& d : flags.dependents) options.dependents.push_back(parse_metric(d));
  options.encoding = encoding_for(flags);
  options.threads = g.threads;
  AuditBundle bundle = run_audit(cohort, schema, trials, options);
  if (g.seed) bundle.pair_seed = *g.seed;
  if (!flags.ground_truth.empty()) {
    attach_expectations(bundle, schema, read_json(flags.ground_truth, "cli"));
  }
  write_text(require_out(g, explain ? "explain" : "audit"), report::bundle_json_text(bundle));
  std::vector<OperatingPoint> ops;
  for (const auto& op : bundle.operating_points) ops.push_back(op.operating_point);
  print_operating_points(out, ops);
  return 0;
}

int cmd_report(const Globals& g, const std::string& audit_path, const std::string& explain_path,
               std::ostream& out) {
  const AttributeSchema schema = schema_for(g);
  AuditBundle bundle = bundle_from_json(read_json(audit_path, "report"), audit_path);
  if (!explain_path.empty()) {
    const AuditBundle extra = bundle_from_json(read_json(explain_path, "report"), explain_path);
    for (auto& op : bundle.operating_points) {
      for (const auto& other : extra.operating_points) {
        if (other.operating_point.policy == op.operating_point.policy) {
          op.explanations = other.explanations;
        }
      }
    }
  }
  const fs::path dir = require_out(g, "report");
  report::emit_bundle(bundle, schema, dir);
  out << fmt::format("report: bundle written to {}\n", dir.string());
  return 0;
}

int cmd_run_all(const Globals& g, const std::string& config_path, std::ostream& out) {
  const json doc = read_json(config_path, "cli");
  const fs::path base = fs::path(config_path).parent_path();
  AttributeSchema schema = AttributeSchema::face_default();
  if (!g.schema.empty()) {
    schema = load_schema(g.schema);
  } else if (doc.contains("schema")) {
    schema = doc.at("schema").is_string() ? load_schema(base / doc.at("schema").get<std::string>())
                                          : schema_from_json(doc.at("schema"));
  }
  const fs::path dir = require_out(g, "run-all");
  const fs::path data = dir / "data";

  try {
    SynthConfig synth = synth_config_from_json(doc.value("synth", json::object()), schema);
    const std::uint64_t seed = g.seed.value_or(doc.value("seed", synth.seed));
    synth.seed = seed;
    const SynthCohort generated = generate(synth, schema);
    write_synth_outputs(data, generated, synth, schema);

    const Cohort cohort = load_cohort(data / "embeddings.bin", data / "attributes.csv", schema);
    const json pairs = doc.value("pairs", json::object());
    TrialPolicy trial_policy;
    trial_policy.positives_per_identity =
        pairs.value("positives_per_identity", trial_policy.positives_per_identity);
    trial_policy.negatives_per_identity =
        pairs.value("negatives_per_identity", trial_policy.negatives_per_identity);
    if (pairs.value("all_positives", false)) trial_policy.positive_mode = PositiveMode::kAllPairs;
    const TrialSet scored =
        score_trials(generate_trials(cohort, trial_policy, seed), cohort, g.threads);
    {
      auto file = open_output(data / "trials.csv");
      write_trials(file, scored);
    }

    const json analysis = doc.value("analysis", json::object());
    AnalysisOptions options;
    options.policies = policies_for(
        g.policies.empty() ? analysis.value("threshold_policies", std::vector<std::string>{})
                           : g.policies);
    options.group_by = g.group_by.empty()
                           ? analysis.value("group_by", synth.group_attributes)
                           : split_list(g.group_by);
    options.explain = analysis.value("explain", true);
    options.dependents.clear();
    for (const auto& d : analysis.value("dependents", std::vector<std::string>{"far", "frr"})) {
      options.dependents.push_back(parse_metric(d));
    }
    options.encoding.standardize = analysis.value("standardize", false);
    options.encoding.reference_levels =
        analysis.value("reference_levels", std::map<std::string, std::string>{});
    options.threads = g.threads;

    AuditBundle bundle = run_audit(cohort, schema, scored, options);
    attach_expectations(bundle, schema, ground_truth_to_json(generated.truth, synth, schema));
    report::emit_bundle(bundle, schema, dir);

    std::vector<OperatingPoint> ops;
    for (const auto& op : bundle.operating_points) ops.push_back(op.operating_point);
    print_operating_points(out, ops);
    out << fmt::format("run-all: bundle written to {}\n", dir.string());
  } catch (const json::exception& e) {
    throw_data("cli", fmt::format("'{}': {}", config_path, e.what()));
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Demographic and characteristic-level audit of face verification scores",
               "fairaudit"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  Globals g;
  app.add_option("--seed", g.seed, "Random seed (u64)");
  app.add_option("--threshold-policy", g.policies, "eer or far@<fraction>; repeatable")
      ->take_all()
      ->allow_extra_args(false);
  app.add_option("--group-by", g.group_by, "Grouping attributes, comma separated");
  app.add_option("--schema", g.schema, "Attribute schema JSON (default: built-in face schema)");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 256u));

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  synth->add_option("--config", synth_flags.config, "Synthetic cohort config (JSON)");
  synth->add_option("--identities-per-cell", synth_flags.per_cell,
                    "Identities per group cell when no config is given");
  synth->add_option("--images", synth_flags.images, "Images per identity");
  synth->add_option("--dim", synth_flags.dim, "Embedding dimension");
  synth->add_flag("--simpson", synth_flags.simpson, "Plant a Simpson reversal");

  PairFlags pair_flags;
  auto* pairs = app.add_subcommand("pairs", "Build genuine and impostor trials");
  pairs->add_option("--embeddings", pair_flags.embeddings, "Embedding file")->required();
  pairs->add_option("--positives", pair_flags.policy.positives_per_identity,
                    "Genuine pairs per identity (cap)");
  pairs->add_option("--negatives", pair_flags.policy.negatives_per_identity,
                    "Impostor pairs per identity");
  pairs->add_flag("--all-positives", pair_flags.all_positives, "Keep every genuine pair");

  CohortInputs inputs;
  auto* score = app.add_subcommand("score", "Score trials with cosine similarity");
  score->add_option("--embeddings", inputs.embeddings, "Embedding file")->required();
  score->add_option("--trials", inputs.trials, "Trial file")->required();

  auto* calibrate_cmd = app.add_subcommand("calibrate", "Pick operating thresholds");
  calibrate_cmd->add_option("--trials", inputs.trials, "Scored trial file")->required();

  ExplainFlags explain_flags;
  auto add_audit_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--embeddings", inputs.embeddings, "Embedding file")->required();
    cmd->add_option("--attributes", inputs.attributes, "Attribute file")->required();
    cmd->add_option("--trials", inputs.trials, "Scored trial file")->required();
    cmd->add_option("--ground-truth", explain_flags.ground_truth, "Synthetic ground truth JSON");
  };
  auto* audit = app.add_subcommand("audit", "Group rates, deltas and Kruskal-Wallis tests");
  add_audit_inputs(audit);
  auto* explain_cmd = app.add_subcommand("explain", "Audit plus correlation and regression");
  add_audit_inputs(explain_cmd);
  explain_cmd->add_option("--dependent", explain_flags.dependents, "far and/or frr")
      ->take_all()
      ->allow_extra_args(false);
  explain_cmd->add_option("--reference", explain_flags.references,
                          "Reference level, variable=Level; repeatable");
  explain_cmd->add_flag("--standardize", explain_flags.standardize, "z-score explanatory columns");

  std::string audit_path;
  std::string explain_path;
  auto* report_cmd = app.add_subcommand("report", "Render a report bundle");
  report_cmd->add_option("--audit", audit_path, "audit or explain JSON")->required();
  report_cmd->add_option("--explain", explain_path, "explain JSON to merge");

  std::string config_path;
  auto* run_all = app.add_subcommand("run-all", "Synthesize, pair, score, audit and report");
  run_all->add_option("--config", config_path, "Run configuration (JSON)")->required();

  std::vector<std::string> storage{"fairaudit"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (synth->parsed()) return cmd_synth(g, synth_flags, out);
    if (pairs->parsed()) return cmd_pairs(g, pair_flags, out);
    if (score->parsed()) return cmd_score(g, inputs, out);
    if (calibrate_cmd->parsed()) return cmd_calibrate(g, inputs, out);
    if (audit->parsed()) return cmd_audit(g, inputs, explain_flags, false, out);
    if (explain_cmd->parsed()) return cmd_audit(g, inputs, explain_flags, true, out);
    if (report_cmd->parsed()) return cmd_report(g, audit_path, explain_path, out);
    if (run_all->parsed()) return cmd_run_all(g, config_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kData);
  }
  err << app.help();
  return static_cast<int>(ErrorKind::kUsage);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace fairaudit::cli
