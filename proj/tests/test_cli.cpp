#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairaudit/cli.hpp"
#include "fairaudit/delimited.hpp"
#include "fairaudit/trials.hpp"
#include "oracles.hpp"

using namespace fairaudit;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const std::filesystem::path& path) { return path.string(); }

}  // namespace

TEST_CASE("usage errors exit 1") {
  const auto none = run({});
  CHECK(none.code == 1);
  CHECK(none.err.find("Usage") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"synth", "--bogus"}).code == 1);
  CHECK(run({"pairs"}).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("missing inputs exit 2 with a module-qualified message") {
  const auto dir = oracle::scratch_dir("cli_missing");
  const auto r = run({"pairs", "--embeddings", p(dir / "nope.bin"), "--out", p(dir / "t.csv")});
  CHECK(r.code == 2);
  CHECK(r.err.find("cohort: cannot open") != std::string::npos);
}

TEST_CASE("standalone subcommands compose") {
  const auto dir = oracle::scratch_dir("cli_chain");
  const auto data = dir / "data";
  REQUIRE(run({"synth", "--identities-per-cell", "8", "--dim", "32", "--seed", "4", "--out", p(data)}).code == 0);
  const auto emb = p(data / "embeddings.bin");
  const auto attrs = p(data / "attributes.csv");
  REQUIRE(run({"pairs", "--embeddings", emb, "--seed", "2", "--out", p(dir / "pairs.csv")}).code == 0);
  REQUIRE(run({"score", "--embeddings", emb, "--trials", p(dir / "pairs.csv"), "--threads", "3",
               "--out", p(dir / "scored.csv")}).code == 0);
  const auto cal = run({"calibrate", "--trials", p(dir / "scored.csv"), "--threshold-policy", "eer",
                        "--threshold-policy", "far@0.01", "--out", p(dir / "ops.json")});
  REQUIRE(cal.code == 0);
  CHECK(cal.out.find("far@0.01: tau=") != std::string::npos);

  // The far@0.01 operating point recounts to far <= 0.01.
  const auto ops = nlohmann::json::parse(std::ifstream(dir / "ops.json"));
  const double tau = ops["operating_points"][1]["tau"].get<double>();
  std::ifstream scored_in(dir / "scored.csv");
  const auto trials = read_trials(scored_in, "scored");
  std::size_t impostors = 0, accepted = 0;
  for (const auto& id : trials.identities) {
    for (const auto& pair : id.pairs) {
      if (pair.label != TrialLabel::kImpostor) continue;
      ++impostors;
      accepted += static_cast<std::size_t>(decide(*pair.score, tau));
    }
  }
  CHECK(static_cast<double>(accepted) / static_cast<double>(impostors) <= 0.01);

  const std::vector<std::string> inputs{"--embeddings", emb, "--attributes", attrs, "--trials",
                                        p(dir / "scored.csv"), "--ground-truth",
                                        p(data / "ground_truth.json")};
  auto audit_args = std::vector<std::string>{"audit"};
  audit_args.insert(audit_args.end(), inputs.begin(), inputs.end());
  audit_args.insert(audit_args.end(), {"--threshold-policy", "far@0.01", "--out", p(dir / "audit.json")});
  REQUIRE(run(audit_args).code == 0);
  auto explain_args = std::vector<std::string>{"explain"};
  explain_args.insert(explain_args.end(), inputs.begin(), inputs.end());
  explain_args.insert(explain_args.end(),
                      {"--threshold-policy", "far@0.01", "--standardize", "--out", p(dir / "explain.json")});
  REQUIRE(run(explain_args).code == 0);
  const auto rep = run({"report", "--audit", p(dir / "audit.json"), "--explain", p(dir / "explain.json"),
                        "--out", p(dir / "bundle")});
  REQUIRE(rep.code == 0);
  CHECK(std::filesystem::exists(dir / "bundle" / "figures" / "regression_far_at_0.01.svg"));
  CHECK(std::filesystem::exists(dir / "bundle" / "tables" / "group_far_far_at_0.01.csv"));
  const auto report = nlohmann::json::parse(std::ifstream(dir / "bundle" / "report.json"));
  CHECK(report["operating_points"][0]["explanations"].size() == 2);
  CHECK(report["operating_points"][0]["explanations"][0]["standardized"] == true);
  CHECK(report["synth_seed"] == 4);
}

TEST_CASE("rank-deficient characteristics exit 3") {
  const auto dir = oracle::scratch_dir("cli_rank");
  nlohmann::json schema{
      {"variables",
       {{{"name", "gender"}, {"family", "protected"}, {"kind", "categorical"}, {"levels", {"Man", "Woman"}}},
        {{"name", "ethnicity"}, {"family", "protected"}, {"kind", "categorical"}, {"levels", {"A", "B"}}},
        {{"name", "x"}, {"family", "distortion"}, {"kind", "continuous_unit"}},
        {{"name", "y"}, {"family", "distortion"}, {"kind", "continuous_unit"}}}},
      {"protected", {"gender", "ethnicity"}}};
  std::ofstream(dir / "schema.json") << schema.dump();
  const auto sp = p(dir / "schema.json");
  REQUIRE(run({"synth", "--schema", sp, "--identities-per-cell", "10", "--dim", "16", "--out", p(dir)}).code == 0);

  // Make y a copy of x.
  std::ifstream in(dir / "attributes.csv");
  auto table = read_delimited(in, "attrs");
  in.close();
  std::ofstream out(dir / "attributes.csv");
  write_record(out, table.header);
  for (auto& row : table.rows) {
    row[4] = row[3];
    write_record(out, row);
  }
  out.close();

  const auto emb = p(dir / "embeddings.bin");
  REQUIRE(run({"pairs", "--embeddings", emb, "--negatives", "20", "--out", p(dir / "t.csv")}).code == 0);
  REQUIRE(run({"score", "--embeddings", emb, "--trials", p(dir / "t.csv"), "--out", p(dir / "s.csv")}).code == 0);
  const auto r = run({"explain", "--schema", sp, "--embeddings", emb, "--attributes", p(dir / "attributes.csv"),
                      "--trials", p(dir / "s.csv"), "--out", p(dir / "e.json")});
  CHECK(r.code == 3);
  CHECK(r.err.find("rank-deficient") != std::string::npos);
  CHECK(r.err.find("y") != std::string::npos);
}

TEST_CASE("run-all writes the planted reversal tables") {
  const auto dir = oracle::scratch_dir("cli_run_all");
  nlohmann::json cfg{{"seed", 21},
                     {"synth", {{"identities_per_cell", 40}, {"dim", 64}, {"plant_simpson", true}}},
                     {"analysis", {{"threshold_policies", {"eer"}}, {"explain", false}}}};
  std::ofstream(dir / "cfg.json") << cfg.dump();
  const auto r = run({"run-all", "--config", p(dir / "cfg.json"), "--out", p(dir / "out")});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "out" / "tables" / "expectations_eer.csv"));
  CHECK(std::filesystem::exists(dir / "out" / "data" / "trials.csv"));
  const auto report = nlohmann::json::parse(std::ifstream(dir / "out" / "report.json"));
  CHECK(report["operating_points"][0]["expectation_checks"].size() == 2);
  CHECK(report["operating_points"][0]["explanations"].empty());
}
