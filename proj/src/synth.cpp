#include "fairaudit/synth.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fairaudit/error.hpp"
#include "fairaudit/random.hpp"

namespace fairaudit {
namespace {

constexpr double kMaxProximity = 0.95;
constexpr double kSimpsonHighShift = -0.15;
constexpr double kSimpsonMidShift = -0.10;
constexpr std::size_t kSimpsonDefaultCount = 60;

std::vector<std::size_t> group_attribute_indices(const SynthConfig& config,
                                                 const AttributeSchema& schema) {
  std::vector<std::size_t> out;
  for (const auto& name : config.group_attributes) {
    const std::size_t idx = schema.require_index(name);
    if (schema.at(idx).kind.tag != KindTag::kCategorical) {
      throw_data("synth", fmt::format("group attribute '{}' must be categorical", name));
    }
    out.push_back(idx);
  }
  return out;
}

bool pattern_matches(const std::vector<std::optional<int>>& pattern,
                     const std::vector<int>& levels) {
  for (std::size_t a = 0; a < pattern.size() && a < levels.size(); ++a) {
    if (pattern[a] && *pattern[a] != levels[a]) return false;
  }
  return true;
}

std::vector<double> unit_gaussian(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;
  return v;
}

// Per-image draw for one non-group variable, given identity-level state.
struct VariableLatent {
  double center = 0.0;
  double spread = 0.0;
  double probability = 0.0;
  int level = 0;
};

VariableLatent draw_latent(const Variable& var, Rng& rng) {
  VariableLatent latent;
  const auto& kind = var.kind;
  switch (kind.tag) {
    case KindTag::kContinuousUnit:
      latent.center = rng.uniform();
      latent.spread = 0.05;
      break;
    case KindTag::kContinuousRange: {
      const double width = kind.hi - kind.lo;
      if (var.family == Family::kOrientation) {
        const double mid = 0.5 * (kind.lo + kind.hi);
        latent.center = std::clamp(mid + rng.normal() * width / 36.0, kind.lo, kind.hi);
        latent.spread = width / 72.0;
      } else {
        latent.center = kind.lo + width * rng.uniform(0.1, 0.7);
        latent.spread = width * 0.02;
      }
      break;
    }
    case KindTag::kBoolean:
      latent.probability = rng.uniform(0.0, 0.4);
      break;
    case KindTag::kCategorical:
      latent.level = static_cast<int>(rng.uniform_index(kind.levels.size()));
      break;
  }
  return latent;
}

double draw_image_value(const Variable& var, const VariableLatent& latent, Rng& rng) {
  const auto& kind = var.kind;
  switch (kind.tag) {
    case KindTag::kContinuousUnit:
      return std::clamp(latent.center + latent.spread * rng.normal(), 0.0, 1.0);
    case KindTag::kContinuousRange:
      return std::clamp(latent.center + latent.spread * rng.normal(), kind.lo, kind.hi);
    case KindTag::kBoolean:
      return rng.bernoulli(latent.probability) ? 1.0 : 0.0;
    case KindTag::kCategorical:
      return static_cast<double>(latent.level);
  }
  return 0.0;
}

// Identity-level value an auditor would compute from the images.
double aggregate_value(const Variable& var, const std::vector<double>& values) {
  if (var.kind.tag == KindTag::kBoolean) {
    const auto ones = std::count(values.begin(), values.end(), 1.0);
    return 2 * static_cast<std::size_t>(ones) >= values.size() ? 1.0 : 0.0;
  }
  const double anchor = values.front();
  double acc = 0.0;
  for (double v : values) acc += v - anchor;
  return anchor + acc / static_cast<double>(values.size());
}

std::string_view target_name(EffectTarget target) {
  return target == EffectTarget::kFarLike ? "far_like" : "frr_like";
}

EffectTarget parse_target(std::string_view text) {
  if (text == "far_like") return EffectTarget::kFarLike;
  if (text == "frr_like") return EffectTarget::kFrrLike;
  throw_data("synth", fmt::format("unknown effect target '{}'", text));
}

nlohmann::json levels_to_json(const std::vector<std::optional<int>>& levels,
                              const std::vector<std::string>& attributes,
                              const AttributeSchema& schema) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t a = 0; a < levels.size(); ++a) {
    if (!levels[a]) continue;
    const auto& var = schema.at(schema.require_index(attributes[a]));
    out[attributes[a]] = var.kind.levels.at(static_cast<std::size_t>(*levels[a]));
  }
  return out;
}

std::vector<std::optional<int>> levels_from_json(const nlohmann::json& doc,
                                                 const std::vector<std::string>& attributes,
                                                 const AttributeSchema& schema) {
  std::vector<std::optional<int>> levels(attributes.size());
  for (const auto& [key, value] : doc.items()) {
    auto pos = std::find(attributes.begin(), attributes.end(), key);
    if (pos == attributes.end()) {
      throw_data("synth", fmt::format("'{}' is not a group attribute", key));
    }
    const auto& var = schema.at(schema.require_index(key));
    const auto name = value.get<std::string>();
    auto lvl = std::find(var.kind.levels.begin(), var.kind.levels.end(), name);
    if (lvl == var.kind.levels.end()) {
      throw_data("synth", fmt::format("'{}' is not a level of '{}'", name, key));
    }
    levels[static_cast<std::size_t>(pos - attributes.begin())] =
        static_cast<int>(lvl - var.kind.levels.begin());
  }
  return levels;
}

}  // namespace

SynthConfig SynthConfig::balanced(const AttributeSchema& schema, std::size_t count,
                                  std::vector<std::string> group_attributes) {
  SynthConfig config;
  config.group_attributes = std::move(group_attributes);
  const auto indices = group_attribute_indices(config, schema);
  std::vector<int> digit(indices.size(), 0);
  while (true) {
    config.identities_per_group.push_back({digit, count});
    std::size_t a = digit.size();
    bool done = true;
    while (a > 0) {
      --a;
      if (++digit[a] < static_cast<int>(schema.at(indices[a]).kind.levels.size())) {
        done = false;
        break;
      }
      digit[a] = 0;
    }
    if (done) break;
  }
  return config;
}

void SynthConfig::validate(const AttributeSchema& schema) const {
  const auto indices = group_attribute_indices(*this, schema);
  if (identities_per_group.empty()) throw_data("synth", "no identity groups configured");
  if (images_per_identity < 2) throw_data("synth", "images_per_identity must be >= 2");
  if (dim < 2) throw_data("synth", "dim must be >= 2");
  for (double v : {base_margin, proximity_jitter, intra_noise, noise_jitter}) {
    if (!std::isfinite(v)) throw_data("synth", "geometry parameters must be finite");
  }
  if (intra_noise <= 0.0) throw_data("synth", "intra_noise must be positive");
  std::size_t total = 0;
  for (const auto& g : identities_per_group) {
    if (g.levels.size() != indices.size()) {
      throw_data("synth", "group level tuple does not match group attributes");
    }
    for (std::size_t a = 0; a < indices.size(); ++a) {
      const auto n_levels = schema.at(indices[a]).kind.levels.size();
      if (g.levels[a] < 0 || static_cast<std::size_t>(g.levels[a]) >= n_levels) {
        throw_data("synth", "group level out of range");
      }
    }
    if (g.count < 1) throw_data("synth", "identity counts must be >= 1");
    total += g.count;
  }
  if (total < 2) throw_data("synth", "need at least 2 identities");
  for (const auto& s : group_margin_shift) {
    if (s.pattern.size() != indices.size() || !std::isfinite(s.shift)) {
      throw_data("synth", "malformed group margin shift");
    }
  }
  for (const auto& e : attribute_effects) {
    const std::size_t idx = schema.require_index(e.variable);
    if (schema.at(idx).kind.tag == KindTag::kCategorical) {
      throw_data("synth", fmt::format("effect variable '{}' must not be categorical", e.variable));
    }
    if (!std::isfinite(e.strength)) {
      throw_data("synth", fmt::format("effect strength for '{}' is not finite", e.variable));
    }
  }
}

SynthCohort generate(const SynthConfig& config, const AttributeSchema& schema) {
  config.validate(schema);
  const auto group_indices = group_attribute_indices(config, schema);
  std::vector<std::size_t> effect_index;
  for (const auto& e : config.attribute_effects) {
    effect_index.push_back(schema.require_index(e.variable));
  }

  SynthCohort out;
  out.truth.seed = config.seed;
  out.truth.effects = config.attribute_effects;
  out.truth.shifts = config.group_margin_shift;
  out.truth.expectations = config.expectations;

  Rng hub_rng(mix_seed(config.seed, 0));
  const std::vector<double> hub = unit_gaussian(hub_rng, config.dim);
  const double noise_scale = 1.0 / std::sqrt(static_cast<double>(config.dim));

  std::size_t identity_number = 0;
  for (const auto& group : config.identities_per_group) {
    double shift = 0.0;
    for (const auto& s : config.group_margin_shift) {
      if (pattern_matches(s.pattern, group.levels)) shift += s.shift;
    }
    for (std::size_t k = 0; k < group.count; ++k, ++identity_number) {
      Rng rng(mix_seed(config.seed, identity_number + 1));
      const std::string identity_id = fmt::format("id{:05d}", identity_number);

      // Attributes first; planted effects read the aggregated values.
      std::vector<std::vector<double>> image_values(
          schema.size(), std::vector<double>(config.images_per_identity, 0.0));
      for (std::size_t v = 0; v < schema.size(); ++v) {
        const auto& var = schema.at(v);
        auto pos = std::find(group_indices.begin(), group_indices.end(), v);
        if (pos != group_indices.end()) {
          const double level = group.levels[static_cast<std::size_t>(pos - group_indices.begin())];
          std::fill(image_values[v].begin(), image_values[v].end(), level);
          continue;
        }
        const VariableLatent latent = draw_latent(var, rng);
        for (auto& value : image_values[v]) value = draw_image_value(var, latent, rng);
      }

      double proximity = 1.0 - config.base_margin - shift +
                         config.proximity_jitter * rng.uniform(-1.0, 1.0);
      double log_noise = config.noise_jitter * rng.normal();
      for (std::size_t e = 0; e < config.attribute_effects.size(); ++e) {
        const auto& effect = config.attribute_effects[e];
        const double value =
            aggregate_value(schema.at(effect_index[e]), image_values[effect_index[e]]);
        if (effect.target == EffectTarget::kFarLike) {
          proximity += effect.strength * value;
        } else {
          log_noise += effect.strength * value;
        }
      }
      proximity = std::clamp(proximity, 0.0, kMaxProximity);
      const double noise = config.intra_noise * std::exp(log_noise);

      std::vector<double> z = unit_gaussian(rng, config.dim);
      double along = 0.0;
      for (std::size_t d = 0; d < config.dim; ++d) along += z[d] * hub[d];
      double norm2 = 0.0;
      for (std::size_t d = 0; d < config.dim; ++d) {
        z[d] -= along * hub[d];
        norm2 += z[d] * z[d];
      }
      const double orth = std::sqrt(1.0 - proximity * proximity) / std::sqrt(norm2);
      std::vector<double> centroid(config.dim);
      for (std::size_t d = 0; d < config.dim; ++d) {
        centroid[d] = proximity * hub[d] + orth * z[d];
      }

      for (std::size_t i = 0; i < config.images_per_identity; ++i) {
        EmbeddingRecord rec;
        rec.image_id = fmt::format("{}_{:02d}", identity_id, i);
        rec.identity_id = identity_id;
        std::vector<double> x(config.dim);
        double xn = 0.0;
        for (std::size_t d = 0; d < config.dim; ++d) {
          x[d] = centroid[d] + noise * noise_scale * rng.normal();
          xn += x[d] * x[d];
        }
        const double inv = 1.0 / std::sqrt(xn);
        rec.vector.resize(config.dim);
        for (std::size_t d = 0; d < config.dim; ++d) rec.vector[d] = static_cast<float>(x[d] * inv);

        ImageAttributes attrs{rec.image_id, std::vector<std::optional<double>>(schema.size())};
        for (std::size_t v = 0; v < schema.size(); ++v) attrs.values[v] = image_values[v][i];
        out.records.push_back(std::move(rec));
        out.attributes.push_back(std::move(attrs));
      }
    }
  }
  return out;
}

SynthConfig plant_simpson(SynthConfig base, const AttributeSchema& schema) {
  if (base.group_attributes.size() < 2) {
    throw_data("synth", "simpson planting needs two group attributes");
  }
  const auto indices = group_attribute_indices(base, schema);
  const std::size_t levels_a = schema.at(indices[0]).kind.levels.size();
  const std::size_t levels_b = schema.at(indices[1]).kind.levels.size();
  if (levels_a < 2 || levels_b < 2) {
    throw_data("synth", "simpson planting needs >= 2 levels per group attribute");
  }
  std::size_t unit = kSimpsonDefaultCount;
  if (!base.identities_per_group.empty()) {
    unit = std::min_element(base.identities_per_group.begin(), base.identities_per_group.end(),
                            [](const auto& x, const auto& y) { return x.count < y.count; })
               ->count;
  }
  const int focus = 1;                                       // e.g. Woman
  const int other = 0;                                       // e.g. Man
  const int clean = static_cast<int>(levels_b) - 1;          // e.g. Caucasian
  const int exposed = static_cast<int>(levels_b) - 2;        // e.g. Black
  const std::size_t extra_dims = indices.size() - 2;

  SynthConfig config = base;
  config.identities_per_group.clear();
  config.group_margin_shift.clear();
  auto tail = [&](std::vector<int> head) {
    head.insert(head.end(), extra_dims, 0);
    return head;
  };
  auto pattern = [&](int a, int b) {
    std::vector<std::optional<int>> p{a, b};
    p.insert(p.end(), extra_dims, std::nullopt);
    return p;
  };
  for (int a = 0; a < static_cast<int>(levels_a); ++a) {
    for (int b = 0; b < static_cast<int>(levels_b); ++b) {
      const bool focus_risky = a == focus && b != clean;
      config.identities_per_group.push_back({tail({a, b}), focus_risky ? 2 * unit : unit});
      if (focus_risky) config.group_margin_shift.push_back({pattern(a, b), kSimpsonHighShift});
      if (a == other && b == exposed) {
        config.group_margin_shift.push_back({pattern(a, b), kSimpsonMidShift});
      }
    }
  }
  std::vector<std::optional<int>> agg_i(indices.size()), agg_j(indices.size());
  agg_i[0] = focus;
  agg_j[0] = other;
  config.expectations = {
      {GroupKey{agg_i}, GroupKey{agg_j}, +1},
      {GroupKey{pattern(focus, clean)}, GroupKey{pattern(other, exposed)}, -1},
  };
  return config;
}

nlohmann::json synth_config_to_json(const SynthConfig& config, const AttributeSchema& schema) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : config.identities_per_group) {
    std::vector<std::optional<int>> levels(g.levels.begin(), g.levels.end());
    groups.push_back({{"group", levels_to_json(levels, config.group_attributes, schema)},
                      {"count", g.count}});
  }
  nlohmann::json shifts = nlohmann::json::array();
  for (const auto& s : config.group_margin_shift) {
    shifts.push_back({{"group", levels_to_json(s.pattern, config.group_attributes, schema)},
                      {"shift", s.shift}});
  }
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : config.attribute_effects) {
    effects.push_back({{"variable", e.variable},
                       {"target", std::string(target_name(e.target))},
                       {"strength", e.strength}});
  }
  return {{"group_attributes", config.group_attributes},
          {"identities_per_group", std::move(groups)},
          {"images_per_identity", config.images_per_identity},
          {"dim", config.dim},
          {"base_margin", config.base_margin},
          {"proximity_jitter", config.proximity_jitter},
          {"intra_noise", config.intra_noise},
          {"noise_jitter", config.noise_jitter},
          {"group_margin_shift", std::move(shifts)},
          {"attribute_effects", std::move(effects)},
          {"seed", config.seed}};
}

SynthConfig synth_config_from_json(const nlohmann::json& doc, const AttributeSchema& schema) {
  try {
    SynthConfig config;
    config.group_attributes =
        doc.value("group_attributes", std::vector<std::string>{"gender", "ethnicity"});
    if (doc.contains("identities_per_group")) {
      for (const auto& g : doc.at("identities_per_group")) {
        const auto levels = levels_from_json(g.at("group"), config.group_attributes, schema);
        GroupCount count;
        for (const auto& l : levels) {
          if (!l) throw_data("synth", "identities_per_group entries must name every attribute");
          count.levels.push_back(*l);
        }
        count.count = g.at("count").get<std::size_t>();
        config.identities_per_group.push_back(std::move(count));
      }
    } else {
      config.identities_per_group =
          SynthConfig::balanced(schema, doc.value("identities_per_cell", std::size_t{60}),
                                config.group_attributes)
              .identities_per_group;
    }
    config.images_per_identity = doc.value("images_per_identity", config.images_per_identity);
    config.dim = doc.value("dim", config.dim);
    config.base_margin = doc.value("base_margin", config.base_margin);
    config.proximity_jitter = doc.value("proximity_jitter", config.proximity_jitter);
    config.intra_noise = doc.value("intra_noise", config.intra_noise);
    config.noise_jitter = doc.value("noise_jitter", config.noise_jitter);
    config.seed = doc.value("seed", config.seed);
    for (const auto& s : doc.value("group_margin_shift", nlohmann::json::array())) {
      config.group_margin_shift.push_back(
          {levels_from_json(s.at("group"), config.group_attributes, schema),
           s.at("shift").get<double>()});
    }
    for (const auto& e : doc.value("attribute_effects", nlohmann::json::array())) {
      config.attribute_effects.push_back({e.at("variable").get<std::string>(),
                                          parse_target(e.at("target").get<std::string>()),
                                          e.at("strength").get<double>()});
    }
    if (doc.value("plant_simpson", false)) config = plant_simpson(std::move(config), schema);
    config.validate(schema);
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw_data("synth", fmt::format("malformed synth config: {}", e.what()));
  }
}

std::vector<SignExpectation> expectations_from_ground_truth(const nlohmann::json& truth,
                                                            const AttributeSchema& schema) {
  try {
    const auto attributes =
        truth.at("config").at("group_attributes").get<std::vector<std::string>>();
    std::vector<SignExpectation> out;
    for (const auto& x : truth.value("expectations", nlohmann::json::array())) {
      out.push_back({GroupKey{levels_from_json(x.at("group_i"), attributes, schema)},
                     GroupKey{levels_from_json(x.at("group_j"), attributes, schema)},
                     x.at("expected_delta_far_sign").get<int>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw_data("synth", fmt::format("malformed ground truth: {}", e.what()));
  }
}

nlohmann::json ground_truth_to_json(const GroundTruth& truth, const SynthConfig& config,
                                    const AttributeSchema& schema) {
  nlohmann::json effects = nlohmann::json::array();
  for (const auto& e : truth.effects) {
    const int direction = e.strength > 0 ? 1 : (e.strength < 0 ? -1 : 0);
    effects.push_back({{"variable", e.variable},
                       {"target", std::string(target_name(e.target))},
                       {"strength", e.strength},
                       {"expected_far_sign", e.target == EffectTarget::kFarLike ? direction : 0},
                       {"expected_frr_sign", e.target == EffectTarget::kFrrLike ? direction : 0}});
  }
  nlohmann::json shifts = nlohmann::json::array();
  for (const auto& s : truth.shifts) {
    shifts.push_back({{"group", levels_to_json(s.pattern, config.group_attributes, schema)},
                      {"shift", s.shift}});
  }
  nlohmann::json expectations = nlohmann::json::array();
  for (const auto& x : truth.expectations) {
    expectations.push_back(
        {{"group_i", levels_to_json(x.group_i.levels, config.group_attributes, schema)},
         {"group_j", levels_to_json(x.group_j.levels, config.group_attributes, schema)},
         {"expected_delta_far_sign", x.sign}});
  }
  return {{"seed", truth.seed},
          {"config", synth_config_to_json(config, schema)},
          {"attribute_effects", std::move(effects)},
          {"group_margin_shift", std::move(shifts)},
          {"expectations", std::move(expectations)}};
}

}  // namespace fairaudit
