#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/cohort.hpp"
#include "fairaudit/schema.hpp"

namespace fairaudit {

enum class EffectTarget {
  kFarLike,  // pulls the identity centroid towards the shared hub
  kFrrLike,  // inflates intra-identity noise
};

struct AttributeEffect {
  std::string variable;
  EffectTarget target = EffectTarget::kFarLike;
  double strength = 0.0;  // per unit of the identity's aggregated value
};

struct GroupCount {
  std::vector<int> levels;  // one level per group attribute
  std::size_t count = 0;
};

/// Margin shift for every cell matching `pattern` (nullopt = any level).
/// Negative shifts move centroids closer to the hub, raising impostor scores.
struct GroupShift {
  std::vector<std::optional<int>> pattern;
  double shift = 0.0;
};

/// Expected sign of FAR(group_i) - FAR(group_j) for one comparison.
struct SignExpectation {
  GroupKey group_i;
  GroupKey group_j;
  int sign = 0;
};

/// Generator parameters. Identity geometry: centroid = p * hub +
/// sqrt(1 - p^2) * z with z a random unit vector orthogonal to the shared hub
/// and proximity p = clamp(1 - base_margin - shifts + jitter + far effects,
/// 0, 0.95); image = normalize(centroid + noise * N(0, I/dim)) with noise =
/// intra_noise * exp(noise_jitter * N(0,1) + frr effects).
struct SynthConfig {
  std::vector<std::string> group_attributes{"gender", "ethnicity"};
  std::vector<GroupCount> identities_per_group;
  std::size_t images_per_identity = 4;
  std::size_t dim = 512;
  double base_margin = 0.65;
  double proximity_jitter = 0.1;
  double intra_noise = 0.9;
  double noise_jitter = 0.25;
  std::vector<GroupShift> group_margin_shift;
  std::vector<AttributeEffect> attribute_effects;
  std::uint64_t seed = 0;
  /// Sign patterns the configuration is built to produce; copied to the
  /// ground truth.
  std::vector<SignExpectation> expectations;

  /// Every cell of the group attributes with `count` identities.
  static SynthConfig balanced(const AttributeSchema& schema, std::size_t count,
                              std::vector<std::string> group_attributes = {"gender", "ethnicity"});

  void validate(const AttributeSchema& schema) const;
};

struct GroundTruth {
  std::uint64_t seed = 0;
  std::vector<AttributeEffect> effects;
  std::vector<GroupShift> shifts;
  std::vector<SignExpectation> expectations;
};

struct SynthCohort {
  std::vector<EmbeddingRecord> records;
  std::vector<ImageAttributes> attributes;
  GroundTruth truth;
};

/// Deterministic in (config, schema): identity k draws from its own stream
/// derived from (seed, k).
SynthCohort generate(const SynthConfig& config, const AttributeSchema& schema);

/// Rewrites group counts and margin shifts so that the aggregate comparison
/// (second level vs first level of the first group attribute) has positive
/// FAR delta while (second, last level) vs (first, second-to-last level) is
/// negative. Needs two categorical group attributes with >= 2 levels each.
/// The two comparisons are stored in `expectations`.
SynthConfig plant_simpson(SynthConfig base, const AttributeSchema& schema);

nlohmann::json synth_config_to_json(const SynthConfig& config, const AttributeSchema& schema);
SynthConfig synth_config_from_json(const nlohmann::json& doc, const AttributeSchema& schema);
/// Recovers the sign expectations of a ground-truth manifest.
std::vector<SignExpectation> expectations_from_ground_truth(const nlohmann::json& truth,
                                                            const AttributeSchema& schema);
nlohmann::json ground_truth_to_json(const GroundTruth& truth, const SynthConfig& config,
                                    const AttributeSchema& schema);

}  // namespace fairaudit
