#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/calibration.hpp"
#include "fairaudit/cohort.hpp"
#include "fairaudit/explain.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/synth.hpp"
#include "fairaudit/trials.hpp"

namespace fairaudit {

inline constexpr const char* kToolVersion = "0.3.0";

struct AnalysisOptions {
  std::vector<ThresholdPolicy> policies{ThresholdPolicy::eer()};
  std::vector<std::string> group_by{"gender", "ethnicity"};
  bool explain = true;
  std::vector<Metric> dependents{Metric::kFar, Metric::kFrr};
  EncodingConfig encoding;
  unsigned threads = 1;
};

/// Observed sign of a planted comparison.
struct ExpectationCheck {
  std::string group_i;
  std::string group_j;
  int expected_sign = 0;
  double delta_far = 0.0;
  int observed_sign = 0;

  bool holds() const { return expected_sign == observed_sign; }
};

struct OperatingPointAudit {
  OperatingPoint operating_point;
  IndividualRatesResult rates;
  GroupRatesResult groups;
  std::vector<FairnessDelta> deltas;
  std::optional<PValueMatrix> kruskal_far;
  std::optional<PValueMatrix> kruskal_frr;
  std::vector<ExplanatoryReport> explanations;
  std::vector<ExpectationCheck> expectation_checks;
  std::vector<std::string> notes;
};

struct CohortCounts {
  std::size_t identities = 0;
  std::size_t images = 0;
  std::size_t genuine_pairs = 0;
  std::size_t impostor_pairs = 0;
};

struct AuditBundle {
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> synth_seed;
  std::uint64_t pair_seed = 0;
  std::vector<std::string> group_by;
  CohortCounts counts;
  std::vector<std::string> skipped_identities;
  std::vector<std::string> unattributed_images;
  std::vector<OperatingPointAudit> operating_points;
  std::vector<std::string> notes;
  /// Ground-truth manifest of a synthetic cohort, copied verbatim.
  std::optional<nlohmann::json> ground_truth;
};

/// Calibrates each policy on the scored trials and computes individual and
/// group rates, deltas over disjoint groups, pairwise Kruskal-Wallis
/// matrices over the fine-grained cells and, when enabled, the explanatory
/// analysis. A Kruskal-Wallis matrix that cannot be formed (a cell with
/// fewer than two members) becomes a note; other failures propagate.
AuditBundle run_audit(const Cohort& cohort, const AttributeSchema& schema, const TrialSet& scored,
                      const AnalysisOptions& options);

/// Compares each expectation against the group FAR deltas of `audit`.
std::vector<ExpectationCheck> check_expectations(const OperatingPointAudit& audit,
                                                 const AttributeSchema& schema,
                                                 const std::vector<SignExpectation>& expectations);

}  // namespace fairaudit
