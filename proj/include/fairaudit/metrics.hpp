#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairaudit/cohort.hpp"
#include "fairaudit/stats.hpp"
#include "fairaudit/trials.hpp"

namespace fairaudit {

enum class Metric { kFar, kFrr };

std::string_view metric_name(Metric metric);
Metric parse_metric(std::string_view text);

struct IndividualRates {
  std::string identity_id;
  double far = 0.0;  // false accepts / impostor pairs
  double frr = 0.0;  // false rejects / genuine pairs
  std::size_t genuine_count = 0;
  std::size_t impostor_count = 0;
  std::size_t false_accepts = 0;
  std::size_t false_rejects = 0;

  double value(Metric metric) const { return metric == Metric::kFar ? far : frr; }
};

struct Exclusion {
  std::string identity_id;
  std::string reason;
};

struct IndividualRatesResult {
  std::vector<IndividualRates> rates;
  /// Identities lacking genuine or impostor pairs.
  std::vector<Exclusion> excluded;
};

/// Per-identity FAR and FRR of the identity's own trial list at threshold
/// tau. Results do not depend on `threads`.
IndividualRatesResult individual_rates(const TrialSet& trials, double tau, unsigned threads = 1);

struct GroupRates {
  GroupKey key;
  std::string label;
  double far = 0.0;  // unweighted mean of member FARs
  double frr = 0.0;
  std::size_t member_count = 0;

  bool defined() const { return member_count > 0; }
  double value(Metric metric) const { return metric == Metric::kFar ? far : frr; }
};

struct GroupRatesResult {
  GroupSpec spec;
  std::vector<GroupRates> groups;
  /// Individuals with rates but a missing grouping attribute.
  std::vector<std::string> unassigned;
};

/// Macro-averaged rates for every group in `spec`. Empty groups are emitted
/// with member_count 0 and NaN rates.
GroupRatesResult group_rates(std::span<const IndividualRates> rates,
                             std::span<const AttributeProfile> profiles,
                             const AttributeSchema& schema, const GroupSpec& spec);

struct FairnessDelta {
  std::string group_i;
  std::string group_j;
  double delta_far = 0.0;  // far(i) - far(j)
  double delta_frr = 0.0;  // frr(i) - frr(j)
};

/// Errors when either operand is empty.
FairnessDelta fairness_delta(const GroupRates& i, const GroupRates& j);
std::vector<FairnessDelta> fairness_deltas(std::span<const GroupRates> groups,
                                           std::span<const std::pair<std::size_t, std::size_t>> pairs);
/// Unordered pairs (i < j) of non-empty, mutually disjoint groups.
std::vector<std::pair<std::size_t, std::size_t>> disjoint_group_pairs(
    std::span<const GroupRates> groups);

/// Symmetric matrix of pairwise Kruskal-Wallis p-values, unit diagonal.
struct PValueMatrix {
  Metric metric = Metric::kFar;
  std::vector<std::string> labels;
  std::vector<double> p_values;  // row-major labels.size()^2
  std::vector<double> h_values;  // row-major, 0 on the diagonal

  std::size_t size() const { return labels.size(); }
  double p(std::size_t i, std::size_t j) const { return p_values[i * size() + j]; }
  double h(std::size_t i, std::size_t j) const { return h_values[i * size() + j]; }
};

/// Runs the two-group Kruskal-Wallis test on per-individual `metric`
/// samples for each pair of groups in `spec`. Every group needs >= 2
/// members. No multiple-comparison correction is applied.
PValueMatrix kruskal_pairwise(std::span<const IndividualRates> rates,
                              std::span<const AttributeProfile> profiles,
                              const AttributeSchema& schema, const GroupSpec& spec, Metric metric);

/// Number of thresholds (0.1, 0.05, 0.01) that p falls strictly below.
int significance_level(double p);

}  // namespace fairaudit
