#include "fairaudit/metrics.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include <fmt/format.h>

#include "fairaudit/error.hpp"
#include "fairaudit/parallel.hpp"

namespace fairaudit {
namespace {

struct Membership {
  std::vector<std::vector<std::size_t>> members;  // per group, indices into rates
  std::vector<std::string> unassigned;
};

Membership assign_members(std::span<const IndividualRates> rates,
                          std::span<const AttributeProfile> profiles, const GroupSpec& spec) {
  std::unordered_map<std::string_view, const AttributeProfile*> by_id;
  for (const auto& profile : profiles) by_id.emplace(profile.identity_id, &profile);
  Membership m;
  m.members.resize(spec.groups.size());
  for (std::size_t r = 0; r < rates.size(); ++r) {
    auto it = by_id.find(rates[r].identity_id);
    std::optional<std::vector<int>> cell;
    if (it != by_id.end()) cell = group_cell(spec, *it->second);
    if (!cell) {
      m.unassigned.push_back(rates[r].identity_id);
      continue;
    }
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
      if (group_contains(spec.groups[g], *cell)) m.members[g].push_back(r);
    }
  }
  return m;
}

}  // namespace

std::string_view metric_name(Metric metric) { return metric == Metric::kFar ? "far" : "frr"; }

Metric parse_metric(std::string_view text) {
  if (text == "far") return Metric::kFar;
  if (text == "frr") return Metric::kFrr;
  throw_usage("metrics", fmt::format("unknown metric '{}'", text));
}

IndividualRatesResult individual_rates(const TrialSet& trials, double tau, unsigned threads) {
  if (!std::isfinite(tau)) throw_data("metrics", "threshold must be finite");
  const std::size_t n = trials.identities.size();
  std::vector<IndividualRates> all(n);
  std::vector<char> scored(n, 1);
  parallel_for(n, threads, [&](std::size_t u) {
    const auto& id = trials.identities[u];
    IndividualRates r;
    r.identity_id = id.identity_id;
    for (const auto& pair : id.pairs) {
      if (!pair.score) {
        scored[u] = 0;
        return;
      }
      const int accepted = decide(*pair.score, tau);
      if (pair.label == TrialLabel::kGenuine) {
        ++r.genuine_count;
        if (accepted == 0) ++r.false_rejects;
      } else {
        ++r.impostor_count;
        if (accepted == 1) ++r.false_accepts;
      }
    }
    if (r.genuine_count > 0) {
      r.frr = static_cast<double>(r.false_rejects) / static_cast<double>(r.genuine_count);
    }
    if (r.impostor_count > 0) {
      r.far = static_cast<double>(r.false_accepts) / static_cast<double>(r.impostor_count);
    }
    all[u] = std::move(r);
  });

  IndividualRatesResult result;
  for (std::size_t u = 0; u < n; ++u) {
    if (!scored[u]) {
      throw_data("metrics", fmt::format("identity '{}' has unscored pairs",
                                        trials.identities[u].identity_id));
    }
    auto& r = all[u];
    if (r.genuine_count == 0) {
      result.excluded.push_back({r.identity_id, "no genuine pairs"});
    } else if (r.impostor_count == 0) {
      result.excluded.push_back({r.identity_id, "no impostor pairs"});
    } else {
      result.rates.push_back(std::move(r));
    }
  }
  return result;
}

GroupRatesResult group_rates(std::span<const IndividualRates> rates,
                             std::span<const AttributeProfile> profiles,
                             const AttributeSchema& schema, const GroupSpec& spec) {
  Membership m = assign_members(rates, profiles, spec);
  GroupRatesResult result;
  result.spec = spec;
  result.unassigned = std::move(m.unassigned);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    GroupRates group;
    group.key = spec.groups[g];
    group.label = group_label(spec, schema, group.key);
    group.member_count = m.members[g].size();
    if (group.member_count == 0) {
      group.far = nan;
      group.frr = nan;
    } else {
      double far = 0.0;
      double frr = 0.0;
      for (std::size_t r : m.members[g]) {
        far += rates[r].far;
        frr += rates[r].frr;
      }
      group.far = far / static_cast<double>(group.member_count);
      group.frr = frr / static_cast<double>(group.member_count);
    }
    result.groups.push_back(std::move(group));
  }
  return result;
}

FairnessDelta fairness_delta(const GroupRates& i, const GroupRates& j) {
  if (!i.defined() || !j.defined()) {
    throw_data("metrics", fmt::format("fairness delta between '{}' and '{}': empty group",
                                      i.label, j.label));
  }
  return {i.label, j.label, i.far - j.far, i.frr - j.frr};
}

std::vector<FairnessDelta> fairness_deltas(
    std::span<const GroupRates> groups,
    std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<FairnessDelta> out;
  out.reserve(pairs.size());
  for (const auto& [i, j] : pairs) out.push_back(fairness_delta(groups[i], groups[j]));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> disjoint_group_pairs(
    std::span<const GroupRates> groups) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!groups[i].defined()) continue;
    for (std::size_t j = i + 1; j < groups.size(); ++j) {
      if (groups[j].defined() && groups_disjoint(groups[i].key, groups[j].key)) {
        pairs.emplace_back(i, j);
      }
    }
  }
  return pairs;
}

PValueMatrix kruskal_pairwise(std::span<const IndividualRates> rates,
                              std::span<const AttributeProfile> profiles,
                              const AttributeSchema& schema, const GroupSpec& spec,
                              Metric metric) {
  Membership m = assign_members(rates, profiles, spec);
  const std::size_t k = spec.groups.size();
  std::vector<std::vector<double>> samples(k);
  PValueMatrix matrix;
  matrix.metric = metric;
  for (std::size_t g = 0; g < k; ++g) {
    matrix.labels.push_back(group_label(spec, schema, spec.groups[g]));
    if (m.members[g].size() < 2) {
      throw_data("metrics", fmt::format("kruskal-wallis: group '{}' has {} member(s), need >= 2",
                                        matrix.labels.back(), m.members[g].size()));
    }
    for (std::size_t r : m.members[g]) samples[g].push_back(rates[r].value(metric));
  }
  matrix.p_values.assign(k * k, 1.0);
  matrix.h_values.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto result = stats::kruskal_wallis({samples[i], samples[j]});
      matrix.p_values[i * k + j] = matrix.p_values[j * k + i] = result.p_value;
      matrix.h_values[i * k + j] = matrix.h_values[j * k + i] = result.h;
    }
  }
  return matrix;
}

int significance_level(double p) {
  if (std::isnan(p)) return 0;
  return (p < 0.1 ? 1 : 0) + (p < 0.05 ? 1 : 0) + (p < 0.01 ? 1 : 0);
}

}  // namespace fairaudit
