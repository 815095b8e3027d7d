#include "fairaudit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {
namespace {

std::optional<PValueMatrix> try_kruskal(const IndividualRatesResult& rates,
                                        const std::vector<AttributeProfile>& profiles,
                                        const AttributeSchema& schema, const GroupSpec& cells,
                                        Metric metric, std::vector<std::string>& notes) {
  try {
    return kruskal_pairwise(rates.rates, profiles, schema, cells, metric);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kData) throw;
    notes.push_back(fmt::format("kruskal-wallis {} skipped: {}", metric_name(metric), e.what()));
    return std::nullopt;
  }
}

}  // namespace

std::vector<ExpectationCheck> check_expectations(const OperatingPointAudit& audit,
                                                 const AttributeSchema& schema,
                                                 const std::vector<SignExpectation>& expectations) {
  std::vector<ExpectationCheck> out;
  const auto& groups = audit.groups.groups;
  auto find = [&](const GroupKey& key) -> const GroupRates* {
    for (const auto& g : groups) {
      if (g.key == key) return &g;
    }
    return nullptr;
  };
  for (const auto& x : expectations) {
    ExpectationCheck check;
    check.group_i = group_label(audit.groups.spec, schema, x.group_i);
    check.group_j = group_label(audit.groups.spec, schema, x.group_j);
    check.expected_sign = x.sign;
    const GroupRates* gi = find(x.group_i);
    const GroupRates* gj = find(x.group_j);
    if (gi != nullptr && gj != nullptr && gi->defined() && gj->defined()) {
      check.delta_far = gi->far - gj->far;
      check.observed_sign = (check.delta_far > 0) - (check.delta_far < 0);
    } else {
      check.delta_far = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(check));
  }
  return out;
}

AuditBundle run_audit(const Cohort& cohort, const AttributeSchema& schema, const TrialSet& scored,
                      const AnalysisOptions& options) {
  if (options.policies.empty()) throw_usage("audit", "no threshold policy given");
  AuditBundle bundle;
  bundle.pair_seed = scored.seed;
  bundle.group_by = options.group_by;
  bundle.counts.identities = cohort.identities().size();
  bundle.counts.images = cohort.records().size();
  for (const auto& id : scored.identities) {
    for (const auto& p : id.pairs) {
      ++(p.label == TrialLabel::kGenuine ? bundle.counts.genuine_pairs
                                         : bundle.counts.impostor_pairs);
    }
  }
  bundle.skipped_identities = scored.skipped_identities;
  bundle.unattributed_images = cohort.unattributed_images();
  bundle.notes.push_back("no multiple-comparison correction applied to Kruskal-Wallis p-values");
  if (options.encoding.standardize) {
    bundle.notes.push_back("explanatory columns z-scored with the sample standard deviation");
  }

  const auto profiles = aggregate_profiles(cohort, schema);
  const GroupSpec spec = make_group_spec(schema, options.group_by, true);
  const GroupSpec cells = make_group_spec(schema, options.group_by, false);
  const RocTable roc = sweep_rates(scored);

  std::vector<ThresholdPolicy> seen;
  for (const auto& policy : options.policies) {
    if (std::find(seen.begin(), seen.end(), policy) != seen.end()) continue;
    seen.push_back(policy);
    OperatingPointAudit audit;
    audit.operating_point = calibrate(roc, policy);
    audit.rates = individual_rates(scored, audit.operating_point.tau, options.threads);
    audit.groups = group_rates(audit.rates.rates, profiles, schema, spec);
    audit.deltas = fairness_deltas(audit.groups.groups, disjoint_group_pairs(audit.groups.groups));
    audit.kruskal_far = try_kruskal(audit.rates, profiles, schema, cells, Metric::kFar, audit.notes);
    audit.kruskal_frr = try_kruskal(audit.rates, profiles, schema, cells, Metric::kFrr, audit.notes);
    if (options.explain) {
      for (Metric m : options.dependents) {
        audit.explanations.push_back(
            explain(profiles, schema, audit.rates, m, audit.operating_point, options.encoding));
      }
    }
    bundle.operating_points.push_back(std::move(audit));
  }
  return bundle;
}

}  // namespace fairaudit
