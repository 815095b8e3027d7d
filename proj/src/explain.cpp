#include "fairaudit/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {
namespace {

struct ColumnPlan {
  std::string name;
  std::size_t variable = 0;
  std::optional<int> indicator_level;  // set for categorical indicators
};

bool is_constant(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [&](double v) { return v == values.front(); });
}

std::vector<ColumnPlan> plan_columns(const AttributeSchema& schema, const EncodingConfig& config) {
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < schema.size(); ++v) {
    if (schema.is_protected(v)) order.push_back(v);
  }
  for (std::size_t v = 0; v < schema.size(); ++v) {
    if (!schema.is_protected(v)) order.push_back(v);
  }
  std::vector<ColumnPlan> plan;
  for (std::size_t v : order) {
    const Variable& var = schema.at(v);
    if (var.kind.tag != KindTag::kCategorical) {
      plan.push_back({var.name, v, std::nullopt});
      continue;
    }
    const auto& levels = var.kind.levels;
    std::size_t reference = 0;
    if (auto it = config.reference_levels.find(var.name); it != config.reference_levels.end()) {
      auto found = std::find(levels.begin(), levels.end(), it->second);
      if (found == levels.end()) {
        throw_usage("explain", fmt::format("reference level '{}' is not a level of '{}'",
                                           it->second, var.name));
      }
      reference = static_cast<std::size_t>(found - levels.begin());
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (l == reference) continue;
      plan.push_back({fmt::format("{}={}", var.name, levels[l]), v, static_cast<int>(l)});
    }
  }
  return plan;
}

}  // namespace

DesignBuild build_design(std::span<const AttributeProfile> profiles,
                         const AttributeSchema& schema, const EncodingConfig& config) {
  const std::vector<ColumnPlan> plan = plan_columns(schema, config);
  DesignBuild build;
  std::vector<const AttributeProfile*> complete;
  for (const auto& profile : profiles) {
    std::vector<std::string> missing;
    for (std::size_t v = 0; v < schema.size(); ++v) {
      if (!profile.values.at(v)) missing.push_back(schema.at(v).name);
    }
    if (missing.empty()) {
      complete.push_back(&profile);
    } else {
      build.excluded.push_back(
          {profile.identity_id, fmt::format("missing {}", fmt::join(missing, ", "))});
    }
  }
  const std::size_t columns = plan.size() + 1;
  if (complete.size() < columns + 1) {
    throw_data("explain", fmt::format("{} complete case(s) for {} design columns; need at least {}",
                                      complete.size(), columns, columns + 1));
  }

  std::vector<std::string> row_ids;
  for (const auto* p : complete) row_ids.push_back(p->identity_id);
  std::vector<std::string> names{"intercept"};
  for (const auto& c : plan) names.push_back(c.name);
  stats::DesignMatrix design(std::move(row_ids), std::move(names));
  for (std::size_t r = 0; r < complete.size(); ++r) {
    for (std::size_t c = 0; c < plan.size(); ++c) {
      const double value = *complete[r]->values[plan[c].variable];
      design.at(r, c + 1) = plan[c].indicator_level
                                ? (static_cast<int>(value) == *plan[c].indicator_level ? 1.0 : 0.0)
                                : value;
    }
  }
  for (std::size_t v = 0; v < schema.size(); ++v) {
    const auto& var = schema.at(v);
    if (var.kind.tag == KindTag::kCategorical) {
      std::string reference = var.kind.levels.front();
      if (auto it = config.reference_levels.find(var.name); it != config.reference_levels.end()) {
        reference = it->second;
      }
      build.notes.push_back(fmt::format("{} dummy-encoded with {} indicator(s), reference level {}",
                                        var.name, var.kind.levels.size() - 1, reference));
    }
  }
  if (config.standardize) {
    for (std::size_t c = 1; c < design.cols(); ++c) {
      auto col = design.column(c);
      if (is_constant(col)) continue;
      const double n = static_cast<double>(col.size());
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / n;
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / (n - 1.0));
      for (double& v : col) v = (v - mean) / sd;
    }
    build.notes.push_back("explanatory columns z-score standardized");
  }
  build.design = std::move(design);
  return build;
}

std::vector<double> dependent_vector(std::span<const IndividualRates> rates,
                                     std::span<const std::string> row_ids, Metric dependent) {
  std::unordered_map<std::string_view, const IndividualRates*> by_id;
  for (const auto& r : rates) by_id.emplace(r.identity_id, &r);
  std::vector<double> y;
  y.reserve(row_ids.size());
  for (const auto& id : row_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw_data("explain", fmt::format("no rates for identity '{}'", id));
    y.push_back(it->second->value(dependent));
  }
  return y;
}

std::vector<ColumnCorrelation> run_correlations(const stats::DesignMatrix& design,
                                                std::span<const double> y) {
  if (design.rows() < 3) {
    throw_data("explain", fmt::format("correlation needs >= 3 individuals, have {}",
                                      design.rows()));
  }
  if (y.size() != design.rows()) throw_data("explain", "dependent length differs from design");
  const bool y_constant = is_constant(y);
  std::vector<ColumnCorrelation> out;
  for (std::size_t c = 1; c < design.cols(); ++c) {
    ColumnCorrelation entry{design.column_names()[c], std::nullopt, {}};
    if (is_constant(design.column(c))) {
      entry.note = "constant column";
    } else if (y_constant) {
      entry.note = "constant dependent";
    } else {
      entry.result = stats::pearson(design.column(c), y);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

RegressionOutcome run_regression(const stats::DesignMatrix& design, std::span<const double> y) {
  RegressionOutcome outcome;
  std::vector<std::size_t> keep{0};
  for (std::size_t c = 1; c < design.cols(); ++c) {
    if (is_constant(design.column(c))) {
      outcome.dropped_columns.push_back(design.column_names()[c]);
    } else {
      keep.push_back(c);
    }
  }
  if (outcome.dropped_columns.empty()) {
    outcome.fit = stats::fit_ols(design, y);
  } else {
    outcome.fit = stats::fit_ols(design.select_columns(keep), y);
  }
  return outcome;
}

ExplanatoryReport explain(std::span<const AttributeProfile> profiles,
                          const AttributeSchema& schema, const IndividualRatesResult& rates,
                          Metric dependent, const OperatingPoint& op,
                          const EncodingConfig& config) {
  ExplanatoryReport report;
  report.dependent = dependent;
  report.operating_point = op;
  report.standardized = config.standardize;
  report.excluded = rates.excluded;

  std::unordered_set<std::string_view> with_rates;
  for (const auto& r : rates.rates) with_rates.insert(r.identity_id);
  std::unordered_set<std::string_view> rate_excluded;
  for (const auto& e : rates.excluded) rate_excluded.insert(e.identity_id);
  std::vector<AttributeProfile> eligible;
  for (const auto& profile : profiles) {
    if (with_rates.contains(profile.identity_id)) {
      eligible.push_back(profile);
    } else if (!rate_excluded.contains(profile.identity_id)) {
      report.excluded.push_back({profile.identity_id, "no trials"});
    }
  }
  DesignBuild build = build_design(eligible, schema, config);
  report.excluded.insert(report.excluded.end(), build.excluded.begin(), build.excluded.end());
  std::sort(report.excluded.begin(), report.excluded.end(),
            [](const Exclusion& a, const Exclusion& b) { return a.identity_id < b.identity_id; });
  report.notes = std::move(build.notes);
  report.individuals = build.design.rows();

  const std::vector<double> y = dependent_vector(rates.rates, build.design.row_ids(), dependent);
  report.correlations = run_correlations(build.design, y);
  report.regression = run_regression(build.design, y);
  return report;
}

}  // namespace fairaudit
