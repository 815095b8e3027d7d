#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/calibration.hpp"
#include "fairaudit/cohort.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/regression.hpp"
#include "fairaudit/stats.hpp"

namespace fairaudit {

struct EncodingConfig {
  /// Reference level per categorical variable; defaults to the first level.
  std::map<std::string, std::string> reference_levels;
  /// z-score every non-constant explanatory column (sample standard deviation).
  bool standardize = false;
};

struct DesignBuild {
  stats::DesignMatrix design;
  std::vector<Exclusion> excluded;
  std::vector<std::string> notes;
};

/// Encodes complete-case profiles: intercept, protected variables, then the
/// other variables in schema order. Booleans are 0/1, categoricals get k-1
/// indicators named "variable=Level" against the reference level. Data error
/// when fewer than columns + 1 complete cases remain.
DesignBuild build_design(std::span<const AttributeProfile> profiles,
                         const AttributeSchema& schema, const EncodingConfig& config);

/// Per-row dependent values in design row order.
std::vector<double> dependent_vector(std::span<const IndividualRates> rates,
                                     std::span<const std::string> row_ids, Metric dependent);

struct ColumnCorrelation {
  std::string column;
  std::optional<stats::CorrelationResult> result;
  /// Why result is empty ("constant column", "constant dependent").
  std::string note;
};

/// Pearson correlation of every non-intercept column with y.
std::vector<ColumnCorrelation> run_correlations(const stats::DesignMatrix& design,
                                                std::span<const double> y);

struct RegressionOutcome {
  stats::RegressionFit fit;
  std::vector<std::string> dropped_columns;  // constant explanatory columns
};

/// fit_ols after dropping constant explanatory columns.
RegressionOutcome run_regression(const stats::DesignMatrix& design, std::span<const double> y);

struct ExplanatoryReport {
  Metric dependent = Metric::kFar;
  OperatingPoint operating_point;
  std::size_t individuals = 0;
  bool standardized = false;
  std::vector<ColumnCorrelation> correlations;
  RegressionOutcome regression;
  std::vector<Exclusion> excluded;
  std::vector<std::string> notes;
};

/// Correlation and regression of one dependent rate over the complete-case
/// individuals that also have rates at `op`.
ExplanatoryReport explain(std::span<const AttributeProfile> profiles,
                          const AttributeSchema& schema, const IndividualRatesResult& rates,
                          Metric dependent, const OperatingPoint& op,
                          const EncodingConfig& config);

}  // namespace fairaudit
