#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fairaudit::stats {

/// Column-major design matrix. Column 0 is the all-ones intercept; the
/// remaining columns are encoded explanatory variables.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  /// Allocates rows x column_names.size() zeros with column 0 set to 1.
  DesignMatrix(std::vector<std::string> row_ids, std::vector<std::string> column_names);

  std::size_t rows() const { return row_ids_.size(); }
  std::size_t cols() const { return column_names_.size(); }
  double& at(std::size_t row, std::size_t col) { return data_[col * rows() + row]; }
  double at(std::size_t row, std::size_t col) const { return data_[col * rows() + row]; }
  std::span<const double> column(std::size_t col) const {
    return {data_.data() + col * rows(), rows()};
  }
  std::span<double> column(std::size_t col) { return {data_.data() + col * rows(), rows()}; }

  const std::vector<std::string>& column_names() const { return column_names_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }

  /// Copy restricted to the given columns (order preserved as given).
  DesignMatrix select_columns(std::span<const std::size_t> keep) const;
  /// Copy restricted to the given rows.
  DesignMatrix select_rows(std::span<const std::size_t> keep) const;

  /// Checks finiteness, unique names, and the intercept column.
  void validate() const;

 private:
  std::vector<std::string> row_ids_;
  std::vector<std::string> column_names_;
  std::vector<double> data_;
};

struct RegressionFit {
  std::vector<std::string> column_names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  std::vector<double> residuals;
  double residual_sum_squares = 0.0;
  double r_squared = 0.0;    // NaN when the response is constant
  double f_statistic = 0.0;  // NaN when undefined (intercept-only design or constant response)
  double f_p_value = 1.0;
  std::size_t dof_residual = 0;
};

/// Ordinary least squares through a Householder QR factorization. Standard
/// errors come from s^2 diag(R^-1 R^-T). The F test covers every column but
/// the intercept. Rank deficiency (|R_jj| <= 1e-10 max|R_ii|) is a numerical
/// error naming the dependent columns.
RegressionFit fit_ols(const DesignMatrix& design, std::span<const double> y);

}  // namespace fairaudit::stats
