#include "fairaudit/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fairaudit/error.hpp"
#include "fairaudit/special.hpp"

namespace fairaudit::stats {
namespace {

constexpr double kRankTolerance = 1e-10;

}  // namespace

DesignMatrix::DesignMatrix(std::vector<std::string> row_ids, std::vector<std::string> column_names)
    : row_ids_(std::move(row_ids)),
      column_names_(std::move(column_names)),
      data_(row_ids_.size() * column_names_.size(), 0.0) {
  if (!column_names_.empty()) {
    std::fill(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(rows()), 1.0);
  }
}

DesignMatrix DesignMatrix::select_columns(std::span<const std::size_t> keep) const {
  std::vector<std::string> names;
  for (std::size_t c : keep) names.push_back(column_names_.at(c));
  DesignMatrix out(row_ids_, std::move(names));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto src = column(keep[k]);
    std::copy(src.begin(), src.end(), out.column(k).begin());
  }
  return out;
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> keep) const {
  std::vector<std::string> ids;
  for (std::size_t r : keep) ids.push_back(row_ids_.at(r));
  DesignMatrix out(std::move(ids), column_names_);
  for (std::size_t c = 0; c < cols(); ++c) {
    for (std::size_t k = 0; k < keep.size(); ++k) out.at(k, c) = at(keep[k], c);
  }
  return out;
}

void DesignMatrix::validate() const {
  if (cols() == 0) throw_data("stats", "design matrix has no columns");
  std::set<std::string> names(column_names_.begin(), column_names_.end());
  if (names.size() != column_names_.size()) throw_data("stats", "duplicate design column names");
  for (double v : data_) {
    if (!std::isfinite(v)) throw_data("stats", "design matrix has a non-finite entry");
  }
  for (double v : column(0)) {
    if (v != 1.0) throw_data("stats", "first design column must be the all-ones intercept");
  }
}

RegressionFit fit_ols(const DesignMatrix& design, std::span<const double> y) {
  design.validate();
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (y.size() != n) {
    throw_data("stats", fmt::format("response has {} values, design has {} rows", y.size(), n));
  }
  if (n <= p) {
    throw_numerical("stats", fmt::format("need more rows than columns ({} rows, {} columns)", n, p));
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw_data("stats", "response has a non-finite value");
  }

  // In-place Householder: after the loop `a` holds R in its upper triangle
  // and qty holds Q^T y.
  std::vector<double> a(n * p);
  for (std::size_t c = 0; c < p; ++c) {
    const auto col = design.column(c);
    std::copy(col.begin(), col.end(), a.begin() + static_cast<std::ptrdiff_t>(c * n));
  }
  std::vector<double> qty(y.begin(), y.end());
  std::vector<double> diag(p, 0.0);
  std::vector<double> v(n);
  for (std::size_t k = 0; k < p; ++k) {
    double* colk = a.data() + k * n;
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm = std::hypot(norm, colk[i]);
    if (norm == 0.0) {
      diag[k] = 0.0;
      continue;
    }
    const double alpha = colk[k] > 0.0 ? -norm : norm;
    for (std::size_t i = k; i < n; ++i) v[i] = colk[i];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
    auto reflect = [&](double* target) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i] * target[i];
      const double scale = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) target[i] -= scale * v[i];
    };
    for (std::size_t c = k; c < p; ++c) reflect(a.data() + c * n);
    reflect(qty.data());
    diag[k] = colk[k];
  }

  double max_diag = 0.0;
  for (double d : diag) max_diag = std::max(max_diag, std::fabs(d));
  std::vector<std::string> dependent;
  for (std::size_t k = 0; k < p; ++k) {
    if (std::fabs(diag[k]) <= kRankTolerance * max_diag) {
      dependent.push_back(design.column_names()[k]);
    }
  }
  if (!dependent.empty()) {
    throw_numerical("stats", fmt::format("rank-deficient design; linearly dependent column(s): {}",
                                         fmt::join(dependent, ", ")));
  }
  auto r_at = [&](std::size_t row, std::size_t col) { return a[col * n + row]; };

  RegressionFit fit;
  fit.column_names = design.column_names();
  fit.coefficients.assign(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double s = qty[k];
    for (std::size_t j = k + 1; j < p; ++j) s -= r_at(k, j) * fit.coefficients[j];
    fit.coefficients[k] = s / r_at(k, k);
  }

  // R^-1 (upper triangular), column by column.
  std::vector<double> rinv(p * p, 0.0);
  for (std::size_t col = 0; col < p; ++col) {
    for (std::size_t k = col + 1; k-- > 0;) {
      double s = (k == col) ? 1.0 : 0.0;
      for (std::size_t j = k + 1; j <= col; ++j) s -= r_at(k, j) * rinv[col * p + j];
      rinv[col * p + k] = s / r_at(k, k);
    }
  }

  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0.0;
    for (std::size_t c = 0; c < p; ++c) pred += design.at(i, c) * fit.coefficients[c];
    fit.residuals[i] = y[i] - pred;
  }
  fit.residual_sum_squares = 0.0;
  for (double e : fit.residuals) fit.residual_sum_squares += e * e;
  fit.dof_residual = n - p;
  const double dof = static_cast<double>(fit.dof_residual);
  const double sigma2 = fit.residual_sum_squares / dof;

  fit.std_errors.resize(p);
  fit.t_stats.resize(p);
  fit.p_values.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    double row_norm2 = 0.0;
    for (std::size_t col = j; col < p; ++col) row_norm2 += rinv[col * p + j] * rinv[col * p + j];
    fit.std_errors[j] = std::sqrt(sigma2 * row_norm2);
    const double gamma = fit.coefficients[j];
    if (fit.std_errors[j] > 0.0) {
      fit.t_stats[j] = gamma / fit.std_errors[j];
      fit.p_values[j] = student_t_sf_two_sided(fit.t_stats[j], dof);
    } else if (gamma == 0.0) {
      fit.t_stats[j] = 0.0;
      fit.p_values[j] = 1.0;
    } else {
      fit.t_stats[j] = std::copysign(std::numeric_limits<double>::infinity(), gamma);
      fit.p_values[j] = 0.0;
    }
  }

  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double total = 0.0;
  if (std::any_of(y.begin(), y.end(), [&](double v_y) { return v_y != y.front(); })) {
    for (double v_y : y) total += (v_y - mean_y) * (v_y - mean_y);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  fit.r_squared = total > 0.0 ? 1.0 - fit.residual_sum_squares / total : nan;
  const double model_dof = static_cast<double>(p - 1);
  if (p > 1 && total > 0.0 && fit.residual_sum_squares > 0.0) {
    const double explained = std::max(0.0, total - fit.residual_sum_squares);
    fit.f_statistic = (explained / model_dof) / sigma2;
    fit.f_p_value = f_sf(fit.f_statistic, model_dof, dof);
  } else if (p > 1 && total > 0.0) {
    fit.f_statistic = std::numeric_limits<double>::infinity();
    fit.f_p_value = 0.0;
  } else {
    fit.f_statistic = nan;
    fit.f_p_value = nan;
  }
  return fit;
}

}  // namespace fairaudit::stats
