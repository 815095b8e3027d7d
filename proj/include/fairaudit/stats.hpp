#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fairaudit::stats {

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, t = r sqrt((n-2)/(1-r^2)) on n-2 dof
  std::size_t n = 0;
};

/// Sample Pearson correlation with its two-sided p-value. Numerical error for
/// mismatched lengths, n < 3, or a constant input.
CorrelationResult pearson(std::span<const double> x, std::span<const double> y);

struct KruskalWallisResult {
  double h = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
};

/// Kruskal-Wallis H with mid-ranks and tie correction; p from chi-square on
/// k-1 dof. When every observation is tied, H = 0 and p = 1.
KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& samples);

/// Mid-ranks (1-based) of `values`, ties sharing their average rank.
std::vector<double> mid_ranks(std::span<const double> values);

}  // namespace fairaudit::stats
