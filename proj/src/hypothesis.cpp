#include "fairaudit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fairaudit/error.hpp"
#include "fairaudit/special.hpp"

namespace fairaudit::stats {

CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw_numerical("stats", fmt::format("pearson: length mismatch {} vs {}", x.size(), y.size()));
  }
  const std::size_t n = x.size();
  if (n < 3) throw_numerical("stats", fmt::format("pearson: need n >= 3, got {}", n));
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw_numerical("stats", "pearson: correlation undefined for a constant vector");
  }
  CorrelationResult result;
  result.n = n;
  result.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  const double one_minus = 1.0 - result.r * result.r;
  if (one_minus <= 0.0) {
    result.p_value = 0.0;
  } else {
    const double t = result.r * std::sqrt(dof / one_minus);
    result.p_value = student_t_sf_two_sided(t, dof);
  }
  return result;
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

KruskalWallisResult kruskal_wallis(const std::vector<std::vector<double>>& samples) {
  if (samples.size() < 2) {
    throw_data("stats", fmt::format("kruskal-wallis: need >= 2 groups, got {}", samples.size()));
  }
  std::vector<double> pooled;
  std::vector<std::size_t> group_of;
  for (std::size_t g = 0; g < samples.size(); ++g) {
    if (samples[g].empty()) {
      throw_data("stats", fmt::format("kruskal-wallis: group {} is empty", g));
    }
    for (double v : samples[g]) {
      if (!std::isfinite(v)) throw_data("stats", "kruskal-wallis: non-finite observation");
      pooled.push_back(v);
      group_of.push_back(g);
    }
  }
  const std::size_t total = pooled.size();
  if (total < 3) {
    throw_data("stats", fmt::format("kruskal-wallis: need N >= 3, got {}", total));
  }
  KruskalWallisResult result;
  result.dof = samples.size() - 1;

  const std::vector<double> ranks = mid_ranks(pooled);
  std::vector<double> rank_sum(samples.size(), 0.0);
  for (std::size_t i = 0; i < total; ++i) rank_sum[group_of[i]] += ranks[i];

  const double n = static_cast<double>(total);
  const double center = 0.5 * (n + 1.0);
  double spread = 0.0;
  for (std::size_t g = 0; g < samples.size(); ++g) {
    const double ng = static_cast<double>(samples[g].size());
    const double dev = rank_sum[g] / ng - center;
    spread += ng * dev * dev;
  }

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  const double correction = 1.0 - tie_sum / (n * n * n - n);
  if (correction <= 0.0) {
    result.h = 0.0;
    result.p_value = 1.0;
    return result;
  }
  result.h = 12.0 / (n * (n + 1.0)) * spread / correction;
  result.p_value = chi_square_sf(result.h, static_cast<double>(result.dof));
  return result;
}

}  // namespace fairaudit::stats
