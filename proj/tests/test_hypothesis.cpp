#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairaudit/error.hpp"
#include "fairaudit/random.hpp"
#include "fairaudit/stats.hpp"
#include "oracles.hpp"

using namespace fairaudit;
using namespace fairaudit::stats;

TEST_CASE("pearson reference value") {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{1, 3, 2, 4};
  const auto r = pearson(x, y);
  CHECK(r.r == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(r.n == 4);
  // t = 0.8 sqrt(2 / 0.36) on 2 dof.
  CHECK(r.p_value == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("pearson edge cases") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y(x);
  for (auto& v : y) v = 3.0 * v - 2.0;
  const auto perfect = pearson(x, y);
  CHECK(perfect.r == doctest::Approx(1.0));
  CHECK(perfect.p_value == 0.0);
  const std::vector<double> constant{2, 2, 2, 2, 2};
  CHECK_THROWS_AS(pearson(x, constant), Error);
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{2, 1}), Error);
  CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2, 3}), Error);
}

TEST_CASE("pearson is invariant under affine maps and bounded") {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(40);
    std::vector<double> x(n), y(n), x2(n);
    const double scale = rng.uniform(0.1, 10.0);
    const double shift = rng.uniform(-5.0, 5.0);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.normal();
      y[i] = 0.5 * x[i] + rng.normal();
      x2[i] = scale * x[i] + shift;
    }
    const auto a = pearson(x, y);
    const auto b = pearson(x2, y);
    CHECK(std::fabs(a.r) <= 1.0);
    CHECK(a.r == doctest::Approx(b.r).epsilon(1e-10));
    CHECK(a.p_value >= 0.0);
    CHECK(a.p_value <= 1.0);
    CHECK(pearson(y, x).r == doctest::Approx(a.r).epsilon(1e-13));
  }
}

TEST_CASE("kruskal-wallis reference value") {
  const std::vector<std::vector<double>> groups{{1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}};
  const auto kw = kruskal_wallis(groups);
  CHECK(kw.h == doctest::Approx(75.0 / 11.0).epsilon(1e-13));
  CHECK(kw.dof == 1);
  CHECK(kw.p_value == doctest::Approx(0.0090234388180803275).epsilon(1e-10));
}

TEST_CASE("kruskal-wallis ties and degenerate input") {
  const auto all_tied = kruskal_wallis({{3, 3, 3}, {3, 3}});
  CHECK(all_tied.h == 0.0);
  CHECK(all_tied.p_value == 1.0);
  // Ties: {1,2,2} vs {2,3,3}; mid-ranks 1,3,3 | 3,5.5,5.5, correction 1 - (24+6)/(216-6).
  const auto tied = kruskal_wallis({{1, 2, 2}, {2, 3, 3}});
  const double raw = 12.0 / 42.0 * (49.0 / 3.0 + 196.0 / 3.0) - 21.0;
  CHECK(tied.h == doctest::Approx(raw / (1.0 - 30.0 / 210.0)).epsilon(1e-12));
  CHECK_THROWS_AS(kruskal_wallis({{1, 2, 3}}), Error);
  CHECK_THROWS_AS(kruskal_wallis({{1, 2}, {}}), Error);
  CHECK_THROWS_AS(kruskal_wallis({{1}, {2}}), Error);
  CHECK_THROWS_AS(kruskal_wallis({{1, NAN}, {2, 3}}), Error);
}

TEST_CASE("kruskal-wallis matches the rank-sum formula and is permutation invariant") {
  Rng rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(2 + rng.uniform_index(20)), b(2 + rng.uniform_index(20));
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = rng.normal() + 0.5;
    const auto kw = kruskal_wallis({a, b});
    CHECK(kw.h == doctest::Approx(oracle::kruskal_h_no_ties(a, b)).epsilon(1e-10));
    std::reverse(a.begin(), a.end());
    const auto swapped = kruskal_wallis({b, a});
    CHECK(swapped.h == doctest::Approx(kw.h).epsilon(1e-12));
    CHECK(kw.h >= 0.0);
  }
}

TEST_CASE("mid ranks") {
  const std::vector<double> v{10, 20, 20, 5};
  const auto r = mid_ranks(v);
  CHECK(r == std::vector<double>{2.0, 3.5, 3.5, 1.0});
  Rng rng(3);
  std::vector<double> w(50);
  for (auto& x : w) x = static_cast<double>(rng.uniform_index(8));
  const auto rw = mid_ranks(w);
  CHECK(std::accumulate(rw.begin(), rw.end(), 0.0) == doctest::Approx(50.0 * 51.0 / 2.0));
}
