#include <doctest.h>

#include <cmath>

#include "fairaudit/error.hpp"
#include "fairaudit/random.hpp"
#include "fairaudit/regression.hpp"

using namespace fairaudit;
using namespace fairaudit::stats;

namespace {

DesignMatrix design_with(std::size_t n, std::size_t extra_cols) {
  std::vector<std::string> rows, cols{"intercept"};
  for (std::size_t i = 0; i < n; ++i) rows.push_back("r" + std::to_string(i));
  for (std::size_t c = 0; c < extra_cols; ++c) cols.push_back("x" + std::to_string(c));
  return DesignMatrix(rows, cols);
}

// Normal equations solved by Gauss-Jordan in long double.
std::vector<double> normal_equations(const DesignMatrix& x, const std::vector<double>& y) {
  const std::size_t p = x.cols();
  std::vector<std::vector<long double>> m(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t r = 0; r < x.rows(); ++r) m[i][j] += (long double)x.at(r, i) * x.at(r, j);
    }
    for (std::size_t r = 0; r < x.rows(); ++r) m[i][p] += (long double)x.at(r, i) * y[r];
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    }
    std::swap(m[c], m[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k <= p; ++k) m[r][k] -= f * m[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t i = 0; i < p; ++i) beta[i] = static_cast<double>(m[i][p] / m[i][i]);
  return beta;
}

}  // namespace

TEST_CASE("simple regression by hand") {
  auto x = design_with(5, 1);
  const std::vector<double> y{2, 4, 5, 4, 5};
  for (std::size_t i = 0; i < 5; ++i) x.at(i, 1) = static_cast<double>(i + 1);
  const auto fit = fit_ols(x, y);
  CHECK(fit.coefficients[0] == doctest::Approx(2.2).epsilon(1e-13));
  CHECK(fit.coefficients[1] == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(fit.residual_sum_squares == doctest::Approx(2.4).epsilon(1e-13));
  CHECK(fit.r_squared == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(fit.std_errors[1] == doctest::Approx(std::sqrt(0.08)).epsilon(1e-13));
  CHECK(fit.dof_residual == 3);
  // With one regressor F = t^2 and the p-values agree.
  CHECK(fit.f_statistic == doctest::Approx(fit.t_stats[1] * fit.t_stats[1]).epsilon(1e-12));
  CHECK(fit.f_p_value == doctest::Approx(fit.p_values[1]).epsilon(1e-10));
}

TEST_CASE("ols agrees with the normal equations") {
  Rng rng(61);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 1 + rng.uniform_index(6);
    const std::size_t n = p + 3 + rng.uniform_index(60);
    auto x = design_with(n, p);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.normal();
      for (std::size_t c = 1; c <= p; ++c) {
        x.at(i, c) = rng.normal() * (1.0 + static_cast<double>(c));
        y[i] += 0.3 * x.at(i, c);
      }
    }
    const auto fit = fit_ols(x, y);
    const auto beta = normal_equations(x, y);
    for (std::size_t c = 0; c <= p; ++c) CHECK(fit.coefficients[c] == doctest::Approx(beta[c]).epsilon(1e-9));
    double rss = 0.0;
    for (double e : fit.residuals) rss += e * e;
    CHECK(rss == doctest::Approx(fit.residual_sum_squares));
    CHECK(fit.r_squared >= 0.0);
    CHECK(fit.r_squared <= 1.0);
  }
}

TEST_CASE("noiseless model recovered exactly") {
  Rng rng(67);
  auto x = design_with(50, 4);
  const std::vector<double> beta{1.5, -2.0, 0.25, 3.0, 0.0};
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    y[i] = beta[0];
    for (std::size_t c = 1; c < 5; ++c) {
      x.at(i, c) = rng.uniform(-1.0, 1.0);
      y[i] += beta[c] * x.at(i, c);
    }
  }
  const auto fit = fit_ols(x, y);
  for (std::size_t c = 0; c < 5; ++c) CHECK(std::fabs(fit.coefficients[c] - beta[c]) < 1e-12);
  CHECK(fit.r_squared == doctest::Approx(1.0));
}

TEST_CASE("rank deficiency names the dependent column") {
  auto x = design_with(10, 2);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) {
    x.at(i, 1) = static_cast<double>(i);
    x.at(i, 2) = 2.0 * static_cast<double>(i) + 1.0;
    y[i] = static_cast<double>(i % 3);
  }
  try {
    fit_ols(x, y);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumerical);
    CHECK(std::string(e.what()).find("x1") != std::string::npos);
  }
}

TEST_CASE("degenerate responses and shapes") {
  auto x = design_with(6, 1);
  for (std::size_t i = 0; i < 6; ++i) x.at(i, 1) = static_cast<double>(i);
  const auto flat = fit_ols(x, std::vector<double>(6, 4.0));
  CHECK(std::isnan(flat.r_squared));
  CHECK(std::isnan(flat.f_statistic));
  CHECK(flat.coefficients[1] == doctest::Approx(0.0).epsilon(1e-12));

  auto intercept_only = design_with(4, 0);
  const auto mean_fit = fit_ols(intercept_only, std::vector<double>{1, 2, 3, 6});
  CHECK(mean_fit.coefficients[0] == doctest::Approx(3.0));
  CHECK(std::isnan(mean_fit.f_statistic));

  auto small = design_with(2, 1);
  CHECK_THROWS_AS(fit_ols(small, std::vector<double>{1, 2}), Error);
  CHECK_THROWS_AS(fit_ols(x, std::vector<double>{1, 2}), Error);
  std::vector<double> bad(6, 1.0);
  bad[2] = NAN;
  CHECK_THROWS_AS(fit_ols(x, bad), Error);
}

TEST_CASE("design matrix validation and selection") {
  auto x = design_with(3, 2);
  x.at(1, 2) = 7.0;
  CHECK_NOTHROW(x.validate());
  const std::vector<std::size_t> keep{0, 2};
  const auto sub = x.select_columns(keep);
  CHECK(sub.cols() == 2);
  CHECK(sub.column_names()[1] == "x1");
  CHECK(sub.at(1, 1) == 7.0);
  const std::vector<std::size_t> rows{1};
  CHECK(x.select_rows(rows).at(0, 2) == 7.0);
  x.at(0, 0) = 2.0;
  CHECK_THROWS_AS(x.validate(), Error);
  auto dup = DesignMatrix({"a", "b"}, {"intercept", "z", "z"});
  CHECK_THROWS_AS(dup.validate(), Error);
}

TEST_CASE("noisy coefficients fall within 3 standard errors at the nominal rate") {
  const std::vector<double> beta{0.5, -1.0, 2.0, 0.0, 0.75};
  std::size_t within = 0, total = 0;
  for (std::uint64_t run = 0; run < 200; ++run) {
    Rng rng(mix_seed(71, run));
    auto x = design_with(200, 4);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
      y[i] = beta[0];
      for (std::size_t c = 1; c < 5; ++c) {
        x.at(i, c) = rng.normal();
        y[i] += beta[c] * x.at(i, c);
      }
      y[i] += 0.1 * rng.normal();
    }
    const auto fit = fit_ols(x, y);
    for (std::size_t c = 0; c < 5; ++c) {
      ++total;
      if (std::fabs(fit.coefficients[c] - beta[c]) <= 3.0 * fit.std_errors[c]) ++within;
    }
  }
  CHECK(static_cast<double>(within) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("pure-noise response: global F-test rarely rejects") {
  int above = 0;
  for (std::uint64_t run = 0; run < 200; ++run) {
    Rng rng(mix_seed(72, run));
    auto x = design_with(120, 6);
    std::vector<double> y(120);
    for (std::size_t i = 0; i < 120; ++i) {
      for (std::size_t c = 1; c < 7; ++c) x.at(i, c) = rng.uniform();
      y[i] = rng.normal();
    }
    if (fit_ols(x, y).f_p_value > 0.05) ++above;
  }
  CHECK(above >= 180);
}
