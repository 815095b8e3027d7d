#include "fairaudit/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit::stats {
namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 100000;

// Stirling series is used once the argument is at least this large.
constexpr double kStirlingFrom = 16.0;

// B_{2k} / (2k (2k-1)), k = 1..10
constexpr std::array<double, 10> kStirlingCoefficients{
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

double stirling(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double series = 0.0;
  double power = inv;
  for (double c : kStirlingCoefficients) {
    series += c * power;
    power *= inv2;
  }
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

double beta_continued_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw_numerical("stats", fmt::format("incomplete beta did not converge (a={}, b={}, x={})", a,
                                       b, x));
}

double gamma_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n <= kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) {
      return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
    }
  }
  throw_numerical("stats", fmt::format("incomplete gamma series did not converge (a={}, x={})",
                                       a, x));
}

double gamma_continued_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) {
      return std::exp(-x + a * std::log(x) - ln_gamma(a)) * h;
    }
  }
  throw_numerical("stats", fmt::format("incomplete gamma fraction did not converge (a={}, x={})",
                                       a, x));
}

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw_numerical("stats", fmt::format("ln_gamma domain error: x = {}", x));
  }
  if (x >= kStirlingFrom) return stirling(x);
  // Shift up with Gamma(x) = Gamma(x + n) / (x (x+1) ... (x+n-1)).
  double product = 1.0;
  double shifted = x;
  while (shifted < kStirlingFrom) {
    product *= shifted;
    shifted += 1.0;
  }
  return stirling(shifted) - std::log(product);
}

double reg_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw_numerical("stats",
                    fmt::format("incomplete beta domain error: a={}, b={}, x={}", a, b, x));
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double reg_lower_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw_numerical("stats", fmt::format("incomplete gamma domain error: a={}, x={}", a, x));
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double reg_upper_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw_numerical("stats", fmt::format("incomplete gamma domain error: a={}, x={}", a, x));
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_continued_fraction(a, x);
}

double student_t_sf_two_sided(double t, double dof) {
  if (!(dof >= 1.0)) {
    throw_numerical("stats", fmt::format("student t: dof must be >= 1, got {}", dof));
  }
  if (std::isnan(t)) throw_numerical("stats", "student t: t is NaN");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double x = dof / (dof + t * t);
  return std::clamp(reg_incomplete_beta(0.5 * dof, 0.5, x), 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
  if (!(dof > 0.0) || !(x >= 0.0)) {
    throw_numerical("stats", fmt::format("chi-square domain error: x={}, dof={}", x, dof));
  }
  return std::clamp(reg_upper_gamma(0.5 * dof, 0.5 * x), 0.0, 1.0);
}

double f_sf(double f, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0) || std::isnan(f)) {
    throw_numerical("stats", fmt::format("F domain error: f={}, d1={}, d2={}", f, d1, d2));
  }
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return std::clamp(reg_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f)), 0.0, 1.0);
}

}  // namespace fairaudit::stats
