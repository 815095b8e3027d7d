#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef FAIRAUDIT_TEST_TMP
#define FAIRAUDIT_TEST_TMP "test_tmp"
#endif

namespace oracle {
namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr long double kNodes[4] = {0.1834346424956498049394761423601840L,
                                   0.5255324099163289858177390491892463L,
                                   0.7966664774136267395915539364758304L,
                                   0.9602898564975362316835608685694730L};
constexpr long double kWeights[4] = {0.3626837833783619829651504492771957L,
                                     0.3137066458778872873379622019866013L,
                                     0.2223810344533744705443559944919261L,
                                     0.1012285362903762591525313543099622L};

template <typename F>
long double integrate(F f, long double lo, long double hi, int panels) {
  const long double h = (hi - lo) / panels;
  long double total = 0.0L;
  for (int p = 0; p < panels; ++p) {
    const long double mid = lo + (p + 0.5L) * h;
    long double acc = 0.0L;
    for (int k = 0; k < 4; ++k) {
      const long double dx = 0.5L * h * kNodes[k];
      acc += kWeights[k] * (f(mid - dx) + f(mid + dx));
    }
    total += 0.5L * h * acc;
  }
  return total;
}

}  // namespace

long double student_t_two_sided(long double t, int dof) {
  const long double nu = dof;
  const long double log_norm = std::lgamma((nu + 1.0L) / 2.0L) - std::lgamma(nu / 2.0L) -
                               0.5L * std::log(nu * 3.141592653589793238462643383279503L);
  auto density = [&](long double x) {
    return std::exp(log_norm - 0.5L * (nu + 1.0L) * std::log1p(x * x / nu));
  };
  const long double mass = integrate(density, 0.0L, std::fabs(t), 4000);
  return 1.0L - 2.0L * mass;
}

long double chi_square_sf(long double x, int dof) {
  const long double k = dof;
  const long double log_norm = -0.5L * k * std::log(2.0L) - std::lgamma(0.5L * k);
  auto integrand = [&](long double u) {
    if (u == 0.0L) return dof == 1 ? 2.0L * std::exp(log_norm) : 0.0L;
    return 2.0L * std::exp(log_norm + (k - 1.0L) * std::log(u) - 0.5L * u * u);
  };
  return 1.0L - integrate(integrand, 0.0L, std::sqrt(x), 4000);
}

long double incomplete_beta(long double x, long double a, long double b) {
  if (x <= 0.0L) return 0.0L;
  if (x >= 1.0L) return 1.0L;
  if (x > 0.5L) return 1.0L - incomplete_beta(1.0L - x, b, a);
  const long double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const long double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta) / a;
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int n = 0; n < 100000; ++n) {
    term *= (a + b + n) / (a + 1.0L + n) * x;
    sum += term;
    if (term < 1e-22L * sum) break;
  }
  return front * sum;
}

double kruskal_h_no_ties(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  auto rank_sum = [&](const std::vector<double>& g) {
    double s = 0.0;
    for (double v : g) {
      s += static_cast<double>(std::lower_bound(all.begin(), all.end(), v) - all.begin()) + 1.0;
    }
    return s;
  };
  const double n = static_cast<double>(all.size());
  const double ra = rank_sum(a);
  const double rb = rank_sum(b);
  return 12.0 / (n * (n + 1.0)) *
             (ra * ra / static_cast<double>(a.size()) + rb * rb / static_cast<double>(b.size())) -
         3.0 * (n + 1.0);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::path(FAIRAUDIT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string tree_bytes(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    out += std::filesystem::relative(f, dir).string() + "\n" + buf.str();
  }
  return out;
}

}  // namespace oracle
