#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fairaudit/error.hpp"
#include "fairaudit/explain.hpp"
#include "fairaudit/random.hpp"

using namespace fairaudit;

namespace {

std::vector<AttributeProfile> random_profiles(const AttributeSchema& s, std::size_t n, Rng& rng) {
  std::vector<AttributeProfile> out;
  for (std::size_t i = 0; i < n; ++i) {
    AttributeProfile p;
    p.identity_id = fmt::format("id{:04d}", i);
    p.values.resize(s.size());
    for (std::size_t v = 0; v < s.size(); ++v) {
      const auto& kind = s.at(v).kind;
      switch (kind.tag) {
        case KindTag::kCategorical: p.values[v] = static_cast<double>(rng.uniform_index(kind.levels.size())); break;
        case KindTag::kBoolean: p.values[v] = rng.bernoulli(0.4) ? 1.0 : 0.0; break;
        default: p.values[v] = rng.uniform(kind.lo, kind.hi);
      }
    }
    p.coverage.assign(s.size(), 1.0);
    p.image_count = 4;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("design columns for the default schema") {
  const auto s = AttributeSchema::face_default();
  Rng rng(91);
  const auto profiles = random_profiles(s, 60, rng);
  const auto build = build_design(profiles, s, {});
  const auto& names = build.design.column_names();
  REQUIRE(names.size() == 22);
  CHECK(names[0] == "intercept");
  CHECK(names[1] == "gender=Woman");
  CHECK(names[2] == "ethnicity=Black");
  CHECK(names[3] == "ethnicity=Caucasian");
  CHECK(names[4] == "age");
  CHECK(names[5] == "mustache");
  CHECK(names.back() == "smile");
  CHECK(build.design.rows() == 60);
  for (std::size_t r = 0; r < 60; ++r) {
    const double eth = *profiles[r].values[1];
    CHECK(build.design.at(r, 2) == (eth == 1.0 ? 1.0 : 0.0));
    CHECK(build.design.at(r, 3) == (eth == 2.0 ? 1.0 : 0.0));
  }

  EncodingConfig cfg;
  cfg.reference_levels["ethnicity"] = "Caucasian";
  const auto other = build_design(profiles, s, cfg);
  CHECK(other.design.column_names()[2] == "ethnicity=Asian");
  cfg.reference_levels["ethnicity"] = "Martian";
  CHECK_THROWS_AS(build_design(profiles, s, cfg), Error);
}

TEST_CASE("complete-case filtering and minimum size") {
  const auto s = AttributeSchema::face_default();
  Rng rng(92);
  auto profiles = random_profiles(s, 40, rng);
  profiles[3].values[s.require_index("blur")].reset();
  profiles[3].values[s.require_index("yaw")].reset();
  const auto build = build_design(profiles, s, {});
  CHECK(build.design.rows() == 39);
  REQUIRE(build.excluded.size() == 1);
  CHECK(build.excluded[0].reason == "missing yaw, blur");
  profiles.resize(20);
  CHECK_THROWS_AS(build_design(profiles, s, {}), Error);
}

TEST_CASE("standardized columns have zero mean and unit sample variance") {
  const auto s = AttributeSchema::face_default();
  Rng rng(93);
  const auto profiles = random_profiles(s, 80, rng);
  EncodingConfig cfg;
  cfg.standardize = true;
  const auto d = build_design(profiles, s, cfg).design;
  for (std::size_t c = 1; c < d.cols(); ++c) {
    const auto col = d.column(c);
    double mean = 0.0, ss = 0.0;
    for (double v : col) mean += v;
    mean /= 80.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    CHECK(std::fabs(mean) < 1e-12);
    CHECK(ss / 79.0 == doctest::Approx(1.0));
  }
}

TEST_CASE("explain recovers a planted linear dependence") {
  const auto s = AttributeSchema::face_default();
  Rng rng(94);
  const auto profiles = random_profiles(s, 300, rng);
  IndividualRatesResult rr;
  const auto smile = s.require_index("smile");
  for (const auto& p : profiles) {
    IndividualRates r;
    r.identity_id = p.identity_id;
    r.far = 0.02 + 0.05 * *p.values[smile] + 0.005 * rng.normal();
    r.frr = 0.1;
    r.genuine_count = 6;
    r.impostor_count = 50;
    rr.rates.push_back(r);
  }
  rr.excluded.push_back({"zzz", "no genuine pairs"});
  auto extra = profiles;
  extra.push_back(extra.back());
  extra.back().identity_id = "lonely";
  const auto rep = explain(extra, s, rr, Metric::kFar, OperatingPoint{}, {});
  CHECK(rep.individuals == 300);
  REQUIRE(rep.excluded.size() == 2);
  CHECK(rep.excluded[0].identity_id == "lonely");
  CHECK(rep.excluded[0].reason == "no trials");
  const auto& fit = rep.regression.fit;
  const auto k = static_cast<std::size_t>(
      std::find(fit.column_names.begin(), fit.column_names.end(), "smile") - fit.column_names.begin());
  CHECK(fit.coefficients[k] == doctest::Approx(0.05).epsilon(0.05));
  CHECK(fit.p_values[k] < 1e-10);
  const auto corr = std::find_if(rep.correlations.begin(), rep.correlations.end(),
                                 [](const ColumnCorrelation& c) { return c.column == "smile"; });
  CHECK(corr->result->r > 0.9);

  const auto flat = explain(profiles, s, rr, Metric::kFrr, OperatingPoint{}, {});
  CHECK(flat.correlations[0].note == "constant dependent");
  CHECK(std::isnan(flat.regression.fit.r_squared));
}

TEST_CASE("constant explanatory columns are dropped") {
  const auto s = AttributeSchema::face_default();
  Rng rng(95);
  auto profiles = random_profiles(s, 60, rng);
  const auto occ = s.require_index("forehead_occluded");
  std::vector<double> y;
  for (auto& p : profiles) {
    p.values[occ] = 0.0;
    y.push_back(rng.normal());
  }
  const auto d = build_design(profiles, s, {}).design;
  const auto out = run_regression(d, y);
  CHECK(out.dropped_columns == std::vector<std::string>{"forehead_occluded"});
  CHECK(out.fit.column_names.size() == 21);
  const auto corr = run_correlations(d, y);
  const auto it = std::find_if(corr.begin(), corr.end(),
                               [](const ColumnCorrelation& c) { return c.column == "forehead_occluded"; });
  CHECK(it->note == "constant column");
  CHECK_FALSE(it->result.has_value());
}
