#include "fairaudit/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {

ScorePools pool_scores(const TrialSet& trials) {
  ScorePools pools;
  for (const auto& id : trials.identities) {
    for (const auto& pair : id.pairs) {
      if (!pair.score) {
        throw_data("calibration", fmt::format("pair ({}, {}) is unscored", pair.probe_image_id,
                                              pair.reference_image_id));
      }
      (pair.label == TrialLabel::kGenuine ? pools.genuine : pools.impostor)
          .push_back(*pair.score);
    }
  }
  return pools;
}

RocTable sweep_rates(ScorePools pools) {
  auto& genuine = pools.genuine;
  auto& impostor = pools.impostor;
  if (genuine.empty()) throw_data("calibration", "no genuine scores");
  if (impostor.empty()) throw_data("calibration", "no impostor scores");
  std::sort(genuine.begin(), genuine.end());
  std::sort(impostor.begin(), impostor.end());

  std::vector<double> candidates;
  candidates.reserve(genuine.size() + impostor.size() + 2);
  std::merge(genuine.begin(), genuine.end(), impostor.begin(), impostor.end(),
             std::back_inserter(candidates));
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  const double lo = std::nextafter(candidates.front(), -std::numeric_limits<double>::infinity());
  const double hi = std::nextafter(candidates.back(), std::numeric_limits<double>::infinity());
  candidates.insert(candidates.begin(), lo);
  candidates.push_back(hi);

  RocTable table;
  table.genuine_count = genuine.size();
  table.impostor_count = impostor.size();
  table.points.reserve(candidates.size());
  const double ng = static_cast<double>(genuine.size());
  const double ni = static_cast<double>(impostor.size());
  for (double tau : candidates) {
    RocPoint p;
    p.tau = tau;
    p.false_rejects = static_cast<std::size_t>(
        std::upper_bound(genuine.begin(), genuine.end(), tau) - genuine.begin());
    p.false_accepts = static_cast<std::size_t>(
        impostor.end() - std::upper_bound(impostor.begin(), impostor.end(), tau));
    p.frr = static_cast<double>(p.false_rejects) / ng;
    p.far = static_cast<double>(p.false_accepts) / ni;
    table.points.push_back(p);
  }
  return table;
}

RocTable sweep_rates(const TrialSet& trials) { return sweep_rates(pool_scores(trials)); }

ThresholdPolicy ThresholdPolicy::parse(std::string_view text) {
  if (text == "eer") return eer();
  constexpr std::string_view prefix = "far@";
  if (text.starts_with(prefix)) {
    const std::string_view number = text.substr(prefix.size());
    double target = 0.0;
    auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), target);
    if (ec == std::errc() && ptr == number.data() + number.size() && target >= 0.0 &&
        target <= 1.0) {
      return far_at(target);
    }
  }
  throw_usage("calibration",
              fmt::format("bad threshold policy '{}' (expected eer or far@<fraction>)", text));
}

std::string ThresholdPolicy::name() const {
  return kind == Kind::kEer ? "eer" : fmt::format("far@{}", target);
}

std::string ThresholdPolicy::slug() const {
  return kind == Kind::kEer ? "eer" : fmt::format("far_at_{}", target);
}

OperatingPoint calibrate(const RocTable& roc, const ThresholdPolicy& policy) {
  if (roc.points.empty()) throw_data("calibration", "empty ROC table");
  const RocPoint* chosen = nullptr;
  if (policy.kind == ThresholdPolicy::Kind::kEer) {
    // Compare |fa/ni - fr/ng| exactly as |fa*ng - fr*ni| in integers.
    const auto ng = static_cast<std::int64_t>(roc.genuine_count);
    const auto ni = static_cast<std::int64_t>(roc.impostor_count);
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const auto& p : roc.points) {
      const std::int64_t gap = std::llabs(static_cast<std::int64_t>(p.false_accepts) * ng -
                                          static_cast<std::int64_t>(p.false_rejects) * ni);
      if (gap < best) {
        best = gap;
        chosen = &p;
      }
    }
  } else {
    if (policy.target < 0.0) {
      throw_data("calibration", fmt::format("FAR target {} is unreachable", policy.target));
    }
    for (const auto& p : roc.points) {
      if (p.far <= policy.target) {
        chosen = &p;
        break;
      }
    }
  }
  if (chosen == nullptr) throw_data("calibration", "no candidate satisfies the policy");
  OperatingPoint op;
  op.policy = policy;
  op.tau = chosen->tau;
  op.far = chosen->far;
  op.frr = chosen->frr;
  op.false_accepts = chosen->false_accepts;
  op.false_rejects = chosen->false_rejects;
  op.genuine_count = roc.genuine_count;
  op.impostor_count = roc.impostor_count;
  return op;
}

OperatingPoint calibrate(const TrialSet& trials, const ThresholdPolicy& policy) {
  return calibrate(sweep_rates(trials), policy);
}

}  // namespace fairaudit
