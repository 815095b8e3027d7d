#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fairaudit/trials.hpp"

namespace fairaudit {

struct ScorePools {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

/// Collects scores by label; unscored pairs are a data error.
ScorePools pool_scores(const TrialSet& trials);

struct RocPoint {
  double tau = 0.0;
  double far = 0.0;
  double frr = 0.0;
  std::size_t false_accepts = 0;   // impostor scores > tau
  std::size_t false_rejects = 0;   // genuine scores <= tau
};

struct RocTable {
  std::vector<RocPoint> points;  // ascending tau
  std::size_t genuine_count = 0;
  std::size_t impostor_count = 0;
};

/// Candidates are a sentinel just below the minimum score, every distinct
/// score ascending, and a sentinel just above the maximum. Rates are exact
/// count ratios under decide(score, tau).
RocTable sweep_rates(ScorePools pools);
RocTable sweep_rates(const TrialSet& trials);

struct ThresholdPolicy {
  enum class Kind { kEer, kFarAt };
  Kind kind = Kind::kEer;
  double target = 0.0;

  static ThresholdPolicy eer() { return {}; }
  static ThresholdPolicy far_at(double target) { return {Kind::kFarAt, target}; }
  /// Accepts "eer" or "far@<fraction>".
  static ThresholdPolicy parse(std::string_view text);
  /// "eer", "far@0.01"
  std::string name() const;
  /// Filesystem-friendly form: "eer", "far_at_0.01".
  std::string slug() const;

  bool operator==(const ThresholdPolicy&) const = default;
};

struct OperatingPoint {
  ThresholdPolicy policy;
  double tau = 0.0;
  double far = 0.0;
  double frr = 0.0;
  std::size_t false_accepts = 0;
  std::size_t false_rejects = 0;
  std::size_t genuine_count = 0;
  std::size_t impostor_count = 0;

  /// (far + frr) / 2; meaningful for the EER policy.
  double eer() const { return 0.5 * (far + frr); }
};

/// EER: candidate minimizing |far - frr|, ties to the smallest tau, no
/// interpolation. far@t: smallest candidate with far <= t.
OperatingPoint calibrate(const RocTable& roc, const ThresholdPolicy& policy);
OperatingPoint calibrate(const TrialSet& trials, const ThresholdPolicy& policy);

}  // namespace fairaudit
