#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairaudit/cohort.hpp"

namespace fairaudit {

enum class TrialLabel { kGenuine, kImpostor };

std::string_view label_name(TrialLabel label);

/// One verification trial. label is genuine iff both images share an
/// identity; score is the cosine similarity once scored.
struct TrialPair {
  std::string probe_image_id;
  std::string reference_image_id;
  std::string probe_identity;
  std::string reference_identity;
  TrialLabel label = TrialLabel::kGenuine;
  std::optional<double> score;
};

enum class PositiveMode {
  kAllPairsCapped,  // enumerate all same-identity pairs, sample down to the cap
  kAllPairs,        // keep every same-identity pair
};

struct TrialPolicy {
  std::size_t positives_per_identity = 6;
  std::size_t negatives_per_identity = 50;
  PositiveMode positive_mode = PositiveMode::kAllPairsCapped;
};

struct IdentityTrials {
  std::string identity_id;
  std::vector<TrialPair> pairs;
};

struct TrialSet {
  std::vector<IdentityTrials> identities;
  std::uint64_t seed = 0;
  TrialPolicy policy;
  /// Identities with fewer than two images; they get no trials of their own.
  std::vector<std::string> skipped_identities;

  std::size_t pair_count() const;
  bool fully_scored() const;
};

/// Builds genuine pairs (all unordered same-identity image pairs, capped by
/// seeded sampling without replacement) and impostor pairs (uniform probe
/// image of the identity, uniform other identity, uniform image of it;
/// duplicates within an identity's list rejected). Output is a pure function
/// of (cohort, policy, seed).
TrialSet generate_trials(const Cohort& cohort, const TrialPolicy& policy, std::uint64_t seed);

double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Scores every pair with cosine similarity. Zero-norm embeddings and
/// unknown image ids are data errors. Results are independent of `threads`.
TrialSet score_trials(TrialSet trials, const Cohort& cohort, unsigned threads = 1);

/// Accept (1) iff score strictly exceeds tau.
constexpr int decide(double score, double tau) { return score > tau ? 1 : 0; }

/// Writes "probe_image_id,reference_image_id,probe_identity,reference_identity,
/// label,score"; scores use shortest round-trip formatting, empty if unscored.
void write_trials(std::ostream& out, const TrialSet& trials);

/// Reads the six-column form, or the four-column form (probe_image_id,
/// reference_image_id, label, score) when `identity_of` maps image ids to
/// identities. Pairs are grouped by probe identity in order of appearance.
TrialSet read_trials(std::istream& in, std::string_view source_name,
                     const std::unordered_map<std::string, std::string>* identity_of = nullptr);

}  // namespace fairaudit
