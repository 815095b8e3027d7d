#include "fairaudit/trials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "fairaudit/delimited.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/parallel.hpp"
#include "fairaudit/random.hpp"

namespace fairaudit {
namespace {

TrialLabel parse_label(std::string_view text, std::string_view where) {
  if (text == "genuine") return TrialLabel::kGenuine;
  if (text == "impostor") return TrialLabel::kImpostor;
  throw_data("trials", fmt::format("{}: unknown label '{}'", where, text));
}

std::optional<double> parse_score(std::string_view text, std::string_view where) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw_data("trials", fmt::format("{}: bad score '{}'", where, text));
  }
  return value;
}

}  // namespace

std::string_view label_name(TrialLabel label) {
  return label == TrialLabel::kGenuine ? "genuine" : "impostor";
}

std::size_t TrialSet::pair_count() const {
  std::size_t n = 0;
  for (const auto& id : identities) n += id.pairs.size();
  return n;
}

bool TrialSet::fully_scored() const {
  for (const auto& id : identities) {
    for (const auto& p : id.pairs) {
      if (!p.score) return false;
    }
  }
  return true;
}

TrialSet generate_trials(const Cohort& cohort, const TrialPolicy& policy, std::uint64_t seed) {
  const auto& identities = cohort.identities();
  const auto& records = cohort.records();
  if (identities.size() < 2) {
    throw_data("trials", fmt::format("need at least 2 identities, cohort has {}",
                                     identities.size()));
  }
  if (policy.positive_mode == PositiveMode::kAllPairsCapped &&
      policy.positives_per_identity == 0) {
    throw_usage("trials", "positives_per_identity must be >= 1");
  }

  TrialSet set;
  set.seed = seed;
  set.policy = policy;
  Rng rng(seed);
  const std::size_t total_images = records.size();

  for (std::size_t u = 0; u < identities.size(); ++u) {
    const Identity& identity = identities[u];
    const std::size_t n = identity.images.size();
    if (n < 2) {
      set.skipped_identities.push_back(identity.id);
      continue;
    }
    IdentityTrials out{identity.id, {}};

    std::vector<std::pair<std::size_t, std::size_t>> genuine;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) genuine.emplace_back(i, j);
    }
    if (policy.positive_mode == PositiveMode::kAllPairsCapped &&
        genuine.size() > policy.positives_per_identity) {
      // Partial Fisher-Yates, then restore enumeration order.
      std::vector<std::size_t> order(genuine.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      for (std::size_t k = 0; k < policy.positives_per_identity; ++k) {
        const std::size_t pick = k + rng.uniform_index(order.size() - k);
        std::swap(order[k], order[pick]);
      }
      order.resize(policy.positives_per_identity);
      std::sort(order.begin(), order.end());
      std::vector<std::pair<std::size_t, std::size_t>> kept;
      for (std::size_t k : order) kept.push_back(genuine[k]);
      genuine = std::move(kept);
    }
    for (const auto& [i, j] : genuine) {
      const auto& a = records[identity.images[i]];
      const auto& b = records[identity.images[j]];
      out.pairs.push_back({a.image_id, b.image_id, identity.id, identity.id,
                           TrialLabel::kGenuine, std::nullopt});
    }

    const std::size_t other_images = total_images - n;
    const std::size_t attainable = n * other_images;
    if (attainable < policy.negatives_per_identity) {
      throw_data("trials",
                 fmt::format("identity '{}': {} impostor pairs requested but only {} distinct "
                             "cross-identity pairs exist",
                             identity.id, policy.negatives_per_identity, attainable));
    }
    std::set<std::pair<std::size_t, std::size_t>> used;
    while (used.size() < policy.negatives_per_identity) {
      const std::size_t probe = identity.images[rng.uniform_index(n)];
      std::size_t other = rng.uniform_index(identities.size() - 1);
      if (other >= u) ++other;
      const auto& other_images_list = identities[other].images;
      const std::size_t reference = other_images_list[rng.uniform_index(other_images_list.size())];
      if (!used.emplace(probe, reference).second) continue;
      out.pairs.push_back({records[probe].image_id, records[reference].image_id, identity.id,
                           identities[other].id, TrialLabel::kImpostor, std::nullopt});
    }
    set.identities.push_back(std::move(out));
  }
  if (set.identities.empty()) {
    throw_data("trials", "no identity has at least 2 images");
  }
  return set;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  // sqrt(na * nb) returns na exactly when a == b, so self-similarity is 1.
  const double s = dot / std::sqrt(na * nb);
  return std::clamp(s, -1.0, 1.0);
}

TrialSet score_trials(TrialSet trials, const Cohort& cohort, unsigned threads) {
  const auto& records = cohort.records();
  std::vector<char> zero_norm(records.size(), 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const bool all_zero = std::all_of(records[i].vector.begin(), records[i].vector.end(),
                                      [](float x) { return x == 0.0f; });
    zero_norm[i] = all_zero ? 1 : 0;
  }

  struct Job {
    TrialPair* pair;
    std::size_t probe;
    std::size_t reference;
  };
  std::vector<Job> jobs;
  jobs.reserve(trials.pair_count());
  for (auto& id : trials.identities) {
    for (auto& pair : id.pairs) {
      const auto probe = cohort.find_image(pair.probe_image_id);
      const auto reference = cohort.find_image(pair.reference_image_id);
      if (!probe || !reference) {
        throw_data("trials", fmt::format("no embedding for image '{}'",
                                         probe ? pair.reference_image_id : pair.probe_image_id));
      }
      for (std::size_t idx : {*probe, *reference}) {
        if (zero_norm[idx]) {
          throw_data("trials", fmt::format("zero-norm embedding for image '{}'",
                                           records[idx].image_id));
        }
      }
      jobs.push_back({&pair, *probe, *reference});
    }
  }
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    const Job& job = jobs[k];
    job.pair->score = cosine_similarity(records[job.probe].vector, records[job.reference].vector);
  });
  return trials;
}

void write_trials(std::ostream& out, const TrialSet& trials) {
  write_record(out, {"probe_image_id", "reference_image_id", "probe_identity",
                     "reference_identity", "label", "score"});
  for (const auto& id : trials.identities) {
    for (const auto& p : id.pairs) {
      write_record(out, {p.probe_image_id, p.reference_image_id, p.probe_identity,
                         p.reference_identity, std::string(label_name(p.label)),
                         p.score ? fmt::format("{}", *p.score) : std::string()});
    }
  }
}

TrialSet read_trials(std::istream& in, std::string_view source_name,
                     const std::unordered_map<std::string, std::string>* identity_of) {
  const DelimitedTable table = read_delimited(in, source_name);
  const bool six = table.header.size() == 6;
  if (six) {
    const std::vector<std::string> expected{"probe_image_id", "reference_image_id",
                                            "probe_identity", "reference_identity",
                                            "label",          "score"};
    if (table.header != expected) {
      throw_data("trials", fmt::format("{}: unexpected header", source_name));
    }
  } else if (table.header.size() == 4) {
    const std::vector<std::string> expected{"probe_image_id", "reference_image_id", "label",
                                            "score"};
    if (table.header != expected) {
      throw_data("trials", fmt::format("{}: unexpected header", source_name));
    }
    if (identity_of == nullptr) {
      throw_data("trials", fmt::format("{}: four-column trial file needs an image-to-identity "
                                       "mapping (pass the embeddings)",
                                       source_name));
    }
  } else {
    throw_data("trials", fmt::format("{}: expected 4 or 6 columns", source_name));
  }

  auto lookup = [&](const std::string& image, std::string_view where) -> std::string {
    auto it = identity_of->find(image);
    if (it == identity_of->end()) {
      throw_data("trials", fmt::format("{}: unknown image '{}'", where, image));
    }
    return it->second;
  };

  TrialSet set;
  std::map<std::string, std::size_t> slot;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = fmt::format("{}:{}", source_name, table.line_numbers[r]);
    if (row.size() != table.header.size()) {
      throw_data("trials", fmt::format("{}: wrong field count", where));
    }
    TrialPair pair;
    pair.probe_image_id = row[0];
    pair.reference_image_id = row[1];
    if (six) {
      pair.probe_identity = row[2];
      pair.reference_identity = row[3];
    } else {
      pair.probe_identity = lookup(row[0], where);
      pair.reference_identity = lookup(row[1], where);
    }
    pair.label = parse_label(row[six ? 4 : 2], where);
    pair.score = parse_score(row[six ? 5 : 3], where);
    const bool same = pair.probe_identity == pair.reference_identity;
    if (same != (pair.label == TrialLabel::kGenuine)) {
      throw_data("trials", fmt::format("{}: label '{}' contradicts identities", where,
                                       label_name(pair.label)));
    }
    if (pair.label == TrialLabel::kGenuine && pair.probe_image_id == pair.reference_image_id) {
      throw_data("trials", fmt::format("{}: genuine pair compares an image with itself", where));
    }
    auto [it, inserted] = slot.emplace(pair.probe_identity, set.identities.size());
    if (inserted) set.identities.push_back({pair.probe_identity, {}});
    set.identities[it->second].pairs.push_back(std::move(pair));
  }
  return set;
}

}  // namespace fairaudit
