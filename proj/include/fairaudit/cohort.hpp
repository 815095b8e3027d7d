#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairaudit/schema.hpp"

namespace fairaudit {

struct EmbeddingRecord {
  std::string image_id;
  std::string identity_id;
  std::vector<float> vector;
};

/// Per-image attribute values aligned with schema variable order.
/// Categorical values are level indices, booleans are 0/1.
struct ImageAttributes {
  std::string image_id;
  std::vector<std::optional<double>> values;
};

struct Identity {
  std::string id;
  /// Indices into Cohort::records(), sorted by image_id.
  std::vector<std::size_t> images;
};

/// Immutable in-memory cohort: embeddings, per-image attributes and the
/// identity index. Identities are ordered by id.
class Cohort {
 public:
  /// Validates and indexes the inputs. Errors on dimension mismatch,
  /// duplicate image ids, non-finite vectors, attribute rows whose image is
  /// unknown, and schema range violations.
  static Cohort build(std::vector<EmbeddingRecord> records,
                      std::vector<ImageAttributes> attributes, const AttributeSchema& schema);

  std::size_t dimension() const { return dimension_; }
  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const std::vector<Identity>& identities() const { return identities_; }
  /// Attributes of record `index`, or nullptr if the image had no row.
  const ImageAttributes* attributes_of(std::size_t index) const;
  /// Image ids that have embeddings but no attribute row.
  const std::vector<std::string>& unattributed_images() const { return unattributed_; }

  std::optional<std::size_t> find_image(std::string_view image_id) const;
  std::optional<std::size_t> find_identity(std::string_view identity_id) const;

 private:
  std::size_t dimension_ = 0;
  std::vector<EmbeddingRecord> records_;
  std::vector<std::optional<ImageAttributes>> attributes_;
  std::vector<Identity> identities_;
  std::vector<std::string> unattributed_;
  std::unordered_map<std::string, std::size_t> image_index_;
  std::unordered_map<std::string, std::size_t> identity_index_;
};

// Embedding files. The binary layout is "FREB", version 0x01, u32 record
// count, u32 dimension, then per record: u16 length + UTF-8 image id, u16
// length + UTF-8 identity id, dimension little-endian float32 values. The
// tabular form is image_id, identity_id, v0 .. v{e-1} without a header.

/// Reads either form; the binary form is recognised by its magic bytes.
std::vector<EmbeddingRecord> read_embeddings(std::istream& in, std::string_view source_name);
void write_embeddings_binary(std::ostream& out, std::span<const EmbeddingRecord> records);
void write_embeddings_tabular(std::ostream& out, std::span<const EmbeddingRecord> records);

/// Attribute file: header row "image_id,<variable>...", empty cell = missing.
/// Schema variables absent from the header are missing for every image.
std::vector<ImageAttributes> read_attributes(std::istream& in, const AttributeSchema& schema,
                                             std::string_view source_name);
void write_attributes(std::ostream& out, std::span<const ImageAttributes> rows,
                      const AttributeSchema& schema);

Cohort load_cohort(const std::filesystem::path& embeddings,
                   const std::optional<std::filesystem::path>& attributes,
                   const AttributeSchema& schema);

/// Per-individual characteristic vector. Continuous variables hold the mean
/// of present per-image values; boolean the mode (tie -> 1); categorical the
/// most frequent level (tie -> lowest index). Missing when no image has a
/// value (coverage 0).
struct AttributeProfile {
  std::string identity_id;
  std::vector<std::optional<double>> values;
  std::vector<double> coverage;
  std::size_t image_count = 0;

  bool complete() const;
};

std::vector<AttributeProfile> aggregate_profiles(const Cohort& cohort,
                                                 const AttributeSchema& schema);

/// One group under a GroupSpec: a level per grouping attribute, or nullopt
/// to collapse that attribute (the union of all its levels).
struct GroupKey {
  std::vector<std::optional<int>> levels;

  bool has_union() const;
  auto operator<=>(const GroupKey&) const = default;
};

struct GroupSpec {
  std::vector<std::string> attributes;
  std::vector<std::size_t> attribute_index;
  std::vector<GroupKey> groups;
};

/// Builds the groups for categorical protected attributes. With unions the
/// result enumerates every level-or-union combination (row-major in
/// attribute order, union last), ending with the all-union overall group.
GroupSpec make_group_spec(const AttributeSchema& schema, const std::vector<std::string>& attributes,
                          bool with_unions);

/// Levels of the profile on the spec attributes; nullopt if any is missing.
std::optional<std::vector<int>> group_cell(const GroupSpec& spec, const AttributeProfile& profile);
bool group_contains(const GroupKey& key, const std::vector<int>& cell);
/// True when no individual can belong to both groups.
bool groups_disjoint(const GroupKey& a, const GroupKey& b);
/// e.g. "Woman∩Caucasian", "Man∪Woman"; single attribute gives the level.
std::string group_label(const GroupSpec& spec, const AttributeSchema& schema, const GroupKey& key);

}  // namespace fairaudit
