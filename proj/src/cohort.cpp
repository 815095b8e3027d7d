#include "fairaudit/cohort.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "fairaudit/delimited.hpp"
#include "fairaudit/error.hpp"

namespace fairaudit {
namespace {

constexpr std::array<char, 4> kMagic{'F', 'R', 'E', 'B'};
constexpr std::uint8_t kVersion = 0x01;

class ByteReader {
 public:
  ByteReader(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  void read(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw_data("cohort", fmt::format("{}: truncated embedding file", source_));
    }
  }
  std::uint8_t u8() {
    std::uint8_t b = 0;
    read(&b, 1);
    return b;
  }
  std::uint16_t u16() {
    std::array<unsigned char, 2> b{};
    read(b.data(), b.size());
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    std::array<unsigned char, 4> b{};
    read(b.data(), b.size());
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    std::string s(n, '\0');
    if (n > 0) read(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
  std::string_view source_;
};

void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw_data("cohort", fmt::format("id too long for u16 length: '{}'", s));
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::vector<EmbeddingRecord> read_binary(std::istream& in, std::string_view source) {
  ByteReader reader(in, source);
  std::array<char, 4> magic{};
  reader.read(magic.data(), magic.size());
  if (magic != kMagic) throw_data("cohort", fmt::format("{}: bad magic bytes", source));
  const std::uint8_t version = reader.u8();
  if (version != kVersion) {
    throw_data("cohort", fmt::format("{}: unsupported format version {}", source, version));
  }
  const std::uint32_t count = reader.u32();
  const std::uint32_t dim = reader.u32();
  if (dim == 0) throw_data("cohort", fmt::format("{}: dimension must be >= 1", source));
  std::vector<EmbeddingRecord> records;
  records.reserve(count);
  for (std::uint32_t r = 0; r < count; ++r) {
    EmbeddingRecord rec;
    rec.image_id = reader.str(reader.u16());
    rec.identity_id = reader.str(reader.u16());
    rec.vector.resize(dim);
    for (auto& x : rec.vector) x = reader.f32();
    records.push_back(std::move(rec));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw_data("cohort", fmt::format("{}: trailing bytes after {} records", source, count));
  }
  return records;
}

std::vector<EmbeddingRecord> read_tabular(std::istream& in, std::string_view source) {
  const DelimitedTable table = read_delimited_records(in, source);
  std::vector<EmbeddingRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < 3) {
      throw_data("cohort", fmt::format("{}:{}: expected image_id, identity_id and at least one "
                                       "vector component",
                                       source, table.line_numbers[r]));
    }
    EmbeddingRecord rec{row[0], row[1], {}};
    rec.vector.reserve(row.size() - 2);
    for (std::size_t c = 2; c < row.size(); ++c) {
      char* end = nullptr;
      const float v = std::strtof(row[c].c_str(), &end);
      if (row[c].empty() || end != row[c].c_str() + row[c].size()) {
        throw_data("cohort", fmt::format("{}:{}: bad vector component '{}'", source,
                                         table.line_numbers[r], row[c]));
      }
      rec.vector.push_back(v);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// Mean of present values relative to the first one, so identical inputs
// reproduce the input exactly.
double shifted_mean(const std::vector<double>& values) {
  const double anchor = values.front();
  double acc = 0.0;
  for (double v : values) acc += v - anchor;
  return anchor + acc / static_cast<double>(values.size());
}

}  // namespace

const ImageAttributes* Cohort::attributes_of(std::size_t index) const {
  const auto& slot = attributes_.at(index);
  return slot ? &*slot : nullptr;
}

std::optional<std::size_t> Cohort::find_image(std::string_view image_id) const {
  auto it = image_index_.find(std::string(image_id));
  if (it == image_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Cohort::find_identity(std::string_view identity_id) const {
  auto it = identity_index_.find(std::string(identity_id));
  if (it == identity_index_.end()) return std::nullopt;
  return it->second;
}

Cohort Cohort::build(std::vector<EmbeddingRecord> records, std::vector<ImageAttributes> attributes,
                     const AttributeSchema& schema) {
  Cohort cohort;
  if (records.empty()) throw_data("cohort", "no embedding records");
  cohort.dimension_ = records.front().vector.size();
  if (cohort.dimension_ == 0) throw_data("cohort", "embedding dimension must be >= 1");

  std::map<std::string, std::vector<std::size_t>> by_identity;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.vector.size() != cohort.dimension_) {
      throw_data("cohort", fmt::format("dimension mismatch: image '{}' has {} components, "
                                       "expected {}",
                                       rec.image_id, rec.vector.size(), cohort.dimension_));
    }
    if (rec.image_id.empty() || rec.identity_id.empty()) {
      throw_data("cohort", fmt::format("record {} has an empty image or identity id", i));
    }
    for (float x : rec.vector) {
      if (!std::isfinite(x)) {
        throw_data("cohort", fmt::format("image '{}' has a non-finite component", rec.image_id));
      }
    }
    if (!cohort.image_index_.emplace(rec.image_id, i).second) {
      throw_data("cohort", fmt::format("duplicate image_id '{}'", rec.image_id));
    }
    by_identity[rec.identity_id].push_back(i);
  }

  cohort.attributes_.resize(records.size());
  for (auto& row : attributes) {
    auto it = cohort.image_index_.find(row.image_id);
    if (it == cohort.image_index_.end()) {
      throw_data("cohort",
                 fmt::format("attribute row for image '{}' has no embedding", row.image_id));
    }
    if (row.values.size() != schema.size()) {
      throw_data("cohort", fmt::format("attribute row for image '{}' has {} values, schema has {}",
                                       row.image_id, row.values.size(), schema.size()));
    }
    for (std::size_t v = 0; v < schema.size(); ++v) {
      if (row.values[v] && !schema.at(v).kind.admits(*row.values[v])) {
        throw_data("cohort", fmt::format("range violation: variable '{}' image '{}' value {}",
                                         schema.at(v).name, row.image_id, *row.values[v]));
      }
    }
    auto& slot = cohort.attributes_[it->second];
    if (slot) {
      throw_data("cohort", fmt::format("duplicate attribute row for image '{}'", row.image_id));
    }
    slot = std::move(row);
  }

  cohort.records_ = std::move(records);
  for (std::size_t i = 0; i < cohort.records_.size(); ++i) {
    if (!cohort.attributes_[i]) cohort.unattributed_.push_back(cohort.records_[i].image_id);
  }
  std::sort(cohort.unattributed_.begin(), cohort.unattributed_.end());

  for (auto& [id, images] : by_identity) {
    std::sort(images.begin(), images.end(), [&](std::size_t a, std::size_t b) {
      return cohort.records_[a].image_id < cohort.records_[b].image_id;
    });
    cohort.identity_index_.emplace(id, cohort.identities_.size());
    cohort.identities_.push_back({id, std::move(images)});
  }
  return cohort;
}

std::vector<EmbeddingRecord> read_embeddings(std::istream& in, std::string_view source_name) {
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const auto got = in.gcount();
  in.clear();
  in.seekg(0);
  if (got == 4 && head == kMagic) return read_binary(in, source_name);
  return read_tabular(in, source_name);
}

void write_embeddings_binary(std::ostream& out, std::span<const EmbeddingRecord> records) {
  const std::uint32_t dim =
      records.empty() ? 0u : static_cast<std::uint32_t>(records.front().vector.size());
  out.write(kMagic.data(), kMagic.size());
  out.put(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(records.size()));
  put_u32(out, dim);
  for (const auto& rec : records) {
    if (rec.vector.size() != dim) {
      throw_data("cohort", fmt::format("dimension mismatch writing image '{}'", rec.image_id));
    }
    put_string(out, rec.image_id);
    put_string(out, rec.identity_id);
    for (float x : rec.vector) put_u32(out, std::bit_cast<std::uint32_t>(x));
  }
}

void write_embeddings_tabular(std::ostream& out, std::span<const EmbeddingRecord> records) {
  for (const auto& rec : records) {
    std::vector<std::string> fields{rec.image_id, rec.identity_id};
    for (float x : rec.vector) fields.push_back(fmt::format("{}", x));
    write_record(out, fields);
  }
}

std::vector<ImageAttributes> read_attributes(std::istream& in, const AttributeSchema& schema,
                                             std::string_view source_name) {
  const DelimitedTable table = read_delimited(in, source_name);
  if (table.header.front() != "image_id") {
    throw_data("cohort", fmt::format("{}: first column must be image_id", source_name));
  }
  std::vector<std::size_t> column_var;
  for (std::size_t c = 1; c < table.header.size(); ++c) {
    auto idx = schema.index_of(table.header[c]);
    if (!idx) {
      throw_data("cohort", fmt::format("{}: column '{}' is not a schema variable", source_name,
                                       table.header[c]));
    }
    if (std::find(column_var.begin(), column_var.end(), *idx) != column_var.end()) {
      throw_data("cohort", fmt::format("{}: column '{}' repeated", source_name, table.header[c]));
    }
    column_var.push_back(*idx);
  }
  std::vector<ImageAttributes> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cells = table.rows[r];
    if (cells.size() != table.header.size()) {
      throw_data("cohort", fmt::format("{}:{}: expected {} fields, found {}", source_name,
                                       table.line_numbers[r], table.header.size(), cells.size()));
    }
    ImageAttributes row{cells[0], std::vector<std::optional<double>>(schema.size())};
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::size_t v = column_var[c - 1];
      row.values[v] = schema.parse_value(v, cells[c]);
      if (row.values[v] && !schema.at(v).kind.admits(*row.values[v])) {
        throw_data("cohort", fmt::format("range violation: variable '{}' image '{}' value {}",
                                         schema.at(v).name, row.image_id, *row.values[v]));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_attributes(std::ostream& out, std::span<const ImageAttributes> rows,
                      const AttributeSchema& schema) {
  std::vector<std::string> header{"image_id"};
  for (const auto& v : schema.variables()) header.push_back(v.name);
  write_record(out, header);
  for (const auto& row : rows) {
    std::vector<std::string> fields{row.image_id};
    for (std::size_t v = 0; v < schema.size(); ++v) {
      const auto& value = row.values.at(v);
      fields.push_back(value ? schema.format_value(v, *value) : std::string());
    }
    write_record(out, fields);
  }
}

Cohort load_cohort(const std::filesystem::path& embeddings,
                   const std::optional<std::filesystem::path>& attributes,
                   const AttributeSchema& schema) {
  std::ifstream emb_in(embeddings, std::ios::binary);
  if (!emb_in) throw_data("cohort", fmt::format("cannot open '{}'", embeddings.string()));
  auto records = read_embeddings(emb_in, embeddings.string());
  std::vector<ImageAttributes> attrs;
  if (attributes) {
    std::ifstream attr_in(*attributes);
    if (!attr_in) throw_data("cohort", fmt::format("cannot open '{}'", attributes->string()));
    attrs = read_attributes(attr_in, schema, attributes->string());
  }
  return Cohort::build(std::move(records), std::move(attrs), schema);
}

bool AttributeProfile::complete() const {
  return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

std::vector<AttributeProfile> aggregate_profiles(const Cohort& cohort,
                                                 const AttributeSchema& schema) {
  std::vector<AttributeProfile> profiles;
  profiles.reserve(cohort.identities().size());
  for (const auto& identity : cohort.identities()) {
    AttributeProfile profile;
    profile.identity_id = identity.id;
    profile.image_count = identity.images.size();
    profile.values.resize(schema.size());
    profile.coverage.assign(schema.size(), 0.0);
    for (std::size_t v = 0; v < schema.size(); ++v) {
      const auto& kind = schema.at(v).kind;
      std::vector<double> present;
      for (std::size_t image : identity.images) {
        const ImageAttributes* attrs = cohort.attributes_of(image);
        if (attrs && attrs->values[v]) present.push_back(*attrs->values[v]);
      }
      profile.coverage[v] =
          static_cast<double>(present.size()) / static_cast<double>(identity.images.size());
      if (present.empty()) continue;
      if (kind.is_continuous()) {
        profile.values[v] = shifted_mean(present);
      } else if (kind.tag == KindTag::kBoolean) {
        const auto ones = std::count(present.begin(), present.end(), 1.0);
        profile.values[v] = 2 * static_cast<std::size_t>(ones) >= present.size() ? 1.0 : 0.0;
      } else {
        std::vector<std::size_t> counts(kind.levels.size(), 0);
        for (double level : present) ++counts[static_cast<std::size_t>(level)];
        const auto best = std::max_element(counts.begin(), counts.end());
        profile.values[v] = static_cast<double>(best - counts.begin());
      }
    }
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

bool GroupKey::has_union() const {
  return std::any_of(levels.begin(), levels.end(), [](const auto& l) { return !l.has_value(); });
}

GroupSpec make_group_spec(const AttributeSchema& schema, const std::vector<std::string>& attributes,
                          bool with_unions) {
  if (attributes.empty()) throw_usage("cohort", "group spec needs at least one attribute");
  GroupSpec spec;
  spec.attributes = attributes;
  std::vector<std::size_t> level_counts;
  for (const auto& name : attributes) {
    const std::size_t idx = schema.require_index(name);
    if (!schema.is_protected(idx)) {
      throw_data("cohort", fmt::format("group attribute '{}' is not protected", name));
    }
    if (schema.at(idx).kind.tag != KindTag::kCategorical) {
      throw_data("cohort", fmt::format("group attribute '{}' is not categorical", name));
    }
    if (std::find(spec.attribute_index.begin(), spec.attribute_index.end(), idx) !=
        spec.attribute_index.end()) {
      throw_data("cohort", fmt::format("group attribute '{}' repeated", name));
    }
    spec.attribute_index.push_back(idx);
    level_counts.push_back(schema.at(idx).kind.levels.size());
  }
  // Odometer over (levels + optional union slot) per attribute.
  const std::size_t extra = with_unions ? 1 : 0;
  std::vector<std::size_t> digit(attributes.size(), 0);
  while (true) {
    GroupKey key;
    for (std::size_t a = 0; a < digit.size(); ++a) {
      if (digit[a] < level_counts[a]) {
        key.levels.emplace_back(static_cast<int>(digit[a]));
      } else {
        key.levels.emplace_back(std::nullopt);
      }
    }
    spec.groups.push_back(std::move(key));
    std::size_t a = digit.size();
    while (a > 0) {
      --a;
      if (++digit[a] < level_counts[a] + extra) break;
      digit[a] = 0;
      if (a == 0) return spec;
    }
  }
}

std::optional<std::vector<int>> group_cell(const GroupSpec& spec,
                                           const AttributeProfile& profile) {
  std::vector<int> cell;
  cell.reserve(spec.attribute_index.size());
  for (std::size_t idx : spec.attribute_index) {
    const auto& value = profile.values.at(idx);
    if (!value) return std::nullopt;
    cell.push_back(static_cast<int>(*value));
  }
  return cell;
}

bool group_contains(const GroupKey& key, const std::vector<int>& cell) {
  for (std::size_t a = 0; a < key.levels.size(); ++a) {
    if (key.levels[a] && *key.levels[a] != cell.at(a)) return false;
  }
  return true;
}

bool groups_disjoint(const GroupKey& a, const GroupKey& b) {
  for (std::size_t i = 0; i < a.levels.size() && i < b.levels.size(); ++i) {
    if (a.levels[i] && b.levels[i] && *a.levels[i] != *b.levels[i]) return true;
  }
  return false;
}

std::string group_label(const GroupSpec& spec, const AttributeSchema& schema,
                        const GroupKey& key) {
  std::string label;
  const bool multi = key.levels.size() > 1;
  for (std::size_t a = 0; a < key.levels.size(); ++a) {
    if (a > 0) label += "∩";
    const auto& levels = schema.at(spec.attribute_index[a]).kind.levels;
    if (key.levels[a]) {
      label += levels.at(static_cast<std::size_t>(*key.levels[a]));
    } else {
      std::string joined = fmt::format("{}", fmt::join(levels, "∪"));
      label += multi ? "(" + joined + ")" : joined;
    }
  }
  return label;
}

}  // namespace fairaudit
