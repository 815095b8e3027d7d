#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fairaudit {

enum class Family {
  kProtected,
  kFacialHair,
  kMakeup,
  kAccessory,
  kOrientation,
  kOcclusion,
  kDistortion,
  kEmotion,
};

std::string_view family_name(Family family);
Family parse_family(std::string_view name);

enum class KindTag {
  kContinuousUnit,   // [0, 1]
  kContinuousRange,  // [lo, hi]
  kBoolean,          // {0, 1}
  kCategorical,      // level index in [0, levels)
};

struct VariableKind {
  KindTag tag = KindTag::kContinuousUnit;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::string> levels;

  static VariableKind unit() { return {}; }
  static VariableKind range(double lo, double hi) {
    return {KindTag::kContinuousRange, lo, hi, {}};
  }
  static VariableKind boolean() { return {KindTag::kBoolean, 0.0, 1.0, {}}; }
  static VariableKind categorical(std::vector<std::string> levels) {
    const double top = levels.empty() ? 0.0 : static_cast<double>(levels.size() - 1);
    return {KindTag::kCategorical, 0.0, top, std::move(levels)};
  }

  bool is_continuous() const {
    return tag == KindTag::kContinuousUnit || tag == KindTag::kContinuousRange;
  }
  /// True when `value` is a legal per-image value for this kind.
  bool admits(double value) const;
};

struct Variable {
  std::string name;
  Family family = Family::kProtected;
  VariableKind kind;
};

/// Ordered set of explanatory variables plus the protected subset.
/// Construction validates: unique names, protected names present, ranges
/// well formed, orientation angles inside [-180, 180].
class AttributeSchema {
 public:
  AttributeSchema(std::vector<Variable> variables, std::vector<std::string> protected_names);

  /// The 20-variable face-characteristics layout: protected (3), facial hair
  /// (3), makeup (2), accessory (2), orientation (3), occlusion (4),
  /// distortion (2), emotion (1).
  static AttributeSchema face_default();

  std::size_t size() const { return variables_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& at(std::size_t index) const { return variables_.at(index); }
  const std::vector<std::string>& protected_names() const { return protected_names_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  /// Throws a data error naming the variable if absent.
  std::size_t require_index(std::string_view name) const;
  bool is_protected(std::size_t index) const;

  /// Parses a cell: categorical accepts a level name or integer index,
  /// boolean accepts 0/1/true/false. Empty string is missing. Throws on
  /// syntax errors; range checks are left to the caller.
  std::optional<double> parse_value(std::size_t index, std::string_view cell) const;
  /// Inverse of parse_value for present values.
  std::string format_value(std::size_t index, double value) const;

 private:
  std::vector<Variable> variables_;
  std::vector<std::string> protected_names_;
};

nlohmann::json schema_to_json(const AttributeSchema& schema);
AttributeSchema schema_from_json(const nlohmann::json& doc);
AttributeSchema load_schema(const std::filesystem::path& path);

}  // namespace fairaudit
