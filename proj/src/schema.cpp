#include "fairaudit/schema.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "fairaudit/error.hpp"

namespace fairaudit {
namespace {

constexpr std::array<std::pair<Family, std::string_view>, 8> kFamilyNames{{
    {Family::kProtected, "protected"},
    {Family::kFacialHair, "facial_hair"},
    {Family::kMakeup, "makeup"},
    {Family::kAccessory, "accessory"},
    {Family::kOrientation, "orientation"},
    {Family::kOcclusion, "occlusion"},
    {Family::kDistortion, "distortion"},
    {Family::kEmotion, "emotion"},
}};

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view family_name(Family family) {
  for (const auto& [f, name] : kFamilyNames) {
    if (f == family) return name;
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (const auto& [f, n] : kFamilyNames) {
    if (n == name) return f;
  }
  throw_data("schema", fmt::format("unknown family '{}'", name));
}

bool VariableKind::admits(double value) const {
  if (!std::isfinite(value)) return false;
  switch (tag) {
    case KindTag::kContinuousUnit:
      return value >= 0.0 && value <= 1.0;
    case KindTag::kContinuousRange:
      return value >= lo && value <= hi;
    case KindTag::kBoolean:
      return value == 0.0 || value == 1.0;
    case KindTag::kCategorical:
      return value >= 0.0 && value < static_cast<double>(levels.size()) &&
             value == std::floor(value);
  }
  return false;
}

AttributeSchema::AttributeSchema(std::vector<Variable> variables,
                                 std::vector<std::string> protected_names)
    : variables_(std::move(variables)), protected_names_(std::move(protected_names)) {
  if (variables_.empty()) throw_data("schema", "schema declares no variables");
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (v.name.empty()) throw_data("schema", "variable with empty name");
    if (v.name == "image_id") throw_data("schema", "'image_id' is reserved");
    if (!seen.insert(v.name).second) {
      throw_data("schema", fmt::format("duplicate variable '{}'", v.name));
    }
    const auto& k = v.kind;
    if (k.tag == KindTag::kContinuousRange && !(k.lo < k.hi)) {
      throw_data("schema", fmt::format("variable '{}': empty range [{}, {}]", v.name, k.lo, k.hi));
    }
    if (k.tag == KindTag::kCategorical) {
      if (k.levels.size() < 2) {
        throw_data("schema", fmt::format("variable '{}': categorical needs >= 2 levels", v.name));
      }
      std::set<std::string> level_set(k.levels.begin(), k.levels.end());
      if (level_set.size() != k.levels.size()) {
        throw_data("schema", fmt::format("variable '{}': duplicate levels", v.name));
      }
    }
    if (v.family == Family::kOrientation && k.tag == KindTag::kContinuousRange &&
        (k.lo < -180.0 || k.hi > 180.0)) {
      throw_data("schema",
                 fmt::format("orientation variable '{}' exceeds [-180, 180] degrees", v.name));
    }
  }
  std::set<std::string> protected_seen;
  for (const auto& name : protected_names_) {
    if (!seen.contains(name)) {
      throw_data("schema", fmt::format("protected name '{}' is not a declared variable", name));
    }
    if (!protected_seen.insert(name).second) {
      throw_data("schema", fmt::format("protected name '{}' listed twice", name));
    }
  }
}

AttributeSchema AttributeSchema::face_default() {
  using VK = VariableKind;
  std::vector<Variable> vars{
      {"gender", Family::kProtected, VK::categorical({"Man", "Woman"})},
      {"ethnicity", Family::kProtected, VK::categorical({"Asian", "Black", "Caucasian"})},
      {"age", Family::kProtected, VK::range(1.0, 100.0)},
      {"mustache", Family::kFacialHair, VK::unit()},
      {"beard", Family::kFacialHair, VK::unit()},
      {"sideburns", Family::kFacialHair, VK::unit()},
      {"eye_makeup", Family::kMakeup, VK::unit()},
      {"lip_makeup", Family::kMakeup, VK::unit()},
      {"headwear", Family::kAccessory, VK::unit()},
      {"glasses", Family::kAccessory, VK::unit()},
      {"roll", Family::kOrientation, VK::range(-180.0, 180.0)},
      {"yaw", Family::kOrientation, VK::range(-180.0, 180.0)},
      {"pitch", Family::kOrientation, VK::range(-180.0, 180.0)},
      {"forehead_occluded", Family::kOcclusion, VK::boolean()},
      {"eye_occluded", Family::kOcclusion, VK::boolean()},
      {"mouth_occluded", Family::kOcclusion, VK::boolean()},
      {"exposure", Family::kOcclusion, VK::unit()},
      {"blur", Family::kDistortion, VK::unit()},
      {"noise", Family::kDistortion, VK::unit()},
      {"smile", Family::kEmotion, VK::unit()},
  };
  return AttributeSchema(std::move(vars), {"gender", "ethnicity", "age"});
}

std::optional<std::size_t> AttributeSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t AttributeSchema::require_index(std::string_view name) const {
  if (auto idx = index_of(name)) return *idx;
  throw_data("schema", fmt::format("unknown variable '{}'", name));
}

bool AttributeSchema::is_protected(std::size_t index) const {
  const auto& name = variables_.at(index).name;
  return std::find(protected_names_.begin(), protected_names_.end(), name) !=
         protected_names_.end();
}

std::optional<double> AttributeSchema::parse_value(std::size_t index,
                                                   std::string_view cell) const {
  const std::string_view text = trim(cell);
  if (text.empty()) return std::nullopt;
  const Variable& var = variables_.at(index);
  if (var.kind.tag == KindTag::kCategorical) {
    const auto& levels = var.kind.levels;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] == text) return static_cast<double>(i);
    }
  }
  if (var.kind.tag == KindTag::kBoolean) {
    if (text == "true" || text == "True") return 1.0;
    if (text == "false" || text == "False") return 0.0;
  }
  if (auto number = parse_number(text)) return number;
  throw_data("schema", fmt::format("variable '{}': cannot parse '{}'", var.name, text));
}

std::string AttributeSchema::format_value(std::size_t index, double value) const {
  const Variable& var = variables_.at(index);
  switch (var.kind.tag) {
    case KindTag::kCategorical:
      return var.kind.levels.at(static_cast<std::size_t>(value));
    case KindTag::kBoolean:
      return value != 0.0 ? "1" : "0";
    default:
      return fmt::format("{}", value);
  }
}

nlohmann::json schema_to_json(const AttributeSchema& schema) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : schema.variables()) {
    nlohmann::json entry{{"name", v.name}, {"family", std::string(family_name(v.family))}};
    switch (v.kind.tag) {
      case KindTag::kContinuousUnit:
        entry["kind"] = "continuous_unit";
        break;
      case KindTag::kContinuousRange:
        entry["kind"] = "continuous_range";
        entry["lo"] = v.kind.lo;
        entry["hi"] = v.kind.hi;
        break;
      case KindTag::kBoolean:
        entry["kind"] = "boolean";
        break;
      case KindTag::kCategorical:
        entry["kind"] = "categorical";
        entry["levels"] = v.kind.levels;
        break;
    }
    vars.push_back(std::move(entry));
  }
  return {{"variables", std::move(vars)}, {"protected", schema.protected_names()}};
}

AttributeSchema schema_from_json(const nlohmann::json& doc) {
  try {
    std::vector<Variable> vars;
    for (const auto& entry : doc.at("variables")) {
      Variable v;
      v.name = entry.at("name").get<std::string>();
      v.family = parse_family(entry.at("family").get<std::string>());
      const auto kind = entry.at("kind").get<std::string>();
      if (kind == "continuous_unit") {
        v.kind = VariableKind::unit();
      } else if (kind == "continuous_range") {
        v.kind = VariableKind::range(entry.at("lo").get<double>(), entry.at("hi").get<double>());
      } else if (kind == "boolean") {
        v.kind = VariableKind::boolean();
      } else if (kind == "categorical") {
        v.kind = VariableKind::categorical(entry.at("levels").get<std::vector<std::string>>());
      } else {
        throw_data("schema", fmt::format("variable '{}': unknown kind '{}'", v.name, kind));
      }
      vars.push_back(std::move(v));
    }
    auto protected_names = doc.value("protected", std::vector<std::string>{});
    return AttributeSchema(std::move(vars), std::move(protected_names));
  } catch (const nlohmann::json::exception& e) {
    throw_data("schema", fmt::format("malformed schema document: {}", e.what()));
  }
}

AttributeSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_data("schema", fmt::format("cannot open '{}'", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw_data("schema", fmt::format("'{}': {}", path.string(), e.what()));
  }
  return schema_from_json(doc);
}

}  // namespace fairaudit
