#include <doctest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairaudit/error.hpp"
#include "fairaudit/random.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/serialize.hpp"
#include "oracles.hpp"

using namespace fairaudit;
using namespace fairaudit::report;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

bool well_formed(const std::string& svg) {
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_xml(in, tree);
  } catch (const boost::property_tree::xml_parser_error&) {
    return false;
  }
  return tree.count("svg") == 1;
}

GroupRatesResult sample_groups(const AttributeSchema& s) {
  GroupRatesResult r;
  r.spec = make_group_spec(s, {"gender", "ethnicity"}, true);
  for (std::size_t g = 0; g < r.spec.groups.size(); ++g) {
    GroupRates rates{r.spec.groups[g], group_label(r.spec, s, r.spec.groups[g]),
                     0.01 * static_cast<double>(g), 0.5, 3};
    if (g == 1) rates = {r.spec.groups[g], rates.label, NAN, NAN, 0};
    r.groups.push_back(rates);
  }
  return r;
}

}  // namespace

TEST_CASE("decimal formatting rounds half to even on the binary value") {
  CHECK(format_decimal(0.0625) == "0.062");
  CHECK(format_decimal(0.1875) == "0.188");
  CHECK(format_decimal(0.007) == "0.007");
  CHECK(format_decimal(-0.0004) == "-0.000");
  CHECK(format_decimal(NAN) == "—");
  CHECK(format_p_value(0.00902343) == "0.00902");
  CHECK(format_p_value(1.2e-30) == "1.2e-30");
}

TEST_CASE("formatted values parse back to the rounded value") {
  Rng rng(101);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double parsed = std::stod(format_decimal(x));
    CHECK(std::fabs(parsed - x) <= 0.0005 + 1e-15);
    CHECK(std::fabs(parsed * 1000.0 - std::nearbyint(x * 1000.0)) <= 1.0);
    CHECK(parsed == std::nearbyint(parsed * 1000.0) / 1000.0);
  }
}

TEST_CASE("group table layout") {
  const auto s = AttributeSchema::face_default();
  const auto table = render_group_table(sample_groups(s), s, Metric::kFar);
  std::istringstream in(table);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "gender/ethnicity,Asian,Black,Caucasian,Asian∪Black∪Caucasian");
  CHECK(lines[1] == "Man,0.000,—,0.020,0.030");
  CHECK(lines[3].rfind("Man∪Woman,", 0) == 0);
  CHECK(lines[3].substr(lines[3].rfind(',') + 1) == "0.110");

  GroupRatesResult single;
  single.spec = make_group_spec(s, {"gender"}, true);
  for (const auto& key : single.spec.groups) single.groups.push_back({key, "", 0.25, 0.5, 4});
  const auto t2 = render_group_table(single, s, Metric::kFrr);
  CHECK(t2 == "gender,frr\nMan,0.500\nWoman,0.500\nMan∪Woman,0.500\n");
}

TEST_CASE("color scale") {
  CHECK(scale_color(0.0, ColorScale::kDiverging, 1.0) == Rgb{255, 255, 255});
  CHECK(scale_color(1.0, ColorScale::kDiverging, 1.0) == Rgb{178, 24, 43});
  CHECK(scale_color(-5.0, ColorScale::kDiverging, 1.0) == Rgb{33, 102, 172});
  CHECK(scale_color(NAN, ColorScale::kDiverging, 1.0) == Rgb{200, 200, 200});
  CHECK(scale_color(0.0, ColorScale::kSequential) == Rgb{8, 48, 107});
  CHECK(scale_color(1.0, ColorScale::kSequential) == Rgb{255, 255, 255});
  CHECK(hex_color({255, 0, 16}) == "#ff0010");
  // Symmetry around the midpoint.
  const auto a = scale_color(0.3, ColorScale::kDiverging, 1.0);
  const auto b = scale_color(0.6, ColorScale::kDiverging, 2.0);
  CHECK(a == b);
}

TEST_CASE("heatmap glyphs and midpoint") {
  Heatmap one{"t", {"r"}, {"c"}, {0.0}, {0.5}};
  const auto svg = render_heatmap_svg(one);
  CHECK(well_formed(svg));
  CHECK(count(svg, "fill=\"#ffffff\" stroke") == 1);
  CHECK(count(svg, "class=\"glyph-o\"") == 0);
  CHECK(count(svg, "class=\"glyph-backslash\"") == 0);

  Heatmap sig{"t", {"a", "b", "c"}, {"x"}, {0.1, -0.2, 0.3}, {0.009, 0.03, 0.2}};
  const auto s2 = render_heatmap_svg(sig);
  CHECK(count(s2, "class=\"glyph-o\"") == 2);
  CHECK(count(s2, "class=\"glyph-backslash\"") == 1);

  Heatmap bad{"t", {"a"}, {"x", "y"}, {0.1}, {0.1, 0.2}};
  CHECK_THROWS_AS(render_heatmap_svg(bad), Error);
}

TEST_CASE("20x5 heatmap is well-formed XML with escaped labels") {
  Rng rng(103);
  Heatmap map;
  map.title = "R&D <fig>";
  for (int r = 0; r < 20; ++r) map.row_labels.push_back("row<" + std::to_string(r) + ">&\"'");
  for (int c = 0; c < 5; ++c) map.col_labels.push_back("enc∩" + std::to_string(c));
  for (int i = 0; i < 100; ++i) {
    map.values.push_back(i == 7 ? NAN : rng.uniform(-1.0, 1.0));
    map.p_values.push_back(rng.uniform() * rng.uniform());
  }
  const auto svg = render_heatmap_svg(map);
  CHECK(well_formed(svg));
  CHECK(count(svg, "<g class=\"cell\">") == 100);
  CHECK(count(svg, "#c8c8c8") >= 1);
}

TEST_CASE("bundle json round trip and guards") {
  const auto s = AttributeSchema::face_default();
  AuditBundle empty;
  const auto dir = oracle::scratch_dir("report_guard");
  CHECK_THROWS_AS(emit_bundle(empty, s, dir), Error);

  AuditBundle b;
  b.pair_seed = 5;
  b.synth_seed = 9;
  b.group_by = {"gender", "ethnicity"};
  OperatingPointAudit op;
  op.operating_point.policy = ThresholdPolicy::far_at(0.01);
  op.operating_point.tau = 0.25;
  op.groups = sample_groups(s);
  op.deltas = {{"a", "b", 0.007, NAN}};
  op.kruskal_far = PValueMatrix{Metric::kFar, {"a", "b"}, {1, 0.5, 0.5, 1}, {0, 1, 1, 0}};
  b.operating_points.push_back(op);
  const auto text = bundle_json_text(b);
  const auto back = bundle_from_json(nlohmann::json::parse(text), "mem");
  CHECK(bundle_json_text(back) == text);
  CHECK(std::isnan(back.operating_points[0].deltas[0].delta_frr));
  CHECK(back.operating_points[0].groups.groups[1].member_count == 0);

  emit_bundle(b, s, dir);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "tables" / "group_far_far_at_0.01.csv"));
  CHECK(std::filesystem::exists(dir / "figures" / "kruskal_far_far_at_0.01.svg"));

  const auto blocker = dir / "blocker";
  std::ofstream(blocker) << "x";
  CHECK_THROWS_AS(emit_bundle(b, s, blocker / "sub"), Error);
  CHECK_THROWS_AS(bundle_from_json(nlohmann::json{{"tool_version", 1}}, "bad"), Error);
}
