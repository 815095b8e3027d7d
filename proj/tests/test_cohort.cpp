#include <doctest.h>

#include <sstream>

#include "fairaudit/cohort.hpp"
#include "fairaudit/error.hpp"
#include "fairaudit/random.hpp"

using namespace fairaudit;

namespace {

AttributeSchema small_schema() {
  return AttributeSchema({{"gender", Family::kProtected, VariableKind::categorical({"Man", "Woman"})},
                          {"yaw", Family::kOrientation, VariableKind::range(-180, 180)},
                          {"glasses", Family::kAccessory, VariableKind::boolean()},
                          {"expr", Family::kEmotion, VariableKind::categorical({"a", "b", "c"})}},
                         {"gender"});
}

EmbeddingRecord rec(std::string image, std::string id, std::vector<float> v) {
  return {std::move(image), std::move(id), std::move(v)};
}

}  // namespace

TEST_CASE("embedding binary and tabular round trip") {
  Rng rng(1);
  std::vector<EmbeddingRecord> records;
  for (int i = 0; i < 7; ++i) {
    std::vector<float> v(5);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    records.push_back(rec("img" + std::to_string(i), "id" + std::to_string(i % 3), v));
  }
  std::stringstream bin;
  write_embeddings_binary(bin, records);
  const auto back = read_embeddings(bin, "bin");
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].image_id == records[i].image_id);
    CHECK(back[i].identity_id == records[i].identity_id);
    CHECK(back[i].vector == records[i].vector);
  }
  std::stringstream tab;
  write_embeddings_tabular(tab, records);
  const auto back2 = read_embeddings(tab, "tab");
  for (std::size_t i = 0; i < back2.size(); ++i) CHECK(back2[i].vector == records[i].vector);
}

TEST_CASE("binary embedding errors") {
  std::vector<EmbeddingRecord> records{rec("a", "x", {1, 2})};
  std::stringstream bin;
  write_embeddings_binary(bin, records);
  const std::string bytes = bin.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
  CHECK_THROWS_AS(read_embeddings(truncated, "t"), Error);
  std::stringstream trailing(bytes + "x");
  CHECK_THROWS_AS(read_embeddings(trailing, "t"), Error);
  std::string bad_version = bytes;
  bad_version[4] = 2;
  std::stringstream v2(bad_version);
  CHECK_THROWS_AS(read_embeddings(v2, "t"), Error);
}

TEST_CASE("cohort build validation") {
  const auto s = small_schema();
  CHECK_THROWS_AS(Cohort::build({}, {}, s), Error);
  CHECK_THROWS_AS(Cohort::build({rec("a", "x", {1, 2}), rec("b", "x", {1, 2, 3})}, {}, s), Error);
  CHECK_THROWS_AS(Cohort::build({rec("a", "x", {1, 2}), rec("a", "y", {1, 2})}, {}, s), Error);
  CHECK_THROWS_AS(Cohort::build({rec("a", "x", {NAN, 2})}, {}, s), Error);
  ImageAttributes unknown{"zz", {0.0, 0.0, 0.0, 0.0}};
  CHECK_THROWS_AS(Cohort::build({rec("a", "x", {1, 2})}, {unknown}, s), Error);
  ImageAttributes out_of_range{"a", {0.0, 200.0, 0.0, 0.0}};
  try {
    Cohort::build({rec("a", "x", {1, 2})}, {out_of_range}, s);
    FAIL("expected range violation");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("yaw") != std::string::npos);
    CHECK(msg.find("'a'") != std::string::npos);
    CHECK(msg.find("200") != std::string::npos);
  }
}

TEST_CASE("identity index is sorted") {
  const auto s = small_schema();
  const auto c = Cohort::build({rec("b2", "bob", {1, 0}), rec("a1", "amy", {0, 1}),
                                rec("b1", "bob", {1, 1})},
                               {}, s);
  REQUIRE(c.identities().size() == 2);
  CHECK(c.identities()[0].id == "amy");
  const auto& bob = c.identities()[1];
  CHECK(c.records()[bob.images[0]].image_id == "b1");
  CHECK(c.records()[bob.images[1]].image_id == "b2");
  CHECK(c.unattributed_images().size() == 3);
  CHECK(c.find_image("a1").has_value());
  CHECK_FALSE(c.find_identity("carl").has_value());
}

TEST_CASE("aggregation rules") {
  const auto s = small_schema();
  std::vector<EmbeddingRecord> records{rec("p1", "p", {1, 0}), rec("p2", "p", {0, 1}),
                                       rec("p3", "p", {1, 1}), rec("p4", "p", {1, 2})};
  std::vector<ImageAttributes> attrs{
      {"p1", {1.0, 5.0, 1.0, 2.0}},
      {"p2", {1.0, 15.0, 0.0, 1.0}},
      {"p3", {1.0, std::nullopt, 1.0, 1.0}},
      {"p4", {1.0, 10.0, 0.0, 2.0}},
  };
  const auto c = Cohort::build(records, attrs, s);
  const auto profiles = aggregate_profiles(c, s);
  REQUIRE(profiles.size() == 1);
  const auto& p = profiles[0];
  CHECK(p.values[0] == 1.0);
  CHECK(p.values[1] == 10.0);                // mean of 5, 15, 10
  CHECK(p.coverage[1] == doctest::Approx(0.75));
  CHECK(p.values[2] == 1.0);                 // 2 vs 2 tie goes to 1
  CHECK(p.values[3] == 1.0);                 // levels 1 and 2 tie, lowest wins
  CHECK(p.complete());
}

TEST_CASE("aggregation is invariant to image order and exact for identical values") {
  const auto s = small_schema();
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<EmbeddingRecord> records;
    std::vector<ImageAttributes> attrs;
    const std::size_t n = 2 + rng.uniform_index(6);
    const double same = rng.uniform(-180.0, 180.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "img" + std::to_string(i);
      records.push_back(rec(id, "x", {1, 0}));
      attrs.push_back({id, {0.0, same, rng.bernoulli(0.5) ? 1.0 : 0.0,
                            static_cast<double>(rng.uniform_index(3))}});
    }
    const auto a = aggregate_profiles(Cohort::build(records, attrs, s), s);
    std::reverse(records.begin(), records.end());
    std::reverse(attrs.begin(), attrs.end());
    const auto b = aggregate_profiles(Cohort::build(records, attrs, s), s);
    CHECK(a[0].values == b[0].values);
    CHECK(a[0].values[1] == same);
  }
}

TEST_CASE("attribute file round trip and errors") {
  const auto s = small_schema();
  std::vector<ImageAttributes> rows{{"a", {0.0, -12.5, 1.0, 2.0}}, {"b", {1.0, std::nullopt, 0.0, 0.0}}};
  std::stringstream buf;
  write_attributes(buf, rows, s);
  const auto back = read_attributes(buf, s, "attrs");
  REQUIRE(back.size() == 2);
  CHECK(back[0].values == rows[0].values);
  CHECK(back[1].values == rows[1].values);

  std::stringstream partial("image_id,yaw\na,3\n");
  const auto p = read_attributes(partial, s, "partial");
  CHECK(p[0].values[1] == 3.0);
  CHECK_FALSE(p[0].values[0].has_value());
  std::stringstream bad_header("yaw,image_id\n3,a\n");
  CHECK_THROWS_AS(read_attributes(bad_header, s, "bad"), Error);
  std::stringstream unknown_col("image_id,height\na,3\n");
  CHECK_THROWS_AS(read_attributes(unknown_col, s, "bad"), Error);
  std::stringstream range("image_id,yaw\na,300\n");
  CHECK_THROWS_AS(read_attributes(range, s, "bad"), Error);
}

TEST_CASE("group specs and labels") {
  const auto s = AttributeSchema::face_default();
  const auto spec = make_group_spec(s, {"gender", "ethnicity"}, true);
  CHECK(spec.groups.size() == 12);
  CHECK(spec.groups.back().levels == std::vector<std::optional<int>>{std::nullopt, std::nullopt});
  CHECK(group_label(spec, s, spec.groups[0]) == "Man∩Asian");
  CHECK(group_label(spec, s, GroupKey{{1, std::nullopt}}) == "Woman∩(Asian∪Black∪Caucasian)");
  const auto fine = make_group_spec(s, {"gender", "ethnicity"}, false);
  CHECK(fine.groups.size() == 6);
  const auto single = make_group_spec(s, {"gender"}, true);
  CHECK(group_label(single, s, single.groups.back()) == "Man∪Woman");
  CHECK(groups_disjoint(GroupKey{{0, 1}}, GroupKey{{1, std::nullopt}}));
  CHECK_FALSE(groups_disjoint(GroupKey{{0, 1}}, GroupKey{{std::nullopt, 1}}));
  CHECK(group_contains(GroupKey{{std::nullopt, 2}}, {1, 2}));
  CHECK_THROWS_AS(make_group_spec(s, {"smile"}, true), Error);
  CHECK_THROWS_AS(make_group_spec(s, {"age"}, true), Error);
  CHECK_THROWS_AS(make_group_spec(s, {"gender", "gender"}, true), Error);
}
