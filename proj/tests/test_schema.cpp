#include <gtest/gtest.h>

#include "nestbench/beam.hpp"
#include "nestbench/error.hpp"
#include "nestbench/schema.hpp"
#include "support.hpp"

using namespace nestbench;
using namespace testsupport;

namespace {

PropertyTree device_tree() {
  auto sensors = obj("sensors", "Sensors", "Sensors built into the device", {"type"});
  sensors.value_kind = {Kind::Array, Kind::Object, {}};
  auto source = leaf("source", "Source", "Name of the rating source", Kind::Enum);
  source.value_kind.variants = {"IMDb", "Rotten Tomatoes", "Metacritic"};
  return PropertyTree(
      "Electronics", "dims",
      {obj("dims", "Dimensions", "Physical characteristics", {"weight", "sensors", "source"}),
       leaf("weight", "Weight", "Weight of the device in grams", Kind::Number), sensors,
       obj("type", "SensorType", "Sensor classification", {"sub"}),
       obj("sub", "SensorSubtype", "Sensor sub-classification", {"cal"}),
       leaf("cal", "CalibrationData", "Calibration factor", Kind::Number), source});
}

Subtree grow_all(const PropertyTree& t, NodeIndex root) {
  Subtree s(root);
  std::vector<NodeIndex> stack{root};
  while (!stack.empty()) {
    auto u = stack.back();
    stack.pop_back();
    for (auto c : t.node(u).children) {
      s.add_edge(u, c);
      stack.push_back(c);
    }
  }
  return s;
}

// Schema levels computed straight from the tree's value kinds.
int kind_depth(const PropertyTree& t, const Subtree& s, NodeIndex u) {
  int below = 0;
  for (auto c : t.node(u).children) {
    if (s.contains(c)) below = std::max(below, kind_depth(t, s, c));
  }
  const auto& vk = t.node(u).value_kind;
  return 1 + (vk.is_array() ? 1 : 0) + below;
}

SchemaDoc parse(const char* text) { return SchemaDoc::from_json(json::parse(text)); }

const char* kFlat = R"({"title":"R","type":"object","description":"r","required":["a"],
  "properties":{"a":{"title":"a","type":"string","description":"a"}}})";

const char* kDeep = R"({"title":"R","type":"object","description":"r","required":["xs"],
  "properties":{"xs":{"title":"xs","type":"array","description":"x","items":
    {"title":"X","type":"object","description":"x","required":["o"],"properties":{
      "o":{"title":"o","type":"object","description":"o","required":["v"],"properties":{
        "v":{"title":"v","type":"number","description":"v"}}}}}}}})";

}  // namespace

TEST(EmitSchema, MinimalShape) {
  auto t = PropertyTree("d", "r", {obj("r", "Root", "root", {"a"}), leaf("a", "Name", "")});
  auto doc = emit_schema(grow_all(t, t.root()), t);
  EXPECT_EQ(doc.root.type, SchemaType::Object);
  ASSERT_EQ(doc.root.properties.size(), 1u);
  EXPECT_EQ(doc.root.required, (std::vector<std::string>{"Name"}));
  EXPECT_EQ(doc.root.properties[0].type, SchemaType::String);
  EXPECT_EQ(doc.root.properties[0].description, "Name");
  EXPECT_TRUE(schema_invariant_errors(doc).empty());
}

TEST(EmitSchema, DimensionsBranch) {
  auto t = device_tree();
  auto doc = emit_schema(grow_all(t, t.root()), t);
  auto j = doc.to_json();
  EXPECT_EQ(j["required"], json::parse(R"(["Weight","Sensors","Source"])"));
  EXPECT_EQ(j["properties"]["Weight"]["type"], "number");
  EXPECT_EQ(j["properties"]["Weight"]["description"], "Weight of the device in grams");
  const auto& sensors = j["properties"]["Sensors"];
  EXPECT_EQ(sensors["type"], "array");
  EXPECT_EQ(sensors["items"]["type"], "object");
  EXPECT_EQ(sensors["items"]["title"], "SensorsItem");
  EXPECT_EQ(sensors["items"]["required"], json::parse(R"(["SensorType"])"));
  const auto& src = j["properties"]["Source"];
  EXPECT_EQ(src["type"], "string");
  EXPECT_EQ(src["enum"], json::parse(R"(["IMDb","Rotten Tomatoes","Metacritic"])"));
  EXPECT_EQ(SchemaDoc::from_json(j).to_json(), j);
  EXPECT_EQ(schema_depth(doc), 6);
}

TEST(EmitSchema, UnspecifiedKindNamesTheNode) {
  NodeSpec mystery{"m", "Mystery", "", {}, {}};
  mystery.value_kind.kind = Kind::Unspecified;
  auto t = PropertyTree("d", "r", {obj("r", "Root", "", {"m"}), mystery});
  try {
    emit_schema(grow_all(t, t.root()), t);
    FAIL() << "expected EmissionError";
  } catch (const EmissionError& e) {
    EXPECT_NE(std::string(e.what()).find("m"), std::string::npos);
  }
}

TEST(SchemaDepth, Conventions) {
  EXPECT_EQ(schema_depth(parse(kFlat)), 2);
  EXPECT_EQ(schema_depth(parse(R"({"title":"R","type":"object","description":"r","required":["o"],
    "properties":{"o":{"title":"o","type":"object","description":"o","required":["v"],
      "properties":{"v":{"title":"v","type":"string","description":"v"}}}}})")),
            3);
  EXPECT_EQ(schema_depth(parse(kDeep)), 5);
  EXPECT_EQ(schema_property_count(parse(kDeep)), 4);
}

TEST(Grading, Tiers) {
  EXPECT_EQ(grade_depth(3), Difficulty::Medium);
  EXPECT_EQ(grade_depth(4), Difficulty::Medium);
  EXPECT_EQ(grade_depth(5), Difficulty::Hard);
  EXPECT_EQ(grade_depth(7), Difficulty::Hard);
  EXPECT_THROW(grade_depth(8), GradingError);
  EXPECT_THROW(grade_depth(2), GradingError);
  EXPECT_EQ(grade_difficulty(parse(kDeep)), Difficulty::Hard);
  EXPECT_THROW(grade_difficulty(parse(kFlat)), GradingError);
}

TEST(Validate, Examples) {
  auto doc = parse(R"({"title":"R","type":"object","description":"r","required":["Memory","Dimensions"],
    "properties":{"Memory":{"title":"Memory","type":"number","description":"Amount of RAM in GB"},
      "Dimensions":{"title":"Dimensions","type":"object","description":"d","required":["Weight","Sensors"],
        "properties":{"Weight":{"title":"Weight","type":"number","description":"w"},
          "Sensors":{"title":"Sensors","type":"array","description":"s","items":
            {"title":"SensorsItem","type":"string","description":"s","enum":["a","b"]}}}}}})");
  auto gold = json::parse(R"({"Memory":4,"Dimensions":{"Weight":46.7,"Sensors":["a","b"]}})");
  EXPECT_TRUE(validate_instance(doc, gold).pass);

  auto bad = gold;
  bad["Memory"] = "4 GB";
  auto r = validate_instance(doc, bad);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, ViolationKind::Type);
  EXPECT_EQ(r.violations[0].path, "Memory");

  auto missing = gold;
  missing["Dimensions"].erase("Sensors");
  r = validate_instance(doc, missing);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, ViolationKind::Required);
  EXPECT_EQ(r.violations[0].path, "Dimensions.Sensors");

  auto enum_bad = gold;
  enum_bad["Dimensions"]["Sensors"][1] = "c";
  r = validate_instance(doc, enum_bad);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, ViolationKind::Enum);
  EXPECT_EQ(r.violations[0].path, "Dimensions.Sensors.1");

  auto extra = gold;
  extra["Colour"] = "red";
  EXPECT_FALSE(validate_instance(doc, extra).pass);
  EXPECT_TRUE(validate_instance(doc, extra, ValidationOptions{false}).pass);

  auto ints = gold;
  ints["Dimensions"]["Weight"] = 46;
  EXPECT_TRUE(validate_instance(doc, ints).pass);
}

TEST(SchemaDocJson, RejectsOutsideSubset) {
  EXPECT_THROW(parse(R"({"title":"R","type":"integer","description":"r"})"), EmissionError);
  EXPECT_THROW(parse(R"({"title":"R","type":"object","description":"r","required":["x"],"properties":{}})"),
               EmissionError);
  EXPECT_THROW(parse(R"({"title":"R","type":"number","description":"r","enum":["a"]})"), EmissionError);
  EXPECT_THROW(parse(R"({"title":"R","type":"array","description":"r"})"), EmissionError);
}

TEST(SchemaProperties, DepthMatchesKindRecursionAndSelfValidates) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 150; ++trial) {
    auto t = random_tree(rng, 1 + static_cast<int>(rng() % 15));
    for (const auto& s : enumerate_connected_subtrees(t, 4, 6)) {
      if (rng() % 8 != 0) continue;
      auto doc = emit_schema(s, t);
      EXPECT_EQ(schema_depth(doc), kind_depth(t, s, s.root()));
      EXPECT_TRUE(schema_invariant_errors(doc).empty());
      EXPECT_EQ(SchemaDoc::from_json(doc.to_json()).to_json(), doc.to_json());
      const int d = schema_depth(doc);
      if (d >= 3 && d <= 7) EXPECT_EQ(grade_difficulty(doc), d <= 4 ? Difficulty::Medium : Difficulty::Hard);
    }
  }
}
