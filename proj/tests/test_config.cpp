#include <gtest/gtest.h>

#include <filesystem>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "slewshape/batch.hpp"
#include "slewshape/config.hpp"

using namespace slewshape;
using nlohmann::json;

namespace {

std::string field_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<none>";
}

AnalysisConfig tiny() {
  AnalysisConfig c;
  c.radius_grid = {0.4, 0.7};
  c.boom_length_grid = {0.6096, 0.9144};
  c.speed_fractions = {1.0};
  return c;
}

}  // namespace

TEST(AnalysisConfig, JsonRoundTrip) {
  AnalysisConfig c = tiny();
  c.crane.payload_mass = 0.123;
  c.maneuver.angle = 1.0;
  c.resolution = 0.002;
  const json j = to_json(c);
  const AnalysisConfig back = analysis_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.crane.payload_mass, 0.123);
  EXPECT_EQ(back.radius_grid, c.radius_grid);
  EXPECT_EQ(fingerprint(back), fingerprint(c));
}

TEST(AnalysisConfig, PartialDocumentKeepsDefaults) {
  const auto c = analysis_from_json(json::parse(R"({"crane": {"rope_length": 0.5}})"));
  EXPECT_EQ(c.crane.rope_length, 0.5);
  EXPECT_EQ(c.crane.radius, CraneConfig{}.radius);
  EXPECT_EQ(c.radius_grid, AnalysisConfig{}.radius_grid);
}

TEST(AnalysisConfig, ErrorsNameTheField) {
  EXPECT_EQ(field_of([] { analysis_from_json(json::parse(R"({"crane": {"payload_mass": -1}})")); }),
            "crane.payload_mass");
  EXPECT_EQ(field_of([] { analysis_from_json(json::parse(R"({"crane": {"rope_length": "long"}})")); }),
            "crane.rope_length");
  EXPECT_EQ(field_of([] { analysis_from_json(json::parse(R"({"crane": {"wheels": 4}})")); }), "crane.wheels");
  EXPECT_EQ(field_of([] { analysis_from_json(json::parse(R"({"grids": {"radius": []}})")); }), "grids.radius");
  EXPECT_EQ(field_of([] { analysis_from_json(json::parse(R"({"sweep": {"resolution": 0}})")); }),
            "sweep.resolution");
  EXPECT_EQ(field_of([] { analysis_from_json(json::parse(R"({"extra": 1})")); }), "extra");
}

TEST(AnalysisConfig, Overrides) {
  const auto c = apply_overrides(AnalysisConfig{}, {"crane.payload_mass=0.2", "grids.radius=[0.5]"});
  EXPECT_EQ(c.crane.payload_mass, 0.2);
  EXPECT_EQ(c.radius_grid, std::vector<double>{0.5});
  EXPECT_EQ(field_of([] { apply_overrides(AnalysisConfig{}, {"crane.payload_mass=-3"}); }), "crane.payload_mass");
  EXPECT_THROW(apply_overrides(AnalysisConfig{}, {"crane.payload_mass"}), ConfigError);
  EXPECT_THROW(apply_overrides(AnalysisConfig{}, {"crane.payload_mass=abc"}), ConfigError);
}

TEST(Fingerprint, StableAndSensitive) {
  const AnalysisConfig a;
  const std::string fp = fingerprint(a);
  EXPECT_EQ(fp.size(), 16u);
  EXPECT_EQ(fp, fingerprint(AnalysisConfig{}));
  AnalysisConfig b;
  b.crane.payload_mass += 1e-9;
  EXPECT_NE(fingerprint(b), fp);
}

TEST(Fingerprint, KnownVectors) {
  auto fnv = [](const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
  };
  EXPECT_EQ(fnv(""), "cbf29ce484222325");
  EXPECT_EQ(fnv("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fingerprint(json("a")), fnv("\"a\""));
  EXPECT_EQ(fingerprint(json::object()), fnv("{}"));
}

TEST(DefaultConfigFile, MatchesBuiltInDefaults) {
  const auto path = std::filesystem::path(SLEWSHAPE_SOURCE_DIR) / "data" / "default_config.json";
  const AnalysisConfig c = load_analysis_config(path.string());
  EXPECT_EQ(to_json(c), to_json(AnalysisConfig{}));
}

TEST(Batch, KindsParse) {
  for (const char* k : {"loadchart", "failmap", "speedlimits", "compare"}) EXPECT_EQ(to_string(parse_analysis_kind(k)), k);
  EXPECT_THROW(parse_analysis_kind("plot"), std::invalid_argument);
}

TEST(Batch, RowCountsAndFingerprintLine) {
  const AnalysisConfig c = tiny();
  const auto chart = run_analysis(AnalysisKind::LoadChart, c);
  ASSERT_EQ(chart.size(), 1u);
  EXPECT_EQ(chart[0].name, "loadchart.csv");
  EXPECT_EQ(chart[0].rows, 3u);  // R = 0.7 exceeds L_b = 0.6096
  EXPECT_EQ(chart[0].content.rfind("# config_fingerprint=" + fingerprint(c) + "\n", 0), 0u);

  const auto fail = run_analysis(AnalysisKind::FailMap, c);
  EXPECT_EQ(fail[0].rows, 6u);  // 3 cells x (unshaped, shaped)

  AnalysisConfig one;
  one.radius_grid = {0.7};
  one.boom_length_grid = {0.9144};
  EXPECT_EQ(run_analysis(AnalysisKind::LoadChart, one)[0].rows, 1u);
  EXPECT_EQ(run_analysis(AnalysisKind::SpeedLimits, one)[0].rows, 2u);
  const auto cmp = run_analysis(AnalysisKind::Compare, one);
  EXPECT_EQ(cmp[0].rows, 1u);
  EXPECT_EQ(run_analysis(AnalysisKind::Compare, one)[0].content, cmp[0].content);
}

TEST(Batch, CompareMatchesDirectCall) {
  AnalysisConfig c;
  c.radius_grid = {0.5, 0.8};
  CraneConfig crane = c.crane;
  crane.boom_length = c.sweep_boom_length;
  std::ostringstream os;
  write_compare_csv(os, compare_shaped_unshaped(sweep_pairs(c), crane, c.resolution, c.maneuver), fingerprint(c));
  EXPECT_EQ(run_analysis(AnalysisKind::Compare, c)[0].content, os.str());
}
