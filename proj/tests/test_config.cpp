#include "tcbm/config.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace tcbm;

namespace {

const char* kMinimal = R"(# worked instance
[scenario]
r_hat = 10
e_setup = 0
k0 = 1
alpha = 2
[workload]
m0 = 100
dirty_rate = 1
[qos]
delta_tm = 100
delta_dt = 4
beta = 2
[partition]
i_max = 0
)";

std::string parse_error(const std::string& text) {
  try {
    parse_config(text, "test.ini");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ParseConfig, ExplicitInstance) {
  const auto c = parse_config(kMinimal);
  EXPECT_DOUBLE_EQ(c.scenario.r_hat, 10.0);
  EXPECT_DOUBLE_EQ(c.workload.m0, 100.0);
  EXPECT_DOUBLE_EQ(c.qos.delta_dt, 4.0);
  EXPECT_EQ(c.i_max, 0);
  EXPECT_EQ(c.q, 1);
}

TEST(ParseConfig, ScientificNotation) {
  const auto c = parse_config(std::string(kMinimal) + "[solver]\ntolerance = 1e-10\n");
  EXPECT_DOUBLE_EQ(c.solver.tolerance, 1e-10);
}

TEST(ParseConfig, PresetFillsScenario) {
  const auto c = parse_config("[scenario]\npreset = 4G\n[partition]\nq = full\n");
  EXPECT_DOUBLE_EQ(c.scenario.r_hat, 45.0);
  EXPECT_DOUBLE_EQ(c.workload.m0, 256.0);
  EXPECT_DOUBLE_EQ(c.workload.dirty_rate, 11.25);
  EXPECT_EQ(c.q, 0);
  EXPECT_EQ(c, parse_config("[partition]\nq = full\n", "x", std::string("4g")));
}

TEST(ParseConfig, UnknownKeyCitesLine) {
  const auto what = parse_error(std::string(kMinimal) + "[qos]\nbogus = 3\n");
  EXPECT_NE(what.find("test.ini:17: unknown key qos.bogus"), std::string::npos) << what;
}

TEST(ParseConfig, DuplicateKey) {
  const auto what = parse_error(std::string(kMinimal) + "[workload]\nm0 = 5\n");
  EXPECT_NE(what.find("duplicate key workload.m0"), std::string::npos) << what;
}

TEST(ParseConfig, BadNumberCitesKey) {
  std::string text = kMinimal;
  text.replace(text.find("k0 = 1"), 6, "k0 = fast");
  const auto what = parse_error(text);
  EXPECT_NE(what.find("test.ini:5: scenario.k0: expected a number"), std::string::npos) << what;
}

TEST(ParseConfig, RequiredKeysWithoutPreset) {
  std::string text = kMinimal;
  text.erase(text.find("m0 = 100\n"), 9);
  const auto what = parse_error(text);
  EXPECT_NE(what.find("workload.m0 required"), std::string::npos) << what;
}

TEST(ParseConfig, InvalidValuesRejected) {
  EXPECT_THROW(parse_config(std::string(kMinimal) + "[tracker]\na_max = -1\n"), Error);
  EXPECT_THROW(parse_config("[scenario]\npreset = 5g\n"), Error);
  EXPECT_THROW(parse_config("r_hat = 3\n"), Error);
}

TEST(RenderConfig, RoundTrip) {
  for (const char* key : {"3g", "4g", "wifi"}) {
    auto c = preset_config(key);
    c.tracker.a_max = 0.05;
    c.xen_rounds = {3, 9};
    c.solver.tolerance = 1.0 / 3.0 * 1e-8;
    EXPECT_EQ(parse_config(render_config(c)), c) << key;
  }
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(parse_config(render_config(c)), c);
}

TEST(RenderConfig, CommentRoundTrip) {
  const auto c = preset_config("wifi");
  const std::string body = render_config_comment(c) + "n,E\n0,1\n";
  EXPECT_EQ(strip_config_comment(body), render_config(c));
  EXPECT_EQ(parse_config(strip_config_comment(body)), c);
}
