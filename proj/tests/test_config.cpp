#include <numbers>

#include "test_util.hpp"

using namespace affordsim;

namespace {

ErrorCode config_error(const char* text) {
  try {
    parse_run_config(Json::parse(text)).validate();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kUsage;
}

}  // namespace

TEST(RunConfig, DefaultsMatchStatedConstants) {
  const RunConfig c;
  c.validate();
  EXPECT_EQ(c.timestep, 1.0 / 240.0);
  EXPECT_EQ(c.t_o, 1500);
  EXPECT_EQ(c.t_p, 600);
  EXPECT_NEAR(c.gamma0, 62.0 * std::numbers::pi / 180.0, 1e-15);
  EXPECT_EQ(c.omega_thr, 0.0);
  EXPECT_EQ(c.n_max, 200);
  EXPECT_EQ(c.n_min, 40);
  EXPECT_EQ(c.n_pour, 60);
  EXPECT_EQ(c.particle.restitution, 0.1);
  EXPECT_EQ(c.base_clearance, 0.01);
  EXPECT_EQ(c.layer_spacing, 0.05);

  const ContainabilityConfig cc = c.containability();
  EXPECT_EQ(cc.total_steps, 1500);
  const PouringConfig pc = c.pouring();
  EXPECT_EQ(pc.pour.total_steps, 600);
  EXPECT_EQ(pc.pour.n_pour, 60);
}

TEST(RunConfig, EmptyDocumentIsDefault) {
  EXPECT_EQ(to_json(parse_run_config(Json::object())), to_json(RunConfig{}));
}

TEST(RunConfig, OverridesApply) {
  const RunConfig c = parse_run_config(Json::parse(
      R"({"omega_thr": 0.25, "n_max": 120, "particle": {"radius": 0.004}, "cup": {"inner_height": 0.12},
          "schedule": {"force_magnitude": 0.3}})"));
  EXPECT_EQ(c.omega_thr, 0.25);
  EXPECT_EQ(c.n_max, 120);
  EXPECT_EQ(c.particle.radius, 0.004);
  EXPECT_EQ(c.cup.inner_height, 0.12);
  EXPECT_EQ(c.schedule.force_magnitude, 0.3);
  EXPECT_EQ(c.containability().omega_thr, 0.25);
}

TEST(RunConfig, RoundTripsThroughJson) {
  RunConfig c;
  c.n_min = 30;
  c.particle.friction = 0.7;
  c.jobs = 3;
  EXPECT_EQ(to_json(parse_run_config(to_json(c))), to_json(c));
}

TEST(RunConfig, RejectsUnknownKeysAndBadTypes) {
  EXPECT_EQ(config_error(R"({"omega": 0.1})"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(config_error(R"({"particle": {"radius": 0.01, "color": 1}})"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(config_error(R"({"n_max": 1.5})"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(config_error(R"({"omega_thr": "0.1"})"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(config_error(R"({"with_pouring": 1})"), ErrorCode::kInvalidConfig);
  EXPECT_EQ(config_error(R"([1, 2])"), ErrorCode::kInvalidConfig);
}

TEST(RunConfig, RejectsInvalidValues) {
  for (const char* text : {R"({"timestep": 0})", R"({"omega_thr": 1.0})", R"({"omega_thr": -0.1})",
                           R"({"n_min": 300})", R"({"n_pour": 0})", R"({"T_O": 900})", R"({"tilt_steps": 700})",
                           R"({"particle": {"radius": -1}})", R"({"particle": {"restitution": 1.5}})",
                           R"({"cup": {"bottom_inner_diameter": 0.2}})", R"({"jobs": 0})", R"({"gamma0": 4})",
                           R"({"solver_iterations": 0})", R"({"scale": 0})"})
    EXPECT_EQ(config_error(text), ErrorCode::kInvalidConfig) << text;
}

TEST(RunConfig, LoadErrors) {
  testutil::TempDir dir("config");
  try {
    load_run_config(dir / "none.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFileNotFound);
  }
  testutil::write_file(dir / "bad.json", "{\"n_max\": ");
  try {
    load_run_config(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
  }
}
