#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "affordsim/containability.hpp"
#include "affordsim/json_io.hpp"
#include "affordsim/mesh_io.hpp"
#include "affordsim/pouring.hpp"

namespace affordsim {

/// Every tunable constant of a run. Defaults reproduce the reference setup.
struct RunConfig {
  double timestep = 1.0 / 240.0;
  long t_o = 1500;
  long t_p = 600;
  double gamma0 = 62.0 * std::numbers::pi / 180.0;
  double omega_thr = 0.0;
  int n_max = 200;
  int n_min = 40;
  int n_pour = 60;

  long drop_steps = 500;
  long settle_steps = 300;
  long tilt_steps = 450;
  double base_clearance = 0.01;
  double layer_spacing = 0.05;
  double ground_gap = 0.1;
  double plane_clearance = 0.01;
  double l0 = 0.01;
  double fill_gap = 0.001;

  ParticleSpec particle;
  CupSpec cup;
  double friction_mesh = 0.5;
  double friction_ground = 0.5;
  double restitution_threshold = 0.1;
  int solver_iterations = 4;
  ScheduleParams schedule;

  long frame_stride = 10;
  int jobs = 1;
  double scale = 1.0;
  bool with_pouring = false;

  void validate() const;

  SimParams sim_params() const {
    SimParams p;
    p.dt = timestep;
    p.friction_mesh = friction_mesh;
    p.friction_ground = friction_ground;
    p.restitution_threshold = restitution_threshold;
    p.solver_iterations = solver_iterations;
    return p;
  }

  ContainabilityConfig containability() const {
    ContainabilityConfig c;
    c.particle = particle;
    c.sim = sim_params();
    c.total_steps = t_o;
    c.drop_steps = drop_steps;
    c.omega_thr = omega_thr;
    c.n_max = n_max;
    c.n_min = n_min;
    c.base_clearance = base_clearance;
    c.layer_spacing = layer_spacing;
    c.ground_gap = ground_gap;
    c.schedule = default_schedule(schedule);
    return c;
  }

  PouringConfig pouring() const {
    PouringConfig c;
    c.cup = cup;
    c.pour.particle = particle;
    c.pour.sim = sim_params();
    c.pour.n_pour = n_pour;
    c.pour.gamma0 = gamma0;
    c.pour.total_steps = t_p;
    c.pour.tilt_steps = tilt_steps;
    c.pour.settle_steps = settle_steps;
    c.pour.fill_gap = fill_gap;
    c.pour.ground_gap = ground_gap;
    c.l0 = l0;
    c.plane_clearance = plane_clearance;
    c.jobs = jobs;
    return c;
  }

  MeshLoadOptions load_options() const {
    MeshLoadOptions o;
    o.scale = scale;
    return o;
  }
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

inline bool positive(double x) { return std::isfinite(x) && x > 0.0; }
inline bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

/// Reads the keys of `obj` into the bound fields; unknown keys are rejected.
class KeyReader {
 public:
  KeyReader(const Json& obj, std::string scope) : obj_(obj), scope_(std::move(scope)) {
    if (!obj_.is_object()) throw Error(ErrorCode::kInvalidConfig, scope_ + " must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) fail(key, "a boolean");
      field = it->template get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) fail(key, "an integer");
      field = it->template get<T>();
    } else {
      if (!it->is_number()) fail(key, "a number");
      field = it->template get<T>();
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key)) throw Error(ErrorCode::kInvalidConfig, "unknown key '" + scope_ + key + "'");
  }

 private:
  [[noreturn]] void fail(const char* key, const char* kind) const {
    throw Error(ErrorCode::kInvalidConfig, "'" + scope_ + key + "' must be " + kind);
  }

  const Json& obj_;
  std::string scope_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline void RunConfig::validate() const {
  using detail::non_negative;
  using detail::positive;
  using detail::require;
  require(positive(timestep), "timestep must be positive");
  require(t_o > 0 && t_p > 0, "T_O and T_P must be positive");
  require(positive(gamma0) && gamma0 <= std::numbers::pi, "gamma0 must lie in (0, pi]");
  require(std::isfinite(omega_thr) && omega_thr >= 0.0 && omega_thr < 1.0, "omega_thr must lie in [0, 1)");
  require(n_max >= 1 && n_min >= 0 && n_min <= n_max, "need 0 <= n_min <= n_max and n_max >= 1");
  require(n_pour >= 1, "n_pour must be positive");
  require(drop_steps >= 0 && settle_steps >= 0, "drop and settle steps must be non-negative");
  require(tilt_steps >= 1 && tilt_steps <= t_p, "need 1 <= tilt_steps <= T_P");
  require(non_negative(base_clearance) && positive(layer_spacing) && positive(ground_gap), "grid spacing invalid");
  require(non_negative(plane_clearance) && non_negative(l0) && non_negative(fill_gap), "pour offsets invalid");
  require(positive(particle.radius) && positive(particle.mass), "particle radius and mass must be positive");
  require(non_negative(particle.restitution) && particle.restitution <= 1.0, "restitution must lie in [0, 1]");
  require(non_negative(particle.friction) && non_negative(friction_mesh) && non_negative(friction_ground),
          "friction coefficients must be non-negative");
  require(non_negative(restitution_threshold), "restitution_threshold must be non-negative");
  require(solver_iterations >= 1, "solver_iterations must be positive");
  require(std::isfinite(schedule.rotation_angle) && schedule.ramp_steps >= 0 && schedule.hold_steps >= 0 &&
              non_negative(schedule.force_magnitude) && schedule.force_steps >= 0 && schedule.final_rest_steps >= 0,
          "schedule parameters invalid");
  require(drop_steps + default_schedule(schedule).total_steps() <= t_o,
          "drop plus perturbation steps exceed T_O");
  require(frame_stride >= 1, "frame_stride must be positive");
  require(jobs >= 1, "jobs must be positive");
  require(positive(scale), "scale must be positive");
  try {
    cup.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
}

inline RunConfig parse_run_config(const Json& j) {
  RunConfig c;
  detail::KeyReader r(j, "");
  r.read("timestep", c.timestep);
  r.read("T_O", c.t_o);
  r.read("T_P", c.t_p);
  r.read("gamma0", c.gamma0);
  r.read("omega_thr", c.omega_thr);
  r.read("n_max", c.n_max);
  r.read("n_min", c.n_min);
  r.read("n_pour", c.n_pour);
  r.read("drop_steps", c.drop_steps);
  r.read("settle_steps", c.settle_steps);
  r.read("tilt_steps", c.tilt_steps);
  r.read("base_clearance", c.base_clearance);
  r.read("layer_spacing", c.layer_spacing);
  r.read("ground_gap", c.ground_gap);
  r.read("plane_clearance", c.plane_clearance);
  r.read("l0", c.l0);
  r.read("fill_gap", c.fill_gap);
  r.read("friction_mesh", c.friction_mesh);
  r.read("friction_ground", c.friction_ground);
  r.read("restitution_threshold", c.restitution_threshold);
  r.read("solver_iterations", c.solver_iterations);
  r.read("frame_stride", c.frame_stride);
  r.read("jobs", c.jobs);
  r.read("scale", c.scale);
  r.read("with_pouring", c.with_pouring);
  if (const Json* p = r.child("particle")) {
    detail::KeyReader pr(*p, "particle.");
    pr.read("radius", c.particle.radius);
    pr.read("mass", c.particle.mass);
    pr.read("restitution", c.particle.restitution);
    pr.read("friction", c.particle.friction);
    pr.finish();
  }
  if (const Json* p = r.child("cup")) {
    detail::KeyReader cr(*p, "cup.");
    cr.read("mouth_inner_diameter", c.cup.mouth_inner_diameter);
    cr.read("bottom_inner_diameter", c.cup.bottom_inner_diameter);
    cr.read("inner_height", c.cup.inner_height);
    cr.read("wall_thickness", c.cup.wall_thickness);
    cr.read("tessellation_segments", c.cup.tessellation_segments);
    cr.finish();
  }
  if (const Json* p = r.child("schedule")) {
    detail::KeyReader sr(*p, "schedule.");
    sr.read("rotation_angle", c.schedule.rotation_angle);
    sr.read("ramp_steps", c.schedule.ramp_steps);
    sr.read("hold_steps", c.schedule.hold_steps);
    sr.read("force_magnitude", c.schedule.force_magnitude);
    sr.read("force_steps", c.schedule.force_steps);
    sr.read("final_rest_steps", c.schedule.final_rest_steps);
    sr.finish();
  }
  r.finish();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

inline Json to_json(const RunConfig& c) {
  return Json{
      {"timestep", round9(c.timestep)},
      {"T_O", c.t_o},
      {"T_P", c.t_p},
      {"gamma0", round9(c.gamma0)},
      {"omega_thr", round9(c.omega_thr)},
      {"n_max", c.n_max},
      {"n_min", c.n_min},
      {"n_pour", c.n_pour},
      {"drop_steps", c.drop_steps},
      {"settle_steps", c.settle_steps},
      {"tilt_steps", c.tilt_steps},
      {"base_clearance", round9(c.base_clearance)},
      {"layer_spacing", round9(c.layer_spacing)},
      {"ground_gap", round9(c.ground_gap)},
      {"plane_clearance", round9(c.plane_clearance)},
      {"l0", round9(c.l0)},
      {"fill_gap", round9(c.fill_gap)},
      {"friction_mesh", round9(c.friction_mesh)},
      {"friction_ground", round9(c.friction_ground)},
      {"restitution_threshold", round9(c.restitution_threshold)},
      {"solver_iterations", c.solver_iterations},
      {"frame_stride", c.frame_stride},
      {"jobs", c.jobs},
      {"scale", round9(c.scale)},
      {"with_pouring", c.with_pouring},
      {"particle",
       {{"radius", round9(c.particle.radius)},
        {"mass", round9(c.particle.mass)},
        {"restitution", round9(c.particle.restitution)},
        {"friction", round9(c.particle.friction)}}},
      {"cup",
       {{"mouth_inner_diameter", round9(c.cup.mouth_inner_diameter)},
        {"bottom_inner_diameter", round9(c.cup.bottom_inner_diameter)},
        {"inner_height", round9(c.cup.inner_height)},
        {"wall_thickness", round9(c.cup.wall_thickness)},
        {"tessellation_segments", c.cup.tessellation_segments}}},
      {"schedule",
       {{"rotation_angle", round9(c.schedule.rotation_angle)},
        {"ramp_steps", c.schedule.ramp_steps},
        {"hold_steps", c.schedule.hold_steps},
        {"force_magnitude", round9(c.schedule.force_magnitude)},
        {"force_steps", c.schedule.force_steps},
        {"final_rest_steps", c.schedule.final_rest_steps}}},
  };
}

}  // namespace affordsim
