#pragma once

#include <chrono>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "affordsim/bvh.hpp"
#include "affordsim/error.hpp"
#include "affordsim/frame_export.hpp"
#include "affordsim/geometry.hpp"
#include "affordsim/physics.hpp"

namespace affordsim {

/// Drop lattice over the top face of the object's bounding box.
struct GridPlan {
  int n_x = 0;
  int n_y = 0;
  int n_z = 0;
  double scale_s = 1.0;
  double layer_spacing = 0.05;
  double base_clearance = 0.01;
  std::vector<Vec3> positions;

  int n_drop() const { return n_x * n_y * n_z; }
};

/// floor() that tolerates the rounding noise of ratios such as 0.3 / 0.01.
inline int tolerant_floor(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

inline GridPlan plan_grid(const Aabb& object_aabb, const ParticleSpec& particle, int n_max, int n_min,
                          double base_clearance = 0.01, double layer_spacing = 0.05) {
  const Vec3 ext = object_aabb.extent();
  if (!object_aabb.valid() || !(ext.x() > 0.0) || !(ext.y() > 0.0))
    throw Error(ErrorCode::kDegenerateAabb, "object bounding box has zero x or y extent");
  if (n_min > n_max || n_max < 1 || n_min < 0)
    throw Error(ErrorCode::kInvalidConfig, "need 0 <= n_min <= n_max and n_max >= 1");

  const double particle_extent = 2.0 * particle.radius;
  GridPlan plan;
  plan.base_clearance = base_clearance;
  plan.layer_spacing = layer_spacing;

  const int nx1 = std::max(1, tolerant_floor(ext.x() / particle_extent));
  const int ny1 = std::max(1, tolerant_floor(ext.y() / particle_extent));
  const long base = static_cast<long>(nx1) * ny1;
  plan.n_x = nx1;
  plan.n_y = ny1;
  plan.n_z = 1;
  if (base > n_max) {
    plan.scale_s = std::sqrt(static_cast<double>(n_max) / static_cast<double>(base));
    plan.n_x = std::max(1, tolerant_floor(plan.scale_s * ext.x() / particle_extent));
    plan.n_y = std::max(1, tolerant_floor(plan.scale_s * ext.y() / particle_extent));
  } else if (base < n_min) {
    plan.n_z = static_cast<int>((n_min + base - 1) / base);
  }

  const double dx = ext.x() / plan.n_x;
  const double dy = ext.y() / plan.n_y;
  const double z0 = object_aabb.max.z() + base_clearance;
  plan.positions.reserve(static_cast<std::size_t>(plan.n_drop()));
  for (int k = 0; k < plan.n_z; ++k)
    for (int j = 0; j < plan.n_y; ++j)
      for (int i = 0; i < plan.n_x; ++i)
        plan.positions.emplace_back(object_aabb.min.x() + (i + 0.5) * dx, object_aabb.min.y() + (j + 0.5) * dy,
                                    z0 + k * layer_spacing);
  return plan;
}

struct RotatePhase {
  int axis = 0;  // 0 = x, 1 = y
  double angle = 0.0;
  long ramp_steps = 0;
  long hold_steps = 0;
};

struct ForceFieldPhase {
  Vec3 direction = Vec3::UnitX();
  double magnitude = 0.0;
  long duration_steps = 0;
};

struct RestPhase {
  long duration_steps = 0;
};

using PerturbationPhase = std::variant<RotatePhase, ForceFieldPhase, RestPhase>;

inline long phase_steps(const PerturbationPhase& phase) {
  return std::visit(
      [](const auto& p) -> long {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RotatePhase>) return 2 * p.ramp_steps + p.hold_steps;
        else return p.duration_steps;
      },
      phase);
}

/// Ordered post-drop perturbations. A rotate phase ramps the object to the
/// angle, holds it, then ramps back over the same number of steps.
struct PerturbationSchedule {
  std::vector<PerturbationPhase> phases;

  long total_steps() const {
    long sum = 0;
    for (const auto& p : phases) sum += phase_steps(p);
    return sum;
  }
};

struct ScheduleParams {
  double rotation_angle = std::numbers::pi / 60.0;
  long ramp_steps = 50;
  long hold_steps = 25;
  double force_magnitude = 0.5;
  long force_steps = 100;
  long final_rest_steps = 100;
};

/// Tilts about x (+, -) then y (+, -), pushes along +x, -x, +y, -y, then rests.
inline PerturbationSchedule default_schedule(const ScheduleParams& p = {}) {
  PerturbationSchedule s;
  for (int axis : {0, 1})
    for (double sign : {1.0, -1.0}) s.phases.push_back(RotatePhase{axis, sign * p.rotation_angle, p.ramp_steps, p.hold_steps});
  for (const Vec3& dir : {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0)})
    s.phases.push_back(ForceFieldPhase{dir, p.force_magnitude, p.force_steps});
  if (p.final_rest_steps > 0) s.phases.push_back(RestPhase{p.final_rest_steps});
  return s;
}

inline void run_drop(SimWorld& world, const GridPlan& grid, long drop_steps) {
  if (world.size() != 0) throw Error(ErrorCode::kInvalidSpec, "drop requires a world without particles");
  spawn_particles(world, grid.positions);
  apply_force_field(world, Vec3::Zero());
  run_steps(world, drop_steps);
}

/// Runs the schedule against the world's object. `step_budget` bounds the
/// world's step counter at the end of the schedule.
inline void run_perturbations(SimWorld& world, const PerturbationSchedule& schedule, long step_budget) {
  if (world.step_count + schedule.total_steps() > step_budget)
    throw Error(ErrorCode::kScheduleOverflow, "schedule needs " + std::to_string(schedule.total_steps()) +
                                                  " steps but only " +
                                                  std::to_string(step_budget - world.step_count) + " remain");
  if (!world.object) throw Error(ErrorCode::kInvalidSpec, "perturbations need an object");
  const RigidTransform home = world.object->pose;

  for (const auto& phase : schedule.phases) {
    if (const auto* rot = std::get_if<RotatePhase>(&phase)) {
      const long s0 = world.step_count;
      if (rot->ramp_steps <= 0) {
        run_steps(world, rot->hold_steps);
        continue;
      }
      const Vec3 axis = rot->axis == 0 ? Vec3::UnitX() : Vec3::UnitY();
      RigidTransform tilted = home;
      tilted.rotation = rotation_about(axis, rot->angle) * home.rotation;
      KinematicMotion motion;
      motion.keyframes = {{s0, home},
                          {s0 + rot->ramp_steps, tilted},
                          {s0 + rot->ramp_steps + rot->hold_steps, tilted},
                          {s0 + 2 * rot->ramp_steps + rot->hold_steps, home}};
      if (rot->hold_steps == 0) motion.keyframes.erase(motion.keyframes.begin() + 2);
      drive_kinematic(world, BodySlot::kObject, std::move(motion));
      run_steps(world, phase_steps(phase));
    } else if (const auto* force = std::get_if<ForceFieldPhase>(&phase)) {
      apply_force_field(world, force->direction.normalized() * force->magnitude);
      run_steps(world, force->duration_steps);
      apply_force_field(world, Vec3::Zero());
    } else {
      run_steps(world, std::get<RestPhase>(phase).duration_steps);
    }
  }
  world.object->motion.reset();
  world.object->pose = home;
  apply_force_field(world, Vec3::Zero());
}

/// Particle centres strictly inside the box.
inline int count_retained(const SimWorld& world, const Aabb& object_aabb) {
  int n = 0;
  for (const auto& p : world.positions) n += object_aabb.strictly_contains(p) ? 1 : 0;
  return n;
}

struct ContainabilityConfig {
  ParticleSpec particle;
  SimParams sim;
  long total_steps = 1500;  // T_O
  long drop_steps = 500;
  double omega_thr = 0.0;
  int n_max = 200;
  int n_min = 40;
  double base_clearance = 0.01;
  double layer_spacing = 0.05;
  /// Ground plane distance below the object's lowest point.
  double ground_gap = 0.1;
  PerturbationSchedule schedule = default_schedule();
  /// Optional frame sink; receives simulation-frame states.
  FrameWriter* frames = nullptr;
};

struct ContainabilityResult {
  double omega = 0.0;
  int n_in = 0;
  int n_drop = 0;
  Footprint footprint;
  bool is_open_container = false;
  GridPlan grid;  // world coordinates
  Aabb object_aabb;  // world coordinates
  Vec3 centroid = Vec3::Zero();
  double runtime_seconds = 0.0;
};

inline double omega_score(int n_in, int n_drop) {
  return n_drop > 0 ? static_cast<double>(n_in) / static_cast<double>(n_drop) : 0.0;
}

/// Object placed in a simulation frame whose origin is the world AABB's min
/// corner; the body frame sits at the surface centroid with world-aligned axes.
struct ObjectScene {
  Vec3 offset = Vec3::Zero();
  Aabb aabb;  // simulation frame
  Vec3 centroid = Vec3::Zero();  // simulation frame
  std::shared_ptr<const CollisionIndex> index;

  RigidTransform pose() const { return RigidTransform::from_translation(centroid); }
};

inline ObjectScene make_object_scene(const TriangleMesh& mesh) {
  ObjectScene scene;
  const Aabb world_box = compute_aabb(mesh);
  scene.offset = world_box.min;
  TriangleMesh local = mesh;
  for (auto& v : local.vertices) v -= scene.offset;
  scene.aabb = compute_aabb(local);
  scene.centroid = compute_centroid(local);
  for (auto& v : local.vertices) v -= scene.centroid;
  scene.index = build_collision_index(std::move(local));
  return scene;
}

inline SimWorld make_object_world(const ObjectScene& scene, const ParticleSpec& particle, SimParams sim,
                                  double ground_gap) {
  SimWorld world;
  world.particle = particle;
  sim.ground_z = scene.aabb.min.z() - ground_gap;
  world.params = sim;
  world.object = KinematicBody{scene.index, scene.pose(), std::nullopt};
  return world;
}

inline ContainabilityResult imagine_containability(const TriangleMesh& mesh, const ContainabilityConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.particle.validate();
  const ObjectScene scene = make_object_scene(mesh);
  SimWorld world = make_object_world(scene, cfg.particle, cfg.sim, cfg.ground_gap);
  if (cfg.frames) {
    cfg.frames->set_offset(scene.offset);
    world.on_step = cfg.frames->observer();
  }

  GridPlan grid = plan_grid(scene.aabb, cfg.particle, cfg.n_max, cfg.n_min, cfg.base_clearance, cfg.layer_spacing);
  if (cfg.drop_steps + cfg.schedule.total_steps() > cfg.total_steps)
    throw Error(ErrorCode::kScheduleOverflow, "drop plus perturbation steps exceed the imagination budget");
  run_drop(world, grid, cfg.drop_steps);
  run_perturbations(world, cfg.schedule, cfg.total_steps);
  run_steps(world, cfg.total_steps - world.step_count);

  ContainabilityResult result;
  result.n_drop = grid.n_drop();
  for (std::size_t i = 0; i < world.size(); ++i) {
    if (scene.aabb.strictly_contains(world.positions[i])) {
      ++result.n_in;
      result.footprint.points.push_back(world.initial_positions[i].head<2>() + scene.offset.head<2>());
    }
  }
  result.omega = omega_score(result.n_in, result.n_drop);
  result.is_open_container = result.omega > cfg.omega_thr;
  for (auto& p : grid.positions) p += scene.offset;
  result.grid = std::move(grid);
  result.object_aabb = scene.aabb.translated(scene.offset);
  result.centroid = scene.centroid + scene.offset;
  result.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace affordsim
