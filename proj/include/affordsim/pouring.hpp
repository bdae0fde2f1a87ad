#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <vector>

#include "affordsim/containability.hpp"
#include "affordsim/parallel.hpp"
#include "affordsim/shapes.hpp"

namespace affordsim {

struct CupSpec {
  double mouth_inner_diameter = 0.080;
  double bottom_inner_diameter = 0.060;
  double inner_height = 0.100;
  double wall_thickness = 0.003;
  int tessellation_segments = 64;

  void validate() const {
    const auto finite = [](double x) { return std::isfinite(x); };
    if (!finite(mouth_inner_diameter) || !finite(bottom_inner_diameter) || !finite(inner_height) ||
        !finite(wall_thickness))
      throw Error(ErrorCode::kInvalidSpec, "cup dimensions must be finite");
    if (!(bottom_inner_diameter > 0.0) || mouth_inner_diameter < bottom_inner_diameter)
      throw Error(ErrorCode::kInvalidSpec, "cup needs mouth >= bottom > 0");
    if (!(inner_height > 0.0)) throw Error(ErrorCode::kInvalidSpec, "cup height must be positive");
    if (!(wall_thickness > 0.0)) throw Error(ErrorCode::kInvalidSpec, "cup wall must be positive");
    if (tessellation_segments < 16) throw Error(ErrorCode::kInvalidSpec, "cup needs at least 16 segments");
  }
};

/// Cup in its body frame: axis +z, mouth up, origin at the mouth centre.
struct Cup {
  CupSpec spec;
  TriangleMesh mesh;
  Vec3 pivot_body = Vec3::Zero();
  /// Unit direction of the inner slant line from the pivot down to the bottom rim.
  Vec3 slant_body = -Vec3::UnitZ();
  std::shared_ptr<const CollisionIndex> index;

  double mouth_radius() const { return 0.5 * spec.mouth_inner_diameter; }
  double bottom_radius() const { return 0.5 * spec.bottom_inner_diameter; }
  /// Inner radius at body height z in [-h, 0].
  double inner_radius_at(double z) const {
    const double h = spec.inner_height;
    return bottom_radius() + (mouth_radius() - bottom_radius()) * (z + h) / h;
  }
};

inline Cup build_cup(const CupSpec& spec) {
  spec.validate();
  Cup cup;
  cup.spec = spec;
  const double rm = cup.mouth_radius(), rb = cup.bottom_radius();
  const double h = spec.inner_height, t = spec.wall_thickness;
  cup.mesh = shapes::lathe({{0.0, -h - t}, {rb + t, -h - t}, {rm + t, 0.0}, {rm, 0.0}, {rb, -h}, {0.0, -h}},
                           spec.tessellation_segments, "cup");
  cup.pivot_body = Vec3(-rm, 0.0, 0.0);
  cup.slant_body = Vec3(rm - rb, 0.0, -h).normalized();
  cup.index = build_collision_index(cup.mesh);
  return cup;
}

struct PourConfig {
  int theta_index = 0;
  int indent_index = 0;
  double theta_pour = 0.0;
  Vec2 p_pour = Vec2::Zero();  // plane-E coordinates
};

inline constexpr int kPourAngles = 8;
inline constexpr int kPourIndents = 3;
using PourTable = std::array<std::array<double, kPourIndents>, kPourAngles>;

inline double indent_step(const Aabb& object_aabb) {
  const Vec3 e = object_aabb.extent();
  return std::hypot(e.x(), e.y()) / 3.0;
}

inline std::vector<PourConfig> enumerate_pour_configs(const PlaneFrame& frame, const Aabb& object_aabb,
                                                      double l0 = 0.01) {
  (void)frame;  // p_pour is expressed in the frame's own coordinates
  const double dl = indent_step(object_aabb);
  std::vector<PourConfig> out;
  out.reserve(kPourAngles * kPourIndents);
  for (int i = 0; i < kPourAngles; ++i) {
    const double theta = i * std::numbers::pi / 4.0;
    for (int j = 0; j < kPourIndents; ++j) {
      const double l = l0 + j * dl;
      out.push_back({i, j, theta, rotate2d(theta) * Vec2(l, 0.0)});
    }
  }
  return out;
}

/// Tilt that brings the slant line through the pivot into the horizontal
/// plane, pointing along +x, with the pivot as the lowest mouth point.
inline Mat3 cup_tilt(const Cup& cup) {
  const Vec3& d = cup.slant_body;
  return rotation_about(Vec3::UnitY(), std::atan2(d.z(), d.x()));
}

/// Pivot position on plane E for a configuration, in world coordinates.
inline Vec3 pour_pivot_world(const PourConfig& config, const PlaneFrame& frame) {
  const Vec2 xy = frame.to_world(config.p_pour);
  return {xy.x(), xy.y(), frame.z};
}

inline RigidTransform cup_initial_pose(const PourConfig& config, const PlaneFrame& frame, const Cup& cup) {
  RigidTransform g;
  g.rotation = rotation_z(config.theta_pour + frame.heading()) * cup_tilt(cup);
  g.translation = pour_pivot_world(config, frame) - g.rotation * cup.pivot_body;
  return g;
}

struct PourParams {
  ParticleSpec particle;
  SimParams sim;
  int n_pour = 60;
  double gamma0 = 62.0 * std::numbers::pi / 180.0;
  long total_steps = 600;  // T_P
  long tilt_steps = 450;
  long settle_steps = 300;
  double fill_gap = 0.001;
  double ground_gap = 0.1;

  void validate() const {
    particle.validate();
    if (n_pour < 1) throw Error(ErrorCode::kInvalidConfig, "n_pour must be positive");
    if (!std::isfinite(gamma0) || !(gamma0 > 0.0) || gamma0 > std::numbers::pi)
      throw Error(ErrorCode::kInvalidConfig, "gamma0 must lie in (0, pi]");
    if (tilt_steps < 1 || tilt_steps > total_steps)
      throw Error(ErrorCode::kInvalidConfig, "need 1 <= tilt_steps <= T_P");
    if (settle_steps < 0 || !(fill_gap >= 0.0) || !(ground_gap > 0.0))
      throw Error(ErrorCode::kInvalidConfig, "settle steps, fill gap and ground gap must be non-negative");
  }
};

/// Lattice of `n` sphere centres inside the cup cavity, in the cup body frame.
/// Layers fill bottom-up; within a layer points nearest the axis come first.
inline std::vector<Vec3> cup_fill_lattice(const Cup& cup, const ParticleSpec& particle, int n, double gap) {
  const double r = particle.radius;
  const double pitch = 2.0 * r + gap;
  std::vector<Vec3> out;
  for (double z = -cup.spec.inner_height + r + gap; z + r <= -gap && static_cast<int>(out.size()) < n; z += pitch) {
    const double reach = cup.inner_radius_at(z - r) - r - gap;
    if (reach < 0.0) continue;
    const int m = static_cast<int>(std::floor(reach / pitch));
    std::vector<Vec3> layer;
    for (int iy = -m; iy <= m; ++iy)
      for (int ix = -m; ix <= m; ++ix) {
        const double x = ix * pitch, y = iy * pitch;
        if (x * x + y * y <= reach * reach) layer.emplace_back(x, y, z);
      }
    std::stable_sort(layer.begin(), layer.end(), [](const Vec3& a, const Vec3& b) {
      return a.head<2>().squaredNorm() < b.head<2>().squaredNorm();
    });
    for (const auto& p : layer) {
      if (static_cast<int>(out.size()) == n) break;
      out.push_back(p);
    }
  }
  if (static_cast<int>(out.size()) < n)
    throw Error(ErrorCode::kInvalidSpec, "cup cannot hold " + std::to_string(n) + " particles");
  return out;
}

/// True when any cup triangle at `cup_pose` intersects the object.
inline bool cup_overlaps_object(const Cup& cup, const RigidTransform& cup_pose, const KinematicBody& object) {
  const RigidTransform to_object = object.pose.inverse() * cup_pose;
  const CollisionIndex& index = *object.index;
  const TriangleMesh& obj = index.mesh();
  for (std::size_t t = 0; t < cup.mesh.triangles.size(); ++t) {
    const auto [a, b, c] = cup.mesh.corners(t);
    const std::array<Vec3, 3> tri = {to_object.apply(a), to_object.apply(b), to_object.apply(c)};
    Aabb box = Aabb::empty();
    for (const auto& v : tri) box.extend(v);
    bool hit = false;
    index.query_box(box, [&](std::uint32_t k) {
      if (hit) return;
      const auto [p, q, s] = obj.corners(k);
      hit = triangles_intersect(tri, {p, q, s});
    });
    if (hit) return true;
  }
  return false;
}

/// Kinematic pour: rotate by gamma0 about the horizontal rim tangent through the
/// pivot, direction chosen so the cup bottom rises, then hold.
inline KinematicMotion pour_motion(const RigidTransform& init, const Cup& cup, const PourParams& params, long s0) {
  const Vec3 pivot = init.apply(cup.pivot_body);
  const Vec3 axis = init.rotation.col(1);
  const Vec3 bottom = init.apply(Vec3(0.0, 0.0, -cup.spec.inner_height));
  double angle = params.gamma0;
  if ((pivot + rotation_about(axis, angle) * (bottom - pivot)).z() < bottom.z()) angle = -angle;

  RigidTransform end;
  end.rotation = rotation_about(axis, angle) * init.rotation;
  end.translation = pivot - end.rotation * cup.pivot_body;

  KinematicMotion motion;
  motion.pivot = pivot;
  motion.keyframes = {{s0, init}, {s0 + params.tilt_steps, end}};
  if (params.total_steps > params.tilt_steps) motion.keyframes.push_back({s0 + params.total_steps, end});
  return motion;
}

struct PourOutcome {
  PourConfig config;
  int n_in = 0;
  double p = 0.0;
  bool infeasible = false;
};

/// One imagined pour into the object scene. `frame` is in simulation
/// coordinates. An initial cup/object overlap scores P = 0.
inline PourOutcome simulate_pour(const ObjectScene& scene, const Cup& cup, const PourConfig& config,
                                 const PlaneFrame& frame, const PourParams& params, FrameWriter* frames = nullptr,
                                 StepObserver observer = nullptr) {
  PourOutcome out;
  out.config = config;
  SimWorld world = make_object_world(scene, params.particle, params.sim, params.ground_gap);
  const RigidTransform init = cup_initial_pose(config, frame, cup);
  if (cup_overlaps_object(cup, init, *world.object)) {
    out.infeasible = true;
    return out;
  }
  world.cup = KinematicBody{cup.index, init, std::nullopt};
  if (frames) frames->set_offset(scene.offset);
  if (frames || observer) {
    world.on_step = [frames, observer = std::move(observer)](const SimWorld& w) {
      if (frames) frames->record(w);
      if (observer) observer(w);
    };
  }

  std::vector<Vec3> fill = cup_fill_lattice(cup, params.particle, params.n_pour, params.fill_gap);
  for (auto& p : fill) p = init.apply(p);
  spawn_particles(world, fill);
  run_steps(world, params.settle_steps);

  drive_kinematic(world, BodySlot::kCup, pour_motion(init, cup, params, world.step_count));
  run_steps(world, params.total_steps);

  out.n_in = count_retained(world, scene.aabb);
  out.p = static_cast<double>(out.n_in) / static_cast<double>(params.n_pour);
  return out;
}

/// Row with the largest sum, then its largest entry; ties go to the smaller index.
inline std::pair<int, int> select_best(const PourTable& table) {
  int best_i = 0;
  double best_sum = -1.0;
  for (int i = 0; i < kPourAngles; ++i) {
    double sum = 0.0;
    for (double v : table[i]) sum += v;
    if (sum > best_sum) {
      best_sum = sum;
      best_i = i;
    }
  }
  int best_j = 0;
  for (int j = 1; j < kPourIndents; ++j)
    if (table[best_i][j] > table[best_i][best_j]) best_j = j;
  return {best_i, best_j};
}

struct PouringConfig {
  CupSpec cup;
  PourParams pour;
  double l0 = 0.01;
  double plane_clearance = 0.01;
  int jobs = 1;
};

struct PourPlan {
  PourTable table{};
  std::array<std::array<int, kPourIndents>, kPourAngles> counts{};
  std::array<std::array<bool, kPourIndents>, kPourAngles> infeasible{};
  int i_star = 0;
  int j_star = 0;
  double theta_star = 0.0;
  Vec2 p_star = Vec2::Zero();
  RigidTransform init_pose;
  int n_pour = 0;
  double gamma0 = 0.0;
  Vec3 pivot_body = Vec3::Zero();
  PlaneFrame frame;  // world coordinates
  double runtime_seconds = 0.0;
};

/// Plane E in simulation coordinates for a world-coordinate frame.
inline PlaneFrame to_scene_frame(PlaneFrame frame, const Vec3& offset) {
  frame.origin2d -= offset.head<2>();
  frame.z -= offset.z();
  return frame;
}

inline PourPlan imagine_pouring(const TriangleMesh& mesh, const ContainabilityResult& containability,
                                const PouringConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!containability.is_open_container)
    throw Error(ErrorCode::kNotAContainer, "object is not classified as an open container");
  cfg.pour.validate();
  const Cup cup = build_cup(cfg.cup);
  const ObjectScene scene = make_object_scene(mesh);

  PourPlan plan;
  plan.frame = footprint_frame(containability.footprint, containability.object_aabb, cfg.plane_clearance);
  const PlaneFrame local = to_scene_frame(plan.frame, scene.offset);
  const auto configs = enumerate_pour_configs(local, scene.aabb, cfg.l0);

  std::vector<PourOutcome> outcomes(configs.size());
  parallel_for(configs.size(), cfg.jobs,
               [&](std::size_t k) { outcomes[k] = simulate_pour(scene, cup, configs[k], local, cfg.pour); });
  for (const auto& o : outcomes) {
    const int i = o.config.theta_index, j = o.config.indent_index;
    plan.table[i][j] = o.p;
    plan.counts[i][j] = o.n_in;
    plan.infeasible[i][j] = o.infeasible;
  }

  std::tie(plan.i_star, plan.j_star) = select_best(plan.table);
  const PourConfig& best = configs[static_cast<std::size_t>(plan.i_star * kPourIndents + plan.j_star)];
  plan.theta_star = best.theta_pour;
  plan.p_star = best.p_pour;
  plan.init_pose = cup_initial_pose(best, plan.frame, cup);
  plan.n_pour = cfg.pour.n_pour;
  plan.gamma0 = cfg.pour.gamma0;
  plan.pivot_body = cup.pivot_body;
  plan.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return plan;
}

/// Re-runs the selected pour of a plan, streaming frames.
inline PourOutcome replay_best_pour(const TriangleMesh& mesh, const PourPlan& plan, const PouringConfig& cfg,
                                    FrameWriter& frames) {
  const Cup cup = build_cup(cfg.cup);
  const ObjectScene scene = make_object_scene(mesh);
  const PlaneFrame local = to_scene_frame(plan.frame, scene.offset);
  const auto configs = enumerate_pour_configs(local, scene.aabb, cfg.l0);
  const PourConfig& best = configs[static_cast<std::size_t>(plan.i_star * kPourIndents + plan.j_star)];
  return simulate_pour(scene, cup, best, local, cfg.pour, &frames);
}

}  // namespace affordsim
