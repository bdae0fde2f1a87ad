#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "affordsim/bvh.hpp"
#include "affordsim/error.hpp"
#include "affordsim/geometry.hpp"

namespace affordsim {

/// Spherical granular particle. `friction` is the particle-particle Coulomb
/// coefficient; `restitution` applies to every contact the particle makes.
struct ParticleSpec {
  double radius = 0.005;
  double mass = 0.0009;
  double restitution = 0.1;
  double friction = 0.3;

  void validate() const {
    if (!(radius > 0.0) || !(mass > 0.0) || !(restitution >= 0.0 && restitution <= 1.0) ||
        !(friction >= 0.0))
      throw Error(ErrorCode::kInvalidSpec, "particle spec out of range");
  }
};

struct SimParams {
  double dt = 1.0 / 240.0;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  double ground_z = 0.0;
  double friction_mesh = 0.5;
  double friction_ground = 0.5;
  int solver_iterations = 4;
  /// Fraction of the penetration depth removed per step.
  double baumgarte = 0.2;
  /// Penetration tolerated before positional correction kicks in (m).
  double linear_slop = 1e-5;
  /// Approach speeds below this do not bounce (m/s).
  double restitution_threshold = 0.1;
  /// Extra distance at which speculative contacts are created (m).
  double contact_margin = 0.002;
};

/// Pose trajectory for a kinematic mesh. Between keyframes the rotation is
/// interpolated along the relative axis-angle and the translation linearly;
/// when `pivot` is set the translation instead keeps that world point fixed.
struct KinematicMotion {
  struct Keyframe {
    long step = 0;
    RigidTransform pose;
  };
  std::vector<Keyframe> keyframes;
  std::optional<Vec3> pivot;

  void validate() const {
    if (keyframes.empty()) throw Error(ErrorCode::kInvalidSpec, "motion has no keyframes");
    for (std::size_t i = 0; i < keyframes.size(); ++i) {
      if (!keyframes[i].pose.is_valid())
        throw Error(ErrorCode::kInvalidSpec, "keyframe pose is not a rigid transform");
      if (i > 0 && keyframes[i].step <= keyframes[i - 1].step)
        throw Error(ErrorCode::kInvalidSpec, "keyframe steps must be strictly increasing");
    }
  }

  long last_step() const { return keyframes.back().step; }

  RigidTransform pose_at(long step) const {
    if (step <= keyframes.front().step) return keyframes.front().pose;
    if (step >= keyframes.back().step) return keyframes.back().pose;
    std::size_t k = 1;
    while (keyframes[k].step < step) ++k;
    const auto& a = keyframes[k - 1];
    const auto& b = keyframes[k];
    if (step == b.step) return b.pose;
    const double alpha = static_cast<double>(step - a.step) / static_cast<double>(b.step - a.step);

    const Eigen::AngleAxisd relative(a.pose.rotation.transpose() * b.pose.rotation);
    RigidTransform out;
    out.rotation = a.pose.rotation * Eigen::AngleAxisd(alpha * relative.angle(), relative.axis()).toRotationMatrix();
    if (pivot) {
      const Vec3 body_point = a.pose.rotation.transpose() * (*pivot - a.pose.translation);
      out.translation = *pivot - out.rotation * body_point;
    } else {
      out.translation = (1.0 - alpha) * a.pose.translation + alpha * b.pose.translation;
    }
    return out;
  }
};

/// Static or kinematically driven triangle mesh.
struct KinematicBody {
  std::shared_ptr<const CollisionIndex> index;
  RigidTransform pose;
  std::optional<KinematicMotion> motion;

  const TriangleMesh& mesh() const { return index->mesh(); }
};

enum class BodySlot { kObject, kCup };

class SimWorld;
using StepObserver = std::function<void(const SimWorld&)>;

namespace detail {

struct Contact {
  int a = 0;
  int b = -1;  // other particle, or -1 for a mesh / the ground
  Vec3 normal = Vec3::UnitZ();  // points toward particle a
  Vec3 surface_velocity = Vec3::Zero();
  double gap = 0.0;
  double friction = 0.0;
  double inv_mass_sum = 0.0;
  double bounce = 0.0;
  double impulse_n = 0.0;
  Vec3 impulse_t = Vec3::Zero();
  double impulse_p = 0.0;
};

struct MeshCandidate {
  Vec3 point;
  Vec3 normal;
  double dist = 0.0;
  bool interior = false;
};

}  // namespace detail

/// Complete state of one simulation. Movable, never shared mutably.
class SimWorld {
 public:
  ParticleSpec particle;
  SimParams params;
  std::optional<KinematicBody> object;
  std::optional<KinematicBody> cup;

  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::vector<Vec3> initial_positions;

  Vec3 extra_accel = Vec3::Zero();
  long step_count = 0;

  /// Invoked after every completed step.
  StepObserver on_step;

  std::size_t size() const { return positions.size(); }

  std::optional<KinematicBody>& body(BodySlot slot) { return slot == BodySlot::kObject ? object : cup; }

  // Scratch reused across steps.
  std::vector<detail::Contact> contacts_;
  std::vector<Vec3> pseudo_velocities_;
  std::vector<detail::MeshCandidate> candidates_;
  std::vector<int> sweep_order_;
  std::vector<std::size_t> accepted_;
  std::vector<double> reach_;
};

inline void spawn_particles(SimWorld& world, std::span<const Vec3> new_positions) {
  world.particle.validate();
  const double min_sep = 2.0 * world.particle.radius;
  const double min_sep_sq = min_sep * min_sep * (1.0 - 1e-9);
  for (std::size_t i = 0; i < new_positions.size(); ++i) {
    if (!new_positions[i].allFinite()) throw Error(ErrorCode::kInvalidSpec, "non-finite spawn position");
    for (std::size_t j = 0; j < i; ++j)
      if ((new_positions[i] - new_positions[j]).squaredNorm() < min_sep_sq)
        throw Error(ErrorCode::kOverlapAtSpawn,
                    "spawn positions " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
    for (std::size_t j = 0; j < world.positions.size(); ++j)
      if ((new_positions[i] - world.positions[j]).squaredNorm() < min_sep_sq)
        throw Error(ErrorCode::kOverlapAtSpawn,
                    "spawn position " + std::to_string(i) + " overlaps particle " + std::to_string(j));
  }
  for (const auto& p : new_positions) {
    world.positions.push_back(p);
    world.velocities.push_back(Vec3::Zero());
    world.initial_positions.push_back(p);
  }
}

inline void apply_force_field(SimWorld& world, const Vec3& accel) {
  if (!accel.allFinite()) throw Error(ErrorCode::kInvalidSpec, "force field must be finite");
  world.extra_accel = accel;
}

inline void drive_kinematic(SimWorld& world, BodySlot slot, KinematicMotion motion) {
  auto& body = world.body(slot);
  if (!body) throw Error(ErrorCode::kInvalidSpec, "no mesh in the requested body slot");
  motion.validate();
  if (motion.keyframes.front().step < world.step_count)
    throw Error(ErrorCode::kKeyframesInPast, "first keyframe at step " +
                                                 std::to_string(motion.keyframes.front().step) +
                                                 " precedes current step " + std::to_string(world.step_count));
  body->motion = std::move(motion);
}

inline bool is_settled(const SimWorld& world, double v_eps) {
  return std::all_of(world.velocities.begin(), world.velocities.end(),
                     [&](const Vec3& v) { return v.norm() < v_eps; });
}

namespace detail {

/// Gathers contacts between particle `i` and one kinematic body, dropping
/// edge/vertex features that are coplanar with an accepted face contact.
inline void collect_mesh_contacts(SimWorld& w, int i, const KinematicBody& body, const RigidTransform& next_pose,
                                  double motion_bound) {
  const SimParams& prm = w.params;
  const double r = w.particle.radius;
  const Vec3& x = w.positions[i];
  const double reach = r + w.velocities[i].norm() * prm.dt + motion_bound + prm.contact_margin;

  const RigidTransform inv = body.pose.inverse();
  const Vec3 local = inv.apply(x);
  const TriangleMesh& mesh = body.mesh();

  auto& cands = w.candidates_;
  cands.clear();
  body.index->query_sphere(local, reach, [&](std::uint32_t tri) {
    const auto [a, b, c] = mesh.corners(tri);
    MeshCandidate cand;
    cand.point = closest_point_on_triangle(local, a, b, c, &cand.interior);
    const Vec3 diff = local - cand.point;
    cand.dist = diff.norm();
    if (cand.dist > 1e-12) {
      cand.normal = diff / cand.dist;
    } else {
      Vec3 face = (b - a).cross(c - a).normalized();
      const Vec3 vel_local = body.pose.rotation.transpose() * w.velocities[i];
      if (face.dot(vel_local) > 0.0) face = -face;
      cand.normal = face;
    }
    cands.push_back(cand);
  });
  if (cands.empty()) return;

  std::stable_sort(cands.begin(), cands.end(), [](const MeshCandidate& l, const MeshCandidate& rr) {
    if (l.interior != rr.interior) return l.interior;
    return l.dist < rr.dist;
  });

  const double inv_mass = 1.0 / w.particle.mass;
  auto& accepted = w.accepted_;
  accepted.clear();
  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    const auto& cand = cands[ci];
    bool redundant = false;
    for (std::size_t k : accepted) {
      const auto& prev = cands[k];
      const double alignment = prev.normal.dot(cand.normal);
      // Same feature reached through a neighbouring triangle.
      if (alignment > 1.0 - 1e-9 && std::abs(prev.dist - cand.dist) < 1e-9) redundant = true;
      // Internal edge or vertex lying in the plane of an accepted face.
      if (!cand.interior && prev.interior && alignment > 0.0 &&
          std::abs((cand.point - prev.point).dot(prev.normal)) < 1e-7)
        redundant = true;
      if (redundant) break;
    }
    if (redundant) continue;
    accepted.push_back(ci);

    Contact ct;
    ct.a = i;
    ct.normal = body.pose.rotation * cand.normal;
    ct.gap = cand.dist - r;
    const Vec3 world_point = body.pose.apply(cand.point);
    ct.surface_velocity = (next_pose.apply(cand.point) - world_point) / prm.dt;
    ct.friction = prm.friction_mesh;
    ct.inv_mass_sum = inv_mass;
    w.contacts_.push_back(ct);
  }
}

inline double motion_bound(const KinematicBody& body, const RigidTransform& next) {
  const double rot = (next.rotation - body.pose.rotation).norm();
  return rot * body.index->max_vertex_norm() + (next.translation - body.pose.translation).norm();
}

inline void collect_pair_contacts(SimWorld& w) {
  const auto n = static_cast<int>(w.size());
  const SimParams& prm = w.params;
  const double r = w.particle.radius;
  auto& order = w.sweep_order_;
  order.resize(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  auto& reach = w.reach_;
  reach.resize(n);
  for (int i = 0; i < n; ++i) reach[i] = r + w.velocities[i].norm() * prm.dt + 0.5 * prm.contact_margin;
  std::sort(order.begin(), order.end(), [&](int l, int rr) {
    const double lo_l = w.positions[l].x() - reach[l];
    const double lo_r = w.positions[rr].x() - reach[rr];
    return lo_l < lo_r || (lo_l == lo_r && l < rr);
  });

  const double inv_mass = 1.0 / w.particle.mass;
  const std::size_t first_pair = w.contacts_.size();
  for (int oi = 0; oi < n; ++oi) {
    const int i = order[oi];
    const double hi = w.positions[i].x() + reach[i];
    for (int oj = oi + 1; oj < n; ++oj) {
      const int j = order[oj];
      if (w.positions[j].x() - reach[j] > hi) break;
      const Vec3 d = w.positions[std::min(i, j)] - w.positions[std::max(i, j)];
      const double limit = reach[i] + reach[j];
      if (d.squaredNorm() > limit * limit) continue;
      const double dist = d.norm();
      Contact ct;
      ct.a = std::min(i, j);
      ct.b = std::max(i, j);
      ct.normal = dist > 1e-12 ? Vec3(d / dist) : Vec3::UnitZ();
      ct.gap = dist - 2.0 * r;
      ct.friction = w.particle.friction;
      ct.inv_mass_sum = 2.0 * inv_mass;
      w.contacts_.push_back(ct);
    }
  }
  std::sort(w.contacts_.begin() + static_cast<std::ptrdiff_t>(first_pair), w.contacts_.end(),
            [](const Contact& l, const Contact& rr) { return l.a < rr.a || (l.a == rr.a && l.b < rr.b); });
}

inline Vec3 relative_velocity(const Contact& c, const std::vector<Vec3>& v) {
  return c.b >= 0 ? Vec3(v[c.a] - v[c.b]) : Vec3(v[c.a] - c.surface_velocity);
}

inline void apply_impulse(std::vector<Vec3>& v, const Contact& c, const Vec3& impulse, double inv_mass) {
  v[c.a] += impulse * inv_mass;
  if (c.b >= 0) v[c.b] -= impulse * inv_mass;
}

}  // namespace detail

/// Advances the world by one fixed step: gravity and force fields, contact
/// impulses (particle-mesh, particle-particle, particle-ground), then
/// semi-implicit position update.
inline void step(SimWorld& w) {
  using detail::Contact;
  const SimParams& prm = w.params;
  const double dt = prm.dt;
  const double r = w.particle.radius;
  const double e = w.particle.restitution;
  const double inv_mass = 1.0 / w.particle.mass;
  const auto n = static_cast<int>(w.size());

  struct BodyStep {
    KinematicBody* body;
    RigidTransform next;
    double bound;
  };
  std::vector<BodyStep> bodies;
  for (auto* slot : {&w.object, &w.cup}) {
    if (!*slot) continue;
    KinematicBody& body = **slot;
    const RigidTransform next = body.motion ? body.motion->pose_at(w.step_count + 1) : body.pose;
    bodies.push_back({&body, next, detail::motion_bound(body, next)});
  }

  const Vec3 accel = prm.gravity + w.extra_accel;
  for (auto& v : w.velocities) v += accel * dt;

  w.contacts_.clear();
  for (int i = 0; i < n; ++i) {
    const double ground_gap = w.positions[i].z() - r - prm.ground_z;
    if (ground_gap < std::abs(w.velocities[i].z()) * dt + prm.contact_margin) {
      Contact ct;
      ct.a = i;
      ct.gap = ground_gap;
      ct.friction = prm.friction_ground;
      ct.inv_mass_sum = inv_mass;
      w.contacts_.push_back(ct);
    }
    for (auto& bs : bodies) detail::collect_mesh_contacts(w, i, *bs.body, bs.next, bs.bound);
  }
  const std::size_t n_env = w.contacts_.size();
  detail::collect_pair_contacts(w);
  // Pairs first so the ground and mesh constraints have the last word each sweep.
  std::rotate(w.contacts_.begin(), w.contacts_.begin() + static_cast<std::ptrdiff_t>(n_env), w.contacts_.end());

  for (auto& c : w.contacts_) {
    const double vn0 = detail::relative_velocity(c, w.velocities).dot(c.normal);
    c.bounce = (c.gap <= prm.linear_slop && vn0 < -prm.restitution_threshold) ? -e * vn0 : 0.0;
  }

  for (int it = 0; it < prm.solver_iterations; ++it) {
    for (auto& c : w.contacts_) {
      const double eff = 1.0 / c.inv_mass_sum;
      Vec3 vrel = detail::relative_velocity(c, w.velocities);
      const double vn = vrel.dot(c.normal);
      const double target = c.gap > prm.linear_slop ? -c.gap / dt : c.bounce;
      const double accumulated = std::max(c.impulse_n + (target - vn) * eff, 0.0);
      const double dn = accumulated - c.impulse_n;
      c.impulse_n = accumulated;
      detail::apply_impulse(w.velocities, c, c.normal * dn, inv_mass);

      if (c.friction > 0.0 && c.impulse_n > 0.0) {
        vrel = detail::relative_velocity(c, w.velocities);
        const Vec3 vt = vrel - vrel.dot(c.normal) * c.normal;
        Vec3 total = c.impulse_t - vt * eff;
        const double limit = c.friction * c.impulse_n;
        const double mag = total.norm();
        if (mag > limit) total *= limit / mag;
        const Vec3 dt_impulse = total - c.impulse_t;
        c.impulse_t = total;
        detail::apply_impulse(w.velocities, c, dt_impulse, inv_mass);
      }
    }
  }

  // Split-impulse positional correction: does not feed back into velocities.
  auto& vp = w.pseudo_velocities_;
  vp.assign(n, Vec3::Zero());
  bool any_penetration = false;
  for (const auto& c : w.contacts_) any_penetration |= c.gap < -prm.linear_slop;
  if (any_penetration) {
    for (int it = 0; it < prm.solver_iterations; ++it) {
      for (auto& c : w.contacts_) {
        const double depth = -c.gap - prm.linear_slop;
        if (depth <= 0.0) continue;
        const double target = prm.baumgarte * depth / dt;
        const Vec3 rel = c.b >= 0 ? Vec3(vp[c.a] - vp[c.b]) : vp[c.a];
        const double accumulated = std::max(c.impulse_p + (target - rel.dot(c.normal)) / c.inv_mass_sum, 0.0);
        const double dp = accumulated - c.impulse_p;
        c.impulse_p = accumulated;
        detail::apply_impulse(vp, c, c.normal * dp, inv_mass);
      }
    }
  }

  for (int i = 0; i < n; ++i) w.positions[i] += (w.velocities[i] + vp[i]) * dt;
  for (auto& bs : bodies) {
    bs.body->pose = bs.next;
    if (bs.body->motion && w.step_count + 1 >= bs.body->motion->last_step()) bs.body->motion.reset();
  }
  ++w.step_count;

  for (int i = 0; i < n; ++i)
    if (!w.positions[i].allFinite() || !w.velocities[i].allFinite())
      throw Error(ErrorCode::kNonFiniteState, "particle " + std::to_string(i) + " left the finite range at step " +
                                                  std::to_string(w.step_count));
  if (w.on_step) w.on_step(w);
}

inline void run_steps(SimWorld& world, long steps) {
  for (long k = 0; k < steps; ++k) step(world);
}

inline double kinetic_energy(const SimWorld& world) {
  double sum = 0.0;
  for (const auto& v : world.velocities) sum += 0.5 * world.particle.mass * v.squaredNorm();
  return sum;
}

}  // namespace affordsim
