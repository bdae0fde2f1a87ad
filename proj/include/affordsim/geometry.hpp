#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "affordsim/error.hpp"

namespace affordsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle soup. Units are meters.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::string name;

  bool empty() const { return triangles.empty(); }

  std::array<Vec3, 3> corners(std::size_t tri) const {
    const auto& t = triangles[tri];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
};

/// Proper rigid motion x -> R x + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_vector(const Vec3& v) const { return rotation * v; }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  /// (*this) after `rhs`, i.e. x -> this(rhs(x)).
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  bool is_valid(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
  }
};

inline Mat3 rotation_about(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline Mat3 rotation_z(double angle) { return rotation_about(Vec3::UnitZ(), angle); }

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {Vec3::Constant(inf), Vec3::Constant(-inf)};
  }

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const Aabb& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  bool valid() const { return (min.array() <= max.array()).all(); }

  bool contains(const Aabb& other) const {
    return (min.array() <= other.min.array()).all() && (other.max.array() <= max.array()).all();
  }

  /// Open-box membership: points on a face are outside.
  bool strictly_contains(const Vec3& p) const {
    return (min.array() < p.array()).all() && (p.array() < max.array()).all();
  }

  double squared_distance(const Vec3& p) const {
    const Vec3 d = (min - p).cwiseMax(Vec3::Zero()).cwiseMax(p - max);
    return d.squaredNorm();
  }

  Aabb translated(const Vec3& t) const { return {min + t, max + t}; }
};

struct Footprint {
  std::vector<Vec2> points;
};

/// Horizontal plane z = z_E with an in-plane origin and right-handed axes.
struct PlaneFrame {
  Vec2 origin2d = Vec2::Zero();
  Vec2 axis_x = Vec2::UnitX();
  Vec2 axis_y = Vec2::UnitY();
  double z = 0.0;

  /// Plane coordinates to world xy.
  Vec2 to_world(const Vec2& p) const { return origin2d + p.x() * axis_x + p.y() * axis_y; }
  /// Angle of axis_x measured from world x.
  double heading() const { return std::atan2(axis_x.y(), axis_x.x()); }
};

// ---------------------------------------------------------------------------

inline TriangleMesh transformed(const TriangleMesh& mesh, const RigidTransform& g) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = g.apply(v);
  return out;
}

inline Aabb compute_aabb(const TriangleMesh& mesh, const RigidTransform& pose = {}) {
  if (mesh.vertices.empty()) throw Error(ErrorCode::kEmptyMesh, "cannot bound an empty mesh");
  Aabb box = Aabb::empty();
  for (const auto& v : mesh.vertices) box.extend(pose.apply(v));
  return box;
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

/// Area-weighted centroid of the triangle surfaces.
inline Vec3 compute_centroid(const TriangleMesh& mesh) {
  if (mesh.empty()) throw Error(ErrorCode::kEmptyMesh, "mesh has no triangles");
  double total = 0.0;
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto [a, b, c] = mesh.corners(i);
    const double area = triangle_area(a, b, c);
    total += area;
    acc += area * (a + b + c) / 3.0;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kZeroArea, "mesh surface area is zero");
  return acc / total;
}

/// Counter-clockwise rotation in the plane.
inline Mat2 rotate2d(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

/// Mean of the footprint and its principal axes; the plane sits 1 cm above the
/// object's bounding box.
inline PlaneFrame footprint_frame(const Footprint& footprint, const Aabb& object_aabb,
                                  double clearance = 0.01) {
  if (footprint.points.empty()) throw Error(ErrorCode::kEmptyFootprint, "footprint has no points");
  const auto n = static_cast<double>(footprint.points.size());
  Vec2 mean = Vec2::Zero();
  for (const auto& p : footprint.points) mean += p;
  mean /= n;

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : footprint.points) {
    const Vec2 d = p - mean;
    sxx += d.x() * d.x();
    syy += d.y() * d.y();
    sxy += d.x() * d.y();
  }
  sxx /= n;
  syy /= n;
  sxy /= n;

  PlaneFrame frame;
  frame.origin2d = mean;
  frame.z = object_aabb.max.z() + clearance;

  // Closed-form eigen-decomposition of [[sxx, sxy], [sxy, syy]].
  const double half_trace = 0.5 * (sxx + syy);
  const double radius = std::hypot(0.5 * (sxx - syy), sxy);
  const double gap = 2.0 * radius;
  if (gap < 1e-9) return frame;

  const double lambda = half_trace + radius;
  Vec2 axis = std::abs(sxy) > 0.0 ? Vec2(lambda - syy, sxy)
                                  : (sxx >= syy ? Vec2::UnitX() : Vec2::UnitY());
  axis.normalize();
  if (axis.x() < 0.0 || (axis.x() == 0.0 && axis.y() < 0.0)) axis = -axis;
  frame.axis_x = axis;
  frame.axis_y = Vec2(-axis.y(), axis.x());
  return frame;
}

/// Closest point on triangle abc to p. `interior` reports whether it lies in
/// the open face region rather than on an edge or vertex.
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                                      bool* interior = nullptr) {
  if (interior) *interior = false;
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

  if (interior) *interior = true;
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

inline double point_triangle_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  return (closest_point_on_triangle(p, a, b, c) - p).squaredNorm();
}

/// Segment pq against triangle abc (two-sided). Coplanar contact is ignored.
inline bool segment_intersects_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b,
                                        const Vec3& c) {
  const Vec3 dir = q - p;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-18) return false;
  const double inv = 1.0 / det;
  const Vec3 s = p - a;
  const double u = inv * s.dot(h);
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qv = s.cross(e1);
  const double v = inv * dir.dot(qv);
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = inv * e2.dot(qv);
  return t >= 0.0 && t <= 1.0;
}

inline bool triangles_intersect(const std::array<Vec3, 3>& t1, const std::array<Vec3, 3>& t2) {
  for (int i = 0; i < 3; ++i) {
    if (segment_intersects_triangle(t1[i], t1[(i + 1) % 3], t2[0], t2[1], t2[2])) return true;
    if (segment_intersects_triangle(t2[i], t2[(i + 1) % 3], t1[0], t1[1], t1[2])) return true;
  }
  return false;
}

}  // namespace affordsim
