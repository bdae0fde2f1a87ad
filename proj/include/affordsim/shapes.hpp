#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "affordsim/geometry.hpp"

// Procedural meshes used by the synthetic corpus, the cup, and the tests.
// All objects stand upright with their lowest point at z = 0 unless noted.
namespace affordsim::shapes {

inline void append(TriangleMesh& dst, const TriangleMesh& src) {
  const auto base = static_cast<std::uint32_t>(dst.vertices.size());
  dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
  for (const auto& t : src.triangles) dst.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

/// Closed axis-aligned box.
inline TriangleMesh box(const Vec3& lo, const Vec3& hi, std::string name = "box") {
  TriangleMesh m;
  m.name = std::move(name);
  for (int k = 0; k < 8; ++k)
    m.vertices.emplace_back((k & 1) ? hi.x() : lo.x(), (k & 2) ? hi.y() : lo.y(), (k & 4) ? hi.z() : lo.z());
  // Outward winding.
  const std::uint32_t faces[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                                     {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& f : faces) {
    m.triangles.push_back({f[0], f[1], f[2]});
    m.triangles.push_back({f[0], f[2], f[3]});
  }
  return m;
}

/// Thin rectangular panel given by four corners in order (two-sided).
inline TriangleMesh quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  TriangleMesh m;
  m.vertices = {a, b, c, d};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

/// Surface of revolution about +z from a polyline profile of (radius, z)
/// pairs. Profile points with radius 0 collapse to a single apex vertex.
inline TriangleMesh lathe(const std::vector<std::pair<double, double>>& profile, int segments,
                          std::string name = "lathe") {
  TriangleMesh m;
  m.name = std::move(name);
  std::vector<std::vector<std::uint32_t>> rings;
  for (const auto& [radius, z] : profile) {
    std::vector<std::uint32_t> ring;
    if (radius == 0.0) {
      m.vertices.emplace_back(0.0, 0.0, z);
      ring.assign(segments, static_cast<std::uint32_t>(m.vertices.size() - 1));
    } else {
      for (int k = 0; k < segments; ++k) {
        const double phi = 2.0 * std::numbers::pi * k / segments;
        m.vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi), z);
        ring.push_back(static_cast<std::uint32_t>(m.vertices.size() - 1));
      }
    }
    rings.push_back(std::move(ring));
  }
  for (std::size_t p = 0; p + 1 < rings.size(); ++p) {
    for (int k = 0; k < segments; ++k) {
      const int k1 = (k + 1) % segments;
      const auto a = rings[p][k], b = rings[p][k1], c = rings[p + 1][k1], d = rings[p + 1][k];
      if (a != b) m.triangles.push_back({a, b, c});
      if (c != d) m.triangles.push_back({a, c, d});
    }
  }
  return m;
}

/// Open-top box with walls and floor of the given thickness.
inline TriangleMesh open_box(double outer_x, double outer_y, double height, double wall, double floor,
                             std::string name = "open_box") {
  TriangleMesh m;
  m.name = std::move(name);
  append(m, box({0, 0, 0}, {outer_x, outer_y, floor}));
  append(m, box({0, 0, 0}, {wall, outer_y, height}));
  append(m, box({outer_x - wall, 0, 0}, {outer_x, outer_y, height}));
  append(m, box({wall, 0, 0}, {outer_x - wall, wall, height}));
  append(m, box({wall, outer_y - wall, 0}, {outer_x - wall, outer_y, height}));
  return m;
}

inline TriangleMesh solid_box(double x, double y, double z, std::string name = "solid_box") {
  return box({0, 0, 0}, {x, y, z}, std::move(name));
}

/// Thick-walled vessel of revolution: frustum cavity with the given inner radii.
inline TriangleMesh vessel(double inner_bottom_radius, double inner_top_radius, double depth, double wall,
                           double floor, int segments = 48, std::string name = "vessel") {
  const double h = depth + floor;
  return lathe({{0.0, 0.0},
                {inner_bottom_radius + wall, 0.0},
                {inner_top_radius + wall, h},
                {inner_top_radius, h},
                {inner_bottom_radius, floor},
                {0.0, floor}},
               segments, std::move(name));
}

/// Solid cylinder (closed).
inline TriangleMesh cylinder(double radius, double height, int segments = 48, std::string name = "cylinder") {
  return lathe({{0.0, 0.0}, {radius, 0.0}, {radius, height}, {0.0, height}}, segments, std::move(name));
}

/// Open box whose floor is a funnel sloping down to a central square hole of
/// side `hole`. The funnel floor is a thin two-sided surface.
inline TriangleMesh hopper_box(double outer, double height, double wall, double hole, double slope_rise,
                               std::string name = "hopper_box") {
  TriangleMesh m;
  m.name = std::move(name);
  append(m, box({0, 0, 0}, {wall, outer, height}));
  append(m, box({outer - wall, 0, 0}, {outer, outer, height}));
  append(m, box({wall, 0, 0}, {outer - wall, wall, height}));
  append(m, box({wall, outer - wall, 0}, {outer - wall, outer, height}));
  const double lo = wall, hi = outer - wall;
  const double c = 0.5 * outer, hh = 0.5 * hole;
  const double zt = slope_rise, zb = 0.0;
  const Vec3 o00(lo, lo, zt), o10(hi, lo, zt), o11(hi, hi, zt), o01(lo, hi, zt);
  const Vec3 i00(c - hh, c - hh, zb), i10(c + hh, c - hh, zb), i11(c + hh, c + hh, zb), i01(c - hh, c + hh, zb);
  append(m, quad(o00, o10, i10, i00));
  append(m, quad(o10, o11, i11, i10));
  append(m, quad(o11, o01, i01, i11));
  append(m, quad(o01, o00, i00, i01));
  return m;
}

/// Open box with a rectangular opening of inner_x by inner_y.
inline TriangleMesh slot_box(double inner_x, double inner_y, double depth, double wall,
                             std::string name = "slot_box") {
  return open_box(inner_x + 2 * wall, inner_y + 2 * wall, depth + wall, wall, wall, std::move(name));
}

/// Narrow pedestal carrying a round dish, with a tall thin candle standing in
/// the dish centre. The candle lifts the bounding box far above the dish floor.
inline TriangleMesh candlestick(double pedestal_height = 0.10, double dish_radius = 0.04, double dish_depth = 0.03,
                                double candle_height = 0.40, int segments = 48, std::string name = "candlestick") {
  const double wall = 0.005;
  TriangleMesh m = cylinder(0.015, pedestal_height, 24);
  m.name = std::move(name);
  TriangleMesh dish = vessel(dish_radius, dish_radius, dish_depth, wall, wall, segments);
  for (auto& v : dish.vertices) v.z() += pedestal_height;
  append(m, dish);
  TriangleMesh candle = lathe({{0.0, 0.0}, {0.006, 0.0}, {0.0, candle_height}}, 24);
  for (auto& v : candle.vertices) v.z() += pedestal_height + wall;
  append(m, candle);
  return m;
}

}  // namespace affordsim::shapes
