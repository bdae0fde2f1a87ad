#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>

#include <json.hpp>

#include "affordsim/geometry.hpp"

namespace affordsim {

using Json = nlohmann::json;

/// Rounds to 9 significant digits so serialized output is stable and
/// re-parses to the identical text.
inline double round9(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

inline Json to_json(const Vec2& v) { return Json::array({round9(v.x()), round9(v.y())}); }
inline Json to_json(const Vec3& v) { return Json::array({round9(v.x()), round9(v.y()), round9(v.z())}); }

inline Json rotation_row_major(const Mat3& r) {
  Json out = Json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.push_back(round9(r(i, j)));
  return out;
}

inline Json to_json(const RigidTransform& g) {
  return Json{{"R", rotation_row_major(g.rotation)}, {"t", to_json(g.translation)}};
}

/// Canonical text form: sorted keys (nlohmann's default object map), two-space
/// indent, trailing newline.
inline std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace affordsim
