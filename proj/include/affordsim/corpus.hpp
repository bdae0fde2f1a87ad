#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "affordsim/json_io.hpp"
#include "affordsim/mesh_io.hpp"
#include "affordsim/shapes.hpp"

// Synthetic classification corpus: hollow boxes, cylinders and cones of varying
// depth (open containers) against solid boxes, flat plates and boxes whose
// floor drains through a hole wider than a particle.
namespace affordsim::corpus {

struct Item {
  std::string name;
  std::string category;
  bool label = false;
  TriangleMesh mesh;
};

inline std::vector<Item> synthetic_corpus() {
  using namespace shapes;
  std::vector<Item> items = {
      {"hollow_box_deep", "hollow_box", true, open_box(0.12, 0.12, 0.08, 0.01, 0.01)},
      {"hollow_box_shallow", "hollow_box", true, open_box(0.15, 0.10, 0.04, 0.008, 0.008)},
      {"hollow_cylinder_deep", "hollow_cylinder", true, vessel(0.05, 0.05, 0.08, 0.006, 0.006)},
      {"hollow_cylinder_shallow", "hollow_cylinder", true, vessel(0.06, 0.06, 0.03, 0.006, 0.006)},
      {"cone_deep", "hollow_cone", true, vessel(0.03, 0.06, 0.07, 0.005, 0.005)},
      {"cone_shallow", "hollow_cone", true, vessel(0.04, 0.08, 0.04, 0.005, 0.005)},
      {"solid_cube", "solid_box", false, solid_box(0.10, 0.10, 0.10)},
      {"solid_brick", "solid_box", false, solid_box(0.20, 0.10, 0.06)},
      {"plate_square", "plate", false, solid_box(0.20, 0.20, 0.005)},
      {"plate_round", "plate", false, cylinder(0.10, 0.006)},
      {"holed_box_wide", "holed_box", false, hopper_box(0.12, 0.08, 0.01, 0.04, 0.03)},
      {"holed_box_narrow", "holed_box", false, hopper_box(0.14, 0.08, 0.01, 0.03, 0.04)},
  };
  for (auto& it : items) it.mesh.name = it.name;
  return items;
}

/// Writes every item as OBJ plus manifest.json into `dir`.
inline std::filesystem::path write_corpus(const std::vector<Item>& items, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  Json manifest = Json::array();
  for (const auto& it : items) {
    write_obj(it.mesh, dir / (it.name + ".obj"));
    manifest.push_back({{"mesh", it.name + ".obj"}, {"label", it.label}, {"category", it.category}});
  }
  const auto path = dir / "manifest.json";
  std::ofstream(path) << dump_canonical(manifest);
  return path;
}

}  // namespace affordsim::corpus
