#pragma once

#include <ostream>

#include "affordsim/json_io.hpp"
#include "affordsim/physics.hpp"

namespace affordsim {

/// Writes one JSON line per sampled step:
/// {"step", "object_pose", "cup_pose"?, "particles": [[x,y,z], ...]}.
/// `offset` maps the simulation frame back to world coordinates.
class FrameWriter {
 public:
  FrameWriter(std::ostream& out, long stride) : out_(&out), stride_(stride < 1 ? 1 : stride) {}

  void set_offset(const Vec3& offset) { offset_ = offset; }
  long records() const { return records_; }

  void record(const SimWorld& world) {
    if (world.step_count % stride_ != 0) return;
    const RigidTransform shift = RigidTransform::from_translation(offset_);
    Json j;
    j["step"] = world.step_count;
    if (world.object) j["object_pose"] = to_json(shift * world.object->pose);
    if (world.cup) j["cup_pose"] = to_json(shift * world.cup->pose);
    Json particles = Json::array();
    for (const auto& p : world.positions) particles.push_back(to_json(Vec3(p + offset_)));
    j["particles"] = std::move(particles);
    *out_ << j.dump() << '\n';
    ++records_;
  }

  StepObserver observer() {
    return [this](const SimWorld& w) { record(w); };
  }

 private:
  std::ostream* out_;
  long stride_;
  Vec3 offset_ = Vec3::Zero();
  long records_ = 0;
};

}  // namespace affordsim
