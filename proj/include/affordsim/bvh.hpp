#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "affordsim/geometry.hpp"

namespace affordsim {

/// Bounding volume hierarchy over the triangles of one mesh, in the mesh's own
/// (body) coordinates. Immutable once built.
class CollisionIndex {
 public:
  struct Node {
    Aabb box;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t first = 0;  // leaf: range into order_
    std::uint32_t count = 0;  // 0 for interior nodes
    bool is_leaf() const { return count > 0; }
  };

  static constexpr std::uint32_t kLeafSize = 4;

  CollisionIndex() = default;

  explicit CollisionIndex(std::shared_ptr<const TriangleMesh> owned) : mesh_(std::move(owned)) {
    if (!mesh_ || mesh_->empty()) throw Error(ErrorCode::kEmptyMesh, "cannot index an empty mesh");
    const TriangleMesh& mesh = *mesh_;
    const auto n = mesh.triangles.size();
    tri_boxes_.resize(n);
    centroids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [a, b, c] = mesh.corners(i);
      Aabb box = Aabb::empty();
      box.extend(a);
      box.extend(b);
      box.extend(c);
      tri_boxes_[i] = box;
      centroids_[i] = (a + b + c) / 3.0;
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * n);
    build(0, static_cast<std::uint32_t>(n));
    max_vertex_norm_ = 0.0;
    for (const auto& v : mesh.vertices) max_vertex_norm_ = std::max(max_vertex_norm_, v.norm());
  }

  const TriangleMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TriangleMesh>& mesh_ptr() const { return mesh_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& leaf_order() const { return order_; }
  const Aabb& bounds() const { return nodes_.front().box; }
  /// Largest distance of any vertex from the body origin.
  double max_vertex_norm() const { return max_vertex_norm_; }

  /// Appends, in deterministic traversal order, every triangle whose closest
  /// point lies within `radius` of `center` (inclusive).
  template <typename Visit>
  void query_sphere(const Vec3& center, double radius, Visit&& visit) const {
    const double r2 = radius * radius;
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (node.box.squared_distance(center) > r2) continue;
      if (node.is_leaf()) {
        for (std::uint32_t k = node.first; k < node.first + node.count; ++k) {
          const std::uint32_t tri = order_[k];
          if (tri_boxes_[tri].squared_distance(center) > r2) continue;
          const auto [a, b, c] = mesh_->corners(tri);
          if (point_triangle_distance_sq(center, a, b, c) <= r2) visit(tri);
        }
      } else {
        stack[top++] = node.right;
        stack[top++] = node.left;
      }
    }
  }

  std::vector<std::uint32_t> query_sphere(const Vec3& center, double radius) const {
    std::vector<std::uint32_t> out;
    query_sphere(center, radius, [&](std::uint32_t tri) { out.push_back(tri); });
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Visits triangles whose bounding boxes overlap `box`.
  template <typename Visit>
  void query_box(const Aabb& box, Visit&& visit) const {
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    auto overlaps = [&](const Aabb& a) {
      return (a.min.array() <= box.max.array()).all() && (box.min.array() <= a.max.array()).all();
    };
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!overlaps(node.box)) continue;
      if (node.is_leaf()) {
        for (std::uint32_t k = node.first; k < node.first + node.count; ++k)
          if (overlaps(tri_boxes_[order_[k]])) visit(order_[k]);
      } else {
        stack[top++] = node.right;
        stack[top++] = node.left;
      }
    }
  }

 private:
  std::uint32_t build(std::uint32_t first, std::uint32_t count, int depth = 0) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box = Aabb::empty();
    Aabb cbox = Aabb::empty();
    for (std::uint32_t k = first; k < first + count; ++k) {
      box.extend(tri_boxes_[order_[k]]);
      cbox.extend(centroids_[order_[k]]);
    }
    nodes_[index].box = box;
    if (count <= kLeafSize || depth >= 48) {
      nodes_[index].first = first;
      nodes_[index].count = count;
      return index;
    }
    int axis = 0;
    cbox.extent().maxCoeff(&axis);
    const std::uint32_t mid = first + count / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                     [&](std::uint32_t a, std::uint32_t b) {
                       const double ca = centroids_[a][axis];
                       const double cb = centroids_[b][axis];
                       return ca < cb || (ca == cb && a < b);
                     });
    const std::uint32_t left = build(first, mid - first, depth + 1);
    const std::uint32_t right = build(mid, first + count - mid, depth + 1);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  std::shared_ptr<const TriangleMesh> mesh_;
  std::vector<Aabb> tri_boxes_;
  std::vector<Vec3> centroids_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  double max_vertex_norm_ = 0.0;
};

inline std::shared_ptr<const CollisionIndex> build_collision_index(TriangleMesh mesh) {
  return std::make_shared<const CollisionIndex>(std::make_shared<const TriangleMesh>(std::move(mesh)));
}

/// Reference scan used to validate the hierarchy.
inline std::vector<std::uint32_t> brute_force_sphere_query(const TriangleMesh& mesh, const Vec3& center,
                                                           double radius) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto [a, b, c] = mesh.corners(i);
    if (point_triangle_distance_sq(center, a, b, c) <= radius * radius) out.push_back(i);
  }
  return out;
}

}  // namespace affordsim
