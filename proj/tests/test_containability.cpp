#include <cmath>
#include <numbers>

#include "grid_cases.hpp"
#include "test_util.hpp"

using namespace affordsim;

namespace {

// Independent oracle: counts from exact integer arithmetic on micrometre extents.
struct GridOracle {
  long nx, ny, nz;
};

GridOracle grid_oracle(double ext_x, double ext_y, double radius, long n_max, long n_min) {
  const long lx = std::lround(ext_x * 1e6), ly = std::lround(ext_y * 1e6), lp = std::lround(2 * radius * 1e6);
  const long nx1 = std::max(1L, lx / lp), ny1 = std::max(1L, ly / lp);
  const long base = nx1 * ny1;
  GridOracle o{nx1, ny1, 1};
  if (base > n_max) {
    // Largest n with n <= sqrt(n_max / base) * l / lp, i.e. n^2 * base * lp^2 <= n_max * l^2.
    auto largest = [&](long l) {
      long n = 0;
      while ((n + 1) * (n + 1) * base * lp * lp <= n_max * l * l) ++n;
      return std::max(1L, n);
    };
    o.nx = largest(lx);
    o.ny = largest(ly);
  } else if (base < n_min) {
    o.nz = (n_min + base - 1) / base;
  }
  return o;
}

Aabb top_face(double x, double y) { return Aabb{{0, 0, 0}, {x, y, 0.05}}; }

}  // namespace

TEST(PlanGrid, HandCases) {
  for (const auto& c : testutil::grid_cases()) {
    ParticleSpec p;
    p.radius = c.radius;
    const GridPlan g = plan_grid(top_face(c.ext_x, c.ext_y), p, c.n_max, c.n_min);
    EXPECT_EQ(g.n_x, c.n_x) << c.what;
    EXPECT_EQ(g.n_y, c.n_y) << c.what;
    EXPECT_EQ(g.n_z, c.n_z) << c.what;
    EXPECT_EQ(g.scale_s < 1.0, c.rescaled) << c.what;
    EXPECT_EQ(static_cast<int>(g.positions.size()), c.n_x * c.n_y * c.n_z) << c.what;
    const GridOracle o = grid_oracle(c.ext_x, c.ext_y, c.radius, c.n_max, c.n_min);
    EXPECT_EQ(g.n_x, o.nx) << c.what;
    EXPECT_EQ(g.n_y, o.ny) << c.what;
    EXPECT_EQ(g.n_z, o.nz) << c.what;
  }
}

TEST(PlanGrid, ScaleFactorValue) {
  const GridPlan g = plan_grid(top_face(0.2, 0.2), ParticleSpec{}, 100, 40);
  EXPECT_NEAR(g.scale_s, 0.5, 1e-15);
}

TEST(PlanGrid, LatticeGeometry) {
  const Aabb box{{1, 2, 3}, {1.07, 2.05, 3.2}};
  const GridPlan g = plan_grid(box, ParticleSpec{}, 200, 40);
  ASSERT_EQ(g.n_z, 2);
  const double dx = 0.07 / g.n_x, dy = 0.05 / g.n_y;
  for (int k = 0; k < g.n_z; ++k)
    for (int j = 0; j < g.n_y; ++j)
      for (int i = 0; i < g.n_x; ++i) {
        const Vec3& p = g.positions[static_cast<std::size_t>((k * g.n_y + j) * g.n_x + i)];
        EXPECT_NEAR(p.x(), 1 + (i + 0.5) * dx, 1e-12);
        EXPECT_NEAR(p.y(), 2 + (j + 0.5) * dy, 1e-12);
        EXPECT_NEAR(p.z(), 3.2 + 0.01 + 0.05 * k, 1e-12);
      }
}

TEST(PlanGrid, Errors) {
  EXPECT_THROW(plan_grid(Aabb{{0, 0, 0}, {0, 1, 1}}, ParticleSpec{}, 200, 40), Error);
  try {
    plan_grid(Aabb{{0, 0, 0}, {1, 0, 1}}, ParticleSpec{}, 200, 40);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateAabb);
  }
  EXPECT_THROW(plan_grid(top_face(0.1, 0.1), ParticleSpec{}, 10, 40), Error);
}

TEST(Schedule, DefaultFitsBudget) {
  const PerturbationSchedule s = default_schedule();
  EXPECT_EQ(s.total_steps(), 1000);
  EXPECT_EQ(500 + s.total_steps(), 1500);
  int rotations = 0, forces = 0;
  for (const auto& p : s.phases) {
    if (const auto* r = std::get_if<RotatePhase>(&p)) {
      ++rotations;
      EXPECT_NEAR(std::abs(r->angle), std::numbers::pi / 60, 1e-15);
    } else if (const auto* f = std::get_if<ForceFieldPhase>(&p)) {
      ++forces;
      EXPECT_EQ(f->magnitude, 0.5);
      EXPECT_EQ(f->direction.z(), 0.0);
    }
  }
  EXPECT_EQ(rotations, 4);
  EXPECT_EQ(forces, 4);
}

TEST(Perturbations, PoseRevertsAndOverflowIsRejected) {
  const ObjectScene scene = make_object_scene(shapes::open_box(0.1, 0.1, 0.05, 0.01, 0.01));
  SimWorld w = make_object_world(scene, ParticleSpec{}, SimParams{}, 0.1);
  const RigidTransform home = w.object->pose;
  run_perturbations(w, default_schedule(), 1500);
  EXPECT_LT((w.object->pose.rotation - home.rotation).norm(), 1e-9);
  EXPECT_LT((w.object->pose.translation - home.translation).norm(), 1e-9);
  EXPECT_EQ(w.extra_accel, Vec3::Zero());

  SimWorld e = make_object_world(scene, ParticleSpec{}, SimParams{}, 0.1);
  run_perturbations(e, PerturbationSchedule{}, 1500);
  EXPECT_EQ(e.object->pose.rotation, home.rotation);

  SimWorld o = make_object_world(scene, ParticleSpec{}, SimParams{}, 0.1);
  run_steps(o, 600);
  try {
    run_perturbations(o, default_schedule(), 1500);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kScheduleOverflow);
  }
}

TEST(Count, Examples) {
  SimWorld w;
  const Aabb box{{0, 0, 0}, {0.1, 0.1, 0.05}};
  const double r = w.particle.radius;
  w.positions = {box.center(), Vec3(0.05, 0.05, 0.05 + r)};
  EXPECT_EQ(count_retained(w, box), 1);

  // Brute-force oracle on a mixed scene.
  w.positions.clear();
  for (int i = 0; i < 10; ++i) w.positions.emplace_back(0.02 * i, 0.05, i % 2 ? 0.02 : 0.08);
  int expect = 0;
  for (const auto& p : w.positions)
    expect += (p.x() > 0 && p.x() < 0.1 && p.y() > 0 && p.y() < 0.1 && p.z() > 0 && p.z() < 0.05) ? 1 : 0;
  EXPECT_EQ(expect, 2);
  EXPECT_EQ(count_retained(w, box), expect);
}

TEST(Drop, OverEmptySpaceLandsOnGround) {
  SimWorld w;
  w.params.ground_z = 0.0;
  const GridPlan g = plan_grid(top_face(0.05, 0.05), ParticleSpec{}, 200, 0);
  run_drop(w, g, 400);
  for (const auto& p : w.positions) EXPECT_NEAR(p.z(), w.particle.radius, 1e-4);
  EXPECT_TRUE(is_settled(w, 0.01));
}

TEST(Drop, OverPlateSettles) {
  const ObjectScene scene = make_object_scene(shapes::solid_box(0.2, 0.2, 0.005));
  SimWorld w = make_object_world(scene, ParticleSpec{}, SimParams{}, 0.1);
  run_drop(w, plan_grid(scene.aabb, ParticleSpec{}, 200, 40), 500);
  EXPECT_TRUE(is_settled(w, 0.01));
}

TEST(Omega, Arithmetic) {
  EXPECT_EQ(omega_score(30, 60), 0.5);
  EXPECT_EQ(omega_score(0, 60), 0.0);
  for (int n_in = 0; n_in <= 60; ++n_in)
    for (int k = n_in; k <= 60; ++k) EXPECT_GE(omega_score(k, 60) > 0.0, omega_score(n_in, 60) > 0.0);
}

TEST(Imagine, SolidCubeIsNotAContainer) {
  const ContainabilityResult r = imagine_containability(shapes::solid_box(0.1, 0.1, 0.1), ContainabilityConfig{});
  EXPECT_EQ(r.n_in, 0);
  EXPECT_EQ(r.omega, 0.0);
  EXPECT_FALSE(r.is_open_container);
  EXPECT_TRUE(r.footprint.points.empty());
}

TEST(Imagine, OpenBoxIsAContainer) {
  // 8x8x5 cm cavity, 1 cm walls and floor.
  const TriangleMesh mesh = shapes::open_box(0.10, 0.10, 0.06, 0.01, 0.01);
  const ContainabilityResult r = imagine_containability(mesh, ContainabilityConfig{});
  EXPECT_GE(r.omega, 0.5);
  EXPECT_TRUE(r.is_open_container);
  EXPECT_EQ(r.omega, static_cast<double>(r.n_in) / r.n_drop);
  EXPECT_EQ(static_cast<int>(r.footprint.points.size()), r.n_in);
  // Footprint points are drop positions of the grid.
  for (const auto& p : r.footprint.points) {
    const bool found = std::any_of(r.grid.positions.begin(), r.grid.positions.end(),
                                   [&](const Vec3& g) { return (g.head<2>() - p).norm() < 1e-12; });
    EXPECT_TRUE(found);
  }

  ContainabilityConfig strict;
  strict.omega_thr = 0.99;
  EXPECT_FALSE(imagine_containability(mesh, strict).is_open_container);
}

TEST(Imagine, HorizontalTranslationInvariance) {
  const TriangleMesh mesh = shapes::vessel(0.03, 0.04, 0.04, 0.004, 0.004, 32);
  const ContainabilityResult base = imagine_containability(mesh, ContainabilityConfig{});
  for (const Vec2& t : {Vec2(0.25, -1.5), Vec2(3.0, 0.125), Vec2(-0.0625, 7.5)}) {
    TriangleMesh moved = mesh;
    for (auto& v : moved.vertices) v += Vec3(t.x(), t.y(), 0.0);
    const ContainabilityResult r = imagine_containability(moved, ContainabilityConfig{});
    EXPECT_EQ(r.n_in, base.n_in);
    EXPECT_EQ(r.omega, base.omega);
    ASSERT_EQ(r.footprint.points.size(), base.footprint.points.size());
    for (std::size_t i = 0; i < r.footprint.points.size(); ++i)
      EXPECT_LT((r.footprint.points[i] - t - base.footprint.points[i]).norm(), 1e-12);
  }
}

TEST(Imagine, Deterministic) {
  const TriangleMesh mesh = shapes::hopper_box(0.12, 0.08, 0.01, 0.006, 0.03);
  const ContainabilityResult a = imagine_containability(mesh, ContainabilityConfig{});
  const ContainabilityResult b = imagine_containability(mesh, ContainabilityConfig{});
  EXPECT_EQ(a.n_in, b.n_in);
  ASSERT_EQ(a.footprint.points.size(), b.footprint.points.size());
  for (std::size_t i = 0; i < a.footprint.points.size(); ++i) EXPECT_EQ(a.footprint.points[i], b.footprint.points[i]);
}

TEST(Imagine, BudgetOverflowRejected) {
  ContainabilityConfig c;
  c.total_steps = 1200;
  EXPECT_THROW(imagine_containability(shapes::solid_box(0.1, 0.1, 0.1), c), Error);
}
