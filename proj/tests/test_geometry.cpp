#include <cmath>
#include <numbers>
#include <random>

#include "test_util.hpp"

using namespace affordsim;

TEST(Aabb, UnitCubeIdentity) {
  const Aabb box = compute_aabb(testutil::unit_cube());
  EXPECT_EQ(box.min, Vec3(0, 0, 0));
  EXPECT_EQ(box.max, Vec3(1, 1, 1));
}

TEST(Aabb, CubeRotatedAboutCenter) {
  const Vec3 c(0.5, 0.5, 0.5);
  RigidTransform g;
  g.rotation = rotation_z(std::numbers::pi / 4);
  g.translation = c - g.rotation * c;
  const Vec3 e = compute_aabb(testutil::unit_cube(), g).extent();
  EXPECT_NEAR(e.x(), std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(e.y(), std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(e.z(), 1.0, 1e-12);
}

TEST(Aabb, TranslationEquivariantExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  const TriangleMesh mesh = shapes::vessel(0.03, 0.05, 0.04, 0.004, 0.004, 20);
  for (int k = 0; k < 50; ++k) {
    RigidTransform g{testutil::random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
    const Vec3 t(u(rng), u(rng), u(rng));
    const Aabb base = compute_aabb(mesh, g);
    const Aabb moved = compute_aabb(mesh, RigidTransform::from_translation(t) * g);
    // Each vertex is R v + (g.t + t); compare against the box computed the same way.
    Aabb expect = Aabb::empty();
    for (const auto& v : mesh.vertices) expect.extend(Vec3(g.rotation * v + (g.translation + t)));
    EXPECT_EQ(moved.min, expect.min);
    EXPECT_EQ(moved.max, expect.max);
    EXPECT_LT((moved.min - (base.min + t)).norm(), 1e-12);
  }
}

TEST(Aabb, StrictContainmentExcludesFaces) {
  const Aabb box{{0, 0, 0}, {1, 1, 1}};
  EXPECT_TRUE(box.strictly_contains({0.5, 0.5, 0.5}));
  EXPECT_FALSE(box.strictly_contains({0.5, 0.5, 1.0}));
  EXPECT_FALSE(box.strictly_contains({0.5, 0.5, 1.005}));
  EXPECT_FALSE(box.strictly_contains({0.0, 0.5, 0.5}));
}

TEST(Centroid, UnitCube) {
  const Vec3 c = compute_centroid(testutil::unit_cube());
  EXPECT_NEAR((c - Vec3(0.5, 0.5, 0.5)).norm(), 0.0, 1e-15);
}

TEST(Centroid, SingleTriangle) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}};
  const Vec3 c = compute_centroid(m);
  EXPECT_NEAR(c.x(), 1.0 / 3, 1e-15);
  EXPECT_NEAR(c.y(), 1.0 / 3, 1e-15);
  EXPECT_EQ(c.z(), 0.0);
}

TEST(Centroid, LShapedStripIsAreaWeighted) {
  // Triangle A: legs 1 and 1 (area 1/2). Triangle B: legs 2 and 1 (area 1).
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 0, 0}, {3, 0, 0}, {1, 1, 0}};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  const Vec3 ca(1.0 / 3, 1.0 / 3, 0), cb(5.0 / 3, 1.0 / 3, 0);
  const Vec3 expect = (0.5 * ca + 1.0 * cb) / 1.5;
  EXPECT_LT((compute_centroid(m) - expect).norm(), 1e-15);
}

TEST(Centroid, ZeroAreaThrows) {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  m.triangles = {{0, 1, 2}};
  try {
    compute_centroid(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroArea);
  }
}

TEST(Centroid, RigidEquivariance) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  const TriangleMesh mesh = shapes::open_box(0.3, 0.2, 0.1, 0.01, 0.02);
  const Vec3 c0 = compute_centroid(mesh);
  for (int k = 0; k < 30; ++k) {
    const RigidTransform g{testutil::random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
    EXPECT_LT((compute_centroid(transformed(mesh, g)) - g.apply(c0)).norm(), 1e-9);
  }
}

TEST(RigidTransform, CompositionAssociative) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 100; ++k) {
    RigidTransform a{testutil::random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
    RigidTransform b{testutil::random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
    RigidTransform c{testutil::random_rotation(rng), Vec3(u(rng), u(rng), u(rng))};
    const RigidTransform l = (a * b) * c, r = a * (b * c);
    EXPECT_LT((l.rotation - r.rotation).norm(), 1e-9);
    EXPECT_LT((l.translation - r.translation).norm(), 1e-9);
    const RigidTransform id = a * a.inverse();
    EXPECT_LT((id.rotation - Mat3::Identity()).norm(), 1e-12);
    EXPECT_LT(id.translation.norm(), 1e-12);
    EXPECT_TRUE(l.is_valid());
  }
}

TEST(RigidTransform, RejectsNonRotation) {
  RigidTransform g;
  g.rotation(0, 0) = -1.0;  // reflection
  EXPECT_FALSE(g.is_valid());
  g.rotation = 1.01 * Mat3::Identity();
  EXPECT_FALSE(g.is_valid());
}

TEST(Rotate2d, Examples) {
  EXPECT_EQ(rotate2d(0.0), Mat2::Identity());
  const Mat2 q = rotate2d(std::numbers::pi / 2);
  EXPECT_NEAR(q(0, 0), 0.0, 1e-16);
  EXPECT_EQ(q(0, 1), -1.0);
  EXPECT_EQ(q(1, 0), 1.0);
  EXPECT_NEAR(q(1, 1), 0.0, 1e-16);
  const Vec2 v = rotate2d(std::numbers::pi / 4) * Vec2(1, 0);
  EXPECT_NEAR(v.x(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(v.y(), std::sqrt(0.5), 1e-15);
}

TEST(FootprintFrame, SinglePointFallsBackToWorldAxes) {
  const PlaneFrame f = footprint_frame({{{1, 1}}}, Aabb{{0, 0, 0}, {2, 2, 0.3}});
  EXPECT_EQ(f.origin2d, Vec2(1, 1));
  EXPECT_EQ(f.axis_x, Vec2(1, 0));
  EXPECT_EQ(f.axis_y, Vec2(0, 1));
  EXPECT_NEAR(f.z, 0.31, 1e-15);
}

TEST(FootprintFrame, ElongatedCross) {
  const PlaneFrame f = footprint_frame({{{-1, 0}, {1, 0}, {0, 0.1}, {0, -0.1}}}, Aabb{});
  EXPECT_LT(f.origin2d.norm(), 1e-15);
  EXPECT_LT((f.axis_x - Vec2(1, 0)).norm(), 1e-12);
}

TEST(FootprintFrame, SquareSymmetricUsesWorldAxes) {
  const PlaneFrame f = footprint_frame({{{0, 0}, {2, 0}, {2, 2}, {0, 2}}}, Aabb{});
  EXPECT_EQ(f.origin2d, Vec2(1, 1));
  EXPECT_EQ(f.axis_x, Vec2(1, 0));
  EXPECT_EQ(f.axis_y, Vec2(0, 1));
}

TEST(FootprintFrame, EmptyThrows) {
  try {
    footprint_frame({}, Aabb{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyFootprint);
  }
}

// Oracle: Eigen's symmetric eigen-solver on the same covariance.
TEST(FootprintFrame, MatchesEigenSolverAndStaysOrthonormal) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 200; ++k) {
    Footprint fp;
    const int n = 1 + static_cast<int>(rng() % 30);
    const double sx = 0.05 + std::abs(u(rng)), sy = 0.05 + std::abs(u(rng)), rot = 3 * u(rng);
    for (int i = 0; i < n; ++i) fp.points.push_back(rotate2d(rot) * Vec2(sx * u(rng), sy * u(rng)) + Vec2(0.3, -0.2));
    const PlaneFrame f = footprint_frame(fp, Aabb{});
    EXPECT_NEAR(f.axis_x.norm(), 1.0, 1e-9);
    EXPECT_NEAR(f.axis_y.norm(), 1.0, 1e-9);
    EXPECT_NEAR(f.axis_x.dot(f.axis_y), 0.0, 1e-9);
    EXPECT_NEAR(f.axis_x.x() * f.axis_y.y() - f.axis_x.y() * f.axis_y.x(), 1.0, 1e-9);

    Vec2 mean = Vec2::Zero();
    for (const auto& p : fp.points) mean += p;
    mean /= n;
    Mat2 cov = Mat2::Zero();
    for (const auto& p : fp.points) cov += (p - mean) * (p - mean).transpose();
    cov /= n;
    Eigen::SelfAdjointEigenSolver<Mat2> es(cov);
    if (es.eigenvalues()(1) - es.eigenvalues()(0) < 1e-6) continue;
    const Vec2 major = es.eigenvectors().col(1);
    EXPECT_NEAR(std::abs(major.dot(f.axis_x)), 1.0, 1e-9);
  }
}

TEST(ClosestPoint, RegionsAgainstDenseSampling) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 0; k < 200; ++k) {
    const Vec3 a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng)), c(u(rng), u(rng), u(rng));
    const Vec3 p(2 * u(rng), 2 * u(rng), 2 * u(rng));
    const double d = (closest_point_on_triangle(p, a, b, c) - p).norm();
    // Barycentric sampling upper-bounds the distance; no sample may beat it.
    double best = 1e300;
    const int n = 60;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const double s = static_cast<double>(i) / n, t = static_cast<double>(j) / n;
        best = std::min(best, (a + s * (b - a) + t * (c - a) - p).norm());
      }
    EXPECT_LE(d, best + 1e-12);
    EXPECT_GE(d, best - 0.05);
  }
}

TEST(TrianglesIntersect, Cases) {
  const std::array<Vec3, 3> t1 = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  EXPECT_TRUE(triangles_intersect(t1, {Vec3(0.2, 0.2, -1), Vec3(0.2, 0.2, 1), Vec3(0.3, 0.8, 0)}));
  EXPECT_FALSE(triangles_intersect(t1, {Vec3(0, 0, 0.1), Vec3(1, 0, 0.1), Vec3(0, 1, 0.1)}));
  EXPECT_FALSE(triangles_intersect(t1, {Vec3(2, 2, -1), Vec3(2, 2, 1), Vec3(3, 3, 0)}));
}
