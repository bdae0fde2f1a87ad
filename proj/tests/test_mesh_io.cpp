#include <cstring>

#include "test_util.hpp"

using namespace affordsim;
using testutil::TempDir;
using testutil::write_file;

namespace {

ErrorCode load_error(const std::filesystem::path& p, std::string* message = nullptr) {
  try {
    load_mesh(p);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected an error loading " << p;
  return ErrorCode::kUsage;
}

template <typename T>
void put(std::string& buf, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  buf.append(bytes, sizeof(T));
}

}  // namespace

TEST(LoadObj, SingleTriangle) {
  TempDir dir("obj");
  write_file(dir / "t.obj", "# one\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  const LoadedMesh m = load_mesh(dir / "t.obj");
  ASSERT_EQ(m.mesh.vertices.size(), 3u);
  ASSERT_EQ(m.mesh.triangles.size(), 1u);
  EXPECT_EQ(m.mesh.vertices[1], Vec3(1, 0, 0));
  EXPECT_EQ(m.dropped_degenerate, 0u);
}

TEST(LoadObj, RepeatedIndexDropped) {
  TempDir dir("obj");
  write_file(dir / "t.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 1 2\nf 1 2 3\n");
  const LoadedMesh m = load_mesh(dir / "t.obj");
  EXPECT_EQ(m.mesh.triangles.size(), 1u);
  EXPECT_EQ(m.dropped_degenerate, 1u);
}

TEST(LoadObj, UnitCubeRoundTrip) {
  TempDir dir("obj");
  write_obj(testutil::unit_cube(), dir / "cube.obj");
  const LoadedMesh m = load_mesh(dir / "cube.obj");
  EXPECT_EQ(m.mesh.vertices.size(), 8u);
  EXPECT_EQ(m.mesh.triangles.size(), 12u);
  const Aabb box = compute_aabb(m.mesh);
  EXPECT_EQ(box.min, Vec3(0, 0, 0));
  EXPECT_EQ(box.max, Vec3(1, 1, 1));
}

TEST(LoadObj, PolygonFanAndSlashesAndNegativeIndices) {
  TempDir dir("obj");
  write_file(dir / "q.obj",
             "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\n"
             "f 1/1/1 2/1/1 3/1/1 4/1/1\n"
             "f -4//1 -3//1 -1//1\n");
  const LoadedMesh m = load_mesh(dir / "q.obj");
  ASSERT_EQ(m.mesh.triangles.size(), 3u);
  EXPECT_EQ(m.mesh.triangles[0], (Triangle{0, 1, 2}));
  EXPECT_EQ(m.mesh.triangles[1], (Triangle{0, 2, 3}));
  EXPECT_EQ(m.mesh.triangles[2], (Triangle{0, 1, 3}));
}

TEST(LoadObj, ScaleApplied) {
  TempDir dir("obj");
  write_file(dir / "t.obj", "v 0 0 0\nv 1000 0 0\nv 0 1000 0\nf 1 2 3\n");
  MeshLoadOptions opt;
  opt.scale = 0.001;
  EXPECT_EQ(load_mesh(dir / "t.obj", opt).mesh.vertices[1], Vec3(1, 0, 0));
}

TEST(LoadObj, ParseErrorsNameTheLine) {
  TempDir dir("obj");
  write_file(dir / "bad.obj", "v 0 0 0\nv 1 0 zz\nv 0 1 0\nf 1 2 3\n");
  std::string msg;
  EXPECT_EQ(load_error(dir / "bad.obj", &msg), ErrorCode::kParse);
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;

  write_file(dir / "range.obj", "v 0 0 0\nv 1 0 0\nf 1 2 9\n");
  EXPECT_EQ(load_error(dir / "range.obj", &msg), ErrorCode::kParse);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(LoadMesh, MissingEmptyAndUnknown) {
  TempDir dir("obj");
  EXPECT_EQ(load_error(dir / "nope.obj"), ErrorCode::kFileNotFound);
  write_file(dir / "empty.obj", "v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n");
  EXPECT_EQ(load_error(dir / "empty.obj"), ErrorCode::kEmptyMesh);
  write_file(dir / "x.stl", "solid");
  EXPECT_EQ(load_error(dir / "x.stl"), ErrorCode::kParse);
}

TEST(LoadPly, Ascii) {
  TempDir dir("ply");
  write_file(dir / "a.ply",
             "ply\nformat ascii 1.0\ncomment hi\nelement vertex 4\nproperty float x\nproperty float y\n"
             "property float z\nproperty uchar red\nelement face 1\nproperty list uchar int vertex_indices\n"
             "end_header\n0 0 0 255\n1 0 0 0\n1 1 0 0\n0 1 0 0\n4 0 1 2 3\n");
  const LoadedMesh m = load_mesh(dir / "a.ply");
  EXPECT_EQ(m.mesh.vertices.size(), 4u);
  EXPECT_EQ(m.mesh.triangles.size(), 2u);
  EXPECT_EQ(m.mesh.vertices[2], Vec3(1, 1, 0));
}

TEST(LoadPly, BinaryLittleEndianDoubleAndFloat) {
  TempDir dir("ply");
  for (bool dbl : {false, true}) {
    std::string body;
    const double verts[3][3] = {{0, 0, 0}, {0.25, 0, 0}, {0, 0.5, 0.125}};
    for (const auto& v : verts)
      for (double c : v) dbl ? put(body, c) : put(body, static_cast<float>(c));
    put(body, static_cast<std::uint8_t>(3));
    for (std::uint32_t i : {0u, 1u, 2u}) put(body, i);
    const std::string type = dbl ? "double" : "float";
    const std::string header = "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty " + type +
                               " x\nproperty " + type + " y\nproperty " + type +
                               " z\nelement face 1\nproperty list uchar uint vertex_indices\nend_header\n";
    write_file(dir / "b.ply", header + body);
    const LoadedMesh m = load_mesh(dir / "b.ply");
    ASSERT_EQ(m.mesh.triangles.size(), 1u);
    EXPECT_EQ(m.mesh.vertices[2], Vec3(0, 0.5, 0.125));
  }
}

TEST(LoadPly, TruncatedBinaryIsParseError) {
  TempDir dir("ply");
  write_file(dir / "t.ply",
             "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
             "property float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n\x01\x02");
  std::string msg;
  EXPECT_EQ(load_error(dir / "t.ply", &msg), ErrorCode::kParse);
  EXPECT_NE(msg.find("byte"), std::string::npos) << msg;
}
