#pragma once

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "affordsim/error.hpp"
#include "affordsim/geometry.hpp"

namespace affordsim {

struct LoadedMesh {
  TriangleMesh mesh;
  std::size_t dropped_degenerate = 0;
};

struct MeshLoadOptions {
  double scale = 1.0;
  /// Triangles with area at or below this (m^2, after scaling) are dropped.
  double min_area = 1e-14;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline double parse_double(std::string_view token, const std::string& where) {
  double value = 0.0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value))
    throw Error(ErrorCode::kParse, where + ": bad number '" + std::string(token) + "'");
  return value;
}

inline long long parse_int(std::string_view token, const std::string& where) {
  long long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw Error(ErrorCode::kParse, where + ": bad integer '" + std::string(token) + "'");
  return value;
}

/// Drops triangles with repeated indices or (near-)zero area and validates indices.
inline LoadedMesh clean_mesh(TriangleMesh mesh, double min_area) {
  LoadedMesh out;
  std::vector<Triangle> kept;
  kept.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    for (auto i : t)
      if (i >= mesh.vertices.size())
        throw Error(ErrorCode::kParse, "triangle index " + std::to_string(i) + " out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2] ||
        triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <= min_area) {
      ++out.dropped_degenerate;
      continue;
    }
    kept.push_back(t);
  }
  mesh.triangles = std::move(kept);
  if (mesh.triangles.empty())
    throw Error(ErrorCode::kEmptyMesh, "'" + mesh.name + "' has no triangles after cleaning");
  out.mesh = std::move(mesh);
  return out;
}

inline TriangleMesh parse_obj(std::istream& in, const std::string& name) {
  TriangleMesh mesh;
  mesh.name = name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = name + " line " + std::to_string(line_no);
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "v") {
      if (tok.size() < 4) throw Error(ErrorCode::kParse, where + ": vertex needs 3 coordinates");
      mesh.vertices.emplace_back(parse_double(tok[1], where), parse_double(tok[2], where),
                                 parse_double(tok[3], where));
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw Error(ErrorCode::kParse, where + ": face needs at least 3 vertices");
      std::vector<std::uint32_t> poly;
      for (std::size_t k = 1; k < tok.size(); ++k) {
        const auto slash = tok[k].find('/');
        long long idx = parse_int(tok[k].substr(0, slash), where);
        const auto nv = static_cast<long long>(mesh.vertices.size());
        if (idx < 0) idx = nv + idx + 1;
        if (idx < 1 || idx > nv)
          throw Error(ErrorCode::kParse, where + ": vertex index out of range");
        poly.push_back(static_cast<std::uint32_t>(idx - 1));
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  return mesh;
}

enum class PlyType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

inline PlyType ply_type(std::string_view s, const std::string& where) {
  static const std::map<std::string_view, PlyType> kTypes = {
      {"char", PlyType::kInt8},     {"int8", PlyType::kInt8},     {"uchar", PlyType::kUInt8},
      {"uint8", PlyType::kUInt8},   {"short", PlyType::kInt16},   {"int16", PlyType::kInt16},
      {"ushort", PlyType::kUInt16}, {"uint16", PlyType::kUInt16}, {"int", PlyType::kInt32},
      {"int32", PlyType::kInt32},   {"uint", PlyType::kUInt32},   {"uint32", PlyType::kUInt32},
      {"float", PlyType::kFloat32}, {"float32", PlyType::kFloat32}, {"double", PlyType::kFloat64},
      {"float64", PlyType::kFloat64}};
  auto it = kTypes.find(s);
  if (it == kTypes.end()) throw Error(ErrorCode::kParse, where + ": unknown PLY type '" + std::string(s) + "'");
  return it->second;
}

inline std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUInt8: return 1;
    case PlyType::kInt16:
    case PlyType::kUInt16: return 2;
    case PlyType::kInt32:
    case PlyType::kUInt32:
    case PlyType::kFloat32: return 4;
    case PlyType::kFloat64: return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
  PlyType count_type = PlyType::kUInt8;
  PlyType type = PlyType::kFloat32;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

template <typename T>
T read_le(const char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  return value;
}

inline double decode(PlyType t, const char* p) {
  switch (t) {
    case PlyType::kInt8: return read_le<std::int8_t>(p);
    case PlyType::kUInt8: return read_le<std::uint8_t>(p);
    case PlyType::kInt16: return read_le<std::int16_t>(p);
    case PlyType::kUInt16: return read_le<std::uint16_t>(p);
    case PlyType::kInt32: return read_le<std::int32_t>(p);
    case PlyType::kUInt32: return read_le<std::uint32_t>(p);
    case PlyType::kFloat32: return read_le<float>(p);
    case PlyType::kFloat64: return read_le<double>(p);
  }
  return 0.0;
}

/// Pulls scalar values out of either an ASCII token stream or a binary blob.
class PlyReader {
 public:
  PlyReader(std::string data, std::size_t offset, bool binary, std::string name)
      : data_(std::move(data)), pos_(offset), binary_(binary), name_(std::move(name)) {}

  double next(PlyType t) {
    if (binary_) {
      const std::size_t n = ply_size(t);
      if (pos_ + n > data_.size())
        throw Error(ErrorCode::kParse, name_ + ": truncated binary body at byte " + std::to_string(pos_));
      const double v = decode(t, data_.data() + pos_);
      pos_ += n;
      return v;
    }
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      if (data_[pos_] == '\n') ++line_;
      ++pos_;
    }
    const std::size_t start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (pos_ == start)
      throw Error(ErrorCode::kParse, name_ + ": unexpected end of ASCII body at line " + std::to_string(line_));
    return parse_double(std::string_view(data_).substr(start, pos_ - start),
                        name_ + ":" + std::to_string(line_));
  }

  void set_line(std::size_t line) { line_ = line; }
  std::size_t byte_offset() const { return pos_; }

 private:
  std::string data_;
  std::size_t pos_;
  bool binary_;
  std::string name_;
  std::size_t line_ = 0;
};

inline TriangleMesh parse_ply(std::string data, const std::string& name) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string {
    if (pos >= data.size()) throw Error(ErrorCode::kParse, name + ": header not terminated");
    const std::size_t end = data.find('\n', pos);
    const std::size_t stop = end == std::string::npos ? data.size() : end;
    std::string line = data.substr(pos, stop - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = stop + 1;
    ++line_no;
    return line;
  };

  if (next_line() != "ply") throw Error(ErrorCode::kParse, name + ":1: missing 'ply' magic");
  bool binary = false;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string line = next_line();
    const std::string where = name + " line " + std::to_string(line_no);
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw Error(ErrorCode::kParse, where + ": bad format line");
      if (tok[1] == "ascii") binary = false;
      else if (tok[1] == "binary_little_endian") binary = true;
      else throw Error(ErrorCode::kParse, where + ": unsupported PLY format '" + std::string(tok[1]) + "'");
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw Error(ErrorCode::kParse, where + ": bad element line");
      elements.push_back({std::string(tok[1]), static_cast<std::size_t>(parse_int(tok[2], where)), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw Error(ErrorCode::kParse, where + ": property before element");
      PlyProperty prop;
      if (tok.size() == 5 && tok[1] == "list") {
        prop.is_list = true;
        prop.count_type = ply_type(tok[2], where);
        prop.type = ply_type(tok[3], where);
        prop.name = tok[4];
      } else if (tok.size() == 3) {
        prop.type = ply_type(tok[1], where);
        prop.name = tok[2];
      } else {
        throw Error(ErrorCode::kParse, where + ": bad property line");
      }
      elements.back().properties.push_back(std::move(prop));
    } else {
      throw Error(ErrorCode::kParse, where + ": unexpected header keyword '" + std::string(tok[0]) + "'");
    }
  }

  TriangleMesh mesh;
  mesh.name = name;
  PlyReader reader(std::move(data), pos, binary, name);
  reader.set_line(line_no + 1);
  for (const auto& el : elements) {
    for (std::size_t row = 0; row < el.count; ++row) {
      Vec3 v = Vec3::Zero();
      int have = 0;
      for (const auto& prop : el.properties) {
        if (prop.is_list) {
          const double n = reader.next(prop.count_type);
          if (n < 0) throw Error(ErrorCode::kParse, name + ": negative list length");
          std::vector<std::uint32_t> poly;
          for (int k = 0; k < static_cast<int>(n); ++k) {
            const double idx = reader.next(prop.type);
            if (idx < 0) throw Error(ErrorCode::kParse, name + ": negative vertex index near byte " +
                                                            std::to_string(reader.byte_offset()));
            poly.push_back(static_cast<std::uint32_t>(idx));
          }
          if (el.name == "face" && (prop.name == "vertex_indices" || prop.name == "vertex_index"))
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
              mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
        } else {
          const double value = reader.next(prop.type);
          if (el.name == "vertex") {
            if (prop.name == "x") { v.x() = value; have |= 1; }
            else if (prop.name == "y") { v.y() = value; have |= 2; }
            else if (prop.name == "z") { v.z() = value; have |= 4; }
          }
        }
      }
      if (el.name == "vertex") {
        if (have != 7) throw Error(ErrorCode::kParse, name + ": vertex element lacks x/y/z");
        if (!v.allFinite()) throw Error(ErrorCode::kParse, name + ": non-finite vertex coordinate");
        mesh.vertices.push_back(v);
      }
    }
  }
  return mesh;
}

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext;
}

}  // namespace detail

/// Reads a Wavefront OBJ or PLY (ASCII / binary little-endian) mesh.
inline LoadedMesh load_mesh(const std::filesystem::path& path, const MeshLoadOptions& options = {}) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw Error(ErrorCode::kFileNotFound, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());

  const std::string ext = detail::lower_extension(path);
  const std::string name = path.filename().string();
  TriangleMesh mesh;
  if (ext == ".obj") {
    mesh = detail::parse_obj(in, name);
  } else if (ext == ".ply") {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    mesh = detail::parse_ply(buffer.str(), name);
  } else {
    throw Error(ErrorCode::kParse, path.string() + ": unsupported mesh extension '" + ext + "'");
  }
  if (options.scale != 1.0)
    for (auto& v : mesh.vertices) v *= options.scale;
  return detail::clean_mesh(std::move(mesh), options.min_area);
}

inline void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.precision(17);
  out << "# " << mesh.name << "\n";
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace affordsim
