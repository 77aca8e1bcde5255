#include "woundbench/mesh_io.hpp"

#include "woundbench/error.hpp"
#include "woundbench/json_format.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdlib>
#include <cstdio>
#include <cstring>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace woundbench {

static_assert(std::endian::native == std::endian::little, "binary PLY support assumes a little-endian host");

namespace {

enum class PlyType { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

std::optional<PlyType> parse_ply_type(const std::string& name) {
  if (name == "char" || name == "int8") return PlyType::int8;
  if (name == "uchar" || name == "uint8") return PlyType::uint8;
  if (name == "short" || name == "int16") return PlyType::int16;
  if (name == "ushort" || name == "uint16") return PlyType::uint16;
  if (name == "int" || name == "int32") return PlyType::int32;
  if (name == "uint" || name == "uint32") return PlyType::uint32;
  if (name == "float" || name == "float32") return PlyType::float32;
  if (name == "double" || name == "float64") return PlyType::float64;
  return std::nullopt;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::float32;
  bool is_list = false;
  PlyType count_type = PlyType::uint8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

// Reads scalar values from either the ascii token stream or binary bytes.
class PlyCursor {
 public:
  PlyCursor(const std::string& bytes, std::size_t offset, bool binary)
      : bytes_(bytes), pos_(offset), binary_(binary) {}

  double read(PlyType t) {
    if (binary_) {
      return read_binary(t);
    }
    return read_ascii();
  }

 private:
  template <typename T>
  double take() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw input_error("unexpected EOF");
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return static_cast<double>(value);
  }

  double read_binary(PlyType t) {
    switch (t) {
      case PlyType::int8: return take<std::int8_t>();
      case PlyType::uint8: return take<std::uint8_t>();
      case PlyType::int16: return take<std::int16_t>();
      case PlyType::uint16: return take<std::uint16_t>();
      case PlyType::int32: return take<std::int32_t>();
      case PlyType::uint32: return take<std::uint32_t>();
      case PlyType::float32: return take<float>();
      case PlyType::float64: return take<double>();
    }
    return 0.0;
  }

  double read_ascii() {
    while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    if (pos_ >= bytes_.size()) {
      throw input_error("unexpected EOF");
    }
    const char* start = bytes_.data() + pos_;
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) {
      throw input_error("malformed PLY value");
    }
    pos_ += static_cast<std::size_t>(end - start);
    return v;
  }

  const std::string& bytes_;
  std::size_t pos_;
  bool binary_;
};

std::uint32_t to_index(double v) {
  if (!(v >= 0.0) || v > 4294967295.0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
    throw input_error("malformed face");
  }
  return static_cast<std::uint32_t>(v);
}

void fan_triangulate(const std::vector<std::uint32_t>& poly, std::vector<Face>& faces) {
  if (poly.size() < 3) {
    throw input_error("malformed face");
  }
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    faces.push_back({poly[0], poly[k], poly[k + 1]});
  }
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

} // namespace

TriangleMesh parse_ply(const std::string& bytes) {
  if (bytes.rfind("ply\n", 0) != 0 && bytes.rfind("ply\r\n", 0) != 0) {
    throw input_error("unsupported format");
  }
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) {
      throw input_error("unexpected EOF");
    }
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    return line;
  };

  next_line(); // magic
  std::optional<bool> binary;
  std::vector<PlyElement> elements;
  for (;;) {
    const std::string line = next_line();
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") {
      continue;
    }
    if (keyword == "end_header") {
      break;
    }
    if (keyword == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") {
        binary = false;
      } else if (fmt == "binary_little_endian") {
        binary = true;
      } else {
        throw input_error("unsupported format");
      }
    } else if (keyword == "element") {
      PlyElement e;
      long long count = -1;
      ls >> e.name >> count;
      if (!ls || count < 0) {
        throw input_error("unsupported format");
      }
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (elements.empty()) {
        throw input_error("unsupported format");
      }
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        std::string count_type;
        std::string item_type;
        ls >> count_type >> item_type >> p.name;
        const auto ct = parse_ply_type(count_type);
        const auto it = parse_ply_type(item_type);
        if (!ct || !it) {
          throw input_error("unsupported format");
        }
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
      } else {
        const auto t = parse_ply_type(type);
        if (!t) {
          throw input_error("unsupported format");
        }
        p.type = *t;
        ls >> p.name;
      }
      if (!ls) {
        throw input_error("unsupported format");
      }
      elements.back().properties.push_back(p);
    } else {
      throw input_error("unsupported format");
    }
  }
  if (!binary) {
    throw input_error("unsupported format");
  }

  PlyCursor cursor(bytes, pos, *binary);
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::optional<std::vector<Label>> labels;
  std::optional<std::vector<Rgb>> colors;
  bool seen_vertices = false;

  for (const PlyElement& e : elements) {
    if (e.name == "vertex") {
      seen_vertices = true;
      int ix = -1, iy = -1, iz = -1, il = -1, ir = -1, ig = -1, ib = -1;
      for (std::size_t k = 0; k < e.properties.size(); ++k) {
        const std::string& n = e.properties[k].name;
        const int idx = static_cast<int>(k);
        if (n == "x") ix = idx;
        else if (n == "y") iy = idx;
        else if (n == "z") iz = idx;
        else if (n == "label") il = idx;
        else if (n == "red") ir = idx;
        else if (n == "green") ig = idx;
        else if (n == "blue") ib = idx;
      }
      if (ix < 0 || iy < 0 || iz < 0) {
        throw input_error("unsupported format");
      }
      const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;
      vertices.reserve(e.count);
      if (il >= 0) {
        labels.emplace();
        labels->reserve(e.count);
      }
      if (has_color) {
        colors.emplace();
        colors->reserve(e.count);
      }
      std::vector<double> values(e.properties.size());
      for (std::size_t i = 0; i < e.count; ++i) {
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const PlyProperty& p = e.properties[k];
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(cursor.read(p.count_type));
            for (std::size_t j = 0; j < n; ++j) {
              cursor.read(p.type);
            }
            values[k] = 0.0;
          } else {
            values[k] = cursor.read(p.type);
          }
        }
        vertices.emplace_back(values[ix], values[iy], values[iz]);
        if (labels) {
          labels->push_back(values[il] != 0.0 ? Label::wound : Label::background);
        }
        if (colors) {
          colors->push_back({to_byte(values[ir]), to_byte(values[ig]), to_byte(values[ib])});
        }
      }
    } else if (e.name == "face") {
      int list_prop = -1;
      for (std::size_t k = 0; k < e.properties.size(); ++k) {
        const PlyProperty& p = e.properties[k];
        if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) {
          list_prop = static_cast<int>(k);
        }
      }
      if (list_prop < 0) {
        throw input_error("unsupported format");
      }
      faces.reserve(e.count);
      std::vector<std::uint32_t> poly;
      for (std::size_t i = 0; i < e.count; ++i) {
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const PlyProperty& p = e.properties[k];
          if (!p.is_list) {
            cursor.read(p.type);
            continue;
          }
          const double raw_n = cursor.read(p.count_type);
          if (!(raw_n >= 0.0)) {
            throw input_error("malformed face");
          }
          const auto n = static_cast<std::size_t>(raw_n);
          poly.clear();
          for (std::size_t j = 0; j < n; ++j) {
            const double idx = cursor.read(p.type);
            if (static_cast<int>(k) == list_prop) {
              poly.push_back(to_index(idx));
            }
          }
          if (static_cast<int>(k) == list_prop) {
            fan_triangulate(poly, faces);
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < e.count; ++i) {
        for (const PlyProperty& p : e.properties) {
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(cursor.read(p.count_type));
            for (std::size_t j = 0; j < n; ++j) {
              cursor.read(p.type);
            }
          } else {
            cursor.read(p.type);
          }
        }
      }
    }
  }
  if (!seen_vertices) {
    throw input_error("unsupported format");
  }
  return TriangleMesh(std::move(vertices), std::move(faces), std::move(labels), std::move(colors));
}

TriangleMesh parse_obj(const std::string& text) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::istringstream is(text);
  std::string line;
  std::vector<long long> raw;
  std::vector<std::uint32_t> poly;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "v") {
      double x = 0.0, y = 0.0, z = 0.0;
      ls >> x >> y >> z;
      if (!ls) {
        throw input_error("malformed vertex");
      }
      vertices.emplace_back(x, y, z);
    } else if (keyword == "f") {
      raw.clear();
      std::string token;
      while (ls >> token) {
        // "v", "v/vt", "v//vn", "v/vt/vn": only the position index matters
        const std::string head = token.substr(0, token.find('/'));
        try {
          std::size_t used = 0;
          raw.push_back(std::stoll(head, &used));
          if (used != head.size()) {
            throw input_error("malformed face");
          }
        } catch (const std::logic_error&) {
          throw input_error("malformed face");
        }
      }
      poly.clear();
      const auto nv = static_cast<long long>(vertices.size());
      for (long long idx : raw) {
        const long long resolved = idx < 0 ? nv + idx : idx - 1;
        if (idx == 0 || resolved < 0 || resolved >= nv) {
          throw input_error("malformed face");
        }
        poly.push_back(static_cast<std::uint32_t>(resolved));
      }
      fan_triangulate(poly, faces);
    }
  }
  return TriangleMesh(std::move(vertices), std::move(faces));
}

std::string serialize_ply(const TriangleMesh& mesh, MeshFormat format) {
  const bool binary = format == MeshFormat::ply_binary;
  const bool with_labels = mesh.labels().has_value();
  const bool with_colors = mesh.colors().has_value();

  std::string out;
  out += "ply\n";
  out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "comment woundbench\n";
  out += "element vertex " + std::to_string(mesh.vertex_count()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (with_labels) {
    out += "property uchar label\n";
  }
  if (with_colors) {
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out += "element face " + std::to_string(mesh.face_count()) + "\n";
  out += "property list uchar uint vertex_indices\n";
  out += "end_header\n";

  auto append_raw = [&out](const auto& value) {
    char buf[sizeof(value)];
    std::memcpy(buf, &value, sizeof(value));
    out.append(buf, sizeof(value));
  };

  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& p = mesh.vertices()[i];
    if (binary) {
      append_raw(p.x());
      append_raw(p.y());
      append_raw(p.z());
      if (with_labels) {
        append_raw(static_cast<std::uint8_t>((*mesh.labels())[i]));
      }
      if (with_colors) {
        for (std::uint8_t c : (*mesh.colors())[i]) {
          append_raw(c);
        }
      }
    } else {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", p.x(), p.y(), p.z());
      out += buf;
      if (with_labels) {
        out += " " + std::to_string(static_cast<int>((*mesh.labels())[i]));
      }
      if (with_colors) {
        for (std::uint8_t c : (*mesh.colors())[i]) {
          out += " " + std::to_string(static_cast<int>(c));
        }
      }
      out += "\n";
    }
  }
  for (const Face& f : mesh.faces()) {
    if (binary) {
      append_raw(static_cast<std::uint8_t>(3));
      for (std::uint32_t idx : f) {
        append_raw(idx);
      }
    } else {
      out += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " + std::to_string(f[2]) + "\n";
    }
  }
  return out;
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.rfind("ply", 0) == 0) {
    return parse_ply(bytes);
  }
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") {
    return parse_obj(bytes);
  }
  throw input_error("unsupported format");
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format) {
  write_file_atomic(path, serialize_ply(mesh, format));
}

} // namespace woundbench
