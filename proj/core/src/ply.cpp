#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "egotraj/errors.hpp"
#include "egotraj/trajio.hpp"

namespace egotraj {

namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class Scalar { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

struct Property {
  std::string name;
  Scalar type = Scalar::kFloat32;
  bool is_list = false;
  Scalar count_type = Scalar::kUInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUInt8:
      return 1;
    case Scalar::kInt16:
    case Scalar::kUInt16:
      return 2;
    case Scalar::kInt32:
    case Scalar::kUInt32:
    case Scalar::kFloat32:
      return 4;
    case Scalar::kFloat64:
      return 8;
  }
  return 0;
}

class PlyParser {
 public:
  PlyParser(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

  PointCloud parse() {
    parse_header();
    PointCloud cloud;
    for (const Element& e : elements_) {
      if (e.name == "vertex") {
        read_vertices(e, cloud);
        return cloud;
      }
      skip_element(e);
    }
    fail(0, "no 'vertex' element");
  }

 private:
  [[noreturn]] void fail(std::size_t line, const std::string& what) const { throw ParseError(source_, line, what); }

  bool next_line(std::string_view& line) {
    if (pos_ >= data_.size()) return false;
    std::size_t end = data_.find('\n', pos_);
    if (end == std::string_view::npos) end = data_.size();
    line = data_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_;
    return true;
  }

  static std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
  }

  Scalar parse_type(std::string_view t) const {
    if (t == "char" || t == "int8") return Scalar::kInt8;
    if (t == "uchar" || t == "uint8") return Scalar::kUInt8;
    if (t == "short" || t == "int16") return Scalar::kInt16;
    if (t == "ushort" || t == "uint16") return Scalar::kUInt16;
    if (t == "int" || t == "int32") return Scalar::kInt32;
    if (t == "uint" || t == "uint32") return Scalar::kUInt32;
    if (t == "float" || t == "float32") return Scalar::kFloat32;
    if (t == "double" || t == "float64") return Scalar::kFloat64;
    fail(line_, "unsupported property type '" + std::string(t) + "'");
  }

  void parse_header() {
    std::string_view line;
    if (!next_line(line) || line != "ply") fail(1, "missing 'ply' magic");
    bool have_format = false;
    while (true) {
      if (!next_line(line)) fail(line_, "header not terminated by 'end_header'");
      const auto tok = tokens(line);
      if (tok.empty()) continue;
      if (tok[0] == "end_header") break;
      if (tok[0] == "comment" || tok[0] == "obj_info") continue;
      if (tok[0] == "format") {
        if (tok.size() != 3) fail(line_, "malformed format line");
        if (tok[1] == "ascii") {
          binary_ = false;
        } else if (tok[1] == "binary_little_endian") {
          binary_ = true;
        } else {
          fail(line_, "unsupported PLY format '" + std::string(tok[1]) + "'");
        }
        have_format = true;
      } else if (tok[0] == "element") {
        if (tok.size() != 3) fail(line_, "malformed element line");
        Element e;
        e.name = std::string(tok[1]);
        auto [p, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count);
        if (ec != std::errc() || p != tok[2].data() + tok[2].size()) fail(line_, "bad element count");
        elements_.push_back(std::move(e));
      } else if (tok[0] == "property") {
        if (elements_.empty()) fail(line_, "property before any element");
        Property prop;
        if (tok.size() == 5 && tok[1] == "list") {
          prop.is_list = true;
          prop.count_type = parse_type(tok[2]);
          prop.type = parse_type(tok[3]);
          prop.name = std::string(tok[4]);
          if (prop.count_type == Scalar::kFloat32 || prop.count_type == Scalar::kFloat64) {
            fail(line_, "list count type must be integral");
          }
        } else if (tok.size() == 3) {
          prop.type = parse_type(tok[1]);
          prop.name = std::string(tok[2]);
        } else {
          fail(line_, "malformed property line");
        }
        elements_.back().properties.push_back(std::move(prop));
      } else {
        fail(line_, "unknown header keyword '" + std::string(tok[0]) + "'");
      }
    }
    if (!have_format) fail(line_, "missing format line");
  }

  double read_binary(Scalar s) {
    const std::size_t n = scalar_size(s);
    if (pos_ + n > data_.size()) fail(0, "truncated binary body at byte " + std::to_string(pos_));
    const char* p = data_.data() + pos_;
    pos_ += n;
    switch (s) {
      case Scalar::kInt8: return static_cast<double>(static_cast<std::int8_t>(*p));
      case Scalar::kUInt8: return static_cast<double>(static_cast<std::uint8_t>(*p));
      case Scalar::kInt16: { std::int16_t v; std::memcpy(&v, p, n); return v; }
      case Scalar::kUInt16: { std::uint16_t v; std::memcpy(&v, p, n); return v; }
      case Scalar::kInt32: { std::int32_t v; std::memcpy(&v, p, n); return v; }
      case Scalar::kUInt32: { std::uint32_t v; std::memcpy(&v, p, n); return v; }
      case Scalar::kFloat32: { float v; std::memcpy(&v, p, n); return v; }
      case Scalar::kFloat64: { double v; std::memcpy(&v, p, n); return v; }
    }
    return 0.0;
  }

  // Values of one element instance, list properties flattened away.
  std::vector<double> read_instance(const Element& e, std::size_t index) {
    std::vector<double> values;
    values.reserve(e.properties.size());
    if (binary_) {
      for (const Property& p : e.properties) {
        if (p.is_list) {
          const double count = read_binary(p.count_type);
          if (count < 0 || count > 1e6) fail(0, "implausible list length in element '" + e.name + "'");
          for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) read_binary(p.type);
          values.push_back(0.0);
        } else {
          values.push_back(read_binary(p.type));
        }
      }
      return values;
    }
    std::string_view line;
    do {
      if (!next_line(line)) {
        fail(line_, "truncated body: element '" + e.name + "' declares " + std::to_string(e.count) +
                        " entries, found " + std::to_string(index));
      }
    } while (tokens(line).empty());
    const auto tok = tokens(line);
    std::size_t t = 0;
    auto take = [&]() -> double {
      if (t >= tok.size()) fail(line_, "too few values for element '" + e.name + "'");
      double v = 0.0;
      auto sv = tok[t++];
      auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
      if (ec != std::errc() || p != sv.data() + sv.size()) {
        fail(line_, "cannot parse value '" + std::string(sv) + "'");
      }
      return v;
    };
    for (const Property& p : e.properties) {
      if (p.is_list) {
        const double count = take();
        if (count < 0 || count > 1e6) fail(line_, "implausible list length");
        for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) take();
        values.push_back(0.0);
      } else {
        values.push_back(take());
      }
    }
    if (t != tok.size()) fail(line_, "too many values for element '" + e.name + "'");
    return values;
  }

  void skip_element(const Element& e) {
    if (e.properties.empty()) return;
    for (std::size_t i = 0; i < e.count; ++i) read_instance(e, i);
  }

  void read_vertices(const Element& e, PointCloud& cloud) {
    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
    for (std::size_t i = 0; i < e.properties.size(); ++i) {
      const Property& p = e.properties[i];
      const int idx = static_cast<int>(i);
      const bool real = !p.is_list && (p.type == Scalar::kFloat32 || p.type == Scalar::kFloat64);
      const bool byte = !p.is_list && p.type == Scalar::kUInt8;
      if (p.name == "x" || p.name == "y" || p.name == "z") {
        if (!real) fail(0, "vertex coordinate '" + p.name + "' must be float or double");
        (p.name == "x" ? ix : p.name == "y" ? iy : iz) = idx;
      } else if (byte && p.name == "red") {
        ir = idx;
      } else if (byte && p.name == "green") {
        ig = idx;
      } else if (byte && p.name == "blue") {
        ib = idx;
      }
    }
    if (ix < 0 || iy < 0 || iz < 0) fail(0, "vertex element lacks x, y, z properties");
    const bool colors = ir >= 0 && ig >= 0 && ib >= 0;
    if (!binary_ && e.count > data_.size()) {
      fail(0, "truncated body: vertex count exceeds file size");
    }
    if (binary_) {
      std::size_t min_size = 0;
      for (const Property& p : e.properties) min_size += p.is_list ? scalar_size(p.count_type) : scalar_size(p.type);
      if (min_size > 0 && e.count > (data_.size() - std::min(pos_, data_.size())) / min_size) {
        fail(0, "truncated binary body: declares " + std::to_string(e.count) + " vertices");
      }
    }
    cloud.points.reserve(e.count);
    if (colors) cloud.colors.reserve(e.count);
    for (std::size_t i = 0; i < e.count; ++i) {
      const auto v = read_instance(e, i);
      const Vec3 p(v[ix], v[iy], v[iz]);
      if (!p.allFinite()) fail(binary_ ? 0 : line_, "non-finite vertex coordinate");
      cloud.points.push_back(p);
      if (colors) {
        cloud.colors.push_back({static_cast<std::uint8_t>(v[ir]), static_cast<std::uint8_t>(v[ig]),
                                static_cast<std::uint8_t>(v[ib])});
      }
    }
  }

  std::string_view data_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
  bool binary_ = false;
  std::vector<Element> elements_;
};

}  // namespace

PointCloud parse_pointcloud_ply(std::string_view data, const std::string& source) {
  return PlyParser(data, source).parse();
}

PointCloud read_pointcloud_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("trajio", "cannot open " + path.string() + " for reading");
  }
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pointcloud_ply(data, path.string());
}

std::string encode_pointcloud_ply(const PointCloud& cloud, PlyEncoding encoding) {
  const bool colors = !cloud.colors.empty();
  if (colors && cloud.colors.size() != cloud.points.size()) {
    throw InvariantError("trajio", "point cloud color count does not match point count");
  }
  std::ostringstream out;
  out << "ply\n"
      << "format " << (encoding == PlyEncoding::kAscii ? "ascii" : "binary_little_endian") << " 1.0\n"
      << "element vertex " << cloud.points.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n";
  if (colors) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (!p.allFinite()) throw InvariantError("trajio", "point " + std::to_string(i) + " is not finite");
    if (encoding == PlyEncoding::kAscii) {
      out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z());
      if (colors) {
        out << ' ' << int(cloud.colors[i][0]) << ' ' << int(cloud.colors[i][1]) << ' ' << int(cloud.colors[i][2]);
      }
      out << '\n';
    } else {
      out.write(reinterpret_cast<const char*>(p.data()), 3 * sizeof(double));
      if (colors) out.write(reinterpret_cast<const char*>(cloud.colors[i].data()), 3);
    }
  }
  return out.str();
}

void write_pointcloud_ply(const PointCloud& cloud, const std::filesystem::path& path, PlyEncoding encoding) {
  const std::string data = encode_pointcloud_ply(cloud, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("trajio", "cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("trajio", "write failure on " + path.string());
}

}  // namespace egotraj
