#include "echomap/cloud.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string_view>

namespace echomap {

DepthFrame::DepthFrame(std::size_t width, std::size_t height)
    : DepthFrame(width, height, std::vector<double>(width * height, 0.0)) {}

DepthFrame::DepthFrame(std::size_t width, std::size_t height, std::vector<double> depth)
    : width_(width), height_(height), depth_(std::move(depth)) {
  if (width_ == 0 || height_ == 0) {
    throw std::invalid_argument("depth frame needs width >= 1 and height >= 1");
  }
  if (depth_.size() != width_ * height_) {
    throw std::invalid_argument("depth frame has " + std::to_string(depth_.size()) +
                                " values, expected " + std::to_string(width_ * height_));
  }
  for (double d : depth_) {
    if (!std::isfinite(d) || d < 0.0) {
      throw std::invalid_argument("depth values must be finite and >= 0");
    }
  }
}

void DepthFrame::set(std::size_t row, std::size_t col, double meters) {
  if (!std::isfinite(meters) || meters < 0.0) {
    throw std::invalid_argument("depth values must be finite and >= 0");
  }
  depth_.at(row * width_ + col) = meters;
}

namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> scalar_type(std::string_view name) {
  if (name == "char" || name == "int8") return ScalarType::Int8;
  if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
  if (name == "short" || name == "int16") return ScalarType::Int16;
  if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
  if (name == "int" || name == "int32") return ScalarType::Int32;
  if (name == "uint" || name == "uint32") return ScalarType::UInt32;
  if (name == "float" || name == "float32") return ScalarType::Float32;
  if (name == "double" || name == "float64") return ScalarType::Float64;
  return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::Float32;
  bool is_list = false;
  ScalarType count_type = ScalarType::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

enum class Encoding { Ascii, BinaryLittleEndian };

struct Header {
  Encoding encoding = Encoding::Ascii;
  std::vector<Element> elements;
  std::uint64_t frame_id = 0;
  std::size_t body_offset = 0;
};

[[noreturn]] void malformed(const std::string& msg) {
  throw PlyError(PlyError::Kind::MalformedHeader, "malformed PLY header: " + msg);
}

[[noreturn]] void truncated(const std::string& msg) {
  throw PlyError(PlyError::Kind::TruncatedBody, "truncated PLY body: " + msg);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

Header parse_header(std::string_view text) {
  Header header;
  std::size_t pos = 0;
  bool saw_format = false;
  bool first = true;
  while (true) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) malformed("missing end_header");
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (first) {
      if (line != "ply") malformed("file does not start with 'ply'");
      first = false;
      continue;
    }
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment") {
      if (tok.size() == 3 && tok[1] == "frame_id") {
        parse_number(tok[2], header.frame_id);
      }
      continue;
    }
    if (tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) malformed("bad format line");
      if (tok[2] != "1.0") {
        throw PlyError(PlyError::Kind::UnsupportedFormat,
                       "unsupported PLY version " + std::string(tok[2]));
      }
      if (tok[1] == "ascii") {
        header.encoding = Encoding::Ascii;
      } else if (tok[1] == "binary_little_endian") {
        header.encoding = Encoding::BinaryLittleEndian;
      } else {
        throw PlyError(PlyError::Kind::UnsupportedFormat,
                       "unsupported PLY format '" + std::string(tok[1]) + "'");
      }
      saw_format = true;
      continue;
    }
    if (tok[0] == "element") {
      Element el;
      if (tok.size() != 3 || !parse_number(tok[2], el.count)) malformed("bad element line");
      el.name = std::string(tok[1]);
      header.elements.push_back(std::move(el));
      continue;
    }
    if (tok[0] == "property") {
      if (header.elements.empty()) malformed("property before any element");
      Property prop;
      if (tok.size() == 5 && tok[1] == "list") {
        auto ct = scalar_type(tok[2]);
        auto vt = scalar_type(tok[3]);
        if (!ct || !vt) malformed("unknown list property type");
        prop.is_list = true;
        prop.count_type = *ct;
        prop.type = *vt;
        prop.name = std::string(tok[4]);
      } else if (tok.size() == 3) {
        auto t = scalar_type(tok[1]);
        if (!t) malformed("unknown property type '" + std::string(tok[1]) + "'");
        prop.type = *t;
        prop.name = std::string(tok[2]);
      } else {
        malformed("bad property line");
      }
      header.elements.back().properties.push_back(std::move(prop));
      continue;
    }
    malformed("unexpected keyword '" + std::string(tok[0]) + "'");
  }
  if (!saw_format) malformed("missing format line");
  header.body_offset = pos;
  return header;
}

template <typename T>
T load_le(const std::uint8_t* p) {
  std::array<std::uint8_t, sizeof(T)> raw;
  std::memcpy(raw.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(raw.begin(), raw.end());
  }
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

double load_scalar(ScalarType t, const std::uint8_t* p) {
  switch (t) {
    case ScalarType::Int8: return static_cast<std::int8_t>(p[0]);
    case ScalarType::UInt8: return p[0];
    case ScalarType::Int16: return load_le<std::int16_t>(p);
    case ScalarType::UInt16: return load_le<std::uint16_t>(p);
    case ScalarType::Int32: return load_le<std::int32_t>(p);
    case ScalarType::UInt32: return load_le<std::uint32_t>(p);
    case ScalarType::Float32: return load_le<float>(p);
    case ScalarType::Float64: return load_le<double>(p);
  }
  return 0.0;
}

// Index of x, y, z within the vertex element.
std::array<std::size_t, 3> xyz_slots(const Element& vertex) {
  std::array<std::size_t, 3> slots{};
  const char* names[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    bool found = false;
    for (std::size_t p = 0; p < vertex.properties.size(); ++p) {
      const Property& prop = vertex.properties[p];
      if (prop.name != names[a]) continue;
      if (prop.is_list) malformed(std::string("vertex property ") + names[a] + " is a list");
      if (prop.type != ScalarType::Float32 && prop.type != ScalarType::Float64) {
        throw PlyError(PlyError::Kind::UnsupportedFormat,
                       std::string("vertex property ") + names[a] + " must be float or double");
      }
      slots[a] = p;
      found = true;
      break;
    }
    if (!found) malformed(std::string("vertex element lacks property ") + names[a]);
  }
  return slots;
}

class AsciiBody {
 public:
  explicit AsciiBody(std::string_view text) : text_(text) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) truncated("ran out of values");
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  double next_number() {
    std::string_view tok = next();
    double v = 0.0;
    if (!parse_number(tok, v)) {
      // from_chars does not accept a leading '+'.
      if (tok.size() > 1 && tok[0] == '+' && parse_number(tok.substr(1), v)) return v;
      throw PlyError(PlyError::Kind::TruncatedBody,
                     "bad PLY body: cannot parse value '" + std::string(tok) + "'");
    }
    return v;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

void add_vertex(PlyReadResult& out, const std::array<double, 3>& xyz) {
  if (std::isfinite(xyz[0]) && std::isfinite(xyz[1]) && std::isfinite(xyz[2])) {
    out.cloud.points.push_back({xyz[0], xyz[1], xyz[2]});
  } else {
    ++out.dropped_non_finite;
  }
}

void read_ascii(const Header& header, std::string_view body, PlyReadResult& out) {
  AsciiBody in(body);
  for (const Element& el : header.elements) {
    const bool is_vertex = el.name == "vertex";
    std::array<std::size_t, 3> slots{};
    if (is_vertex) slots = xyz_slots(el);
    for (std::size_t n = 0; n < el.count; ++n) {
      std::array<double, 3> xyz{};
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        const Property& prop = el.properties[p];
        if (prop.is_list) {
          auto count = static_cast<std::size_t>(in.next_number());
          for (std::size_t i = 0; i < count; ++i) in.next();
          continue;
        }
        if (!is_vertex) {
          in.next();
          continue;
        }
        double v = in.next_number();
        for (int a = 0; a < 3; ++a) {
          if (slots[a] == p) xyz[a] = v;
        }
      }
      if (is_vertex) add_vertex(out, xyz);
    }
    if (is_vertex) return;
  }
}

void read_binary_le(const Header& header, std::span<const std::uint8_t> body, PlyReadResult& out) {
  std::size_t pos = 0;
  auto need = [&](std::size_t bytes, const std::string& what) {
    if (body.size() - pos < bytes) {
      truncated("need " + std::to_string(bytes) + " more bytes for " + what + " at body offset " +
                std::to_string(pos) + ", have " + std::to_string(body.size() - pos));
    }
  };
  for (const Element& el : header.elements) {
    const bool is_vertex = el.name == "vertex";
    std::array<std::size_t, 3> slots{};
    if (is_vertex) slots = xyz_slots(el);
    for (std::size_t n = 0; n < el.count; ++n) {
      std::array<double, 3> xyz{};
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        const Property& prop = el.properties[p];
        if (prop.is_list) {
          need(scalar_size(prop.count_type), el.name + " list count");
          auto count = static_cast<std::size_t>(load_scalar(prop.count_type, body.data() + pos));
          pos += scalar_size(prop.count_type);
          need(count * scalar_size(prop.type), el.name + " list items");
          pos += count * scalar_size(prop.type);
          continue;
        }
        const std::size_t size = scalar_size(prop.type);
        need(size, el.name + " " + std::to_string(n));
        if (is_vertex) {
          double v = load_scalar(prop.type, body.data() + pos);
          for (int a = 0; a < 3; ++a) {
            if (slots[a] == p) xyz[a] = v;
          }
        }
        pos += size;
      }
      if (is_vertex) add_vertex(out, xyz);
    }
    if (is_vertex) return;
  }
}

}  // namespace

PlyReadResult parse_ply(std::span<const std::uint8_t> bytes) {
  std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  Header header = parse_header(text);

  bool has_vertex = false;
  for (const Element& el : header.elements) has_vertex = has_vertex || el.name == "vertex";
  if (!has_vertex) malformed("no vertex element");

  PlyReadResult out;
  out.cloud.frame_id = header.frame_id;
  if (header.encoding == Encoding::Ascii) {
    read_ascii(header, text.substr(header.body_offset), out);
  } else {
    read_binary_le(header, bytes.subspan(header.body_offset), out);
  }
  return out;
}

std::string write_ply_ascii(const PointCloud& cloud) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "comment frame_id " + std::to_string(cloud.frame_id) + "\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\nend_header\n";
  char buf[64];
  for (const Point3& p : cloud.points) {
    for (int a = 0; a < 3; ++a) {
      double v = a == 0 ? p.x : (a == 1 ? p.y : p.z);
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out.append(buf, res.ptr);
      out += a == 2 ? '\n' : ' ';
    }
  }
  return out;
}

DepthFrame parse_depth_raw(std::span<const std::uint8_t> bytes, std::size_t width,
                           std::size_t height, double scale) {
  const std::size_t expected = width * height * 2;
  if (bytes.size() != expected) {
    throw std::invalid_argument("raw depth size mismatch: expected " + std::to_string(expected) +
                                " bytes for " + std::to_string(width) + "x" +
                                std::to_string(height) + ", got " + std::to_string(bytes.size()));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("depth scale must be a positive finite number");
  }
  std::vector<double> depth(width * height);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const auto units = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    depth[i] = units == 0 ? 0.0 : units * scale;
  }
  return DepthFrame(width, height, std::move(depth));
}

PointCloud depth_frame_to_cloud(const DepthFrame& frame, const Intrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) {
    throw std::invalid_argument("focal lengths must be positive");
  }
  PointCloud cloud;
  for (std::size_t r = 0; r < frame.height(); ++r) {
    for (std::size_t c = 0; c < frame.width(); ++c) {
      const double d = frame.at(r, c);
      if (d <= 0.0) continue;
      cloud.points.push_back({(static_cast<double>(c) - k.cx) * d / k.fx,
                              (static_cast<double>(r) - k.cy) * d / k.fy, d});
    }
  }
  return cloud;
}

std::vector<std::int64_t> pixel_point_indices(const DepthFrame& frame) {
  std::vector<std::int64_t> out(frame.width() * frame.height(), -1);
  std::int64_t next = 0;
  auto values = frame.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0) out[i] = next++;
  }
  return out;
}

DepthFrame project_cloud_to_frame(const PointCloud& cloud, std::size_t width, std::size_t height,
                                  const Intrinsics& k, std::vector<std::int64_t>* owner) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) {
    throw std::invalid_argument("focal lengths must be positive");
  }
  DepthFrame frame(width, height);
  std::vector<std::int64_t> winner(width * height, -1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    if (!(p.z > 0.0)) continue;
    const double u = k.fx * p.x / p.z + k.cx;
    const double v = k.fy * p.y / p.z + k.cy;
    if (!std::isfinite(u) || !std::isfinite(v)) continue;
    const double col = std::round(u);
    const double row = std::round(v);
    if (col < 0 || row < 0 || col >= static_cast<double>(width) ||
        row >= static_cast<double>(height)) {
      continue;
    }
    const auto c = static_cast<std::size_t>(col);
    const auto r = static_cast<std::size_t>(row);
    const double current = frame.at(r, c);
    if (current == 0.0 || p.z < current) {
      frame.set(r, c, p.z);
      winner[r * width + c] = static_cast<std::int64_t>(i);
    }
  }
  if (owner) *owner = std::move(winner);
  return frame;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_file(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(
                       reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace echomap
