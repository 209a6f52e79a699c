#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace echomap {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Ordered point set in meters. Index i names the same point for the cloud's lifetime.
struct PointCloud {
  std::vector<Point3> points;
  std::uint64_t frame_id = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

/// Dense row-major depth grid in meters; 0.0 means "no reading".
class DepthFrame {
 public:
  DepthFrame(std::size_t width, std::size_t height);
  DepthFrame(std::size_t width, std::size_t height, std::vector<double> depth);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  double at(std::size_t row, std::size_t col) const { return depth_[row * width_ + col]; }
  void set(std::size_t row, std::size_t col, double meters);
  std::span<const double> values() const { return depth_; }

  friend bool operator==(const DepthFrame&, const DepthFrame&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> depth_;
};

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

class PlyError : public std::runtime_error {
 public:
  enum class Kind { MalformedHeader, UnsupportedFormat, TruncatedBody };

  PlyError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct PlyReadResult {
  PointCloud cloud;
  std::size_t dropped_non_finite = 0;
};

/// Reads the vertex x/y/z of an ASCII or binary_little_endian PLY file.
/// Other properties and elements are skipped. Vertices with a non-finite
/// coordinate are dropped and counted.
PlyReadResult parse_ply(std::span<const std::uint8_t> bytes);

/// ASCII PLY with shortest round-trip decimal coordinates.
std::string write_ply_ascii(const PointCloud& cloud);

/// Little-endian u16 depth units, row-major. Throws std::invalid_argument on size mismatch.
DepthFrame parse_depth_raw(std::span<const std::uint8_t> bytes, std::size_t width,
                           std::size_t height, double scale);

/// Pinhole back-projection of every nonzero pixel, row-major.
PointCloud depth_frame_to_cloud(const DepthFrame& frame, const Intrinsics& k);

/// For each pixel of the frame, the index of the back-projected point or -1.
/// Matches the order depth_frame_to_cloud emits.
std::vector<std::int64_t> pixel_point_indices(const DepthFrame& frame);

/// Forward-projects a cloud into a width x height z-buffer; each pixel keeps
/// its nearest point. `owner`, when non-null, receives the winning point index
/// per pixel (-1 for empty pixels).
DepthFrame project_cloud_to_frame(const PointCloud& cloud, std::size_t width, std::size_t height,
                                  const Intrinsics& k, std::vector<std::int64_t>* owner = nullptr);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_file(const std::string& path, const std::string& text);

}  // namespace echomap
