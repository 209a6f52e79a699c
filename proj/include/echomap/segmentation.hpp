#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "echomap/cloud.hpp"

namespace echomap {

struct ChunkKey {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;

  friend bool operator==(const ChunkKey&, const ChunkKey&) = default;
  friend auto operator<=>(const ChunkKey&, const ChunkKey&) = default;
};

struct ChunkKeyHash {
  std::size_t operator()(const ChunkKey& key) const noexcept;
};

/// Nearest multiple of chunk_size per axis, ties toward +inf.
ChunkKey chunk_key(const Point3& p, double chunk_size);

/// Spatial hash from chunk key to the indices of the points it holds.
/// Buckets are stored contiguously; bucket(c) lists point indices in
/// ascending order.
class ChunkGrid {
 public:
  double chunk_size() const { return chunk_size_; }
  std::size_t chunk_count() const { return keys_.size(); }
  std::size_t point_count() const { return point_indices_.size(); }

  const ChunkKey& key(std::size_t chunk) const { return keys_[chunk]; }
  std::span<const std::uint32_t> bucket(std::size_t chunk) const;

  /// Chunk slot for key, or -1 when unoccupied.
  std::int64_t find(const ChunkKey& key) const;
  std::span<const std::uint32_t> bucket(const ChunkKey& key) const;

  /// Chunk slot holding the given point.
  std::uint32_t chunk_of_point(std::size_t point) const { return point_chunk_[point]; }

 private:
  friend ChunkGrid build_chunk_grid(const PointCloud& cloud, double chunk_size);

  double chunk_size_ = 1.0;
  std::vector<ChunkKey> keys_;
  std::vector<std::uint32_t> offsets_;  // chunk_count + 1
  std::vector<std::uint32_t> point_indices_;
  std::vector<std::uint32_t> point_chunk_;
  std::unordered_map<ChunkKey, std::uint32_t, ChunkKeyHash> slots_;
};

ChunkGrid build_chunk_grid(const PointCloud& cloud, double chunk_size);

enum class Connectivity { Face6 = 6, Full26 = 26 };

struct SegmentConfig {
  double chunk_size = 0.1;
  double threshold = 0.05;
  Connectivity connectivity = Connectivity::Full26;
  std::uint32_t min_points_per_object = 0;
};

/// Exact work counters filled in by the instrumented segmenters.
struct SegmentStats {
  std::uint64_t distance_evals = 0;
  std::uint64_t chunk_probes = 0;
  std::uint64_t quantizations = 0;
  std::uint64_t occupied_chunks = 0;
};

struct Segmentation {
  static constexpr std::int32_t kDiscarded = -1;

  /// Object id per point, or kDiscarded for points of undersized objects.
  std::vector<std::int32_t> labels;
  std::uint32_t num_objects = 0;
  /// Point indices in the artifact set, ascending.
  std::vector<std::uint32_t> discarded;

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

/// Flood fill over occupied chunks. Seeds are taken in ascending key order,
/// object ids in discovery order. Never computes a distance.
Segmentation segment_chunked(const PointCloud& cloud, const SegmentConfig& config);
Segmentation segment_chunked(const PointCloud& cloud, const SegmentConfig& config,
                             SegmentStats& stats);

/// Threshold flood fill over points (single linkage at radius `threshold`,
/// strict <). Every dequeued point is compared against every other point, so
/// distance_evals is exactly n(n-1) for any cloud.
Segmentation segment_naive(const PointCloud& cloud, const SegmentConfig& config);
Segmentation segment_naive(const PointCloud& cloud, const SegmentConfig& config,
                           SegmentStats& stats);

/// Points of one object in original relative order. Throws std::out_of_range.
PointCloud extract_object(const PointCloud& cloud, const Segmentation& seg,
                          std::uint32_t object_id);

/// Objects as sorted index sets, ordered by smallest member; the discarded set
/// is not included.
std::vector<std::vector<std::uint32_t>> partition_sets(const Segmentation& seg);

/// Same objects and same discarded set, ignoring id numbering.
bool same_partition(const Segmentation& a, const Segmentation& b);

nlohmann::json to_json(const Segmentation& seg);
Segmentation segmentation_from_json(const nlohmann::json& j);

}  // namespace echomap
