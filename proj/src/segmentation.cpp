#include "echomap/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace echomap {

std::size_t ChunkKeyHash::operator()(const ChunkKey& key) const noexcept {
  // splitmix64 finaliser over a mixed triple
  std::uint64_t h = static_cast<std::uint64_t>(key.i) * 0x9E3779B97F4A7C15ULL;
  h ^= static_cast<std::uint64_t>(key.j) * 0xC2B2AE3D27D4EB4FULL;
  h ^= static_cast<std::uint64_t>(key.k) * 0x165667B19E3779F9ULL;
  h ^= h >> 30;
  h *= 0xBF58476D1CE4E5B9ULL;
  h ^= h >> 27;
  h *= 0x94D049BB133111EBULL;
  h ^= h >> 31;
  return static_cast<std::size_t>(h);
}

namespace {

std::int64_t quantize(double v, double chunk_size) {
  const double q = std::floor(v / chunk_size + 0.5);
  if (!(std::fabs(q) < 0x1.0p62)) {
    throw std::invalid_argument("coordinate " + std::to_string(v) +
                                " is outside the chunk key range for chunk_size " +
                                std::to_string(chunk_size));
  }
  return static_cast<std::int64_t>(q);
}

void require_finite(const PointCloud& cloud) {
  for (const Point3& p : cloud.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw std::invalid_argument("point cloud contains a non-finite coordinate");
    }
  }
}

const std::vector<ChunkKey>& neighbor_offsets(Connectivity connectivity) {
  static const std::vector<ChunkKey> face = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                             {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
  static const std::vector<ChunkKey> full = [] {
    std::vector<ChunkKey> out;
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj)
        for (int dk = -1; dk <= 1; ++dk)
          if (di != 0 || dj != 0 || dk != 0) out.push_back({di, dj, dk});
    return out;
  }();
  return connectivity == Connectivity::Face6 ? face : full;
}

// Drops objects smaller than min_points into the discarded set and renumbers
// the survivors densely, keeping discovery order.
Segmentation finish(std::vector<std::int32_t> labels, std::uint32_t raw_objects,
                    std::uint32_t min_points) {
  Segmentation seg;
  std::vector<std::uint32_t> sizes(raw_objects, 0);
  for (std::int32_t l : labels) ++sizes[static_cast<std::size_t>(l)];

  std::vector<std::int32_t> remap(raw_objects, Segmentation::kDiscarded);
  std::int32_t next = 0;
  for (std::uint32_t id = 0; id < raw_objects; ++id) {
    if (sizes[id] >= min_points) remap[id] = next++;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = remap[static_cast<std::size_t>(labels[i])];
    if (labels[i] == Segmentation::kDiscarded) {
      seg.discarded.push_back(static_cast<std::uint32_t>(i));
    }
  }
  seg.labels = std::move(labels);
  seg.num_objects = static_cast<std::uint32_t>(next);
  return seg;
}

}  // namespace

ChunkKey chunk_key(const Point3& p, double chunk_size) {
  return {quantize(p.x, chunk_size), quantize(p.y, chunk_size), quantize(p.z, chunk_size)};
}

std::span<const std::uint32_t> ChunkGrid::bucket(std::size_t chunk) const {
  return std::span<const std::uint32_t>(point_indices_)
      .subspan(offsets_[chunk], offsets_[chunk + 1] - offsets_[chunk]);
}

std::int64_t ChunkGrid::find(const ChunkKey& key) const {
  auto it = slots_.find(key);
  return it == slots_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::span<const std::uint32_t> ChunkGrid::bucket(const ChunkKey& key) const {
  const std::int64_t slot = find(key);
  if (slot < 0) return {};
  return bucket(static_cast<std::size_t>(slot));
}

ChunkGrid build_chunk_grid(const PointCloud& cloud, double chunk_size) {
  if (!(chunk_size > 0.0) || !std::isfinite(chunk_size)) {
    throw std::invalid_argument("chunk_size must be positive");
  }
  if (cloud.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("point cloud too large for 32-bit indices");
  }
  ChunkGrid grid;
  grid.chunk_size_ = chunk_size;
  const std::size_t n = cloud.size();
  grid.point_chunk_.resize(n);
  grid.slots_.reserve(n);

  std::vector<std::uint32_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    const ChunkKey key = chunk_key(cloud.points[i], chunk_size);
    auto [it, inserted] = grid.slots_.try_emplace(key, static_cast<std::uint32_t>(grid.keys_.size()));
    if (inserted) {
      grid.keys_.push_back(key);
      counts.push_back(0);
    }
    grid.point_chunk_[i] = it->second;
    ++counts[it->second];
  }

  grid.offsets_.assign(grid.keys_.size() + 1, 0);
  for (std::size_t c = 0; c < counts.size(); ++c) grid.offsets_[c + 1] = grid.offsets_[c] + counts[c];
  std::vector<std::uint32_t> cursor(grid.offsets_.begin(), grid.offsets_.end() - 1);
  grid.point_indices_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid.point_indices_[cursor[grid.point_chunk_[i]]++] = static_cast<std::uint32_t>(i);
  }
  return grid;
}

Segmentation segment_chunked(const PointCloud& cloud, const SegmentConfig& config) {
  SegmentStats stats;
  return segment_chunked(cloud, config, stats);
}

Segmentation segment_chunked(const PointCloud& cloud, const SegmentConfig& config,
                             SegmentStats& stats) {
  stats = {};
  require_finite(cloud);
  const ChunkGrid grid = build_chunk_grid(cloud, config.chunk_size);
  const std::size_t chunks = grid.chunk_count();
  stats.quantizations = cloud.size();
  stats.occupied_chunks = chunks;

  std::vector<std::uint32_t> seeds(chunks);
  std::iota(seeds.begin(), seeds.end(), 0u);
  std::sort(seeds.begin(), seeds.end(),
            [&](std::uint32_t a, std::uint32_t b) { return grid.key(a) < grid.key(b); });

  const auto& offsets = neighbor_offsets(config.connectivity);
  std::vector<std::int32_t> chunk_label(chunks, -1);
  std::vector<std::uint32_t> queue;
  queue.reserve(chunks);
  std::int32_t next = 0;

  for (std::uint32_t seed : seeds) {
    if (chunk_label[seed] >= 0) continue;
    const std::int32_t id = next++;
    chunk_label[seed] = id;
    queue.clear();
    queue.push_back(seed);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const ChunkKey& key = grid.key(queue[head]);
      for (const ChunkKey& d : offsets) {
        ++stats.chunk_probes;
        const std::int64_t slot = grid.find({key.i + d.i, key.j + d.j, key.k + d.k});
        if (slot >= 0 && chunk_label[static_cast<std::size_t>(slot)] < 0) {
          chunk_label[static_cast<std::size_t>(slot)] = id;
          queue.push_back(static_cast<std::uint32_t>(slot));
        }
      }
    }
  }

  std::vector<std::int32_t> labels(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) labels[i] = chunk_label[grid.chunk_of_point(i)];
  return finish(std::move(labels), static_cast<std::uint32_t>(next), config.min_points_per_object);
}

Segmentation segment_naive(const PointCloud& cloud, const SegmentConfig& config) {
  SegmentStats stats;
  return segment_naive(cloud, config, stats);
}

Segmentation segment_naive(const PointCloud& cloud, const SegmentConfig& config,
                           SegmentStats& stats) {
  stats = {};
  if (!(config.threshold > 0.0) || !std::isfinite(config.threshold)) {
    throw std::invalid_argument("threshold must be positive");
  }
  require_finite(cloud);
  const std::size_t n = cloud.size();
  if (n > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw std::invalid_argument("point cloud too large");
  }

  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = cloud.points[i].x;
    ys[i] = cloud.points[i].y;
    zs[i] = cloud.points[i].z;
  }
  const double limit = config.threshold * config.threshold;

  std::vector<std::int32_t> labels(n, -1);
  std::vector<std::uint32_t> queue;
  queue.reserve(n);
  constexpr std::size_t kBlock = 256;
  std::array<double, kBlock> d2{};
  std::int32_t next = 0;

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (labels[seed] >= 0) continue;
    const std::int32_t id = next++;
    labels[seed] = id;
    queue.clear();
    queue.push_back(static_cast<std::uint32_t>(seed));
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t p = queue[head];
      const double px = xs[p], py = ys[p], pz = zs[p];
      // Every other point is evaluated, assigned or not.
      stats.distance_evals += n - 1;
      for (std::size_t base = 0; base < n; base += kBlock) {
        const std::size_t len = std::min(kBlock, n - base);
        for (std::size_t b = 0; b < len; ++b) {
          const double dx = xs[base + b] - px;
          const double dy = ys[base + b] - py;
          const double dz = zs[base + b] - pz;
          d2[b] = dx * dx + dy * dy + dz * dz;
        }
        for (std::size_t b = 0; b < len; ++b) {
          const std::size_t j = base + b;
          if (d2[b] < limit && j != p && labels[j] < 0) {
            labels[j] = id;
            queue.push_back(static_cast<std::uint32_t>(j));
          }
        }
      }
    }
  }
  return finish(std::move(labels), static_cast<std::uint32_t>(next), config.min_points_per_object);
}

PointCloud extract_object(const PointCloud& cloud, const Segmentation& seg,
                          std::uint32_t object_id) {
  if (object_id >= seg.num_objects) {
    throw std::out_of_range("object id " + std::to_string(object_id) + " out of range (" +
                            std::to_string(seg.num_objects) + " objects)");
  }
  if (seg.labels.size() != cloud.size()) {
    throw std::invalid_argument("segmentation does not match cloud size");
  }
  PointCloud out;
  out.frame_id = cloud.frame_id;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (seg.labels[i] == static_cast<std::int32_t>(object_id)) out.points.push_back(cloud.points[i]);
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> partition_sets(const Segmentation& seg) {
  std::vector<std::vector<std::uint32_t>> groups(seg.num_objects);
  for (std::size_t i = 0; i < seg.labels.size(); ++i) {
    if (seg.labels[i] >= 0) groups[static_cast<std::size_t>(seg.labels[i])].push_back(static_cast<std::uint32_t>(i));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

bool same_partition(const Segmentation& a, const Segmentation& b) {
  return a.labels.size() == b.labels.size() && a.num_objects == b.num_objects &&
         a.discarded == b.discarded && partition_sets(a) == partition_sets(b);
}

nlohmann::json to_json(const Segmentation& seg) {
  return {{"num_objects", seg.num_objects}, {"labels", seg.labels}, {"discarded", seg.discarded}};
}

Segmentation segmentation_from_json(const nlohmann::json& j) {
  Segmentation seg;
  seg.num_objects = j.at("num_objects").get<std::uint32_t>();
  seg.labels = j.at("labels").get<std::vector<std::int32_t>>();
  seg.discarded = j.value("discarded", std::vector<std::uint32_t>{});
  for (std::int32_t l : seg.labels) {
    if (l < Segmentation::kDiscarded || l >= static_cast<std::int64_t>(seg.num_objects)) {
      throw std::invalid_argument("segmentation label " + std::to_string(l) + " out of range");
    }
  }
  return seg;
}

}  // namespace echomap
