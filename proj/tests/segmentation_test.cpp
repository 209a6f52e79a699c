#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "echomap/scene.hpp"
#include "echomap/segmentation.hpp"
#include "support/cluster_oracle.hpp"
#include "support/scenes.hpp"

namespace echomap {
namespace {

PointCloud cloud_of(std::vector<Point3> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double span) {
  std::uniform_real_distribution<double> coord(-span, span);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back({coord(rng), coord(rng), coord(rng)});
  return c;
}

void expect_valid_partition(const Segmentation& seg, std::size_t n) {
  ASSERT_EQ(seg.labels.size(), n);
  EXPECT_LE(seg.num_objects, n);
  std::vector<std::size_t> used(seg.num_objects, 0);
  std::vector<std::uint32_t> discarded;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t l = seg.labels[i];
    if (l == Segmentation::kDiscarded) {
      discarded.push_back(static_cast<std::uint32_t>(i));
      continue;
    }
    ASSERT_GE(l, 0);
    ASSERT_LT(static_cast<std::uint32_t>(l), seg.num_objects);
    ++used[static_cast<std::size_t>(l)];
  }
  for (std::size_t count : used) EXPECT_GE(count, 1u);
  EXPECT_EQ(discarded, seg.discarded);
}

SegmentConfig config_for(double t) {
  SegmentConfig c;
  c.threshold = t;
  c.chunk_size = 2 * t;
  return c;
}

TEST(ChunkKey, RoundsToNearestWithTiesUp) {
  EXPECT_EQ(chunk_key({0.6, 0, 0}, 1.0), (ChunkKey{1, 0, 0}));
  EXPECT_EQ(chunk_key({0.5, -0.5, -0.6}, 1.0), (ChunkKey{1, 0, -1}));
  EXPECT_EQ(chunk_key({0.49, -0.51, 2.5}, 1.0), (ChunkKey{0, -1, 3}));
  EXPECT_EQ(chunk_key({0.25, 0.75, -0.75}, 0.5), (ChunkKey{1, 2, -1}));
}

TEST(BuildChunkGrid, SameChunk) {
  auto grid = build_chunk_grid(cloud_of({{0, 0, 0}, {0.1, 0, 0}}), 1.0);
  ASSERT_EQ(grid.chunk_count(), 1u);
  EXPECT_EQ(grid.key(0), (ChunkKey{0, 0, 0}));
  auto b = grid.bucket(ChunkKey{0, 0, 0});
  EXPECT_EQ(std::vector<std::uint32_t>(b.begin(), b.end()), (std::vector<std::uint32_t>{0, 1}));
  EXPECT_TRUE(grid.bucket(ChunkKey{1, 0, 0}).empty());
}

TEST(BuildChunkGrid, EmptyCloud) {
  auto grid = build_chunk_grid(PointCloud{}, 0.1);
  EXPECT_EQ(grid.chunk_count(), 0u);
  EXPECT_EQ(grid.point_count(), 0u);
}

TEST(BuildChunkGrid, RejectsNonPositiveChunkSize) {
  EXPECT_THROW(build_chunk_grid(PointCloud{}, 0.0), std::invalid_argument);
  EXPECT_THROW(build_chunk_grid(PointCloud{}, -1.0), std::invalid_argument);
}

TEST(BuildChunkGrid, EveryPointInExactlyOneBucket) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto cloud = random_cloud(rng, 1 + rng() % 500, 1.0);
    const double c = 0.05 + 0.01 * static_cast<double>(rng() % 30);
    const auto grid = build_chunk_grid(cloud, c);
    std::vector<int> seen(cloud.size(), 0);
    std::size_t total = 0;
    for (std::size_t k = 0; k < grid.chunk_count(); ++k) {
      auto bucket = grid.bucket(k);
      total += bucket.size();
      EXPECT_TRUE(std::is_sorted(bucket.begin(), bucket.end()));
      for (std::uint32_t i : bucket) {
        ++seen[i];
        EXPECT_EQ(chunk_key(cloud.points[i], c), grid.key(k));
        EXPECT_EQ(grid.chunk_of_point(i), k);
      }
    }
    EXPECT_EQ(total, cloud.size());
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  }
}

TEST(SegmentChunked, FarApartPoints) {
  SegmentConfig config;
  config.chunk_size = 0.1;
  EXPECT_EQ(segment_chunked(cloud_of({{0, 0, 0}, {1.0, 0, 0}}), config).num_objects, 2u);
}

TEST(SegmentChunked, ChainWithHalfChunkGapsIsOneObject) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double c = 0.1;
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud chain;
    Point3 p{u(rng), u(rng), u(rng)};
    for (int i = 0; i < 100; ++i) {
      chain.points.push_back(p);
      // each axis moves by strictly less than c / 2
      p = {p.x + u(rng) * c * 0.49 / std::sqrt(3.0), p.y + u(rng) * c * 0.49 / std::sqrt(3.0),
           p.z + u(rng) * c * 0.49 / std::sqrt(3.0)};
    }
    SegmentConfig config;
    config.chunk_size = c;
    EXPECT_EQ(segment_chunked(chain, config).num_objects, 1u);
  }
}

TEST(SegmentChunked, CutoutsAndWallMatchNaiveOracle) {
  const SceneSpec spec = scenes::cutouts_and_wall(3, 0);
  const auto scene = generate_scene(spec);
  SegmentConfig config;
  config.chunk_size = 0.1;
  config.threshold = 0.05;
  const auto chunked = segment_chunked(scene.cloud, config);
  const auto naive = segment_naive(scene.cloud, config);
  EXPECT_EQ(chunked.num_objects, 4u);
  EXPECT_TRUE(same_partition(chunked, naive));
}

TEST(SegmentChunked, ConnectivityChoice) {
  // Corner-adjacent chunks.
  const auto cloud = cloud_of({{0, 0, 0}, {0.1, 0.1, 0.1}});
  SegmentConfig config;
  config.chunk_size = 0.1;
  EXPECT_EQ(segment_chunked(cloud, config).num_objects, 1u);
  config.connectivity = Connectivity::Face6;
  EXPECT_EQ(segment_chunked(cloud, config).num_objects, 2u);
  // Face-adjacent chunks join under both.
  EXPECT_EQ(segment_chunked(cloud_of({{0, 0, 0}, {0.1, 0, 0}}), config).num_objects, 1u);
}

TEST(SegmentChunked, ProbeCountIsLinearInChunks) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cloud = random_cloud(rng, 50 + rng() % 2000, 1.0);
    SegmentConfig config;
    config.chunk_size = 0.1;
    SegmentStats stats;
    segment_chunked(cloud, config, stats);
    EXPECT_EQ(stats.chunk_probes, 26 * stats.occupied_chunks);
    EXPECT_LE(stats.chunk_probes, 27 * stats.occupied_chunks);
    EXPECT_LE(stats.occupied_chunks, cloud.size());
    EXPECT_EQ(stats.quantizations, cloud.size());
    EXPECT_EQ(stats.distance_evals, 0u);
    config.connectivity = Connectivity::Face6;
    segment_chunked(cloud, config, stats);
    EXPECT_EQ(stats.chunk_probes, 6 * stats.occupied_chunks);
  }
}

TEST(SegmentChunked, LabelsFollowDiscoveryOrderFromSmallestKey) {
  const auto cloud = cloud_of({{5, 0, 0}, {-5, 0, 0}, {0, 0, 0}});
  SegmentConfig config;
  config.chunk_size = 1.0;
  const auto seg = segment_chunked(cloud, config);
  EXPECT_EQ(seg.labels, (std::vector<std::int32_t>{2, 0, 1}));
}

TEST(SegmentNaive, ExactlyThresholdApartIsTwoObjects) {
  SegmentConfig config;
  config.threshold = 0.5;
  EXPECT_EQ(segment_naive(cloud_of({{0, 0, 0}, {0.5, 0, 0}}), config).num_objects, 2u);
  EXPECT_EQ(segment_naive(cloud_of({{0, 0, 0}, {0.4999, 0, 0}}), config).num_objects, 1u);
}

TEST(SegmentNaive, SinglePoint) {
  SegmentConfig config;
  auto seg = segment_naive(cloud_of({{1, 2, 3}}), config);
  EXPECT_EQ(seg.num_objects, 1u);
  EXPECT_EQ(seg.labels, (std::vector<std::int32_t>{0}));
}

TEST(SegmentNaive, ChainIsTransitive) {
  const double t = 0.2;
  PointCloud chain;
  for (int i = 0; i < 5; ++i) chain.points.push_back({0.9 * t * i, 0, 0});
  SegmentConfig config;
  config.threshold = t;
  EXPECT_EQ(segment_naive(chain, config).num_objects, 1u);
}

TEST(SegmentNaive, DistanceEvaluationsAreExactlyNTimesNMinusOne) {
  std::mt19937_64 rng(2);
  for (std::size_t n : {0, 1, 2, 17, 300, 1000}) {
    const auto cloud = random_cloud(rng, n, 1.0);
    SegmentStats stats;
    segment_naive(cloud, config_for(0.1), stats);
    EXPECT_EQ(stats.distance_evals, n == 0 ? 0 : n * (n - 1));
    EXPECT_EQ(stats.chunk_probes, 0u);
  }
}

TEST(SegmentNaive, MatchesBruteForceUnionFind) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const auto cloud = random_cloud(rng, 1 + rng() % 400, 1.0);
    const double t = 0.05 + 0.01 * static_cast<double>(rng() % 20);
    const auto seg = segment_naive(cloud, config_for(t));
    EXPECT_EQ(partition_sets(seg), oracle::threshold_components(cloud, t));
  }
}

TEST(Segmenters, PartitionPropertyOnRandomClouds) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = rng() % 600;
    const auto cloud = random_cloud(rng, n, 0.5 + static_cast<double>(rng() % 10) / 5.0);
    SegmentConfig config = config_for(0.05 + 0.01 * static_cast<double>(rng() % 10));
    config.min_points_per_object = static_cast<std::uint32_t>(rng() % 4);
    config.connectivity = rng() % 2 ? Connectivity::Full26 : Connectivity::Face6;
    expect_valid_partition(segment_chunked(cloud, config), n);
    expect_valid_partition(segment_naive(cloud, config), n);
  }
}

TEST(Segmenters, PermutationDoesNotChangeThePartition) {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cloud = random_cloud(rng, 1 + rng() % 500, 1.0);
    std::vector<std::uint32_t> perm(cloud.size());
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    PointCloud shuffled;
    for (std::uint32_t i : perm) shuffled.points.push_back(cloud.points[i]);

    SegmentConfig config = config_for(0.1);
    config.min_points_per_object = 2;
    for (bool chunked : {true, false}) {
      const auto a = chunked ? segment_chunked(cloud, config) : segment_naive(cloud, config);
      const auto b = chunked ? segment_chunked(shuffled, config) : segment_naive(shuffled, config);
      EXPECT_EQ(a.num_objects, b.num_objects);
      // Map b's labels back onto original indices.
      Segmentation mapped;
      mapped.num_objects = b.num_objects;
      mapped.labels.resize(cloud.size());
      for (std::size_t k = 0; k < perm.size(); ++k) mapped.labels[perm[k]] = b.labels[k];
      for (std::size_t i = 0; i < mapped.labels.size(); ++i) {
        if (mapped.labels[i] == Segmentation::kDiscarded) mapped.discarded.push_back(static_cast<std::uint32_t>(i));
      }
      EXPECT_TRUE(same_partition(a, mapped));
    }
  }
}

TEST(Segmenters, EquivalentUnderSeparation) {
  for (std::uint64_t seed = 1000; seed < 1020; ++seed) {
    const double t = 0.05;
    const auto scene = generate_scene(scenes::separated(seed, t, 2000));
    const auto naive = segment_naive(scene.cloud, config_for(t));
    const auto chunked = segment_chunked(scene.cloud, config_for(t));
    EXPECT_TRUE(same_partition(naive, chunked)) << "seed " << seed;
    EXPECT_EQ(partition_sets(naive), oracle::membership_sets(scene.membership));
  }
}

TEST(Segmenters, MinPointsDiscardsSmallObjectsIdentically) {
  // Objects of sizes 3, 1, 5 (in discovery order).
  PointCloud cloud;
  for (int i = 0; i < 3; ++i) cloud.points.push_back({0.01 * i, 0, 0});
  cloud.points.push_back({10, 0, 0});
  for (int i = 0; i < 5; ++i) cloud.points.push_back({20 + 0.01 * i, 0, 0});
  SegmentConfig config = config_for(0.05);
  config.min_points_per_object = 3;
  for (const auto& seg : {segment_chunked(cloud, config), segment_naive(cloud, config)}) {
    EXPECT_EQ(seg.num_objects, 2u);
    EXPECT_EQ(seg.labels, (std::vector<std::int32_t>{0, 0, 0, -1, 1, 1, 1, 1, 1}));
    EXPECT_EQ(seg.discarded, (std::vector<std::uint32_t>{3}));
  }
  config.min_points_per_object = 0;
  EXPECT_EQ(segment_chunked(cloud, config).num_objects, 3u);
}

TEST(Segmenters, RejectNonFinitePoints) {
  const auto cloud = cloud_of({{0, 0, 0}, {std::nan(""), 0, 0}});
  EXPECT_THROW(segment_chunked(cloud, SegmentConfig{}), std::invalid_argument);
  EXPECT_THROW(segment_naive(cloud, SegmentConfig{}), std::invalid_argument);
  SegmentConfig bad;
  bad.threshold = 0;
  EXPECT_THROW(segment_naive(PointCloud{}, bad), std::invalid_argument);
}

TEST(ExtractObject, IdentityPartition) {
  const auto cloud = cloud_of({{0, 0, 0}, {0.01, 0, 0}, {0.02, 0, 0}});
  const auto seg = segment_naive(cloud, config_for(0.05));
  ASSERT_EQ(seg.num_objects, 1u);
  EXPECT_EQ(extract_object(cloud, seg, 0).points, cloud.points);
  EXPECT_THROW(extract_object(cloud, seg, 1), std::out_of_range);
}

TEST(ExtractObject, SecondClusterOfGeneratedScene) {
  SceneSpec spec;
  spec.seed = 4;
  spec.clusters.push_back({{0, 0, 2}, 150, 0.02, 0.2});
  spec.clusters.push_back({{1, 0, 2}, 120, 0.02, 0.2});
  const auto scene = generate_scene(spec);
  const auto seg = segment_chunked(scene.cloud, config_for(0.05));
  ASSERT_EQ(seg.num_objects, 2u);
  PointCloud expected;
  for (std::size_t i = 0; i < scene.cloud.size(); ++i) {
    if (scene.membership[i] == 1) expected.points.push_back(scene.cloud.points[i]);
  }
  EXPECT_EQ(extract_object(scene.cloud, seg, 1).points, expected.points);
}

TEST(SegmentationJson, SchemaAndRoundTrip) {
  Segmentation seg;
  seg.num_objects = 2;
  seg.labels = {0, 1, -1, 1};
  seg.discarded = {2};
  const auto j = to_json(seg);
  EXPECT_EQ(j.at("num_objects"), 2);
  EXPECT_EQ(j.at("labels"), nlohmann::json::array({0, 1, -1, 1}));
  EXPECT_EQ(j.at("discarded"), nlohmann::json::array({2}));
  EXPECT_EQ(segmentation_from_json(j), seg);
  auto bad = j;
  bad["labels"] = {0, 5};
  EXPECT_THROW(segmentation_from_json(bad), std::invalid_argument);
}

}  // namespace
}  // namespace echomap
