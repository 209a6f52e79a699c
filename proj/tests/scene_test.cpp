#include <cmath>

#include <gtest/gtest.h>

#include "echomap/scene.hpp"
#include "echomap/segmentation.hpp"
#include "support/cluster_oracle.hpp"
#include "support/scenes.hpp"

namespace echomap {
namespace {

double dist(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

TEST(GenerateScene, EmptySpec) {
  auto scene = generate_scene({});
  EXPECT_TRUE(scene.cloud.empty());
  EXPECT_EQ(scene.expected_object_count, 0u);
}

TEST(GenerateScene, SingleCluster) {
  SceneSpec spec;
  spec.clusters.push_back({{0, 0, 2}, 100, 0.02, 0.2});
  auto scene = generate_scene(spec);
  EXPECT_EQ(scene.cloud.size(), 100u);
  EXPECT_EQ(scene.expected_object_count, 1u);
}

TEST(GenerateScene, ChainGapsAndBoxesHold) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SceneSpec spec = scenes::separated(seed, 0.05, 2000);
    spec.noise_points = 10;
    spec.noise_region = {{-1, -1, -1}, {1, 1, 1}};
    auto scene = generate_scene(spec);
    ASSERT_EQ(scene.membership.size(), scene.cloud.size());
    std::size_t at = 0;
    for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
      const ClusterSpec& cl = spec.clusters[c];
      for (std::uint32_t n = 0; n < cl.point_count; ++n, ++at) {
        const Point3& p = scene.cloud.points[at];
        EXPECT_EQ(scene.membership[at], static_cast<std::int32_t>(c));
        EXPECT_LE(std::fabs(p.x - cl.center.x), cl.extent * cl.aspect.x / 2 + 1e-12);
        EXPECT_LE(std::fabs(p.y - cl.center.y), cl.extent * cl.aspect.y / 2 + 1e-12);
        EXPECT_LE(std::fabs(p.z - cl.center.z), cl.extent * cl.aspect.z / 2 + 1e-12);
        if (n > 0) EXPECT_LE(dist(p, scene.cloud.points[at - 1]), cl.max_gap * (1 + 1e-12));
      }
    }
    for (; at < scene.cloud.size(); ++at) EXPECT_EQ(scene.membership[at], -1);
  }
}

TEST(GenerateScene, DeterministicPerSeed) {
  SceneSpec spec = scenes::separated(42, 0.05);
  spec.noise_points = 50;
  spec.noise_region = {{0, 0, 0}, {1, 1, 1}};
  auto a = generate_scene(spec);
  auto b = generate_scene(spec);
  EXPECT_EQ(write_ply_ascii(a.cloud), write_ply_ascii(b.cloud));
  spec.seed = 43;
  EXPECT_NE(generate_scene(spec).cloud.points, a.cloud.points);
}

TEST(GenerateScene, ThreeClustersGiveThreeNaiveComponents) {
  SceneSpec spec;
  spec.seed = 7;
  for (double x : {0.0, 1.0, 2.0}) spec.clusters.push_back({{x, 0, 2}, 200, 0.02, 0.2});
  auto scene = generate_scene(spec);
  SegmentConfig config;
  config.threshold = 0.05;
  EXPECT_EQ(segment_naive(scene.cloud, config).num_objects, 3u);
  EXPECT_EQ(oracle::threshold_components(scene.cloud, 0.05), oracle::membership_sets(scene.membership));
}

TEST(GenerateScene, RejectsInvalidClusters) {
  SceneSpec spec;
  spec.clusters.push_back({{0, 0, 0}, 10, 0.0, 1.0});
  EXPECT_THROW(generate_scene(spec), std::invalid_argument);
  spec.clusters[0] = {{0, 0, 0}, 10, 0.1, -1.0};
  EXPECT_THROW(generate_scene(spec), std::invalid_argument);
  spec.clusters[0] = {{0, 0, 0}, 0, 0.1, 1.0};
  EXPECT_THROW(generate_scene(spec), std::invalid_argument);
}

TEST(SceneSpecJson, RoundTrip) {
  SceneSpec spec = scenes::cutouts_and_wall(9, 30);
  SceneSpec back = scene_spec_from_json(to_json(spec));
  EXPECT_EQ(write_ply_ascii(generate_scene(back).cloud), write_ply_ascii(generate_scene(spec).cloud));
}

TEST(SceneSpecJson, MissingSeedUsesEnvironment) {
  const nlohmann::json j = {{"clusters", nlohmann::json::array()}};
  ::setenv("ECHOMAP_SEED", "1234", 1);
  EXPECT_EQ(scene_spec_from_json(j).seed, 1234u);
  ::setenv("ECHOMAP_SEED", "bogus", 1);
  EXPECT_THROW(scene_spec_from_json(j), std::invalid_argument);
  ::unsetenv("ECHOMAP_SEED");
  EXPECT_EQ(scene_spec_from_json(j).seed, default_seed());
}

}  // namespace
}  // namespace echomap
