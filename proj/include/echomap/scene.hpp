#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "echomap/cloud.hpp"

namespace echomap {

struct ClusterSpec {
  Point3 center;
  std::uint32_t point_count = 1;
  double max_gap = 0.02;  // every point has a neighbor at most this far away
  double extent = 0.2;    // side of the bounding box around center
  Point3 aspect{1.0, 1.0, 1.0};  // per-axis multiplier on extent (walls, slabs)
};

struct Box {
  Point3 min;
  Point3 max;
};

struct SceneSpec {
  std::vector<ClusterSpec> clusters;
  std::uint32_t noise_points = 0;
  Box noise_region;
  std::uint64_t seed = 0;
};

struct GeneratedScene {
  PointCloud cloud;
  std::uint32_t expected_object_count = 0;
  /// Cluster index per point, -1 for noise.
  std::vector<std::int32_t> membership;
};

/// Default seed, overridable through the ECHOMAP_SEED environment variable.
std::uint64_t default_seed();

/// Builds each cluster as a jittered random-walk chain confined to its box:
/// consecutive points are never farther apart than max_gap. Noise is uniform
/// in noise_region. Output is a pure function of the spec.
GeneratedScene generate_scene(const SceneSpec& spec);

SceneSpec scene_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SceneSpec& spec);

}  // namespace echomap
