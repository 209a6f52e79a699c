#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include "echomap/scene.hpp"

namespace scenes {

/// Random scene whose clusters satisfy the oracle-equivalence conditions for
/// threshold t: chain gaps <= t / 1.01 and cluster boxes at least 8t apart
/// along x (so every cross-cluster pair is >= 8t apart).
inline echomap::SceneSpec separated(std::uint64_t seed, double t, std::uint32_t max_points = 5000) {
  std::mt19937_64 rng(seed ^ 0xA5A5A5A5ULL);
  std::uniform_int_distribution<int> cluster_count(1, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  echomap::SceneSpec spec;
  spec.seed = seed;
  const int k = cluster_count(rng);
  const std::uint32_t budget = max_points / static_cast<std::uint32_t>(k);
  double cursor = 0.0;
  for (int c = 0; c < k; ++c) {
    echomap::ClusterSpec cl;
    cl.point_count = 10 + static_cast<std::uint32_t>(unit(rng) * (budget - 10));
    cl.max_gap = t / 1.01;
    cl.extent = t * (4.0 + 16.0 * unit(rng));
    cl.aspect = {0.3 + unit(rng), 0.3 + unit(rng), 0.3 + unit(rng)};
    const double half_x = cl.extent * cl.aspect.x / 2;
    if (c > 0) cursor += 8.0 * t * 1.05;
    cursor += half_x;
    cl.center = {cursor, (unit(rng) - 0.5) * 20 * t, 2.0 + (unit(rng) - 0.5) * 20 * t};
    cursor += half_x;
    spec.clusters.push_back(cl);
  }
  return spec;
}

/// Three person-sized slabs in front of a wall, with uniform noise.
inline echomap::SceneSpec cutouts_and_wall(std::uint64_t seed, std::uint32_t noise_points) {
  echomap::SceneSpec spec;
  spec.seed = seed;
  for (double x : {-1.5, 0.0, 1.5}) {
    echomap::ClusterSpec person;
    person.center = {x, 0.0, 3.0};
    person.point_count = 1500;
    person.max_gap = 0.03;
    person.extent = 1.7;
    person.aspect = {0.5 / 1.7, 1.0, 0.05 / 1.7};
    spec.clusters.push_back(person);
  }
  echomap::ClusterSpec wall;
  wall.center = {0.0, 0.0, 5.0};
  wall.point_count = 3000;
  wall.max_gap = 0.03;
  wall.extent = 5.0;
  wall.aspect = {1.0, 0.6, 0.01};
  spec.clusters.push_back(wall);
  spec.noise_points = noise_points;
  spec.noise_region = {{-3.0, -1.5, 2.0}, {3.0, 1.5, 6.0}};
  return spec;
}

}  // namespace scenes
