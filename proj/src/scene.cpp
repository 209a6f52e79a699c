#include "echomap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>

namespace echomap {

namespace {

constexpr std::uint64_t kFallbackSeed = 0x5eed5eedULL;

// Bit-level conversion so streams are identical across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

Point3 random_unit_vector(std::mt19937_64& rng) {
  while (true) {
    const double x = uniform(rng, -1.0, 1.0);
    const double y = uniform(rng, -1.0, 1.0);
    const double z = uniform(rng, -1.0, 1.0);
    const double r2 = x * x + y * y + z * z;
    if (r2 > 1e-6 && r2 <= 1.0) {
      const double r = std::sqrt(r2);
      return {x / r, y / r, z / r};
    }
  }
}

// Reflect then clamp into [lo, hi]. Neither step moves the value farther from
// a point already inside the interval, so chain gaps never grow.
double fold_into(double v, double lo, double hi) {
  if (v < lo) v = 2.0 * lo - v;
  if (v > hi) v = 2.0 * hi - v;
  return std::clamp(v, lo, hi);
}

Point3 parse_point(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("expected a 3-element [x, y, z] array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json point_json(const Point3& p) { return nlohmann::json::array({p.x, p.y, p.z}); }

}  // namespace

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ECHOMAP_SEED"); env && *env) {
    try {
      return std::stoull(env, nullptr, 0);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("ECHOMAP_SEED is not an integer: ") + env);
    }
  }
  return kFallbackSeed;
}

GeneratedScene generate_scene(const SceneSpec& spec) {
  GeneratedScene scene;
  std::mt19937_64 rng(spec.seed);

  std::size_t total = spec.noise_points;
  for (const ClusterSpec& c : spec.clusters) total += c.point_count;
  scene.cloud.points.reserve(total);
  scene.membership.reserve(total);

  for (std::size_t ci = 0; ci < spec.clusters.size(); ++ci) {
    const ClusterSpec& c = spec.clusters[ci];
    if (c.point_count == 0) throw std::invalid_argument("cluster point_count must be positive");
    if (!(c.max_gap > 0.0)) throw std::invalid_argument("cluster max_gap must be positive");
    if (!(c.extent > 0.0)) throw std::invalid_argument("cluster extent must be positive");
    if (!(c.aspect.x > 0.0 && c.aspect.y > 0.0 && c.aspect.z > 0.0)) {
      throw std::invalid_argument("cluster aspect must be positive");
    }
    const Point3 half{c.extent * c.aspect.x / 2, c.extent * c.aspect.y / 2,
                      c.extent * c.aspect.z / 2};
    const Point3 lo{c.center.x - half.x, c.center.y - half.y, c.center.z - half.z};
    const Point3 hi{c.center.x + half.x, c.center.y + half.y, c.center.z + half.z};

    Point3 cur = c.center;
    for (std::uint32_t n = 0; n < c.point_count; ++n) {
      if (n > 0) {
        const Point3 dir = random_unit_vector(rng);
        const double len = c.max_gap * uniform(rng, 0.5, 1.0);
        cur = {fold_into(cur.x + dir.x * len, lo.x, hi.x),
               fold_into(cur.y + dir.y * len, lo.y, hi.y),
               fold_into(cur.z + dir.z * len, lo.z, hi.z)};
      }
      scene.cloud.points.push_back(cur);
      scene.membership.push_back(static_cast<std::int32_t>(ci));
    }
  }

  const Box& box = spec.noise_region;
  for (std::uint32_t n = 0; n < spec.noise_points; ++n) {
    scene.cloud.points.push_back({uniform(rng, box.min.x, box.max.x),
                                  uniform(rng, box.min.y, box.max.y),
                                  uniform(rng, box.min.z, box.max.z)});
    scene.membership.push_back(-1);
  }

  scene.expected_object_count = static_cast<std::uint32_t>(spec.clusters.size());
  return scene;
}

SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  spec.seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : default_seed();
  spec.noise_points = j.value("noise_points", 0u);
  if (j.contains("noise_region")) {
    spec.noise_region.min = parse_point(j.at("noise_region").at("min"));
    spec.noise_region.max = parse_point(j.at("noise_region").at("max"));
  }
  for (const auto& cj : j.value("clusters", nlohmann::json::array())) {
    ClusterSpec c;
    c.center = parse_point(cj.at("center"));
    c.point_count = cj.at("point_count").get<std::uint32_t>();
    c.max_gap = cj.at("max_gap").get<double>();
    c.extent = cj.at("extent").get<double>();
    if (cj.contains("aspect")) c.aspect = parse_point(cj.at("aspect"));
    spec.clusters.push_back(c);
  }
  return spec;
}

nlohmann::json to_json(const SceneSpec& spec) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const ClusterSpec& c : spec.clusters) {
    clusters.push_back({{"center", point_json(c.center)},
                        {"point_count", c.point_count},
                        {"max_gap", c.max_gap},
                        {"extent", c.extent},
                        {"aspect", point_json(c.aspect)}});
  }
  return {{"clusters", clusters},
          {"noise_points", spec.noise_points},
          {"noise_region",
           {{"min", point_json(spec.noise_region.min)}, {"max", point_json(spec.noise_region.max)}}},
          {"seed", spec.seed}};
}

}  // namespace echomap
