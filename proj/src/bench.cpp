#include "echomap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace echomap {

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

Point3 scaled(const Point3& p, double s) { return {p.x * s, p.y * s, p.z * s}; }

}  // namespace

SceneSpec scale_scene(const SceneSpec& tmpl, std::size_t n) {
  std::size_t total = tmpl.noise_points;
  for (const ClusterSpec& c : tmpl.clusters) total += c.point_count;
  if (total == 0) throw std::invalid_argument("template scene has no points");
  if (n < tmpl.clusters.size()) throw std::invalid_argument("size smaller than cluster count");

  SceneSpec out = tmpl;
  const double s = std::cbrt(static_cast<double>(n) / static_cast<double>(total));
  std::size_t assigned = 0;
  for (ClusterSpec& c : out.clusters) {
    c.point_count = std::max<std::uint32_t>(
        1, static_cast<std::uint32_t>(static_cast<double>(c.point_count) * n / total));
    c.center = scaled(c.center, s);
    c.extent *= s;
    assigned += c.point_count;
  }
  out.noise_points = static_cast<std::uint32_t>(static_cast<double>(tmpl.noise_points) * n / total);
  assigned += out.noise_points;
  // Remainder from flooring goes to the clusters in order.
  for (std::size_t i = 0; assigned < n && !out.clusters.empty(); i = (i + 1) % out.clusters.size()) {
    ++out.clusters[i].point_count;
    ++assigned;
  }
  if (assigned != n) throw std::invalid_argument("cannot scale template to the requested size");
  out.noise_region.min = scaled(tmpl.noise_region.min, s);
  out.noise_region.max = scaled(tmpl.noise_region.max, s);
  return out;
}

SceneSpec single_cluster_template(double threshold, std::uint64_t seed) {
  SceneSpec spec;
  ClusterSpec c;
  c.center = {0.0, 0.0, 0.0};
  c.point_count = 1000;
  c.max_gap = threshold / 1.01;
  c.extent = 20.0 * threshold;
  spec.clusters.push_back(c);
  spec.seed = seed;
  return spec;
}

std::optional<double> loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) return std::nullopt;
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
    mx += lx.back();
    my += ly.back();
  }
  mx /= lx.size();
  my /= ly.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

BenchTable run_benchmark(std::span<const std::size_t> sizes, const SceneSpec& tmpl,
                         const SegmentConfig& config, const BenchOptions& options) {
  if (options.repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw std::invalid_argument("benchmark sizes must be ascending");
  }
  BenchTable table;
  for (std::size_t n : sizes) {
    const GeneratedScene scene = generate_scene(scale_scene(tmpl, n));
    BenchRow row;
    row.n = n;

    std::vector<double> chunked_times;
    for (std::uint32_t rep = 0; rep < options.repetitions; ++rep) {
      SegmentStats stats;
      chunked_times.push_back(time_ms([&] { segment_chunked(scene.cloud, config, stats); }));
      row.chunked_probes = stats.chunk_probes;
    }
    row.chunked_ms = median(chunked_times);

    if (n <= options.naive_cutoff) {
      std::vector<double> naive_times;
      for (std::uint32_t rep = 0; rep < options.repetitions; ++rep) {
        SegmentStats stats;
        naive_times.push_back(time_ms([&] { segment_naive(scene.cloud, config, stats); }));
        row.naive_evals = stats.distance_evals;
      }
      row.naive_ms = median(naive_times);
    }
    table.rows.push_back(row);
  }

  std::vector<double> nx, ny, cx, cy;
  for (const BenchRow& row : table.rows) {
    cx.push_back(static_cast<double>(row.n));
    cy.push_back(static_cast<double>(row.chunked_probes));
    if (row.naive_evals) {
      nx.push_back(static_cast<double>(row.n));
      ny.push_back(static_cast<double>(*row.naive_evals));
    }
  }
  table.naive_slope = loglog_slope(nx, ny);
  table.chunked_slope = loglog_slope(cx, cy);
  return table;
}

std::string to_csv(const BenchTable& table) {
  std::string out = "n,naive_evals,chunked_probes,naive_ms,chunked_ms\n";
  char buf[64];
  for (const BenchRow& row : table.rows) {
    out += std::to_string(row.n) + ",";
    if (row.naive_evals) out += std::to_string(*row.naive_evals);
    out += "," + std::to_string(row.chunked_probes) + ",";
    if (row.naive_ms) {
      std::snprintf(buf, sizeof(buf), "%.3f", *row.naive_ms);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.3f\n", row.chunked_ms);
    out += buf;
  }
  return out;
}

}  // namespace echomap
