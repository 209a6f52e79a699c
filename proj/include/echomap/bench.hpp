#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "echomap/scene.hpp"
#include "echomap/segmentation.hpp"

namespace echomap {

struct BenchRow {
  std::size_t n = 0;
  std::optional<std::uint64_t> naive_evals;  // empty above the naive cutoff
  std::uint64_t chunked_probes = 0;
  std::optional<double> naive_ms;
  double chunked_ms = 0.0;
};

struct BenchOptions {
  std::uint32_t repetitions = 1;
  std::size_t naive_cutoff = 100000;
};

struct BenchTable {
  std::vector<BenchRow> rows;
  std::optional<double> naive_slope;    // log(evals) vs log(n)
  std::optional<double> chunked_slope;  // log(probes) vs log(n)
};

/// Rescales a template scene to exactly n points. Point counts are split
/// in proportion to the template and cluster boxes grow with the cube root
/// of the size ratio, so point density stays fixed.
SceneSpec scale_scene(const SceneSpec& tmpl, std::size_t n);

/// Single cluster at the origin sized for segmentation at threshold t.
SceneSpec single_cluster_template(double threshold, std::uint64_t seed);

/// Least-squares slope of log(y) against log(x). Needs two distinct x values.
std::optional<double> loglog_slope(std::span<const double> xs, std::span<const double> ys);

/// Runs both segmenters for each size; wall times are medians over repetitions.
BenchTable run_benchmark(std::span<const std::size_t> sizes, const SceneSpec& tmpl,
                         const SegmentConfig& config, const BenchOptions& options);

/// Columns n,naive_evals,chunked_probes,naive_ms,chunked_ms. Skipped naive
/// cells are left empty.
std::string to_csv(const BenchTable& table);

}  // namespace echomap
