#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace echomap {

struct FrameResult {
  std::uint64_t frame_id = 0;
  std::int64_t expected_objects = 0;
  std::int64_t detected_objects = 0;
  std::uint64_t distance_evals = 0;
  std::uint64_t chunk_probes = 0;
  std::uint64_t wall_time_us = 0;
};

struct MetricsReport {
  std::optional<double> pearson_r;  // nullopt = not applicable
  double accuracy = 0.0;
  std::vector<FrameResult> per_frame;
};

/// Sample Pearson correlation; nullopt when either series has zero variance.
/// Throws std::invalid_argument on length mismatch or fewer than two samples.
std::optional<double> pearson_r(std::span<const double> xs, std::span<const double> ys);

/// Fraction of frames whose detected count equals the expected count.
double accuracy(std::span<const FrameResult> results);

/// Pearson R between expected and detected counts (n/a for a single frame) plus accuracy.
MetricsReport make_report(std::vector<FrameResult> frames);

nlohmann::json to_json(const FrameResult& r);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace echomap
