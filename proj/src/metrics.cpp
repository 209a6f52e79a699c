#include "echomap/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace echomap {

std::optional<double> pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("pearson_r: series lengths differ (" + std::to_string(xs.size()) +
                                " vs " + std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) throw std::invalid_argument("pearson_r: need at least two samples");

  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / (std::sqrt(sxx) * std::sqrt(syy));
}

double accuracy(std::span<const FrameResult> results) {
  if (results.empty()) throw std::invalid_argument("accuracy: no frames");
  std::size_t exact = 0;
  for (const FrameResult& r : results) exact += r.detected_objects == r.expected_objects;
  return static_cast<double>(exact) / static_cast<double>(results.size());
}

MetricsReport make_report(std::vector<FrameResult> frames) {
  MetricsReport report;
  report.accuracy = accuracy(frames);
  if (frames.size() >= 2) {
    std::vector<double> expected, detected;
    for (const FrameResult& r : frames) {
      expected.push_back(static_cast<double>(r.expected_objects));
      detected.push_back(static_cast<double>(r.detected_objects));
    }
    report.pearson_r = pearson_r(expected, detected);
  }
  report.per_frame = std::move(frames);
  return report;
}

nlohmann::json to_json(const FrameResult& r) {
  return {{"frame_id", r.frame_id},
          {"expected_objects", r.expected_objects},
          {"detected_objects", r.detected_objects},
          {"distance_evals", r.distance_evals},
          {"chunk_probes", r.chunk_probes},
          {"wall_time_us", r.wall_time_us}};
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json frames = nlohmann::json::array();
  for (const FrameResult& r : report.per_frame) frames.push_back(to_json(r));
  nlohmann::json out;
  out["pearson_r"] = report.pearson_r ? nlohmann::json(*report.pearson_r) : nlohmann::json(nullptr);
  out["accuracy"] = report.accuracy;
  out["per_frame"] = std::move(frames);
  return out;
}

}  // namespace echomap
