#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echomap/cloud.hpp"

namespace echomap {

struct SonifyConfig {
  double start = 0.3;  // nearest depth, meters
  double end = 6.0;    // farthest depth, meters
  int range = 30;      // pitch steps; lowest note is 96 - 2 * range
  std::size_t grid_width = 16;
  std::size_t grid_height = 12;
  std::uint32_t inter_onset_ms = 25;
  std::uint32_t note_duration_ms = 20;
  bool clamp_near = true;
  int base_velocity = 100;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
};

struct NoteEvent {
  int pitch = 0;     // MIDI note 0..127
  int pan = 64;      // 0 hard left, 127 hard right
  int velocity = 0;  // 1..127
  std::uint32_t onset_ms = 0;
  std::uint32_t duration_ms = 0;
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

inline constexpr int kTopPitch = 96;

/// MIDI pitch for a depth, or nullopt for a rest. Near depths map high:
/// 96 - 2 * floor(range * t^0.8) with t = (x - start) / (end - start).
std::optional<int> depth_to_note(double meters, const SonifyConfig& config);

/// Nearest-neighbour resample to grid_width x grid_height; each output cell
/// takes the source pixel nearest its centre (ties toward the lower index).
DepthFrame downsample(const DepthFrame& frame, const SonifyConfig& config);

/// Source index sampled for output cell `cell` out of `cells` along an axis of `source` pixels.
std::size_t nearest_source_index(std::size_t cell, std::size_t cells, std::size_t source);

int pan_for_column(std::size_t col, const SonifyConfig& config);

/// Evenly spaced velocities from 127 down to 40.
int velocity_for_object(std::uint32_t object_id, std::uint32_t num_objects);

/// Optional object id per downsampled cell, row-major grid_width x grid_height.
struct CellObjects {
  std::vector<std::optional<std::uint32_t>> ids;
  std::uint32_t num_objects = 0;
};

/// Events for a downsampled grid: columns right to left, rows top to bottom.
/// Each cell owns one inter_onset slot; rests keep their slot silent.
std::vector<NoteEvent> schedule_frame(const DepthFrame& grid, const SonifyConfig& config,
                                      const CellObjects* objects = nullptr);

/// Majority object label per cell over the source pixels that fall in it.
/// pixel_labels holds one label per source pixel (negative = none).
CellObjects cell_objects_from_pixels(const std::vector<std::int64_t>& pixel_labels,
                                     std::size_t width, std::size_t height,
                                     std::uint32_t num_objects, const SonifyConfig& config);

/// One JSON object per line: pitch, pan, velocity, onset_ms, duration_ms, row, col.
std::string events_to_jsonl(const std::vector<NoteEvent>& events);

}  // namespace echomap
