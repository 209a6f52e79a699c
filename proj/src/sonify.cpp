#include "echomap/sonify.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace echomap {

namespace {

constexpr int kMaxVelocity = 127;
constexpr int kMinObjectVelocity = 40;

std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num > 0) == (den > 0))) ++q;
  return q;
}

}  // namespace

void SonifyConfig::validate() const {
  if (!std::isfinite(start) || !std::isfinite(end) || start < 0.0 || !(end > start)) {
    throw std::invalid_argument("sonify config needs end > start >= 0");
  }
  if (range < 1 || kTopPitch - 2 * range < 0) {
    throw std::invalid_argument("sonify range must be in 1..48");
  }
  if (grid_width < 1 || grid_height < 1) {
    throw std::invalid_argument("sonify grid must be at least 1x1");
  }
  if (base_velocity < 1 || base_velocity > kMaxVelocity) {
    throw std::invalid_argument("base velocity must be in 1..127");
  }
}

std::optional<int> depth_to_note(double meters, const SonifyConfig& config) {
  if (!std::isfinite(meters) || meters <= 0.0) return std::nullopt;
  if (meters < config.start) {
    return config.clamp_near ? std::optional<int>(kTopPitch) : std::nullopt;
  }
  if (meters > config.end) return std::nullopt;
  const double t = (meters - config.start) / (config.end - config.start);
  auto steps = static_cast<int>(std::floor(config.range * std::pow(t, 0.8)));
  if (steps > config.range) steps = config.range;
  return kTopPitch - 2 * steps;
}

std::size_t nearest_source_index(std::size_t cell, std::size_t cells, std::size_t source) {
  // Centre of the cell in source pixel coordinates is (2*cell+1)*source/(2*cells) - 1/2;
  // rounding half down is ceil(v - 1/2). Kept in integers so ties are exact.
  const auto num = static_cast<std::int64_t>((2 * cell + 1) * source) -
                   static_cast<std::int64_t>(2 * cells);
  const auto den = static_cast<std::int64_t>(2 * cells);
  const std::int64_t idx = ceil_div(num, den);
  if (idx < 0) return 0;
  if (idx >= static_cast<std::int64_t>(source)) return source - 1;
  return static_cast<std::size_t>(idx);
}

DepthFrame downsample(const DepthFrame& frame, const SonifyConfig& config) {
  config.validate();
  const std::size_t gw = config.grid_width;
  const std::size_t gh = config.grid_height;
  std::vector<double> out(gw * gh);
  for (std::size_t r = 0; r < gh; ++r) {
    const std::size_t sr = nearest_source_index(r, gh, frame.height());
    for (std::size_t c = 0; c < gw; ++c) {
      out[r * gw + c] = frame.at(sr, nearest_source_index(c, gw, frame.width()));
    }
  }
  return DepthFrame(gw, gh, std::move(out));
}

int pan_for_column(std::size_t col, const SonifyConfig& config) {
  if (col >= config.grid_width) {
    throw std::out_of_range("column " + std::to_string(col) + " outside grid width " +
                            std::to_string(config.grid_width));
  }
  if (config.grid_width == 1) return 64;
  const std::size_t span = config.grid_width - 1;
  // round(127 * col / span), half up
  return static_cast<int>((2 * 127 * col + span) / (2 * span));
}

int velocity_for_object(std::uint32_t object_id, std::uint32_t num_objects) {
  if (num_objects == 0 || object_id >= num_objects) {
    throw std::out_of_range("object id " + std::to_string(object_id) + " out of range for " +
                            std::to_string(num_objects) + " objects");
  }
  if (num_objects == 1) return kMaxVelocity;
  const std::int64_t den = num_objects - 1;
  const std::int64_t num = kMaxVelocity * den - (kMaxVelocity - kMinObjectVelocity) * object_id;
  // round(num / den), half up
  return static_cast<int>((2 * num + den) / (2 * den));
}

std::vector<NoteEvent> schedule_frame(const DepthFrame& grid, const SonifyConfig& config,
                                      const CellObjects* objects) {
  config.validate();
  const std::size_t gw = config.grid_width;
  const std::size_t gh = config.grid_height;
  if (grid.width() != gw || grid.height() != gh) {
    throw std::invalid_argument("schedule_frame expects a " + std::to_string(gw) + "x" +
                                std::to_string(gh) + " grid, got " +
                                std::to_string(grid.width()) + "x" + std::to_string(grid.height()));
  }
  if (objects && objects->ids.size() != gw * gh) {
    throw std::invalid_argument("object grid has " + std::to_string(objects->ids.size()) +
                                " cells, expected " + std::to_string(gw * gh));
  }

  std::vector<NoteEvent> events;
  std::uint32_t slot = 0;
  for (std::size_t c = gw; c-- > 0;) {
    const int pan = pan_for_column(c, config);
    for (std::size_t r = 0; r < gh; ++r, ++slot) {
      const auto pitch = depth_to_note(grid.at(r, c), config);
      if (!pitch) continue;
      NoteEvent ev;
      ev.pitch = *pitch;
      ev.pan = pan;
      ev.velocity = config.base_velocity;
      if (objects) {
        if (const auto& id = objects->ids[r * gw + c]) {
          ev.velocity = velocity_for_object(*id, objects->num_objects);
        }
      }
      ev.onset_ms = slot * config.inter_onset_ms;
      ev.duration_ms = config.note_duration_ms;
      ev.row = r;
      ev.col = c;
      events.push_back(ev);
    }
  }
  return events;
}

CellObjects cell_objects_from_pixels(const std::vector<std::int64_t>& pixel_labels,
                                     std::size_t width, std::size_t height,
                                     std::uint32_t num_objects, const SonifyConfig& config) {
  if (pixel_labels.size() != width * height) {
    throw std::invalid_argument("pixel label grid does not match frame size");
  }
  const std::size_t gw = config.grid_width;
  const std::size_t gh = config.grid_height;
  std::vector<std::map<std::int64_t, std::size_t>> votes(gw * gh);
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t cr = r * gh / height;
    for (std::size_t c = 0; c < width; ++c) {
      const std::int64_t label = pixel_labels[r * width + c];
      if (label < 0 || label >= static_cast<std::int64_t>(num_objects)) continue;
      ++votes[cr * gw + c * gw / width][label];
    }
  }
  CellObjects out;
  out.num_objects = num_objects;
  out.ids.resize(gw * gh);
  for (std::size_t cell = 0; cell < votes.size(); ++cell) {
    std::size_t best = 0;
    for (const auto& [label, count] : votes[cell]) {
      // map iterates ascending, so ties keep the smaller id
      if (count > best) {
        best = count;
        out.ids[cell] = static_cast<std::uint32_t>(label);
      }
    }
  }
  return out;
}

std::string events_to_jsonl(const std::vector<NoteEvent>& events) {
  std::string out;
  for (const NoteEvent& ev : events) {
    nlohmann::ordered_json j;
    j["pitch"] = ev.pitch;
    j["pan"] = ev.pan;
    j["velocity"] = ev.velocity;
    j["onset_ms"] = ev.onset_ms;
    j["duration_ms"] = ev.duration_ms;
    j["row"] = ev.row;
    j["col"] = ev.col;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace echomap
