#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "echomap/sonify.hpp"

namespace echomap {

enum class MidiEventType : std::uint8_t { NoteOff, ControlChange, NoteOn };

/// Channel message at an absolute tick. For ControlChange, `data1` is the
/// controller number and `data2` its value; for notes they are pitch and velocity.
struct MidiEvent {
  std::uint64_t tick = 0;
  MidiEventType type = MidiEventType::NoteOn;
  std::uint8_t channel = 0;
  std::uint8_t data1 = 0;
  std::uint8_t data2 = 0;

  friend bool operator==(const MidiEvent&, const MidiEvent&) = default;
};

inline constexpr std::uint8_t kPanController = 10;

struct MidiDocument {
  std::uint16_t ticks_per_quarter = 480;
  std::uint32_t tempo_us_per_quarter = 500000;
  /// Sorted by tick; Note-Offs precede other events sharing a tick.
  std::vector<MidiEvent> events;
};

/// ms -> ticks, rounded half up.
std::uint64_t ms_to_ticks(std::uint64_t ms, std::uint16_t ticks_per_quarter,
                          std::uint32_t tempo_us_per_quarter);

/// Throws std::invalid_argument when events are not sorted by onset.
MidiDocument events_to_midi(const std::vector<NoteEvent>& events,
                            std::uint16_t ticks_per_quarter = 480,
                            std::uint32_t tempo_us_per_quarter = 500000);

/// MIDI variable-length quantity, 1..4 bytes (values below 2^28).
std::vector<std::uint8_t> encode_vlq(std::uint32_t value);

/// Standard MIDI File, format 0, one track; no running status.
std::vector<std::uint8_t> write_smf(const MidiDocument& doc);

/// Stereo 16-bit PCM WAV preview: one sine per note with 5 ms linear
/// ramps and a sqrt pan law, followed by `tail_ms` of silence.
std::vector<std::uint8_t> render_wav(const std::vector<NoteEvent>& events,
                                     std::uint32_t sample_rate = 44100,
                                     std::uint32_t tail_ms = 0);

double midi_pitch_to_hz(int pitch);

}  // namespace echomap
