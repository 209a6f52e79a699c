#include "echomap/midi_out.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace echomap {

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_be16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

std::uint8_t status_byte(const MidiEvent& ev) {
  switch (ev.type) {
    case MidiEventType::NoteOff: return static_cast<std::uint8_t>(0x80 | ev.channel);
    case MidiEventType::NoteOn: return static_cast<std::uint8_t>(0x90 | ev.channel);
    case MidiEventType::ControlChange: return static_cast<std::uint8_t>(0xB0 | ev.channel);
  }
  return 0;
}

std::uint8_t midi_data(int v, const char* what) {
  if (v < 0 || v > 127) {
    throw std::invalid_argument(std::string(what) + " " + std::to_string(v) + " outside 0..127");
  }
  return static_cast<std::uint8_t>(v);
}

}  // namespace

std::uint64_t ms_to_ticks(std::uint64_t ms, std::uint16_t ticks_per_quarter,
                          std::uint32_t tempo_us_per_quarter) {
  const std::uint64_t num = ms * ticks_per_quarter * 1000;
  return (2 * num + tempo_us_per_quarter) / (2 * static_cast<std::uint64_t>(tempo_us_per_quarter));
}

MidiDocument events_to_midi(const std::vector<NoteEvent>& events, std::uint16_t ticks_per_quarter,
                            std::uint32_t tempo_us_per_quarter) {
  if (ticks_per_quarter == 0 || ticks_per_quarter >= 0x8000) {
    throw std::invalid_argument("ticks_per_quarter must be in 1..32767");
  }
  if (tempo_us_per_quarter == 0 || tempo_us_per_quarter > 0xFFFFFF) {
    throw std::invalid_argument("tempo must fit in 24 bits and be nonzero");
  }
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].onset_ms < events[i - 1].onset_ms) {
      throw std::invalid_argument("note events are not sorted by onset (event " +
                                  std::to_string(i) + ")");
    }
  }

  MidiDocument doc;
  doc.ticks_per_quarter = ticks_per_quarter;
  doc.tempo_us_per_quarter = tempo_us_per_quarter;
  int last_pan = -1;
  for (const NoteEvent& ev : events) {
    const std::uint8_t pitch = midi_data(ev.pitch, "pitch");
    const std::uint8_t pan = midi_data(ev.pan, "pan");
    if (ev.velocity < 1 || ev.velocity > 127) {
      throw std::invalid_argument("velocity " + std::to_string(ev.velocity) + " outside 1..127");
    }
    const std::uint64_t on = ms_to_ticks(ev.onset_ms, ticks_per_quarter, tempo_us_per_quarter);
    std::uint64_t off = ms_to_ticks(static_cast<std::uint64_t>(ev.onset_ms) + ev.duration_ms,
                                    ticks_per_quarter, tempo_us_per_quarter);
    // A note needs at least one tick or its Note-Off would sort ahead of the Note-On.
    off = std::max(off, on + 1);
    if (pan != last_pan) {
      doc.events.push_back({on, MidiEventType::ControlChange, 0, kPanController, pan});
      last_pan = pan;
    }
    doc.events.push_back({on, MidiEventType::NoteOn, 0, pitch, static_cast<std::uint8_t>(ev.velocity)});
    doc.events.push_back({off, MidiEventType::NoteOff, 0, pitch, 0});
  }
  // Stable: a pan change stays directly ahead of its Note-On.
  std::stable_sort(doc.events.begin(), doc.events.end(), [](const MidiEvent& a, const MidiEvent& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    return a.type == MidiEventType::NoteOff && b.type != MidiEventType::NoteOff;
  });
  return doc;
}

std::vector<std::uint8_t> encode_vlq(std::uint32_t value) {
  if (value > 0x0FFFFFFF) {
    throw std::invalid_argument("value " + std::to_string(value) + " exceeds the 28-bit VLQ range");
  }
  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(value & 0x7F));
  value >>= 7;
  while (value > 0) {
    out.push_back(static_cast<std::uint8_t>(0x80 | (value & 0x7F)));
    value >>= 7;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::uint8_t> write_smf(const MidiDocument& doc) {
  std::vector<std::uint8_t> track;
  // tempo meta
  track.insert(track.end(), {0x00, 0xFF, 0x51, 0x03});
  track.push_back(static_cast<std::uint8_t>(doc.tempo_us_per_quarter >> 16));
  track.push_back(static_cast<std::uint8_t>(doc.tempo_us_per_quarter >> 8));
  track.push_back(static_cast<std::uint8_t>(doc.tempo_us_per_quarter));

  std::uint64_t now = 0;
  for (const MidiEvent& ev : doc.events) {
    if (ev.tick < now) throw std::invalid_argument("MIDI events are not sorted by tick");
    const std::uint64_t delta = ev.tick - now;
    if (delta > 0x0FFFFFFF) throw std::invalid_argument("MIDI delta time too large");
    auto vlq = encode_vlq(static_cast<std::uint32_t>(delta));
    track.insert(track.end(), vlq.begin(), vlq.end());
    track.push_back(status_byte(ev));
    track.push_back(ev.data1);
    track.push_back(ev.data2);
    now = ev.tick;
  }
  // end of track
  track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out;
  put_tag(out, "MThd");
  put_be32(out, 6);
  put_be16(out, 0);  // format 0
  put_be16(out, 1);  // one track
  put_be16(out, doc.ticks_per_quarter);
  put_tag(out, "MTrk");
  put_be32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

double midi_pitch_to_hz(int pitch) { return 440.0 * std::pow(2.0, (pitch - 69) / 12.0); }

std::vector<std::uint8_t> render_wav(const std::vector<NoteEvent>& events,
                                     std::uint32_t sample_rate, std::uint32_t tail_ms) {
  if (sample_rate < 8000) throw std::invalid_argument("sample rate must be at least 8000 Hz");
  constexpr double kNoteAmplitude = 0.3;
  constexpr std::uint64_t kRampMs = 5;

  std::uint64_t end_ms = 0;
  for (const NoteEvent& ev : events) {
    end_ms = std::max(end_ms, static_cast<std::uint64_t>(ev.onset_ms) + ev.duration_ms);
  }
  end_ms += tail_ms;
  const std::uint64_t frames = (end_ms * sample_rate + 999) / 1000;
  std::vector<double> left(frames, 0.0), right(frames, 0.0);

  for (const NoteEvent& ev : events) {
    const std::uint64_t start = static_cast<std::uint64_t>(ev.onset_ms) * sample_rate / 1000;
    const std::uint64_t length = static_cast<std::uint64_t>(ev.duration_ms) * sample_rate / 1000;
    const std::uint64_t ramp = std::min(kRampMs * sample_rate / 1000, length / 2);
    const double freq = midi_pitch_to_hz(ev.pitch);
    const double amp = kNoteAmplitude * ev.velocity / 127.0;
    const double pan = std::clamp(ev.pan, 0, 127) / 127.0;
    // Constant power: gl^2 + gr^2 == 1.
    const double gl = std::sqrt(1.0 - pan);
    const double gr = std::sqrt(pan);
    for (std::uint64_t n = 0; n < length && start + n < frames; ++n) {
      double env = 1.0;
      if (ramp > 0 && n < ramp) env = static_cast<double>(n) / ramp;
      if (ramp > 0 && length - n <= ramp) env = std::min(env, static_cast<double>(length - n - 1) / ramp);
      const double s = amp * env * std::sin(2.0 * std::numbers::pi * freq * n / sample_rate);
      left[start + n] += gl * s;
      right[start + n] += gr * s;
    }
  }

  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * 4);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_le32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_le32(out, 16);
  put_le16(out, 1);  // PCM
  put_le16(out, 2);
  put_le32(out, sample_rate);
  put_le32(out, sample_rate * 4);
  put_le16(out, 4);
  put_le16(out, 16);
  put_tag(out, "data");
  put_le32(out, data_bytes);
  auto to_i16 = [](double v) {
    const double scaled = std::clamp(std::round(v * 32767.0), -32768.0, 32767.0);
    return static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled));
  };
  for (std::uint64_t i = 0; i < frames; ++i) {
    put_le16(out, to_i16(left[i]));
    put_le16(out, to_i16(right[i]));
  }
  return out;
}

}  // namespace echomap
