#include "echomap/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "echomap/bench.hpp"
#include "echomap/cloud.hpp"
#include "echomap/metrics.hpp"
#include "echomap/midi_out.hpp"
#include "echomap/scene.hpp"
#include "echomap/segmentation.hpp"
#include "echomap/sonify.hpp"

namespace echomap {

namespace {

using nlohmann::json;

json read_json(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Writes to `path`, or to `out` when no path was given.
void emit(const std::string& path, std::ostream& out, std::span<const std::uint8_t> bytes) {
  if (path.empty()) {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
  } else {
    write_file(path, bytes);
  }
}

void emit(const std::string& path, std::ostream& out, const std::string& text) {
  emit(path, out,
       std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Connectivity parse_connectivity(int value) {
  if (value == 6) return Connectivity::Face6;
  if (value == 26) return Connectivity::Full26;
  throw std::invalid_argument("connectivity must be 6 or 26");
}

PointCloud load_ply(const std::string& path, std::ostream& err) {
  const auto bytes = read_file(path);
  PlyReadResult res = parse_ply(bytes);
  if (res.dropped_non_finite > 0) {
    err << "echomap: dropped " << res.dropped_non_finite << " non-finite vertices from " << path
        << "\n";
  }
  return std::move(res.cloud);
}

struct GenArgs {
  std::string spec;
  std::string out;
  std::string truth;
};

int run_gen(const GenArgs& a, std::ostream& out) {
  const json j = read_json(a.spec);
  const SceneSpec spec = scene_spec_from_json(j);
  GeneratedScene scene = generate_scene(spec);
  scene.cloud.frame_id = j.value("frame_id", std::uint64_t{0});
  emit(a.out, out, write_ply_ascii(scene.cloud));
  if (!a.truth.empty()) {
    json truth = {{"frames", json::array({{{"frame_id", scene.cloud.frame_id},
                                           {"expected_objects", scene.expected_object_count}}})}};
    write_file(a.truth, truth.dump(2) + "\n");
  }
  return 0;
}

struct SegmentArgs {
  std::string in;
  std::string out;
  std::string algo = "chunked";
  double chunk_size = 0.1;
  double threshold = 0.05;
  int connectivity = 26;
  std::uint32_t min_points = 0;
  bool timing = false;
};

int run_segment(const SegmentArgs& a, std::ostream& out, std::ostream& err) {
  const PointCloud cloud = load_ply(a.in, err);
  SegmentConfig config;
  config.chunk_size = a.chunk_size;
  config.threshold = a.threshold;
  config.connectivity = parse_connectivity(a.connectivity);
  config.min_points_per_object = a.min_points;

  SegmentStats stats;
  Segmentation seg;
  const auto t0 = std::chrono::steady_clock::now();
  if (a.algo == "chunked") {
    seg = segment_chunked(cloud, config, stats);
  } else if (a.algo == "naive") {
    seg = segment_naive(cloud, config, stats);
  } else {
    throw std::invalid_argument("unknown algorithm '" + a.algo + "'");
  }
  const auto t1 = std::chrono::steady_clock::now();

  json j = to_json(seg);
  j["frame_id"] = cloud.frame_id;
  j["algo"] = a.algo;
  j["stats"] = {{"distance_evals", stats.distance_evals},
                {"chunk_probes", stats.chunk_probes},
                {"quantizations", stats.quantizations},
                {"occupied_chunks", stats.occupied_chunks}};
  if (a.timing) {
    j["wall_time_us"] = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
  }
  emit(a.out, out, j.dump() + "\n");
  return 0;
}

struct SonifyArgs {
  std::string in;
  std::string out;
  std::string format;  // raw | ply; inferred from the extension when empty
  std::size_t width = 0;
  std::size_t height = 0;
  double scale = 0.001;
  SonifyConfig config;
  std::string emit_kind = "json";
  bool segment = false;
  double chunk_size = 0.1;
  int connectivity = 26;
  std::uint32_t min_points = 0;
  std::optional<double> fx, fy, cx, cy;
  std::uint32_t sample_rate = 44100;
  std::uint32_t tail_ms = 0;
};

int run_sonify(SonifyArgs a, std::ostream& out, std::ostream& err) {
  a.config.validate();
  std::string format = a.format;
  if (format.empty()) {
    format = std::filesystem::path(a.in).extension() == ".ply" ? "ply" : "raw";
  }
  if (format != "raw" && format != "ply") throw std::invalid_argument("unknown input format '" + format + "'");
  if (format == "raw" && (a.width == 0 || a.height == 0)) {
    throw std::invalid_argument("raw depth input needs --width and --height");
  }
  const std::size_t width = a.width ? a.width : 640;
  const std::size_t height = a.height ? a.height : 480;
  Intrinsics k;
  k.fx = a.fx.value_or(static_cast<double>(width));
  k.fy = a.fy.value_or(static_cast<double>(width));
  k.cx = a.cx.value_or((static_cast<double>(width) - 1.0) / 2.0);
  k.cy = a.cy.value_or((static_cast<double>(height) - 1.0) / 2.0);

  SegmentConfig seg_config;
  seg_config.chunk_size = a.chunk_size;
  seg_config.connectivity = parse_connectivity(a.connectivity);
  seg_config.min_points_per_object = a.min_points;

  std::optional<DepthFrame> frame;
  std::vector<std::int64_t> pixel_labels;
  std::uint32_t num_objects = 0;
  if (format == "ply") {
    const PointCloud cloud = load_ply(a.in, err);
    std::vector<std::int64_t> owner;
    frame = project_cloud_to_frame(cloud, width, height, k, &owner);
    if (a.segment) {
      const Segmentation seg = segment_chunked(cloud, seg_config);
      num_objects = seg.num_objects;
      pixel_labels.resize(owner.size(), -1);
      for (std::size_t i = 0; i < owner.size(); ++i) {
        if (owner[i] >= 0) pixel_labels[i] = seg.labels[static_cast<std::size_t>(owner[i])];
      }
    }
  } else {
    frame = parse_depth_raw(read_file(a.in), width, height, a.scale);
    if (a.segment) {
      const PointCloud cloud = depth_frame_to_cloud(*frame, k);
      const Segmentation seg = segment_chunked(cloud, seg_config);
      num_objects = seg.num_objects;
      pixel_labels = pixel_point_indices(*frame);
      for (auto& p : pixel_labels) {
        if (p >= 0) p = seg.labels[static_cast<std::size_t>(p)];
      }
    }
  }

  const DepthFrame grid = downsample(*frame, a.config);
  std::optional<CellObjects> objects;
  if (a.segment && num_objects > 0) {
    objects = cell_objects_from_pixels(pixel_labels, width, height, num_objects, a.config);
  }
  const auto events = schedule_frame(grid, a.config, objects ? &*objects : nullptr);

  if (a.emit_kind == "json") {
    emit(a.out, out, events_to_jsonl(events));
  } else if (a.emit_kind == "midi") {
    emit(a.out, out, write_smf(events_to_midi(events)));
  } else if (a.emit_kind == "wav") {
    emit(a.out, out, render_wav(events, a.sample_rate, a.tail_ms));
  } else {
    throw std::invalid_argument("unknown --emit kind '" + a.emit_kind + "'");
  }
  return 0;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> sizes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v == 0) throw std::invalid_argument("bad size '" + item + "'");
    sizes.push_back(static_cast<std::size_t>(v));
  }
  if (sizes.empty()) throw std::invalid_argument("no benchmark sizes given");
  return sizes;
}

struct BenchArgs {
  std::string sizes = "1000,2000,4000,8000,16000";
  std::uint32_t reps = 3;
  std::string out;
  std::size_t cutoff = 100000;
  double threshold = 0.05;
  std::optional<std::uint64_t> seed;
};

int run_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto sizes = parse_sizes(a.sizes);
  SegmentConfig config;
  config.threshold = a.threshold;
  config.chunk_size = 2.0 * a.threshold;
  BenchOptions options;
  options.repetitions = a.reps;
  options.naive_cutoff = a.cutoff;
  const SceneSpec tmpl = single_cluster_template(a.threshold, a.seed.value_or(default_seed()));
  const BenchTable table = run_benchmark(sizes, tmpl, config, options);
  emit(a.out, out, to_csv(table));
  auto show = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("n/a");
  };
  err << "slope naive_evals=" << show(table.naive_slope)
      << " chunked_probes=" << show(table.chunked_slope) << "\n";
  return 0;
}

// Truth files: {"frames": [...]}, a bare array, or one frame object.
std::vector<json> frame_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<json>>();
  if (j.contains("frames")) return j.at("frames").get<std::vector<json>>();
  return {j};
}

FrameResult result_from_json(const json& j) {
  FrameResult r;
  r.frame_id = j.value("frame_id", std::uint64_t{0});
  if (j.contains("detected_objects")) {
    r.detected_objects = j.at("detected_objects").get<std::int64_t>();
  } else {
    r.detected_objects = j.at("num_objects").get<std::int64_t>();
  }
  if (j.contains("stats")) {
    r.distance_evals = j.at("stats").value("distance_evals", std::uint64_t{0});
    r.chunk_probes = j.at("stats").value("chunk_probes", std::uint64_t{0});
  }
  r.distance_evals = j.value("distance_evals", r.distance_evals);
  r.chunk_probes = j.value("chunk_probes", r.chunk_probes);
  r.wall_time_us = j.value("wall_time_us", std::uint64_t{0});
  return r;
}

struct EvalArgs {
  std::string truth;
  std::vector<std::string> results;
  std::string out;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  std::vector<std::pair<std::uint64_t, std::int64_t>> truth;
  for (const json& f : frame_list(read_json(a.truth))) {
    truth.emplace_back(f.value("frame_id", std::uint64_t{0}),
                       f.at("expected_objects").get<std::int64_t>());
  }
  std::vector<FrameResult> results;
  for (const std::string& path : a.results) {
    for (const json& f : frame_list(read_json(path))) results.push_back(result_from_json(f));
  }
  if (truth.empty()) throw std::invalid_argument("truth file lists no frames");

  std::map<std::uint64_t, std::size_t> by_id;
  for (std::size_t i = 0; i < results.size(); ++i) by_id.emplace(results[i].frame_id, i);
  std::set<std::uint64_t> truth_ids;
  for (const auto& t : truth) truth_ids.insert(t.first);
  const bool match_by_id = by_id.size() == results.size() && truth_ids.size() == truth.size() &&
                           std::all_of(truth.begin(), truth.end(),
                                       [&](const auto& t) { return by_id.count(t.first) > 0; });

  std::vector<FrameResult> frames;
  if (match_by_id) {
    for (const auto& [id, expected] : truth) {
      FrameResult r = results[by_id.at(id)];
      r.expected_objects = expected;
      frames.push_back(r);
    }
  } else if (results.size() == truth.size()) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      FrameResult r = results[i];
      r.frame_id = truth[i].first;
      r.expected_objects = truth[i].second;
      frames.push_back(r);
    }
  } else {
    throw std::invalid_argument("results (" + std::to_string(results.size()) +
                                " frames) do not line up with truth (" +
                                std::to_string(truth.size()) + " frames)");
  }
  emit(a.out, out, to_json(make_report(std::move(frames))).dump(2) + "\n");
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth sonification and chunked point-cloud segmentation", "echomap"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic scene as PLY");
  gen_cmd->add_option("--spec", gen.spec, "Scene spec JSON")->required();
  gen_cmd->add_option("--out", gen.out, "Output PLY (stdout when absent)");
  gen_cmd->add_option("--truth", gen.truth, "Write expected object counts as JSON");

  SegmentArgs seg;
  auto* seg_cmd = app.add_subcommand("segment", "Segment a PLY point cloud");
  seg_cmd->add_option("--in", seg.in, "Input PLY")->required();
  seg_cmd->add_option("--algo", seg.algo)->check(CLI::IsMember({"chunked", "naive"}));
  seg_cmd->add_option("--chunk-size", seg.chunk_size, "Chunk side in meters");
  seg_cmd->add_option("--threshold", seg.threshold, "Naive distance threshold in meters");
  seg_cmd->add_option("--connectivity", seg.connectivity)->check(CLI::IsMember({6, 26}));
  seg_cmd->add_option("--min-points", seg.min_points, "Discard objects with fewer points");
  seg_cmd->add_flag("--timing", seg.timing, "Include wall time in the output");
  seg_cmd->add_option("--out", seg.out, "Output JSON (stdout when absent)");

  SonifyArgs son;
  auto* son_cmd = app.add_subcommand("sonify", "Turn a depth frame into a note stream");
  son_cmd->add_option("--in", son.in, "Raw u16 depth or PLY")->required();
  son_cmd->add_option("--format", son.format)->check(CLI::IsMember({"raw", "ply"}));
  son_cmd->add_option("--width", son.width, "Frame width in pixels");
  son_cmd->add_option("--height", son.height, "Frame height in pixels");
  son_cmd->add_option("--scale", son.scale, "Meters per raw depth unit");
  son_cmd->add_option("--start", son.config.start, "Nearest depth (m)");
  son_cmd->add_option("--end", son.config.end, "Farthest depth (m)");
  son_cmd->add_option("--range", son.config.range, "Pitch steps");
  son_cmd->add_option("--grid-width", son.config.grid_width);
  son_cmd->add_option("--grid-height", son.config.grid_height);
  son_cmd->add_option("--inter-onset", son.config.inter_onset_ms, "ms between note slots");
  son_cmd->add_option("--note-duration", son.config.note_duration_ms, "ms");
  son_cmd->add_option("--velocity", son.config.base_velocity, "Velocity without --segment");
  bool no_clamp = false;
  son_cmd->add_flag("--no-clamp-near", no_clamp, "Rest instead of top pitch below --start");
  son_cmd->add_option("--emit", son.emit_kind)->check(CLI::IsMember({"midi", "json", "wav"}));
  son_cmd->add_flag("--segment", son.segment, "Per-object velocities");
  son_cmd->add_option("--chunk-size", son.chunk_size);
  son_cmd->add_option("--connectivity", son.connectivity)->check(CLI::IsMember({6, 26}));
  son_cmd->add_option("--min-points", son.min_points);
  son_cmd->add_option("--fx", son.fx);
  son_cmd->add_option("--fy", son.fy);
  son_cmd->add_option("--cx", son.cx);
  son_cmd->add_option("--cy", son.cy);
  son_cmd->add_option("--sample-rate", son.sample_rate);
  son_cmd->add_option("--tail-ms", son.tail_ms, "Silence appended to WAV output");
  son_cmd->add_option("--out", son.out, "Output path (stdout when absent)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Naive vs chunked scaling benchmark");
  bench_cmd->add_option("--sizes", bench.sizes, "Comma-separated point counts");
  bench_cmd->add_option("--reps", bench.reps)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--cutoff", bench.cutoff, "Largest size the naive segmenter runs on");
  bench_cmd->add_option("--threshold", bench.threshold, "Naive threshold; chunk size is twice this");
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->add_option("--out", bench.out, "Output CSV (stdout when absent)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Pearson R and accuracy over frames");
  eval_cmd->add_option("--truth", eval.truth, "Expected object counts JSON")->required();
  eval_cmd->add_option("--results", eval.results, "Segmentation result JSON(s)")->required();
  eval_cmd->add_option("--out", eval.out, "Output JSON (stdout when absent)");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen_cmd) return run_gen(gen, out);
    if (*seg_cmd) return run_segment(seg, out, err);
    if (*son_cmd) {
      son.config.clamp_near = !no_clamp;
      return run_sonify(son, out, err);
    }
    if (*bench_cmd) return run_bench(bench, out, err);
    if (*eval_cmd) return run_eval(eval, out);
  } catch (const std::exception& e) {
    err << "echomap: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace echomap
