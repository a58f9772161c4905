// Copyright 2026 The Lanekeeper Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point. Subcommands:
//   run       capture -> infer -> decode -> steer with per-stage timing
//   bench     repeat inference per backend and report speedups
//   extract   write every stride-th frame of a y4m stream as ppm
//   eval      detected/undetected classification + tally over a dataset
//   simulate  closed-loop lane keeping in the corridor world
//   decode    one grid file -> polylines (conformance vectors)
//
// Exit codes: 0 success, 1 operational failure, 2 usage error.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lanekeeper/lanekeeper.hpp"

namespace lk = lanekeeper;
using lk::Json;

namespace {

Json stage_stats_json(const lk::StageStats& s) {
  return Json{{"mean_ms", s.mean},
              {"p50_ms", s.p50},
              {"p95_ms", s.p95},
              {"max_ms", s.max},
              {"count", s.count}};
}

Json pipeline_report_json(const lk::PipelineReport& r) {
  Json stages = Json::object();
  for (const auto& [name, s] : r.stages) stages[name] = stage_stats_json(s);
  return Json{{"frames_in", r.frames_in},
              {"frames_processed", r.frames_processed},
              {"frames_dropped", r.frames_dropped},
              {"in_flight", r.in_flight},
              {"target_fps", r.target_fps},
              {"achieved_fps", r.achieved_fps},
              {"elapsed_ms", r.elapsed_ms},
              {"incomplete", r.incomplete},
              {"failure", r.failure},
              {"stages", stages}};
}

Json bench_report_json(const lk::BenchReport& r) {
  Json backends = Json::array();
  for (const auto& b : r.backends)
    backends.push_back(Json{{"spec", b.spec},
                            {"preprocess", stage_stats_json(b.preprocess)},
                            {"inference", stage_stats_json(b.inference)}});
  Json speedups = Json::array();
  for (const auto& p : r.speedups)
    speedups.push_back(Json{{"baseline", p.baseline},
                            {"candidate", p.candidate},
                            {"mean_baseline_ms", p.speedup.mean_slow},
                            {"mean_candidate_ms", p.speedup.mean_fast},
                            {"ratio", p.speedup.ratio},
                            {"ratio_rounded", lk::round2(p.speedup.ratio)}});
  return Json{
      {"frames", r.frames}, {"backends", backends}, {"speedups", speedups}};
}

void print_pipeline_report(const lk::PipelineReport& r) {
  std::printf("frames: in=%llu processed=%llu dropped=%llu in_flight=%llu\n",
              static_cast<unsigned long long>(r.frames_in),
              static_cast<unsigned long long>(r.frames_processed),
              static_cast<unsigned long long>(r.frames_dropped),
              static_cast<unsigned long long>(r.in_flight));
  std::printf("rate:   target=%.2f fps achieved=%.2f fps elapsed=%.1f ms\n",
              r.target_fps, r.achieved_fps, r.elapsed_ms);
  std::printf("%-26s %9s %9s %9s %9s\n", "stage (ms)", "mean", "p50", "p95",
              "max");
  for (const auto& [name, s] : r.stages)
    std::printf("%-26s %9.3f %9.3f %9.3f %9.3f\n", name.c_str(), s.mean,
                s.p50, s.p95, s.max);
  if (r.incomplete)
    std::printf("incomplete run: %s\n", r.failure.c_str());
}

lk::RunConfig load_config(const std::string& config_flag) {
  std::string path = config_flag;
  if (path.empty())
    if (const char* env = std::getenv("LANEKEEPER_CONFIG")) path = env;
  if (path.empty()) return {};
  return lk::RunConfig::load(path);
}

std::vector<float> load_grid_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw lk::IoError("cannot read grid file '" + path + "'");
  std::vector<float> values;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::istringstream row(line);
    double v;
    while (row >> v) values.push_back(static_cast<float>(v));
    if (!row.eof())
      throw lk::InvalidInput("grid file '" + path +
                             "': non-numeric value in line '" + line + "'");
  }
  return values;
}

struct GlobalFlags {
  std::string config_path;
  bool json = false;
};

int cmd_run(const lk::RunConfig& cfg, const GlobalFlags& g,
            const lk::PipelineOptions& opt) {
  lk::PipelineReport report = lk::run_pipeline(opt);
  (void)cfg;
  if (g.json)
    std::cout << pipeline_report_json(report).dump(2) << "\n";
  else
    print_pipeline_report(report);
  return report.incomplete ? 1 : 0;
}

int cmd_bench(const GlobalFlags& g, const std::vector<std::string>& backends,
              const lk::ModelConfig& model, int frames) {
  lk::BenchReport report = lk::run_bench(backends, model, frames);
  if (g.json) {
    std::cout << bench_report_json(report).dump(2) << "\n";
    return 0;
  }
  for (const auto& b : report.backends)
    std::printf(
        "backend %-32s inference mean=%.2f p50=%.2f p95=%.2f max=%.2f ms "
        "(preprocess mean=%.2f ms, %d frames)\n",
        b.spec.c_str(), b.inference.mean, b.inference.p50, b.inference.p95,
        b.inference.max, b.preprocess.mean, report.frames);
  for (const auto& p : report.speedups)
    std::printf("speedup: %s is %.2fx faster than %s\n", p.candidate.c_str(),
                lk::round2(p.speedup.ratio), p.baseline.c_str());
  return 0;
}

int cmd_extract(const GlobalFlags& g, const std::string& in,
                const std::string& out, int stride) {
  std::size_t written = lk::extract_frames(in, out, stride);
  if (g.json)
    std::cout << Json{{"frames_written", written}, {"out_dir", out}}.dump(2)
              << "\n";
  else
    std::printf("%zu frames written\n", written);
  return 0;
}

int cmd_eval(const lk::RunConfig& cfg, const GlobalFlags& g,
             const std::string& truth_path, const std::string& detections_path,
             const std::string& source_spec, const std::string& backend_spec,
             int frame_width, int frame_height) {
  auto truth_frames = lk::load_ground_truth(truth_path);

  std::map<std::string, std::vector<lk::LanePolyline>> detections;
  if (!detections_path.empty()) {
    detections = lk::load_detections(detections_path);
  } else if (!source_spec.empty()) {
    lk::SourceOptions source_opts;
    source_opts.model = cfg.model;
    source_opts.synth_width = cfg.synth_width;
    source_opts.synth_height = cfg.synth_height;
    source_opts.synth_frames = cfg.synth_frames;
    auto source = lk::open_source(source_spec, source_opts);
    auto backend = lk::make_backend(backend_spec, cfg.model);
    while (auto frame = source->next()) {
      auto tensor = lk::preprocess(*frame, cfg.model);
      auto inferred = lk::infer_timed(*backend, tensor);
      char id[32];
      std::snprintf(id, sizeof id, "frame_%06llu",
                    static_cast<unsigned long long>(frame->seq));
      detections[id] = lk::decode_grid(inferred.grid, frame->pixels.width,
                                       frame->pixels.height);
    }
  } else {
    throw lk::InvalidConfig("eval needs --detections or --source");
  }

  std::vector<lk::FrameVerdict> verdicts;
  for (const auto& truth : truth_frames) {
    auto it = detections.find(truth.frame_id);
    static const std::vector<lk::LanePolyline> kNone;
    const auto& lanes = it == detections.end() ? kNone : it->second;
    verdicts.push_back(lk::classify_frame(
        lanes, truth, cfg.deviation_threshold_deg, frame_width, frame_height));
  }
  lk::TallyReport report = lk::tally(verdicts);

  if (g.json) {
    Json frames = Json::array();
    for (const auto& v : verdicts)
      frames.push_back(Json{{"frame_id", v.frame_id},
                            {"verdict", lk::to_string(v.verdict)},
                            {"reason", lk::to_string(v.reason)}});
    Json reasons = Json::object();
    for (const auto& [reason, count] : report.reasons)
      reasons[lk::to_string(reason)] = count;
    std::cout << Json{{"threshold_deg", cfg.deviation_threshold_deg},
                      {"total", report.total},
                      {"detected", report.detected},
                      {"undetected", report.undetected},
                      {"detection_rate",
                       Json{{"numerator", report.rate_numerator},
                            {"denominator", report.rate_denominator},
                            {"value", report.detection_rate}}},
                      {"reasons", reasons},
                      {"frames", frames}}
                     .dump(2)
              << "\n";
    return 0;
  }

  for (const auto& v : verdicts) {
    if (v.verdict == lk::Verdict::Detected)
      std::printf("%-20s \xE2\x88\x9A\n", v.frame_id.c_str());
    else
      std::printf("%-20s -   (%s)\n", v.frame_id.c_str(),
                  lk::to_string(v.reason));
  }
  std::printf("detected %zu/%zu = %.3f  (threshold %.1f deg)\n",
              report.rate_numerator, report.rate_denominator,
              report.detection_rate, cfg.deviation_threshold_deg);
  return 0;
}

int cmd_simulate(const lk::RunConfig& cfg, const GlobalFlags& g,
                 const std::string& trajectory_path) {
  lk::ClosedLoopParams params;
  params.corridor = cfg.corridor;
  params.camera = cfg.camera;
  params.model = cfg.model;
  params.initial.y = cfg.initial_offset;
  params.initial.heading = cfg.initial_heading_deg * M_PI / 180.0;
  params.gain = cfg.gain;
  params.speed = cfg.speed;
  params.track = cfg.track;
  params.lookahead_frac = cfg.lookahead_frac;
  params.dt = cfg.sim_dt;
  params.duration = cfg.sim_duration;

  lk::ClosedLoopResult result = lk::run_closed_loop(params);

  if (!trajectory_path.empty()) {
    std::ofstream out(trajectory_path);
    if (!out)
      throw lk::IoError("cannot write trajectory '" + trajectory_path + "'");
    lk::write_trajectory_csv(out, result.trajectory);
  }

  if (g.json) {
    double final_offset =
        result.trajectory.empty() ? 0.0 : result.trajectory.back().offset;
    std::cout << Json{{"settled", result.settled},
                      {"failed", result.failed},
                      {"failure", result.failure},
                      {"max_abs_offset_m", result.max_abs_offset},
                      {"final_offset_m", final_offset},
                      {"steps", result.trajectory.size()},
                      {"dt_s", params.dt},
                      {"duration_s", params.duration},
                      {"gain", params.gain},
                      {"speed_mps", params.speed}}
                     .dump(2)
              << "\n";
  } else {
    std::printf("settled=%s max_offset=%.4f m steps=%zu%s%s\n",
                result.settled ? "true" : "false", result.max_abs_offset,
                result.trajectory.size(), result.failed ? " FAILED: " : "",
                result.failed ? result.failure.c_str() : "");
  }
  return 0;
}

int cmd_decode(const lk::RunConfig& cfg, const GlobalFlags& g,
               const std::string& grid_path, int frame_width,
               int frame_height) {
  lk::LaneGrid grid(cfg.model, load_grid_values(grid_path));
  auto lanes = lk::decode_grid(grid, frame_width, frame_height);

  if (g.json) {
    std::cout << Json{{"frame_width", frame_width},
                      {"frame_height", frame_height},
                      {"lanes", lk::lanes_to_json(lanes)}}
                     .dump(2)
              << "\n";
    return 0;
  }
  std::printf("%zu lane(s)\n", lanes.size());
  for (const auto& lane : lanes)
    std::printf("lane %d: %zu points, direction %+.3f deg, bottom x=%.2f\n",
                lane.lane_index, lane.points.size(), lane.direction_deg,
                lane.points.back().x);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lane detection, lane keeping, and benchmark workflows"};
  app.require_subcommand(1);

  GlobalFlags global;
  app.add_option("--config", global.config_path,
                 "flat key = value config file (default: $LANEKEEPER_CONFIG)");
  app.add_flag("--json", global.json, "machine-readable JSON on stdout");

  // run
  auto* run = app.add_subcommand("run", "run the detection pipeline");
  run->fallthrough();
  std::string run_source, run_backend = "synthetic:", run_sink = "none";
  std::string run_model;
  double run_fps = -1, run_producer_fps = -1, run_duration = -1;
  std::uint64_t run_frames = 0;
  std::uint64_t run_synth_frames = 0;
  run->add_option("--source", run_source,
                  "frame source: ppm directory, .y4m file, or "
                  "synthetic:<scene-file>")
      ->required();
  run->add_option("--backend", run_backend,
                  "onnx:<path>, synthetic:<scene-file>, synthetic:delay=<ms>");
  run->add_option("--sink", run_sink,
                  "none, jsonl:<path>, overlay:<dir> (comma-separated)");
  run->add_option("--model", run_model, "tusimple, culane, or a config file");
  auto* run_fps_opt =
      run->add_option("--fps", run_fps, "consumer pacing (0 = unpaced)");
  auto* run_producer_fps_opt =
      run->add_option("--producer-fps", run_producer_fps,
                      "acquisition pacing (0 = lockstep, no drops)");
  auto* run_frames_opt =
      run->add_option("--frames", run_frames, "stop after N processed frames");
  auto* run_duration_opt =
      run->add_option("--duration", run_duration, "stop after S seconds");
  auto* run_synth_frames_opt = run->add_option(
      "--synth-frames", run_synth_frames, "synthetic source length");

  // bench
  auto* bench = app.add_subcommand(
      "bench", "repeat inference per backend and compare speeds");
  bench->fallthrough();
  std::vector<std::string> bench_backends;
  std::string bench_model;
  int bench_frames = 10;
  bench->add_option("--backend", bench_backends, "backend spec (repeatable)")
      ->required();
  bench->add_option("--frames", bench_frames, "repetitions per backend");
  bench->add_option("--model", bench_model,
                    "tusimple, culane, or a config file");

  // extract
  auto* extract =
      app.add_subcommand("extract", "extract frames from a y4m stream");
  extract->fallthrough();
  std::string extract_in, extract_out;
  int extract_stride = 1;
  extract->add_option("--in", extract_in, "input .y4m stream")->required();
  extract->add_option("--out", extract_out, "output directory")->required();
  extract->add_option("--stride", extract_stride, "keep every stride-th frame");

  // eval
  auto* eval = app.add_subcommand(
      "eval", "classify frames against ground truth and tally");
  eval->fallthrough();
  std::string eval_truth, eval_detections, eval_source,
      eval_backend = "synthetic:", eval_model;
  double eval_threshold = -1;
  int eval_width = 800, eval_height = 288;
  eval->add_option("--truth", eval_truth, "ground-truth jsonl")->required();
  eval->add_option("--detections", eval_detections, "detections jsonl");
  eval->add_option("--source", eval_source,
                   "frame source to run detection on instead");
  eval->add_option("--backend", eval_backend, "backend for --source");
  auto* eval_threshold_opt =
      eval->add_option("--threshold", eval_threshold,
                       "direction deviation threshold (degrees)");
  eval->add_option("--model", eval_model, "tusimple, culane, or a config file");
  eval->add_option("--frame-width", eval_width, "frame width in pixels");
  eval->add_option("--frame-height", eval_height, "frame height in pixels");
  std::uint64_t eval_synth_frames = 0;
  auto* eval_synth_frames_opt = eval->add_option(
      "--synth-frames", eval_synth_frames, "synthetic source length");

  // simulate
  auto* simulate =
app.add_subcommand("simulate", "closed-loop lane keeping simulation");
  simulate->fallthrough();
  std::string sim_trajectory, sim_model;
  double sim_offset = std::nan(""), sim_heading = std::nan("");
  double sim_gain = std::nan(""), sim_speed = std::nan("");
  double sim_track = std::nan(""), sim_lookahead = std::nan("");
  double sim_dt = std::nan(""), sim_duration = std::nan("");
  double sim_half_width = std::nan(""), sim_length = std::nan("");
  double sim_curvature = std::nan("");
  simulate->add_option("--offset", sim_offset, "initial lateral offset (m)");
  simulate->add_option("--heading-deg", sim_heading, "initial heading");
  simulate->add_option("--gain", sim_gain, "steering gain (1/s)");
  simulate->add_option("--speed", sim_speed, "forward speed (m/s)");
  simulate->add_option("--track", sim_track, "wheel separation (m)");
  simulate->add_option("--lookahead", sim_lookahead, "lookahead fraction");
  simulate->add_option("--dt", sim_dt, "step (s)");
  simulate->add_option("--duration", sim_duration, "run length (s)");
  simulate->add_option("--half-width", sim_half_width, "corridor half width");
  simulate->add_option("--length", sim_length, "corridor length (m)");
  simulate->add_option("--curvature", sim_curvature,
                       "centerline curvature (1/m, 0 = straight)");
  simulate->add_option("--trajectory", sim_trajectory, "write csv here");
  simulate->add_option("--model", sim_model,
                       "tusimple, culane, or a config file");

  // decode
  auto* decode = app.add_subcommand(
      "decode", "decode one grid file into lane polylines");
  decode->fallthrough();
  std::string decode_grid_path, decode_model;
  int decode_width = 800, decode_height = 288;
  decode->add_option("--grid", decode_grid_path,
                     "whitespace-separated logits, cell-major "
                     "(cells+1) x anchors x lanes")
      ->required();
  decode->add_option("--model", decode_model,
                     "tusimple, culane, or a config file");
  decode->add_option("--frame-width", decode_width, "frame width in pixels");
  decode->add_option("--frame-height", decode_height,
                     "frame height in pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    lk::RunConfig cfg = load_config(global.config_path);

    if (run->parsed()) {
      if (!run_model.empty()) cfg.model = lk::ModelConfig::named(run_model);
      lk::PipelineOptions opt;
      opt.source_spec = run_source;
      opt.backend_spec = run_backend;
      opt.sink_spec = run_sink;
      opt.model = cfg.model;
      opt.target_fps = run_fps_opt->count() ? run_fps : cfg.target_fps;
      opt.producer_fps =
          run_producer_fps_opt->count() ? run_producer_fps : cfg.producer_fps;
      opt.max_frames = run_frames_opt->count() ? run_frames : cfg.max_frames;
      opt.max_duration_s =
          run_duration_opt->count() ? run_duration : cfg.max_duration_s;
      opt.gain = cfg.gain;
      opt.speed = cfg.speed;
      opt.track = cfg.track;
      opt.lookahead_frac = cfg.lookahead_frac;
      opt.source_options.synth_width = cfg.synth_width;
      opt.source_options.synth_height = cfg.synth_height;
      opt.source_options.synth_frames = run_synth_frames_opt->count()
                                            ? run_synth_frames
                                            : cfg.synth_frames;
      return cmd_run(cfg, global, opt);
    }
    if (bench->parsed()) {
      if (!bench_model.empty())
        cfg.model = lk::ModelConfig::named(bench_model);
      return cmd_bench(global, bench_backends, cfg.model, bench_frames);
    }
    if (extract->parsed())
      return cmd_extract(global, extract_in, extract_out, extract_stride);
    if (eval->parsed()) {
      if (!eval_model.empty()) cfg.model = lk::ModelConfig::named(eval_model);
      if (eval_threshold_opt->count())
        cfg.deviation_threshold_deg = eval_threshold;
      if (eval_synth_frames_opt->count()) cfg.synth_frames = eval_synth_frames;
      return cmd_eval(cfg, global, eval_truth, eval_detections, eval_source,
                      eval_backend, eval_width, eval_height);
    }
    if (simulate->parsed()) {
      if (!sim_model.empty()) cfg.model = lk::ModelConfig::named(sim_model);
      if (!std::isnan(sim_offset)) cfg.initial_offset = sim_offset;
      if (!std::isnan(sim_heading)) cfg.initial_heading_deg = sim_heading;
      if (!std::isnan(sim_gain)) cfg.gain = sim_gain;
      if (!std::isnan(sim_speed)) cfg.speed = sim_speed;
      if (!std::isnan(sim_track)) cfg.track = sim_track;
      if (!std::isnan(sim_lookahead)) cfg.lookahead_frac = sim_lookahead;
      if (!std::isnan(sim_dt)) cfg.sim_dt = sim_dt;
      if (!std::isnan(sim_duration)) cfg.sim_duration = sim_duration;
      if (!std::isnan(sim_half_width)) cfg.corridor.half_width = sim_half_width;
      if (!std::isnan(sim_length)) cfg.corridor.length = sim_length;
      if (!std::isnan(sim_curvature)) cfg.corridor.curvature = sim_curvature;
      cfg.validate();
      return cmd_simulate(cfg, global, sim_trajectory);
    }
    if (decode->parsed()) {
      if (!decode_model.empty())
        cfg.model = lk::ModelConfig::named(decode_model);
      return cmd_decode(cfg, global, decode_grid_path, decode_width,
                        decode_height);
    }
  } catch (const lk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
