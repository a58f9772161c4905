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

// The capture -> preprocess -> infer -> decode -> control loop on exactly
// two execution contexts: an acquisition thread feeding the latest-only
// mailbox, and the consumer doing everything else at the governed rate.
// A paced producer (producer_fps > 0) emulates a live camera and may drop
// frames; an unpaced producer runs in lockstep with the consumer so file
// sources are processed exhaustively.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "lanekeeper/capture.hpp"
#include "lanekeeper/control.hpp"
#include "lanekeeper/errors.hpp"
#include "lanekeeper/infer.hpp"
#include "lanekeeper/json_io.hpp"
#include "lanekeeper/lane_core.hpp"
#include "lanekeeper/stats.hpp"

namespace lanekeeper {

struct PipelineOptions {
  std::string source_spec;
  std::string backend_spec = "synthetic:";
  std::string sink_spec = "none";  // none | jsonl:<path> | overlay:<dir>
  ModelConfig model = ModelConfig::tusimple();
  double target_fps = 0;    // consumer pacing; 0 = unpaced
  double producer_fps = 0;  // acquisition pacing; 0 = lockstep, no drops
  std::uint64_t max_frames = 0;  // processed-frame budget; 0 = unbounded
  double max_duration_s = 0;     // wall-clock budget; 0 = unbounded
  double gain = 1.0;
  double speed = 0.5;
  double track = 0.5;
  double lookahead_frac = 0.8;
  SourceOptions source_options;
};

struct PipelineReport {
  std::uint64_t frames_in = 0;
  std::uint64_t frames_processed = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t in_flight = 0;
  double target_fps = 0;
  double achieved_fps = 0;
  double elapsed_ms = 0;
  bool incomplete = false;
  std::string failure;
  std::map<std::string, StageStats> stages;
};

namespace detail {

struct Sinks {
  std::optional<std::ofstream> records;
  std::string overlay_dir;

  static Sinks parse(const std::string& spec) {
    Sinks sinks;
    std::size_t pos = 0;
    while (pos < spec.size()) {
      auto comma = spec.find(',', pos);
      auto end = comma == std::string::npos ? spec.size() : comma;
      std::string part = spec.substr(pos, end - pos);
      pos = end + 1;
      if (part.empty() || part == "none") continue;
      if (part.rfind("jsonl:", 0) == 0) {
        sinks.records.emplace(part.substr(6));
        if (!*sinks.records)
          throw IoError("cannot write records to '" + part.substr(6) + "'");
      } else if (part.rfind("overlay:", 0) == 0) {
        sinks.overlay_dir = part.substr(8);
        std::error_code ec;
        std::filesystem::create_directories(sinks.overlay_dir, ec);
        if (ec)
          throw IoError("cannot create overlay directory '" +
                        sinks.overlay_dir + "': " + ec.message());
      } else {
        throw InvalidConfig("unknown sink '" + part +
                            "' (expected none, jsonl:<path>, overlay:<dir>)");
      }
    }
    return sinks;
  }
};

inline const std::array<Rgb, 4> kLaneColors = {
    Rgb{80, 220, 80}, Rgb{230, 90, 90}, Rgb{90, 140, 240},
    Rgb{230, 210, 80}};

inline void write_overlay(const std::string& dir, const FrameBuffer& frame,
                          const std::vector<LanePolyline>& lanes,
                          const LateralError& err, double lookahead_frac) {
  Image img = frame.pixels;
  int y_star = static_cast<int>(lookahead_frac * (img.height - 1));
  draw_hline(img, y_star, {120, 120, 120});
  for (const auto& lane : lanes)
    for (const auto& p : lane.points)
      draw_disc(img, p.x, p.y, 2, kLaneColors[lane.lane_index % 4]);
  if (err.valid) {
    double center = img.width / 2.0;
    double lane_center = center - err.value * center;
    draw_disc(img, lane_center, y_star, 3, {255, 255, 255});
  }
  char name[32];
  std::snprintf(name, sizeof name, "frame_%06llu.ppm",
                static_cast<unsigned long long>(frame.seq));
  write_ppm(img, (std::filesystem::path(dir) / name).string());
}

}  // namespace detail

/// Runs the full loop and reports per-stage timing statistics. Source or
/// backend failures terminate the run with a partial report flagged
/// incomplete rather than throwing mid-flight; spec errors (bad specs,
/// unopenable source) throw before any work starts.
inline PipelineReport run_pipeline(const PipelineOptions& opt) {
  SourceOptions source_opts = opt.source_options;
  source_opts.model = opt.model;
  auto source = open_source(opt.source_spec, source_opts);
  auto backend = make_backend(opt.backend_spec, opt.model);
  detail::Sinks sinks = detail::Sinks::parse(opt.sink_spec);

  LatestMailbox<FrameBuffer> mailbox;
  std::atomic<bool> producer_done{false};
  std::atomic<std::uint64_t> frames_in{0};
  std::mutex failure_mutex;
  std::string failure;

  auto note_failure = [&](const std::string& what) {
    std::lock_guard lock(failure_mutex);
    if (!failure.empty()) failure += "; ";
    failure += what;
  };

  auto t_start = std::chrono::steady_clock::now();

  std::jthread producer([&](std::stop_token stop) {
    try {
      RateGovernor pace(opt.producer_fps);
      while (!stop.stop_requested()) {
        pace.tick();
        auto frame = source->next();
        if (!frame) break;
        if (opt.producer_fps > 0) {
          mailbox.put(std::move(*frame));
        } else if (!mailbox.put_when_empty(std::move(*frame), stop)) {
          break;
        }
        frames_in.fetch_add(1, std::memory_order_relaxed);
      }
    } catch (const std::exception& e) {
      note_failure(std::string("producer: ") + e.what());
    }
    producer_done = true;
  });

  std::vector<double> staleness_ms, preprocess_ms, inference_ms, decode_ms,
      control_ms, end_to_end_ms, model_ms;
  std::uint64_t processed = 0;
  std::optional<std::chrono::steady_clock::time_point> first_done, last_done;
  bool incomplete = false;

  auto elapsed_s = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };
  auto out_of_budget = [&] {
    if (opt.max_frames > 0 && processed >= opt.max_frames) return true;
    if (opt.max_duration_s > 0 && elapsed_s() >= opt.max_duration_s)
      return true;
    return false;
  };

  RateGovernor governor(opt.target_fps);
  try {
    while (!out_of_budget()) {
      governor.tick();
      auto frame = mailbox.take();
      if (!frame) {
        if (producer_done && mailbox.empty()) break;
        std::this_thread::sleep_for(std::chrono::microseconds(200));
        continue;
      }

      auto t0 = std::chrono::steady_clock::now();
      double staleness =
          std::chrono::duration<double, std::milli>(t0 - frame->captured_at)
              .count();

      FrameTensor tensor = preprocess(*frame, opt.model);
      auto t1 = std::chrono::steady_clock::now();
      TimedInference inferred = infer_timed(*backend, tensor);
      auto t2 = std::chrono::steady_clock::now();
      auto lanes = decode_grid(inferred.grid, frame->pixels.width,
                               frame->pixels.height);
      auto t3 = std::chrono::steady_clock::now();
      LateralError err =
          lateral_error(lanes, frame->pixels.width, frame->pixels.height,
                        opt.lookahead_frac);
      SteeringCommand cmd = steer(err, opt.gain, opt.speed, opt.track);
      auto t4 = std::chrono::steady_clock::now();

      auto ms = [](auto a, auto b) {
        return std::chrono::duration<double, std::milli>(b - a).count();
      };
      staleness_ms.push_back(staleness);
      preprocess_ms.push_back(ms(t0, t1));
      inference_ms.push_back(inferred.latency_ms);
      decode_ms.push_back(ms(t2, t3));
      control_ms.push_back(ms(t3, t4));
      end_to_end_ms.push_back(ms(t0, t4));
      model_ms.push_back(ms(t0, t1) + inferred.latency_ms);

      if (sinks.records) {
        Json lanes_json = Json::array();
        for (const auto& lane : lanes) {
          Json pts = Json::array();
          for (const auto& p : lane.points) pts.push_back({p.x, p.y});
          lanes_json.push_back(std::move(pts));
        }
        Json record{{"seq", frame->seq},
                    {"staleness_ms", staleness},
                    {"preprocess_ms", preprocess_ms.back()},
                    {"inference_ms", inference_ms.back()},
                    {"decode_ms", decode_ms.back()},
                    {"control_ms", control_ms.back()},
                    {"lanes", std::move(lanes_json)},
                    {"error_value", err.valid ? Json(err.value) : Json()},
                    {"omega", cmd.omega}};
        *sinks.records << record.dump() << '\n';
        sinks.records->flush();
      }
      if (!sinks.overlay_dir.empty())
        detail::write_overlay(sinks.overlay_dir, *frame, lanes, err,
                              opt.lookahead_frac);

      ++processed;
      last_done = t4;
      if (!first_done) first_done = t4;
    }
  } catch (const std::exception& e) {
    note_failure(std::string("consumer: ") + e.what());
    incomplete = true;
  }

  producer.request_stop();
  producer.join();

  PipelineReport report;
  report.frames_in = frames_in.load();
  report.frames_processed = processed;
  report.frames_dropped = mailbox.stats().drops;
  report.in_flight = mailbox.empty() ? 0 : 1;
  report.target_fps = opt.target_fps;
  report.elapsed_ms = elapsed_s() * 1000.0;
  if (processed >= 2)
    report.achieved_fps =
        static_cast<double>(processed - 1) /
        std::chrono::duration<double>(*last_done - *first_done).count();
  report.stages["capture_staleness"] = summarize(staleness_ms);
  report.stages["preprocess"] = summarize(preprocess_ms);
  report.stages["inference"] = summarize(inference_ms);
  report.stages["decode"] = summarize(decode_ms);
  report.stages["control"] = summarize(control_ms);
  report.stages["end_to_end"] = summarize(end_to_end_ms);
  report.stages["preprocess_plus_inference"] = summarize(model_ms);
  {
    std::lock_guard lock(failure_mutex);
    report.failure = failure;
    report.incomplete = incomplete || !failure.empty();
  }
  return report;
}

struct SpeedupReport {
  double mean_slow = 0;
  double mean_fast = 0;
  double ratio = 0;  // full precision; round to 2 decimals for humans
};

/// Mean-over-mean speedup of timing list b relative to timing list a.
inline SpeedupReport bench_speedup(std::span<const double> timings_a,
                                   std::span<const double> timings_b) {
  if (timings_a.empty() || timings_b.empty())
    throw InvalidInput("timing lists must be non-empty");
  auto mean = [](std::span<const double> v) {
    double sum = 0;
    for (double t : v) {
      if (!(t > 0) || !std::isfinite(t))
        throw InvalidInput("timings must be positive");
      sum += t;
    }
    return sum / static_cast<double>(v.size());
  };
  SpeedupReport report;
  report.mean_slow = mean(timings_a);
  report.mean_fast = mean(timings_b);
  report.ratio = report.mean_slow / report.mean_fast;
  return report;
}

inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

struct BenchBackendResult {
  std::string spec;
  StageStats preprocess;
  StageStats inference;
  std::vector<double> inference_series;
};

struct BenchPair {
  std::string baseline;
  std::string candidate;
  SpeedupReport speedup;
};

struct BenchReport {
  int frames = 0;
  std::vector<BenchBackendResult> backends;
  std::vector<BenchPair> speedups;  // each later backend vs the first
};

/// Repeats preprocess + inference on every backend and reports per-stage
/// statistics plus the speedup of each backend relative to the first
/// (the first spec is the baseline, as in a before/after comparison).
inline BenchReport run_bench(const std::vector<std::string>& backend_specs,
                             const ModelConfig& model, int frames) {
  if (backend_specs.empty())
    throw InvalidConfig("bench needs at least one --backend");
  if (frames < 1) throw InvalidConfig("bench needs frames >= 1");

  FrameBuffer frame;
  frame.pixels = Image::filled(model.input_width, model.input_height,
                               {100, 110, 120});
  frame.captured_at = std::chrono::steady_clock::now();

  BenchReport report;
  report.frames = frames;
  for (const auto& spec : backend_specs) {
    auto backend = make_backend(spec, model);
    BenchBackendResult result;
    result.spec = spec;
    std::vector<double> pre_series;
    for (int i = 0; i < frames; ++i) {
      auto t0 = std::chrono::steady_clock::now();
      FrameTensor tensor = preprocess(frame, model);
      auto t1 = std::chrono::steady_clock::now();
      TimedInference inferred = infer_timed(*backend, tensor);
      pre_series.push_back(
          std::chrono::duration<double, std::milli>(t1 - t0).count());
      result.inference_series.push_back(inferred.latency_ms);
    }
    result.preprocess = summarize(pre_series);
    result.inference = summarize(result.inference_series);
    report.backends.push_back(std::move(result));
  }
  for (std::size_t i = 1; i < report.backends.size(); ++i)
    report.speedups.push_back(
        {report.backends[0].spec, report.backends[i].spec,
         bench_speedup(report.backends[0].inference_series,
                       report.backends[i].inference_series)});
  return report;
}

}  // namespace lanekeeper
