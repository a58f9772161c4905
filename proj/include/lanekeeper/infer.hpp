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

// Inference backends: one abstract contract (tensor in, grid out) with
// per-call wall-clock timing. The deterministic synthetic backend stands
// in for the real network so the whole pipeline runs and is testable with
// no ML runtime present; a real ONNX-format model would slot in behind
// the same interface.

#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "lanekeeper/capture.hpp"
#include "lanekeeper/errors.hpp"
#include "lanekeeper/lane_core.hpp"
#include "lanekeeper/scene.hpp"

namespace lanekeeper {

// ImageNet normalization, the convention of the reference UFLD pipelines.
inline constexpr std::array<double, 3> kNormMean{0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kNormStd{0.229, 0.224, 0.225};

/// Channel-major RGB float tensor shaped 3 x height x width.
struct FrameTensor {
  int width = 0;
  int height = 0;
  std::vector<float> data;
  std::uint64_t source_seq = 0;

  float& at(int channel, int y, int x) {
    return data[(static_cast<std::size_t>(channel) * height + y) * width + x];
  }
  float at(int channel, int y, int x) const {
    return data[(static_cast<std::size_t>(channel) * height + y) * width + x];
  }
};

/// Nearest-neighbor resize to the model input raster, then per-channel
/// (p/255 - mean)/std normalization. Nearest-neighbor keeps test vectors
/// bit-exact; it is the identity when the frame already matches.
inline FrameTensor preprocess(const FrameBuffer& frame,
                              const ModelConfig& config) {
  const Image& src = frame.pixels;
  if (src.empty()) throw InvalidInput("cannot preprocess an empty frame");

  FrameTensor t;
  t.width = config.input_width;
  t.height = config.input_height;
  t.source_seq = frame.seq;
  t.data.resize(static_cast<std::size_t>(3) * t.width * t.height);

  for (int y = 0; y < t.height; ++y) {
    int sy = std::min(src.height - 1,
                      static_cast<int>((y + 0.5) * src.height / t.height));
    for (int x = 0; x < t.width; ++x) {
      int sx = std::min(src.width - 1,
                        static_cast<int>((x + 0.5) * src.width / t.width));
      const std::uint8_t* p = src.pixel(sx, sy);
      for (int c = 0; c < 3; ++c)
        t.at(c, y, x) = static_cast<float>(
            (p[c] / 255.0 - kNormMean[c]) / kNormStd[c]);
    }
  }
  return t;
}

class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;
  virtual const ModelConfig& config() const = 0;
  virtual LaneGrid run(const FrameTensor& input) = 0;
  virtual std::string describe() const = 0;
};

struct TimedInference {
  LaneGrid grid;
  double latency_ms = 0;
};

/// Runs the backend and measures the wall clock of the call alone.
inline TimedInference infer_timed(InferenceBackend& backend,
                                  const FrameTensor& input) {
  const ModelConfig& cfg = backend.config();
  if (input.width != cfg.input_width || input.height != cfg.input_height ||
      input.data.size() !=
          static_cast<std::size_t>(3) * cfg.input_width * cfg.input_height)
    throw InvalidInput("input tensor is " + std::to_string(input.width) +
                       "x" + std::to_string(input.height) +
                       ", backend expects " +
                       std::to_string(cfg.input_width) + "x" +
                       std::to_string(cfg.input_height));

  auto t0 = std::chrono::steady_clock::now();
  try {
    LaneGrid grid = backend.run(input);
    double ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    return {std::move(grid), ms};
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw BackendError(std::string("backend failed: ") + e.what());
  }
}

/// Emits a fixed grid of saturated logits for a configured scene: +20 on
/// the cell nearest the lane, +20 on background where absent, 0 elsewhere.
/// Pixel content is ignored; an optional artificial delay models a slow
/// model for pacing and benchmark runs.
class SyntheticBackend final : public InferenceBackend {
 public:
  SyntheticBackend(Scene scene, ModelConfig config, double delay_ms = 0,
                   std::string spec = "synthetic")
      : config_(std::move(config)),
        delay_ms_(delay_ms),
        spec_(std::move(spec)),
        grid_(config_) {
    scene.validate(config_);
    for (int lane = 0; lane < config_.num_lanes; ++lane) {
      const SceneLane* sl = lane < static_cast<int>(scene.lanes.size())
                                ? &scene.lanes[lane]
                                : nullptr;
      for (int a = 0; a < config_.num_anchors; ++a) {
        if (sl && sl->present(a)) {
          double y_norm = static_cast<double>(config_.anchor_rows[a]) /
                          config_.input_height;
          int cell = static_cast<int>(
              std::llround(sl->x_norm_at(y_norm) * (config_.num_cells - 1)));
          cell = std::clamp(cell, 0, config_.num_cells - 1);
          grid_.set(cell, a, lane, 20.0f);
        } else {
          grid_.set(config_.num_cells, a, lane, 20.0f);
        }
      }
    }
  }

  const ModelConfig& config() const override { return config_; }

  LaneGrid run(const FrameTensor&) override {
    if (delay_ms_ > 0)
      std::this_thread::sleep_for(
          std::chrono::duration<double, std::milli>(delay_ms_));
    return grid_;
  }

  std::string describe() const override { return spec_; }

 private:
  ModelConfig config_;
  double delay_ms_;
  std::string spec_;
  LaneGrid grid_;
};

inline std::unique_ptr<InferenceBackend> make_synthetic_backend(
    const Scene& scene, const ModelConfig& config, double delay_ms = 0) {
  return std::make_unique<SyntheticBackend>(scene, config, delay_ms);
}

/// Builds a backend from a spec string:
///   synthetic:<scene-file>            scene-driven grids
///   synthetic:delay=<ms>              empty scene with an injected delay
///   synthetic:<scene-file>,delay=<ms> both
///   onnx:<path>                       real model (needs an ONNX runtime)
inline std::unique_ptr<InferenceBackend> make_backend(
    const std::string& spec, const ModelConfig& config) {
  if (spec == "synthetic" || spec.rfind("synthetic:", 0) == 0) {
    std::string rest = spec.size() > 10 ? spec.substr(10) : std::string{};
    Scene scene;
    double delay_ms = 0;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      auto comma = rest.find(',', pos);
      auto end = comma == std::string::npos ? rest.size() : comma;
      std::string part = rest.substr(pos, end - pos);
      pos = end + 1;
      if (part.empty()) continue;
      if (part.rfind("delay=", 0) == 0) {
        delay_ms = KvReader::parse_double(part.substr(6), "delay");
        if (delay_ms < 0) throw InvalidConfig("backend delay must be >= 0");
      } else {
        scene = Scene::load(part);
      }
    }
    return std::make_unique<SyntheticBackend>(scene, config, delay_ms, spec);
  }
  if (spec.rfind("onnx:", 0) == 0)
    throw BackendError(
        "backend '" + spec +
        "' needs an ONNX runtime, which this build does not include; "
        "use a synthetic backend");
  throw InvalidConfig("unknown backend spec '" + spec +
                      "' (expected onnx:<path> or synthetic:...)");
}

}  // namespace lanekeeper
