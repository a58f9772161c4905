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

// Merged view of every module's configuration, loaded from one flat
// key = value file with CLI-flag overrides on top. Unknown keys are
// rejected; each value is validated by its owning module.

#pragma once

#include <cstdint>
#include <string>

#include "lanekeeper/capture.hpp"
#include "lanekeeper/errors.hpp"
#include "lanekeeper/kv.hpp"
#include "lanekeeper/lane_core.hpp"
#include "lanekeeper/sim.hpp"

namespace lanekeeper {

struct RunConfig {
  // model geometry: a named preset ("tusimple", "culane") or a config
  // file path, optionally overridden by inline keys
  std::string model_name = "tusimple";
  ModelConfig model = ModelConfig::tusimple();

  // controller
  double gain = 1.0;
  double speed = 0.5;           // m/s
  double track = 0.5;           // m
  double lookahead_frac = 0.8;

  // simulation world
  Corridor corridor;
  CameraModel camera;
  double sim_dt = 0.02;
  double sim_duration = 10;
  double initial_offset = 0;
  double initial_heading_deg = 0;

  // evaluation
  double deviation_threshold_deg = 15;

  // pipeline
  double target_fps = 0;
  double producer_fps = 0;
  std::uint64_t max_frames = 0;
  double max_duration_s = 0;
  int synth_width = 800;
  int synth_height = 288;
  std::uint64_t synth_frames = 0;

  static RunConfig from_key_values(const KeyValues& kv) {
    KvReader r(kv);
    RunConfig c;

    c.model_name = r.get_string("model", c.model_name);
    c.model = ModelConfig::named(c.model_name);
    c.model.num_cells =
        static_cast<int>(r.get_int("num_cells", c.model.num_cells));
    c.model.num_anchors =
        static_cast<int>(r.get_int("num_anchors", c.model.num_anchors));
    c.model.num_lanes =
        static_cast<int>(r.get_int("num_lanes", c.model.num_lanes));
    c.model.input_width =
        static_cast<int>(r.get_int("input_width", c.model.input_width));
    c.model.input_height =
        static_cast<int>(r.get_int("input_height", c.model.input_height));
    c.model.anchor_rows = r.get_int_list("anchor_rows", c.model.anchor_rows);
    c.model.validate();

    c.gain = r.get_double("gain", c.gain);
    c.speed = r.get_double("speed", c.speed);
    c.track = r.get_double("track", c.track);
    c.lookahead_frac = r.get_double("lookahead_frac", c.lookahead_frac);

    c.corridor.half_width = r.get_double("half_width", c.corridor.half_width);
    c.corridor.length = r.get_double("corridor_length", c.corridor.length);
    c.corridor.curvature = r.get_double("curvature", c.corridor.curvature);
    c.camera.height = r.get_double("cam_height", c.camera.height);
    c.camera.pitch_deg = r.get_double("cam_pitch_deg", c.camera.pitch_deg);
    c.camera.hfov_deg = r.get_double("cam_hfov_deg", c.camera.hfov_deg);
    c.sim_dt = r.get_double("sim_dt", c.sim_dt);
    c.sim_duration = r.get_double("sim_duration", c.sim_duration);
    c.initial_offset = r.get_double("initial_offset", c.initial_offset);
    c.initial_heading_deg =
        r.get_double("initial_heading_deg", c.initial_heading_deg);

    c.deviation_threshold_deg =
        r.get_double("deviation_threshold_deg", c.deviation_threshold_deg);

    c.target_fps = r.get_double("target_fps", c.target_fps);
    c.producer_fps = r.get_double("producer_fps", c.producer_fps);
    c.max_frames =
        static_cast<std::uint64_t>(r.get_int("max_frames", 0));
    c.max_duration_s = r.get_double("max_duration_s", c.max_duration_s);
    c.synth_width = static_cast<int>(r.get_int("synth_width", c.synth_width));
    c.synth_height =
        static_cast<int>(r.get_int("synth_height", c.synth_height));
    c.synth_frames =
        static_cast<std::uint64_t>(r.get_int("synth_frames", 0));

    r.reject_unknown();
    c.validate();
    return c;
  }

  static RunConfig load(const std::string& path) {
    return from_key_values(load_key_values(path));
  }

  void validate() const {
    model.validate();
    if (gain < 0) throw InvalidConfig("gain must be >= 0");
    if (speed < 0) throw InvalidConfig("speed must be >= 0");
    if (track <= 0) throw InvalidConfig("track must be > 0");
    if (!(lookahead_frac > 0 && lookahead_frac < 1))
      throw InvalidConfig("lookahead_frac must be in (0, 1)");
    if (corridor.half_width <= 0)
      throw InvalidConfig("half_width must be > 0");
    if (corridor.length <= 0)
      throw InvalidConfig("corridor_length must be > 0");
    if (camera.height <= 0) throw InvalidConfig("cam_height must be > 0");
    if (!(camera.hfov_deg > 0 && camera.hfov_deg < 180))
      throw InvalidConfig("cam_hfov_deg must be in (0, 180)");
    if (sim_dt <= 0) throw InvalidConfig("sim_dt must be > 0");
    if (sim_duration < sim_dt)
      throw InvalidConfig("sim_duration must be >= sim_dt");
    if (deviation_threshold_deg <= 0)
      throw InvalidConfig("deviation_threshold_deg must be > 0");
    if (target_fps < 0 || producer_fps < 0)
      throw InvalidConfig("fps values must be >= 0");
    if (max_duration_s < 0) throw InvalidConfig("max_duration_s must be >= 0");
    if (synth_width < 2 || synth_height < 2)
      throw InvalidConfig("synthetic frame size must be at least 2x2");
  }
};

}  // namespace lanekeeper
