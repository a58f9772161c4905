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

// Ground-truth scene descriptions for synthetic backends and sources.
// Text format, one lane per line:
//   const  <x_norm> <first_anchor> <last_anchor>
//   linear <x_norm_top> <x_norm_bottom> <first_anchor> <last_anchor>
// Lines map to lane slots in order; '#' starts a comment.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lanekeeper/errors.hpp"
#include "lanekeeper/lane_core.hpp"

namespace lanekeeper {

struct SceneLane {
  bool linear = false;
  double x0 = 0.5;
  double x1 = 0.5;
  int first_anchor = 0;
  int last_anchor = 0;

  /// Normalized lane x as a function of normalized row.
  double x_norm_at(double y_norm) const {
    return linear ? x0 + (x1 - x0) * y_norm : x0;
  }

  bool present(int anchor) const {
    return anchor >= first_anchor && anchor <= last_anchor;
  }
};

struct Scene {
  std::vector<SceneLane> lanes;

  static Scene parse(const std::string& text) {
    Scene scene;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      if (auto hash = raw.find('#'); hash != std::string::npos)
        raw.resize(hash);
      std::istringstream line(raw);
      std::string kind;
      if (!(line >> kind)) continue;

      SceneLane lane;
      bool ok = false;
      if (kind == "const") {
        lane.linear = false;
        ok = static_cast<bool>(line >> lane.x0 >> lane.first_anchor >>
                               lane.last_anchor);
        lane.x1 = lane.x0;
      } else if (kind == "linear") {
        lane.linear = true;
        ok = static_cast<bool>(line >> lane.x0 >> lane.x1 >>
                               lane.first_anchor >> lane.last_anchor);
      }
      std::string extra;
      if (!ok || (line >> extra))
        throw InvalidScene("scene line " + std::to_string(line_no) +
                           ": expected 'const <x> <first> <last>' or "
                           "'linear <x0> <x1> <first> <last>'");
      scene.lanes.push_back(lane);
    }
    return scene;
  }

  static Scene load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scene file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  /// Checks spans against the model's anchors and lane x range against
  /// [0,1] at every present anchor.
  void validate(const ModelConfig& config) const {
    if (static_cast<int>(lanes.size()) > config.num_lanes)
      throw InvalidScene("scene has " + std::to_string(lanes.size()) +
                         " lanes, model has " +
                         std::to_string(config.num_lanes) + " slots");
    for (std::size_t i = 0; i < lanes.size(); ++i) {
      const SceneLane& lane = lanes[i];
      if (lane.first_anchor < 0 || lane.last_anchor >= config.num_anchors ||
          lane.first_anchor > lane.last_anchor)
        throw InvalidScene("scene lane " + std::to_string(i) +
                           ": anchor span outside model anchors");
      for (int a = lane.first_anchor; a <= lane.last_anchor; ++a) {
        double y_norm = static_cast<double>(config.anchor_rows[a]) /
                        config.input_height;
        double x = lane.x_norm_at(y_norm);
        if (x < 0.0 || x > 1.0)
          throw InvalidScene("scene lane " + std::to_string(i) +
                             ": x_norm " + std::to_string(x) +
                             " outside [0,1] at anchor " + std::to_string(a));
      }
    }
  }
};

}  // namespace lanekeeper
