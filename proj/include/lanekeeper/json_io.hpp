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

// JSON shapes shared between the CLI, the per-frame metrics stream, and
// the evaluation tooling. nlohmann::json keeps keys sorted, so identical
// inputs serialize to identical bytes.

#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "lanekeeper/errors.hpp"
#include "lanekeeper/lane_core.hpp"

namespace lanekeeper {

using Json = nlohmann::json;

inline Json polyline_to_json(const LanePolyline& lane) {
  Json points = Json::array();
  for (const auto& p : lane.points) points.push_back({p.x, p.y});
  return Json{{"lane_index", lane.lane_index},
              {"direction_deg", lane.direction_deg},
              {"points", points}};
}

inline LanePolyline polyline_from_json(const Json& j) {
  LanePolyline lane;
  lane.lane_index = j.value("lane_index", 0);
  lane.direction_deg = j.value("direction_deg", 0.0);
  for (const auto& p : j.at("points"))
    lane.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return lane;
}

inline Json lanes_to_json(const std::vector<LanePolyline>& lanes) {
  Json out = Json::array();
  for (const auto& lane : lanes) out.push_back(polyline_to_json(lane));
  return out;
}

}  // namespace lanekeeper
