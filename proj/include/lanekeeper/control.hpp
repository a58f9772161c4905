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

// Lane keeping: normalized lateral error at a lookahead row, and the
// proportional steering law for a differential-drive base. The sign law
// is the contract: robot right of the lane center (positive error) turns
// the base left (positive omega, right wheel faster).

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include "lanekeeper/errors.hpp"
#include "lanekeeper/lane_core.hpp"

namespace lanekeeper {

/// Normalized displacement of the robot from the lane center, positive
/// when the robot sits right of center. Invalid when no bracketing lane
/// pair exists.
struct LateralError {
  double value = 0;  // in [-1, 1] when valid
  bool valid = false;
};

/// Differential-drive command. Wheel speeds satisfy
/// v_left = v - omega*track/2 and v_right = v + omega*track/2.
struct SteeringCommand {
  double omega = 0;  // rad/s, positive = turn left (counter-clockwise)
  double v = 0;      // m/s forward
  double v_left = 0;
  double v_right = 0;
  bool blind = false;  // set when steering held straight on invalid error
};

/// Linear interpolation of a polyline's x at row y; nullopt outside the
/// polyline's vertical span.
inline std::optional<double> interpolate_x(const LanePolyline& lane,
                                           double y) {
  const auto& pts = lane.points;
  if (pts.empty() || y < pts.front().y || y > pts.back().y)
    return std::nullopt;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (y > pts[i].y) continue;
    double y0 = pts[i - 1].y, y1 = pts[i].y;
    if (y1 == y0) return pts[i].x;
    double t = (y - y0) / (y1 - y0);
    return pts[i - 1].x + t * (pts[i].x - pts[i - 1].x);
  }
  return pts.back().x;
}

/// Finds the lane pair bracketing the frame centerline at the lookahead
/// row (the nearest lane on each side) and returns the robot's normalized
/// offset from their midpoint.
inline LateralError lateral_error(std::span<const LanePolyline> lanes,
                                  int frame_width, int frame_height,
                                  double lookahead_frac) {
  if (!(lookahead_frac > 0.0 && lookahead_frac < 1.0))
    throw InvalidInput("lookahead_frac must be in (0, 1)");

  double y_star = lookahead_frac * (frame_height - 1);
  double center = frame_width / 2.0;

  std::optional<double> left_x, right_x;
  for (const auto& lane : lanes) {
    auto x = interpolate_x(lane, y_star);
    if (!x) continue;
    if (*x <= center) {
      if (!left_x || *x > *left_x) left_x = *x;
    } else {
      if (!right_x || *x < *right_x) right_x = *x;
    }
  }

  if (!left_x || !right_x) return {};

  double lane_center = 0.5 * (*left_x + *right_x);
  LateralError err;
  err.valid = true;
  err.value = std::clamp((center - lane_center) / center, -1.0, 1.0);
  return err;
}

/// Proportional steering: omega = gain * clamp(error, -1, 1). An invalid
/// error holds the base straight and flags the command blind.
inline SteeringCommand steer(const LateralError& error, double gain, double v,
                             double track) {
  if (gain < 0) throw InvalidInput("gain must be >= 0");
  if (v < 0) throw InvalidInput("speed must be >= 0");
  if (track <= 0) throw InvalidInput("track must be > 0");

  SteeringCommand cmd;
  cmd.v = v;
  if (error.valid) {
    cmd.omega = gain * std::clamp(error.value, -1.0, 1.0);
  } else {
    cmd.omega = 0;
    cmd.blind = true;
  }
  cmd.v_left = v - cmd.omega * track / 2.0;
  cmd.v_right = v + cmd.omega * track / 2.0;
  return cmd;
}

}  // namespace lanekeeper
