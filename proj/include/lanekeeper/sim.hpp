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

// Closed-loop validation without hardware: exact-arc unicycle kinematics,
// a corridor world (straight or constant-curvature centerline), and a
// flat-ground pinhole projection that turns the robot's view of the
// corridor boundaries into the same saturated grids the synthetic backend
// emits. World frame: x forward along the corridor at its start, y to the
// left, headings counter-clockwise.

#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lanekeeper/control.hpp"
#include "lanekeeper/errors.hpp"
#include "lanekeeper/lane_core.hpp"

namespace lanekeeper {

struct RobotState {
  double x = 0;
  double y = 0;
  double heading = 0;  // radians, (-pi, pi]
  double t = 0;        // seconds
};

struct Corridor {
  double half_width = 0.5;  // meters
  double length = 50;        // meters along the centerline
  double curvature = 0;      // 1/meters; 0 = straight, >0 curves left

  bool is_arc() const { return curvature != 0; }

  struct Local {
    double s = 0;       // arc length along the centerline
    double offset = 0;  // signed lateral, positive = left of centerline
  };

  Local locate(double x, double y) const {
    if (!is_arc()) return {x, y};
    double radius = 1.0 / std::abs(curvature);
    double sgn = curvature > 0 ? 1.0 : -1.0;
    double cx = 0, cy = sgn * radius;
    double dx = x - cx, dy = y - cy;
    double dist = std::hypot(dx, dy);
    double psi = std::atan2(dy, dx);
    double psi0 = -sgn * M_PI / 2;  // angle of the corridor start point
    double swept = sgn * (psi - psi0);
    swept = std::fmod(swept, 2 * M_PI);
    if (swept < 0) swept += 2 * M_PI;
    return {radius * swept, sgn * (radius - dist)};
  }

  bool contains(double x, double y) const {
    Local l = locate(x, y);
    return std::abs(l.offset) <= half_width && l.s >= 0 && l.s <= length;
  }
};

struct CameraModel {
  double height = 0.6;     // meters above ground
  double pitch_deg = 15;   // downward tilt
  double hfov_deg = 60;    // horizontal field of view
};

inline double normalize_angle(double a) {
  double r = std::remainder(a, 2 * M_PI);
  return r <= -M_PI ? r + 2 * M_PI : r;
}

/// One kinematic step with exact arc integration: straight when omega is
/// (numerically) zero, otherwise a circular arc of radius v/omega.
inline RobotState step_unicycle(const RobotState& state,
                                const SteeringCommand& cmd, double dt) {
  if (dt <= 0) throw InvalidInput("dt must be > 0");
  if (!std::isfinite(state.x) || !std::isfinite(state.y) ||
      !std::isfinite(state.heading) || !std::isfinite(cmd.v) ||
      !std::isfinite(cmd.omega))
    throw InvalidInput("non-finite state or command");

  RobotState next = state;
  next.t = state.t + dt;
  if (std::abs(cmd.omega) < 1e-9) {
    next.x += cmd.v * dt * std::cos(state.heading);
    next.y += cmd.v * dt * std::sin(state.heading);
    return next;
  }
  double radius = cmd.v / cmd.omega;
  double h0 = state.heading;
  double h1 = state.heading + cmd.omega * dt;
  next.x += radius * (std::sin(h1) - std::sin(h0));
  next.y -= radius * (std::cos(h1) - std::cos(h0));
  next.heading = normalize_angle(h1);
  return next;
}

namespace detail {

struct Projection {
  double fx, cx, cy;
  double sin_pitch, cos_pitch;
  double cam_height;
  int width, height;
};

inline Projection make_projection(const CameraModel& cam,
                                  const ModelConfig& config) {
  Projection p;
  p.width = config.input_width;
  p.height = config.input_height;
  p.cx = (config.input_width - 1) / 2.0;
  p.cy = (config.input_height - 1) / 2.0;
  p.fx = (config.input_width / 2.0) /
         std::tan(cam.hfov_deg * M_PI / 180.0 / 2.0);
  double pitch = cam.pitch_deg * M_PI / 180.0;
  p.sin_pitch = std::sin(pitch);
  p.cos_pitch = std::cos(pitch);
  p.cam_height = cam.height;
  return p;
}

/// Ground geometry of one image row: every ground point seen on row v
/// lies at the same camera-frame forward distance on flat ground.
struct IsoRow {
  double forward;  // robot-frame distance ahead of the camera
  double depth;    // camera-frame z, for the lateral projection
};

inline std::optional<IsoRow> ground_row(const Projection& p, double v) {
  double s = (v - p.cy) / p.fx;
  double denom = s * p.cos_pitch + p.sin_pitch;
  if (denom < 1e-9) return std::nullopt;  // at or above the horizon
  double f = p.cam_height * (p.cos_pitch - s * p.sin_pitch) / denom;
  if (f <= 0) return std::nullopt;
  return IsoRow{f, f * p.cos_pitch + p.cam_height * p.sin_pitch};
}

/// Lateral (robot-frame, left-positive) position of the corridor boundary
/// at signed centerline offset `boundary` where the iso-row line of this
/// anchor crosses it; nullopt when it does not (behind, beyond the end,
/// tangent miss).
inline std::optional<double> boundary_lateral(const Corridor& corridor,
                                              const RobotState& state,
                                              double forward,
                                              double boundary) {
  double sin_h = std::sin(state.heading), cos_h = std::cos(state.heading);
  double ax = state.x + forward * cos_h;
  double ay = state.y + forward * sin_h;

  if (!corridor.is_arc()) {
    if (std::abs(cos_h) < 1e-6) return std::nullopt;
    double l = (boundary - ay) / cos_h;
    double x_along = ax - l * sin_h;
    if (x_along < 0 || x_along > corridor.length) return std::nullopt;
    return l;
  }

  double radius = 1.0 / std::abs(corridor.curvature);
  double sgn = corridor.curvature > 0 ? 1.0 : -1.0;
  double rho = radius - sgn * boundary;
  double ex = ax - 0, ey = ay - sgn * radius;
  double ed = -ex * sin_h + ey * cos_h;  // E . D with D = (-sin, cos)
  double disc = ed * ed - (ex * ex + ey * ey - rho * rho);
  if (disc < 0) return std::nullopt;
  double root = std::sqrt(disc);
  double l1 = -ed + root, l2 = -ed - root;
  double l = std::abs(l1) <= std::abs(l2) ? l1 : l2;

  double px = ax - l * sin_h, py = ay + l * cos_h;
  Corridor::Local at = corridor.locate(px, py);
  if (at.s < 0 || at.s > corridor.length) return std::nullopt;
  return l;
}

}  // namespace detail

/// Projects the corridor boundaries into the camera and emits the same
/// saturated logits the synthetic backend uses: lane slot 0 is the left
/// boundary, slot 1 the right, remaining slots background. Boundaries
/// outside the image at an anchor are background there.
inline LaneGrid synthesize_grid(const RobotState& state,
                                const Corridor& corridor,
                                const CameraModel& camera,
                                const ModelConfig& config) {
  Corridor::Local here = corridor.locate(state.x, state.y);
  if (std::abs(here.offset) > corridor.half_width || here.s < 0 ||
      here.s > corridor.length)
    throw OutOfCorridor("robot at s=" + std::to_string(here.s) +
                        " offset=" + std::to_string(here.offset) +
                        " is outside the corridor");

  detail::Projection proj = detail::make_projection(camera, config);
  LaneGrid grid(config);
  for (int a = 0; a < config.num_anchors; ++a) {
    auto row = detail::ground_row(proj, config.anchor_rows[a]);
    for (int lane = 0; lane < config.num_lanes; ++lane) {
      int cell = -1;
      if (row && lane < 2) {
        double boundary =
            lane == 0 ? corridor.half_width : -corridor.half_width;
        auto lateral =
            detail::boundary_lateral(corridor, state, row->forward, boundary);
        if (lateral) {
          double u = proj.cx - proj.fx * *lateral / row->depth;
          if (u >= 0 && u <= proj.width - 1) {
            cell = static_cast<int>(
                std::llround(u / (proj.width - 1) * (config.num_cells - 1)));
          }
        }
      }
      if (cell >= 0)
        grid.set(cell, a, lane, 20.0f);
      else
        grid.set(config.num_cells, a, lane, 20.0f);
    }
  }
  return grid;
}

struct ClosedLoopParams {
  Corridor corridor;
  CameraModel camera;
  ModelConfig model = ModelConfig::tusimple();
  RobotState initial;
  double gain = 1.0;
  double speed = 0.5;        // m/s
  double track = 0.5;        // m
  double lookahead_frac = 0.8;
  double dt = 0.02;          // s
  double duration = 10;      // s
  double settle_offset = 0.05;   // m
  double settle_window = 0.2;    // trailing fraction of the run
};

struct TrajectoryPoint {
  double t, x, y, heading, offset, omega;
};

struct ClosedLoopResult {
  std::vector<TrajectoryPoint> trajectory;
  double max_abs_offset = 0;
  bool settled = false;
  bool failed = false;
  std::string failure;
};

/// Iterates perceive (synthesize + decode) -> lateral error -> steer ->
/// step. Leaving the corridor ends the run as a failed result rather
/// than an exception.
inline ClosedLoopResult run_closed_loop(const ClosedLoopParams& p) {
  if (p.dt <= 0) throw InvalidInput("dt must be > 0");
  if (p.duration < p.dt) throw InvalidInput("duration must be >= dt");

  ClosedLoopResult result;
  RobotState state = p.initial;
  auto steps = static_cast<std::size_t>(std::llround(p.duration / p.dt));

  for (std::size_t i = 0; i < steps; ++i) {
    Corridor::Local here = p.corridor.locate(state.x, state.y);
    result.max_abs_offset =
        std::max(result.max_abs_offset, std::abs(here.offset));

    LaneGrid grid(p.model);
    try {
      grid = synthesize_grid(state, p.corridor, p.camera, p.model);
    } catch (const OutOfCorridor& e) {
      result.failed = true;
      result.failure = e.what();
      return result;
    }
    auto lanes = decode_grid(grid, p.model.input_width, p.model.input_height);
    LateralError err = lateral_error(lanes, p.model.input_width,
                                     p.model.input_height, p.lookahead_frac);
    SteeringCommand cmd = steer(err, p.gain, p.speed, p.track);

    result.trajectory.push_back(
        {state.t, state.x, state.y, state.heading, here.offset, cmd.omega});
    state = step_unicycle(state, cmd, p.dt);
  }

  auto n = result.trajectory.size();
  auto tail = static_cast<std::size_t>(
      std::llround(p.settle_window * static_cast<double>(n)));
  if (tail > 0 && tail <= n) {
    result.settled = true;
    for (std::size_t i = n - tail; i < n; ++i)
      if (std::abs(result.trajectory[i].offset) >= p.settle_offset) {
        result.settled = false;
        break;
      }
  }
  return result;
}

inline void write_trajectory_csv(std::ostream& out,
                                 const std::vector<TrajectoryPoint>& traj) {
  out << "t,x,y,heading,offset,omega\n";
  char line[160];
  for (const auto& p : traj) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", p.t,
                  p.x, p.y, p.heading, p.offset, p.omega);
    out << line;
  }
}

}  // namespace lanekeeper
