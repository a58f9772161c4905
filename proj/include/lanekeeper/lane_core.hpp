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

// Row-anchor grid decoding: turns the network's classification grid into
// image-space lane polylines.
//
// Grid layout is (cells + 1) x anchors x lanes. Along the cell axis the
// last index is the background class ("no lane crosses this anchor for
// this lane slot"); a lane is present at an anchor iff the argmax over
// all cells-plus-background lands on a real cell. Sub-cell localization
// is the softmax-weighted mean of cell indices over the real cells only,
// mapped linearly onto the frame: x = E/(C-1) * (frame_width-1).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lanekeeper/errors.hpp"
#include "lanekeeper/kv.hpp"

namespace lanekeeper {

struct PixelPoint {
  double x = 0;
  double y = 0;
};

/// Geometry of one trained model: cell grid, row anchors, input raster.
struct ModelConfig {
  int num_cells = 0;    // cells per row, excluding background
  int num_anchors = 0;  // row anchors
  int num_lanes = 0;    // lane slots
  int input_width = 0;
  int input_height = 0;
  std::vector<int> anchor_rows;  // strictly increasing, in [0, input_height)

  void validate() const {
    if (num_cells < 2) throw InvalidConfig("num_cells must be >= 2");
    if (num_anchors < 2) throw InvalidConfig("num_anchors must be >= 2");
    if (num_lanes < 1) throw InvalidConfig("num_lanes must be >= 1");
    if (input_width < 1 || input_height < 1)
      throw InvalidConfig("input dimensions must be positive");
    if (static_cast<int>(anchor_rows.size()) != num_anchors)
      throw InvalidConfig("anchor_rows must list exactly num_anchors rows");
    for (std::size_t i = 0; i < anchor_rows.size(); ++i) {
      if (anchor_rows[i] < 0 || anchor_rows[i] >= input_height)
        throw InvalidConfig("anchor_rows[" + std::to_string(i) +
                            "] outside [0, input_height)");
      if (i > 0 && anchor_rows[i] <= anchor_rows[i - 1])
        throw InvalidConfig("anchor_rows must be strictly increasing");
    }
  }

  std::size_t grid_size() const {
    return static_cast<std::size_t>(num_cells + 1) * num_anchors * num_lanes;
  }

  static ModelConfig tusimple() {
    ModelConfig c;
    c.num_cells = 100;
    c.num_anchors = 56;
    c.num_lanes = 4;
    c.input_width = 800;
    c.input_height = 288;
    c.anchor_rows.resize(56);
    for (int i = 0; i < 56; ++i) c.anchor_rows[i] = 64 + 4 * i;
    return c;
  }

  static ModelConfig culane() {
    ModelConfig c;
    c.num_cells = 200;
    c.num_anchors = 18;
    c.num_lanes = 4;
    c.input_width = 800;
    c.input_height = 288;
    c.anchor_rows = {121, 131, 141, 150, 160, 170, 180, 189, 199,
                     209, 219, 228, 238, 248, 258, 267, 277, 287};
    return c;
  }

  static ModelConfig from_reader(KvReader& r) {
    ModelConfig c;
    c.num_cells = static_cast<int>(r.get_int("num_cells", 0));
    c.num_anchors = static_cast<int>(r.get_int("num_anchors", 0));
    c.num_lanes = static_cast<int>(r.get_int("num_lanes", 0));
    c.input_width = static_cast<int>(r.get_int("input_width", 0));
    c.input_height = static_cast<int>(r.get_int("input_height", 0));
    c.anchor_rows = r.get_int_list("anchor_rows", {});
    c.validate();
    return c;
  }

  static ModelConfig from_key_values(const KeyValues& kv) {
    KvReader r(kv);
    ModelConfig c = from_reader(r);
    r.reject_unknown();
    return c;
  }

  static ModelConfig load(const std::string& path) {
    return from_key_values(load_key_values(path));
  }

  /// Resolves "tusimple", "culane", or a config-file path.
  static ModelConfig named(const std::string& name_or_path) {
    if (name_or_path == "tusimple") return tusimple();
    if (name_or_path == "culane") return culane();
    return load(name_or_path);
  }

  KeyValues to_key_values() const {
    KeyValues kv;
    kv["num_cells"] = std::to_string(num_cells);
    kv["num_anchors"] = std::to_string(num_anchors);
    kv["num_lanes"] = std::to_string(num_lanes);
    kv["input_width"] = std::to_string(input_width);
    kv["input_height"] = std::to_string(input_height);
    std::string rows;
    for (std::size_t i = 0; i < anchor_rows.size(); ++i) {
      if (i) rows += ',';
      rows += std::to_string(anchor_rows[i]);
    }
    kv["anchor_rows"] = rows;
    return kv;
  }

  bool operator==(const ModelConfig&) const = default;
};

/// Raw network output: logits over (cells + background) x anchors x lanes.
class LaneGrid {
 public:
  explicit LaneGrid(ModelConfig config)
      : config_(std::move(config)), logits_(config_.grid_size(), 0.0f) {
    config_.validate();
  }

  LaneGrid(ModelConfig config, std::vector<float> logits)
      : config_(std::move(config)), logits_(std::move(logits)) {
    config_.validate();
    if (logits_.size() != config_.grid_size())
      throw InvalidInput("grid has " + std::to_string(logits_.size()) +
                         " values, config implies " +
                         std::to_string(config_.grid_size()));
  }

  const ModelConfig& config() const { return config_; }
  std::span<const float> logits() const { return logits_; }

  float at(int cls, int anchor, int lane) const {
    return logits_[index(cls, anchor, lane)];
  }
  void set(int cls, int anchor, int lane, float v) {
    logits_[index(cls, anchor, lane)] = v;
  }

  /// All cells-plus-background logits for one (anchor, lane) column.
  std::vector<double> column(int anchor, int lane) const {
    std::vector<double> col(config_.num_cells + 1);
    for (int cls = 0; cls <= config_.num_cells; ++cls)
      col[static_cast<std::size_t>(cls)] = at(cls, anchor, lane);
    return col;
  }

  bool operator==(const LaneGrid&) const = default;

 private:
  std::size_t index(int cls, int anchor, int lane) const {
    return (static_cast<std::size_t>(cls) * config_.num_anchors + anchor) *
               config_.num_lanes +
           lane;
  }

  ModelConfig config_;
  std::vector<float> logits_;
};

/// One detected lane: frame-space points ordered top to bottom plus the
/// total-least-squares direction of the point set.
struct LanePolyline {
  int lane_index = 0;
  std::vector<PixelPoint> points;
  double direction_deg = 0;  // (-90, 90], 0 = vertical
};

struct SoftmaxExpectation {
  std::vector<double> probs;
  double expectation = 0;
};

/// Softmax over the cell logits and the probability-weighted mean of cell
/// indices. Max-subtraction keeps the exponentials in range.
inline SoftmaxExpectation softmax_expectation(std::span<const double> logits) {
  if (logits.size() < 2)
    throw InvalidInput("softmax_expectation needs at least 2 logits");
  for (double v : logits)
    if (!std::isfinite(v)) throw InvalidInput("non-finite logit");

  SoftmaxExpectation out;
  out.probs.resize(logits.size());
  double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.probs[i] = std::exp(logits[i] - max);
    sum += out.probs[i];
  }
  double expectation = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.probs[i] /= sum;
    expectation += static_cast<double>(i) * out.probs[i];
  }
  out.expectation = expectation;
  return out;
}

/// Decodes one (anchor, lane) column of cells-plus-background logits.
/// Returns the frame-space x, or nullopt when the background class wins.
inline std::optional<double> decode_anchor(std::span<const double> column,
                                           const ModelConfig& config,
                                           int frame_width) {
  if (static_cast<int>(column.size()) != config.num_cells + 1)
    throw InvalidInput("column has " + std::to_string(column.size()) +
                       " entries, expected " +
                       std::to_string(config.num_cells + 1));
  for (double v : column)
    if (!std::isfinite(v)) throw InvalidInput("non-finite logit");

  auto argmax = std::max_element(column.begin(), column.end());
  if (argmax - column.begin() == config.num_cells) return std::nullopt;

  auto sm = softmax_expectation(column.first(config.num_cells));
  return sm.expectation / (config.num_cells - 1) * (frame_width - 1);
}

inline double fit_direction(std::span<const PixelPoint> points);

/// Decodes every lane slot of a grid into polylines in frame coordinates.
/// Slots with fewer than two present anchors are dropped.
inline std::vector<LanePolyline> decode_grid(const LaneGrid& grid,
                                             int frame_width,
                                             int frame_height) {
  if (frame_width < 2 || frame_height < 2)
    throw InvalidInput("frame dimensions must be at least 2x2");
  const ModelConfig& cfg = grid.config();

  std::vector<LanePolyline> lanes;
  for (int lane = 0; lane < cfg.num_lanes; ++lane) {
    LanePolyline poly;
    poly.lane_index = lane;
    for (int a = 0; a < cfg.num_anchors; ++a) {
      auto x = decode_anchor(grid.column(a, lane), cfg, frame_width);
      if (!x) continue;
      double y = static_cast<double>(cfg.anchor_rows[a]) / cfg.input_height *
                 (frame_height - 1);
      poly.points.push_back({*x, y});
    }
    if (poly.points.size() < 2) continue;
    poly.direction_deg = fit_direction(poly.points);
    lanes.push_back(std::move(poly));
  }
  return lanes;
}

/// Total-least-squares line fit. Returns the signed angle from the
/// vertical image axis in degrees, range (-90, 90]; a lane whose x grows
/// with y has a positive angle (the spec anchor: (0,0),(100,100),(200,200)
/// fits to +45). TLS rather than x-on-y regression because lanes are
/// near-vertical in image space.
inline double fit_direction(std::span<const PixelPoint> points) {
  if (points.size() < 2)
    throw InsufficientPoints("line fit needs at least 2 points");
  bool all_identical = true;
  for (const auto& p : points)
    if (p.x != points[0].x || p.y != points[0].y) {
      all_identical = false;
      break;
    }
  if (all_identical)
    throw InsufficientPoints("line fit needs 2 distinct points");

  double n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : points) {
    double dx = p.x - mx, dy = p.y - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  // Principal eigenvector of the 2x2 scatter matrix.
  double half_trace = 0.5 * (sxx + syy);
  double half_diff = 0.5 * (sxx - syy);
  double lambda = half_trace + std::hypot(half_diff, sxy);
  double vx = sxy, vy = lambda - sxx;
  if (vx * vx + vy * vy < std::numeric_limits<double>::min()) {
    vx = lambda - syy;
    vy = sxy;
  }
  if (vx * vx + vy * vy < std::numeric_limits<double>::min())
    return 0.0;  // isotropic point cloud, direction undefined; pick vertical

  // Orient the direction down-image so the angle lands in (-90, 90].
  if (vy < 0 || (vy == 0 && vx < 0)) {
    vx = -vx;
    vy = -vy;
  }
  return std::atan2(vx, vy) * 180.0 / M_PI;
}

}  // namespace lanekeeper
