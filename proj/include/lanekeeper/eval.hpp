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

// Detected/undetected evaluation and dataset tooling. A frame counts as
// detected when both labeled boundary lanes are matched by detections
// (imperfect localization allowed) and neither matched detection's
// direction deviates beyond the threshold. Ground truth is explicit data:
// JSON lines, one frame per line, each lane given as a reference polyline
// and/or a reference direction.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanekeeper/control.hpp"
#include "lanekeeper/errors.hpp"
#include "lanekeeper/image.hpp"
#include "lanekeeper/json_io.hpp"
#include "lanekeeper/lane_core.hpp"
#include "lanekeeper/y4m.hpp"

namespace lanekeeper {

enum class Verdict { Detected, Undetected };

enum class FailReason { Ok, MissingLeft, MissingRight, DirectionDeviation };

inline const char* to_string(Verdict v) {
  return v == Verdict::Detected ? "detected" : "undetected";
}

inline const char* to_string(FailReason r) {
  switch (r) {
    case FailReason::Ok:
      return "ok";
    case FailReason::MissingLeft:
      return "missing-left";
    case FailReason::MissingRight:
      return "missing-right";
    case FailReason::DirectionDeviation:
      return "direction-deviation";
  }
  return "?";
}

struct FrameVerdict {
  std::string frame_id;
  Verdict verdict = Verdict::Undetected;
  FailReason reason = FailReason::Ok;
};

/// One labeled lane: a reference polyline, a reference direction, or both.
struct TruthLane {
  std::vector<PixelPoint> points;
  std::optional<double> direction_deg;

  bool has_polyline() const { return points.size() >= 2; }

  double resolved_direction() const {
    if (direction_deg) return *direction_deg;
    return fit_direction(points);
  }

  double mean_x() const {
    double sum = 0;
    for (const auto& p : points) sum += p.x;
    return points.empty() ? 0 : sum / static_cast<double>(points.size());
  }
};

struct GroundTruthFrame {
  std::string frame_id;
  std::optional<TruthLane> left;
  std::optional<TruthLane> right;
};

/// Undirected line-angle distance in degrees, in [0, 90].
inline double direction_distance_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

namespace detail {

/// Mean |x| gap between a detection and a truth polyline over the truth
/// rows the detection spans; infinite when they share no rows.
inline double mean_x_distance(const LanePolyline& detection,
                              const TruthLane& truth) {
  double sum = 0;
  int shared = 0;
  for (const auto& p : truth.points) {
    auto x = interpolate_x(detection, p.y);
    if (!x) continue;
    sum += std::abs(*x - p.x);
    ++shared;
  }
  if (shared == 0) return std::numeric_limits<double>::infinity();
  return sum / shared;
}

struct Match {
  int detection = -1;
  double distance = std::numeric_limits<double>::infinity();
};

inline Match match_side(std::span<const LanePolyline> detections,
                        const TruthLane& truth, bool left_side,
                        double gate, int frame_width) {
  Match best;
  if (truth.has_polyline()) {
    for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
      double d = mean_x_distance(detections[i], truth);
      if (d < best.distance) best = {i, d};
    }
    if (best.distance > gate) return {};
    return best;
  }
  // Direction-only label: fall back to side-of-frame assignment, nearest
  // detection to the centerline on the labeled side.
  double center = frame_width / 2.0;
  for (int i = 0; i < static_cast<int>(detections.size()); ++i) {
    double mx = 0;
    for (const auto& p : detections[i].points) mx += p.x;
    mx /= static_cast<double>(detections[i].points.size());
    bool on_side = left_side ? mx < center : mx >= center;
    if (!on_side) continue;
    double d = std::abs(mx - center);
    if (d < best.distance) best = {i, d};
  }
  return best;
}

}  // namespace detail

/// Applies the detected/undetected criterion to one frame: both labeled
/// lanes must be matched (closest detection by mean x-distance, within
/// half the truth lane spacing) and each matched detection's direction
/// must stay within the threshold of the reference. Failure reasons are
/// reported in a fixed order: presence before direction, left before
/// right. A side the truth does not label imposes no requirement.
inline FrameVerdict classify_frame(std::span<const LanePolyline> detections,
                                   const GroundTruthFrame& truth,
                                   double deviation_threshold_deg,
                                   int frame_width, int frame_height) {
  (void)frame_height;
  if (deviation_threshold_deg <= 0)
    throw InvalidInput("deviation threshold must be > 0");
  if (!truth.left && !truth.right)
    throw InvalidGroundTruth("frame '" + truth.frame_id +
                             "' labels neither lane");

  double gate = frame_width / 4.0;
  if (truth.left && truth.right && truth.left->has_polyline() &&
      truth.right->has_polyline())
    gate = std::abs(truth.left->mean_x() - truth.right->mean_x()) / 2.0;

  detail::Match left_match, right_match;
  if (truth.left)
    left_match =
        detail::match_side(detections, *truth.left, true, gate, frame_width);
  if (truth.right)
    right_match = detail::match_side(detections, *truth.right, false, gate,
                                     frame_width);

  // One detection cannot satisfy both sides; the closer side keeps it.
  if (left_match.detection >= 0 &&
      left_match.detection == right_match.detection) {
    if (left_match.distance <= right_match.distance)
      right_match = {};
    else
      left_match = {};
  }

  FrameVerdict verdict;
  verdict.frame_id = truth.frame_id;
  if (truth.left && left_match.detection < 0) {
    verdict.reason = FailReason::MissingLeft;
    return verdict;
  }
  if (truth.right && right_match.detection < 0) {
    verdict.reason = FailReason::MissingRight;
    return verdict;
  }
  for (const auto* side : {&left_match, &right_match}) {
    if (side->detection < 0) continue;
    const TruthLane& t = side == &left_match ? *truth.left : *truth.right;
    double deviation = direction_distance_deg(
        detections[side->detection].direction_deg, t.resolved_direction());
    if (deviation > deviation_threshold_deg) {
      verdict.reason = FailReason::DirectionDeviation;
      return verdict;
    }
  }
  verdict.verdict = Verdict::Detected;
  verdict.reason = FailReason::Ok;
  return verdict;
}

struct TallyReport {
  std::size_t total = 0;
  std::size_t detected = 0;
  std::size_t undetected = 0;
  std::size_t rate_numerator = 0;
  std::size_t rate_denominator = 0;
  double detection_rate = 0;
  std::map<FailReason, std::size_t> reasons;
};

inline TallyReport tally(std::span<const FrameVerdict> verdicts) {
  if (verdicts.empty()) throw EmptyDataset("no verdicts to tally");
  TallyReport report;
  report.total = verdicts.size();
  for (const auto& v : verdicts) {
    if (v.verdict == Verdict::Detected)
      ++report.detected;
    else
      ++report.undetected;
    ++report.reasons[v.reason];
  }
  report.rate_numerator = report.detected;
  report.rate_denominator = report.total;
  report.detection_rate =
      static_cast<double>(report.detected) / static_cast<double>(report.total);
  return report;
}

/// Writes every stride-th frame of a Y4M stream into out_dir as
/// frame_<source-index>.ppm and returns the number written. Frames
/// already written survive a mid-stream parse error.
inline std::size_t extract_frames(const std::string& y4m_path,
                                  const std::string& out_dir, int stride) {
  if (stride < 1) throw InvalidInput("stride must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + out_dir +
                  "': " + ec.message());

  Y4mReader reader(y4m_path);
  Image frame;
  std::size_t index = 0, written = 0;
  while (reader.next(frame)) {
    if (index % static_cast<std::size_t>(stride) == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06zu.ppm", index);
      write_ppm(frame, (std::filesystem::path(out_dir) / name).string());
      ++written;
    }
    ++index;
  }
  return written;
}

inline TruthLane truth_lane_from_json(const Json& j) {
  TruthLane lane;
  if (j.contains("points"))
    for (const auto& p : j.at("points"))
      lane.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (j.contains("direction_deg"))
    lane.direction_deg = j.at("direction_deg").get<double>();
  if (!lane.has_polyline() && !lane.direction_deg)
    throw InvalidGroundTruth(
        "truth lane needs a polyline (>= 2 points) or a direction");
  return lane;
}

/// Ground-truth JSONL: one object per line,
///   {"frame_id": "...", "left": {...}, "right": {...}}
/// with each lane carrying "points" ([[x, y], ...]) and/or
/// "direction_deg".
inline std::vector<GroundTruthFrame> load_ground_truth(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read ground truth '" + path + "'");
  std::vector<GroundTruthFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError("'" + path + "' line " + std::to_string(line_no) +
                           ": " + e.what(),
                       e.byte);
    }
    GroundTruthFrame frame;
    frame.frame_id = j.value("frame_id", "frame_" + std::to_string(line_no));
    if (j.contains("left")) frame.left = truth_lane_from_json(j.at("left"));
    if (j.contains("right")) frame.right = truth_lane_from_json(j.at("right"));
    frames.push_back(std::move(frame));
  }
  return frames;
}

/// Detections JSONL: {"frame_id": "...", "lanes": [<polyline>, ...]}.
inline std::map<std::string, std::vector<LanePolyline>> load_detections(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read detections '" + path + "'");
  std::map<std::string, std::vector<LanePolyline>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError("'" + path + "' line " + std::to_string(line_no) +
                           ": " + e.what(),
                       e.byte);
    }
    std::vector<LanePolyline> lanes;
    for (const auto& lane : j.value("lanes", Json::array()))
      lanes.push_back(polyline_from_json(lane));
    out[j.value("frame_id", "frame_" + std::to_string(line_no))] =
        std::move(lanes);
  }
  return out;
}

}  // namespace lanekeeper
