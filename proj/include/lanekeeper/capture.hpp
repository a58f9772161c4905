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

// Frame sources and the freshness machinery: a capacity-one mailbox whose
// writes replace unconsumed frames (so the consumer always sees the newest
// capture and memory stays O(1) under any rate mismatch) and a pacing
// governor that caps the consumer at a target rate.

#pragma once

#include <algorithm>
#include <chrono>
#include <concepts>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "lanekeeper/errors.hpp"
#include "lanekeeper/image.hpp"
#include "lanekeeper/lane_core.hpp"
#include "lanekeeper/scene.hpp"
#include "lanekeeper/y4m.hpp"

namespace lanekeeper {

/// A decoded frame with its capture timestamp and per-source sequence.
struct FrameBuffer {
  Image pixels;
  std::uint64_t seq = 0;
  std::chrono::steady_clock::time_point captured_at{};
};

template <class T>
concept StampedFrame = requires(const T& t) {
  { t.seq } -> std::convertible_to<std::uint64_t>;
  {
    t.captured_at
  } -> std::convertible_to<std::chrono::steady_clock::time_point>;
};

struct MailboxStats {
  std::uint64_t puts = 0;
  std::uint64_t takes = 0;
  std::uint64_t drops = 0;
  double last_staleness_ms = 0;
  double max_staleness_ms = 0;
};

/// Single-producer/single-consumer slot holding at most one frame.
/// A put replaces any unconsumed frame (counted as a drop); a take is
/// non-blocking and clears the slot.
template <StampedFrame T>
class LatestMailbox {
 public:
  /// Returns true iff an unconsumed frame was discarded.
  bool put(T frame) {
    std::lock_guard lock(mutex_);
    return store(std::move(frame));
  }

  /// Lockstep variant: waits until the slot is empty, so no frame is ever
  /// dropped. Returns false if stopped while waiting.
  bool put_when_empty(T frame, std::stop_token stop) {
    std::unique_lock lock(mutex_);
    if (!space_.wait(lock, stop, [&] { return !slot_.has_value(); }))
      return false;
    store(std::move(frame));
    return true;
  }

  /// Non-blocking: the freshest unconsumed frame, or nullopt.
  std::optional<T> take() {
    std::optional<T> out;
    {
      std::lock_guard lock(mutex_);
      if (!slot_.has_value()) return std::nullopt;
      out = std::move(slot_);
      slot_.reset();
      ++stats_.takes;
      double staleness =
          std::chrono::duration<double, std::milli>(
              std::chrono::steady_clock::now() - out->captured_at)
              .count();
      stats_.last_staleness_ms = staleness;
      stats_.max_staleness_ms = std::max(stats_.max_staleness_ms, staleness);
    }
    space_.notify_one();
    return out;
  }

  bool empty() const {
    std::lock_guard lock(mutex_);
    return !slot_.has_value();
  }

  MailboxStats stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
  }

 private:
  bool store(T&& frame) {
    if (last_seq_ && frame.seq <= *last_seq_)
      throw OrderingError("mailbox put out of order: seq " +
                          std::to_string(frame.seq) + " after " +
                          std::to_string(*last_seq_));
    last_seq_ = frame.seq;
    bool replaced = slot_.has_value();
    if (replaced) ++stats_.drops;
    slot_ = std::move(frame);
    ++stats_.puts;
    return replaced;
  }

  mutable std::mutex mutex_;
  std::condition_variable_any space_;
  std::optional<T> slot_;
  std::optional<std::uint64_t> last_seq_;
  MailboxStats stats_;
};

/// Paces a loop at a target rate. The first tick is immediate; every
/// later tick blocks until one period after the previous tick, so for n
/// ticks at rate r the elapsed time is at least (n-1)/r. A target of 0
/// disables pacing.
class RateGovernor {
 public:
  explicit RateGovernor(double target_fps) : fps_(target_fps) {
    if (target_fps < 0) throw InvalidConfig("target fps must be >= 0");
  }

  double target_fps() const { return fps_; }
  bool enabled() const { return fps_ > 0; }

  void tick() {
    if (!enabled()) return;
    auto period = std::chrono::duration_cast<
        std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / fps_));
    if (!armed_) {
      armed_ = true;
      next_ = std::chrono::steady_clock::now() + period;
      return;
    }
    std::this_thread::sleep_until(next_);
    next_ = std::chrono::steady_clock::now() + period;
  }

 private:
  double fps_;
  bool armed_ = false;
  std::chrono::steady_clock::time_point next_{};
};

/// Iterator-style frame producer; end of stream is a normal terminal
/// state signalled by nullopt.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<FrameBuffer> next() = 0;
};

struct SourceOptions {
  ModelConfig model = ModelConfig::tusimple();  // geometry for scene specs
  int synth_width = 800;
  int synth_height = 288;
  std::uint64_t synth_frames = 0;  // 0 = unbounded
};

namespace detail {

class DirectorySource final : public FrameSource {
 public:
  explicit DirectorySource(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
      if (entry.is_regular_file() && entry.path().extension() == ".ppm")
        files_.push_back(entry.path().string());
    }
    if (ec)
      throw SourceOpenError("cannot list '" + dir + "': " + ec.message());
    if (files_.empty())
      throw SourceOpenError("no .ppm frames in '" + dir + "'");
    std::sort(files_.begin(), files_.end());
  }

  std::optional<FrameBuffer> next() override {
    if (index_ >= files_.size()) return std::nullopt;
    FrameBuffer frame;
    frame.pixels = read_ppm(files_[index_]);
    frame.seq = index_++;
    frame.captured_at = std::chrono::steady_clock::now();
    return frame;
  }

 private:
  std::vector<std::string> files_;
  std::size_t index_ = 0;
};

class Y4mSource final : public FrameSource {
 public:
  explicit Y4mSource(const std::string& path) try : reader_(path) {
  } catch (const Error& e) {
    throw SourceOpenError(std::string("cannot open y4m stream: ") + e.what());
  }

  std::optional<FrameBuffer> next() override {
    FrameBuffer frame;
    if (!reader_.next(frame.pixels)) return std::nullopt;
    frame.seq = seq_++;
    frame.captured_at = std::chrono::steady_clock::now();
    return frame;
  }

 private:
  Y4mReader reader_;
  std::uint64_t seq_ = 0;
};

class SyntheticSource final : public FrameSource {
 public:
  SyntheticSource(const Scene& scene, const SourceOptions& opts)
      : limit_(opts.synth_frames) {
    scene.validate(opts.model);
    template_ = render(scene, opts);
  }

  std::optional<FrameBuffer> next() override {
    if (limit_ > 0 && seq_ >= limit_) return std::nullopt;
    FrameBuffer frame;
    frame.pixels = template_;
    frame.seq = seq_++;
    frame.captured_at = std::chrono::steady_clock::now();
    return frame;
  }

 private:
  static Image render(const Scene& scene, const SourceOptions& opts) {
    int w = opts.synth_width, h = opts.synth_height;
    Image img = Image::filled(w, h, {38, 40, 44});
    const ModelConfig& m = opts.model;
    for (const SceneLane& lane : scene.lanes) {
      double y_top = static_cast<double>(m.anchor_rows[lane.first_anchor]) /
                     m.input_height * (h - 1);
      double y_bot = static_cast<double>(m.anchor_rows[lane.last_anchor]) /
                     m.input_height * (h - 1);
      for (int y = static_cast<int>(y_top); y <= static_cast<int>(y_bot);
           ++y) {
        double y_norm = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
        int x = static_cast<int>(lane.x_norm_at(y_norm) * (w - 1));
        for (int dx = -1; dx <= 1; ++dx)
          img.set(x + dx, y, {235, 235, 235});
      }
    }
    return img;
  }

  Image template_;
  std::uint64_t limit_;
  std::uint64_t seq_ = 0;
};

}  // namespace detail

/// Opens a frame source from a spec string: a directory of numbered PPM
/// files, a .y4m stream, or "synthetic:<scene-file>" (empty scene file
/// path means a blank road).
inline std::unique_ptr<FrameSource> open_source(
    const std::string& spec, const SourceOptions& opts = {}) {
  if (spec.rfind("synthetic:", 0) == 0) {
    std::string scene_path = spec.substr(10);
    try {
      Scene scene =
          scene_path.empty() ? Scene{} : Scene::load(scene_path);
      return std::make_unique<detail::SyntheticSource>(scene, opts);
    } catch (const SourceOpenError&) {
      throw;
    } catch (const Error& e) {
      throw SourceOpenError(std::string("cannot open synthetic source: ") +
                            e.what());
    }
  }
  std::error_code ec;
  if (std::filesystem::is_directory(spec, ec))
    return std::make_unique<detail::DirectorySource>(spec);
  if (std::filesystem::is_regular_file(spec, ec))
    return std::make_unique<detail::Y4mSource>(spec);
  throw SourceOpenError("no such source '" + spec + "'");
}

}  // namespace lanekeeper
