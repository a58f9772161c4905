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

#include <catch2/catch_amalgamated.hpp>
#include <random>
#include <thread>

#include "lanekeeper/capture.hpp"
#include "lanekeeper/y4m.hpp"
#include "support/fixtures.hpp"

using namespace lanekeeper;
using Catch::Approx;

namespace {

FrameBuffer tiny_frame(std::uint64_t seq) {
  FrameBuffer f;
  f.pixels = Image::filled(2, 2, {0, 0, 0});
  f.seq = seq;
  f.captured_at = std::chrono::steady_clock::now();
  return f;
}

double ms_between(std::chrono::steady_clock::time_point a,
                  std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

TEST_CASE("mailbox put and take round-trip") {
  LatestMailbox<FrameBuffer> box;
  REQUIRE_FALSE(box.put(tiny_frame(0)));
  auto got = box.take();
  REQUIRE(got.has_value());
  REQUIRE(got->seq == 0);
  REQUIRE_FALSE(box.take().has_value());
}

TEST_CASE("mailbox write replaces an unconsumed frame") {
  LatestMailbox<FrameBuffer> box;
  REQUIRE_FALSE(box.put(tiny_frame(1)));
  REQUIRE(box.put(tiny_frame(2)));
  auto got = box.take();
  REQUIRE(got.has_value());
  REQUIRE(got->seq == 2);
  REQUIRE(box.stats().drops == 1);
}

TEST_CASE("mailbox rejects out-of-order sequence numbers") {
  LatestMailbox<FrameBuffer> box;
  box.put(tiny_frame(5));
  REQUIRE_THROWS_AS(box.put(tiny_frame(5)), OrderingError);
  REQUIRE_THROWS_AS(box.put(tiny_frame(4)), OrderingError);
}

TEST_CASE("a hundred puts against one take keep only the newest") {
  LatestMailbox<FrameBuffer> box;
  for (std::uint64_t i = 0; i < 100; ++i) box.put(tiny_frame(i));
  auto got = box.take();
  REQUIRE(got.has_value());
  REQUIRE(got->seq == 99);
  REQUIRE(box.stats().drops == 99);
  REQUIRE(box.stats().puts == 100);
}

TEST_CASE("mailbox freshness under randomized interleavings") {
  std::mt19937 rng(20260810);
  for (int round = 0; round < 50; ++round) {
    LatestMailbox<FrameBuffer> box;
    std::uint64_t next_seq = 0;
    std::optional<std::uint64_t> pending;  // highest seq put since last take
    for (int op = 0; op < 200; ++op) {
      if (rng() % 3 != 0) {
        box.put(tiny_frame(next_seq));
        pending = next_seq;
        ++next_seq;
      } else {
        auto got = box.take();
        if (pending) {
          REQUIRE(got.has_value());
          REQUIRE(got->seq == *pending);
        } else {
          REQUIRE_FALSE(got.has_value());
        }
        pending.reset();
      }
    }
    auto s = box.stats();
    REQUIRE(s.puts == s.takes + s.drops + (box.empty() ? 0 : 1));
  }
}

TEST_CASE("mailbox staleness stays bounded under producer pressure") {
  LatestMailbox<FrameBuffer> box;
  std::atomic<bool> done{false};

  std::jthread producer([&](std::stop_token st) {
    RateGovernor pace(100.0);
    std::uint64_t seq = 0;
    while (!st.stop_requested()) {
      pace.tick();
      box.put(tiny_frame(seq++));
    }
    done = true;
  });

  RateGovernor consume(9.0);
  auto start = std::chrono::steady_clock::now();
  std::vector<double> staleness;
  while (ms_between(start, std::chrono::steady_clock::now()) < 1500.0) {
    consume.tick();
    auto frame = box.take();
    if (!frame) continue;
    staleness.push_back(
        ms_between(frame->captured_at, std::chrono::steady_clock::now()));
  }
  producer.request_stop();
  producer.join();

  REQUIRE(staleness.size() >= 10);
  for (double s : staleness) REQUIRE(s <= 15.0);
  REQUIRE(box.stats().drops > 0);
}

TEST_CASE("lockstep puts never drop frames") {
  LatestMailbox<FrameBuffer> box;
  constexpr std::uint64_t kFrames = 50;

  std::jthread producer([&](std::stop_token st) {
    for (std::uint64_t i = 0; i < kFrames; ++i)
      if (!box.put_when_empty(tiny_frame(i), st)) return;
  });

  std::vector<std::uint64_t> seen;
  while (seen.size() < kFrames) {
    auto frame = box.take();
    if (frame)
      seen.push_back(frame->seq);
    else
      std::this_thread::sleep_for(std::chrono::microseconds(50));
  }
  producer.join();

  REQUIRE(box.stats().drops == 0);
  for (std::uint64_t i = 0; i < kFrames; ++i) REQUIRE(seen[i] == i);
}

TEST_CASE("governor first tick is immediate") {
  RateGovernor gov(9.0);
  auto start = std::chrono::steady_clock::now();
  gov.tick();
  REQUIRE(ms_between(start, std::chrono::steady_clock::now()) < 5.0);
}

TEST_CASE("governor spaces ticks to the target rate") {
  RateGovernor gov(9.0);
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 10; ++i) gov.tick();
  double elapsed = ms_between(start, std::chrono::steady_clock::now());
  REQUIRE(elapsed >= 9.0 * 1000.0 / 9.0);  // (n-1)/rate
}

TEST_CASE("disabled governor never sleeps") {
  RateGovernor gov(0.0);
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) gov.tick();
  REQUIRE(ms_between(start, std::chrono::steady_clock::now()) < 50.0);
}

TEST_CASE("governor rejects negative rates") {
  REQUIRE_THROWS_AS(RateGovernor(-1.0), InvalidConfig);
}

TEST_CASE("directory sources yield frames in name order") {
  fixtures::TempDir tmp("dirsource");
  // written out of order on purpose; name order must win
  for (int i : {2, 0, 1, 4, 3}) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.ppm", i);
    Image img = Image::filled(4, 2, {static_cast<std::uint8_t>(i), 0, 0});
    write_ppm(img, tmp.file(name));
  }

  auto source = open_source(tmp.str());
  for (int i = 0; i < 5; ++i) {
    auto frame = source->next();
    REQUIRE(frame.has_value());
    REQUIRE(frame->seq == static_cast<std::uint64_t>(i));
    REQUIRE(frame->pixels.pixel(0, 0)[0] == i);
  }
  REQUIRE_FALSE(source->next().has_value());
}

TEST_CASE("unusable source specs raise source-open errors") {
  REQUIRE_THROWS_AS(open_source("/nonexistent/path"), SourceOpenError);

  fixtures::TempDir tmp("emptydir");
  REQUIRE_THROWS_AS(open_source(tmp.str()), SourceOpenError);

  std::ofstream(tmp.file("not_a_stream.y4m")) << "MPEG4YUV nope\n";
  REQUIRE_THROWS_AS(open_source(tmp.file("not_a_stream.y4m")),
                    SourceOpenError);
}

TEST_CASE("y4m source decodes a 30 frame 800x288 stream") {
  fixtures::TempDir tmp("y4m");
  fixtures::write_gray_y4m(tmp.file("clip.y4m"), 30, 800, 288);

  auto source = open_source(tmp.file("clip.y4m"));
  int count = 0;
  while (auto frame = source->next()) {
    REQUIRE(frame->pixels.width == 800);
    REQUIRE(frame->pixels.height == 288);
    const auto* p = frame->pixels.pixel(13, 7);
    auto want = fixtures::luma_at(count, 13, 7);
    REQUIRE(p[0] == want);
    REQUIRE(p[1] == want);
    REQUIRE(p[2] == want);
    ++count;
  }
  REQUIRE(count == 30);
}

TEST_CASE("y4m header without a chroma tag defaults to 4:2:0") {
  fixtures::TempDir tmp("y4mdefault");
  {
    std::ofstream out(tmp.file("min.y4m"), std::ios::binary);
    out << "YUV4MPEG2 W4 H4 F30:1\nFRAME\n";
    out << std::string(16, static_cast<char>(77));  // Y
    out << std::string(4, static_cast<char>(128));  // U
    out << std::string(4, static_cast<char>(128));  // V
  }
  Y4mReader reader(tmp.file("min.y4m"));
  REQUIRE(reader.chroma() == Y4mReader::Chroma::C420);
  REQUIRE(reader.fps() == Approx(30.0));
  Image img;
  REQUIRE(reader.next(img));
  REQUIRE(img.pixel(1, 1)[0] == 77);
  REQUIRE(img.pixel(1, 1)[1] == 77);
}

TEST_CASE("y4m 4:4:4 chroma converts with bt601 coefficients") {
  fixtures::TempDir tmp("y4m444");
  fixtures::YuvFrame f;
  int w = 8, h = 4;
  f.y.assign(static_cast<std::size_t>(w) * h, 120);
  f.u.assign(static_cast<std::size_t>(w) * h, 90);
  f.v.assign(static_cast<std::size_t>(w) * h, 200);
  fixtures::write_y4m(tmp.file("color.y4m"), w, h, {f}, "444");

  Y4mReader reader(tmp.file("color.y4m"));
  REQUIRE(reader.chroma() == Y4mReader::Chroma::C444);
  Image img;
  REQUIRE(reader.next(img));

  // independent scalar conversion
  double Y = 120, U = 90, V = 200;
  auto clamp8 = [](double c) {
    return static_cast<int>(std::llround(std::min(255.0, std::max(0.0, c))));
  };
  int r = clamp8(Y + 1.402 * (V - 128));
  int g = clamp8(Y - 0.344136 * (U - 128) - 0.714136 * (V - 128));
  int b = clamp8(Y + 1.772 * (U - 128));
  const auto* p = img.pixel(3, 2);
  REQUIRE(std::abs(p[0] - r) <= 1);
  REQUIRE(std::abs(p[1] - g) <= 1);
  REQUIRE(std::abs(p[2] - b) <= 1);
  REQUIRE_FALSE(reader.next(img));
}

TEST_CASE("y4m reader reports truncation with a byte offset") {
  fixtures::TempDir tmp("y4mtrunc");
  fixtures::write_gray_y4m(tmp.file("clip.y4m"), 3, 16, 8);

  auto full = fixtures::read_file(tmp.file("clip.y4m"));
  std::ofstream(tmp.file("cut.y4m"), std::ios::binary)
      << full.substr(0, full.size() - 40);

  Y4mReader reader(tmp.file("cut.y4m"));
  Image img;
  REQUIRE(reader.next(img));
  REQUIRE(reader.next(img));
  try {
    reader.next(img);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.byte_offset() > 0);
    REQUIRE(e.byte_offset() <= full.size());
  }
}

TEST_CASE("y4m reader rejects unsupported chroma") {
  fixtures::TempDir tmp("y4mchroma");
  fixtures::YuvFrame f;
  f.y.assign(16, 0);
  f.u.assign(8, 128);
  f.v.assign(8, 128);
  fixtures::write_y4m(tmp.file("c422.y4m"), 4, 4, {f}, "422");
  REQUIRE_THROWS_AS(Y4mReader(tmp.file("c422.y4m")), ParseError);
}

TEST_CASE("synthetic sources render the scene and honor frame limits") {
  fixtures::TempDir tmp("synth");
  {
    std::ofstream out(tmp.file("lane.scene"));
    out << "const 0.5 0 55\n";
  }
  SourceOptions opts;
  opts.synth_frames = 4;
  auto source = open_source("synthetic:" + tmp.file("lane.scene"), opts);

  int count = 0;
  while (auto frame = source->next()) {
    REQUIRE(frame->pixels.width == opts.synth_width);
    REQUIRE(frame->pixels.height == opts.synth_height);
    // lane stroke present mid-frame
    REQUIRE(frame->pixels.pixel(399, 200)[0] > 200);
    ++count;
  }
  REQUIRE(count == 4);

  REQUIRE_THROWS_AS(open_source("synthetic:" + tmp.file("missing.scene")),
                    SourceOpenError);
}

TEST_CASE("ppm io round-trips and rejects malformed files") {
  fixtures::TempDir tmp("ppm");
  Image img = Image::filled(5, 3, {1, 2, 3});
  img.set(4, 2, {250, 128, 7});
  write_ppm(img, tmp.file("a.ppm"));
  Image back = read_ppm(tmp.file("a.ppm"));
  REQUIRE(back == img);

  std::ofstream(tmp.file("bad.ppm")) << "P5\n1 1\n255\n ";
  REQUIRE_THROWS_AS(read_ppm(tmp.file("bad.ppm")), ParseError);

  std::ofstream(tmp.file("short.ppm"), std::ios::binary) << "P6\n4 4\n255\nxy";
  REQUIRE_THROWS_AS(read_ppm(tmp.file("short.ppm")), ParseError);

  std::ofstream(tmp.file("deep.ppm")) << "P6\n1 1\n65535\n";
  REQUIRE_THROWS_AS(read_ppm(tmp.file("deep.ppm")), ParseError);
}
