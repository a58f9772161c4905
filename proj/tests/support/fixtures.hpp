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

// Test fixtures: a scratch directory, an independent Y4M writer, and the
// deterministic luma patterns whose RGB expansion is exact (neutral
// chroma makes R = G = B = Y with no rounding ambiguity).

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    std::mt19937_64 rng(std::random_device{}());
    path_ = base / ("lanekeeper_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

/// Deterministic per-frame luma pattern.
inline std::uint8_t luma_at(int frame, int x, int y) {
  return static_cast<std::uint8_t>((frame * 31 + x * 3 + y * 5) % 256);
}

struct YuvFrame {
  std::vector<std::uint8_t> y, u, v;
};

/// Writes a YUV4MPEG2 stream from explicit planes. Plane sizes must match
/// the chroma tag; this writer is test-local so stream-reader bugs cannot
/// hide behind a shared implementation.
inline void write_y4m(const std::string& path, int w, int h,
                      const std::vector<YuvFrame>& frames,
                      const std::string& chroma = "420",
                      const std::string& fps = "30:1") {
  std::ofstream out(path, std::ios::binary);
  out << "YUV4MPEG2 W" << w << " H" << h << " F" << fps << " Ip A1:1 C"
      << chroma << "\n";
  for (const auto& f : frames) {
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(f.y.data()),
              static_cast<std::streamsize>(f.y.size()));
    out.write(reinterpret_cast<const char*>(f.u.data()),
              static_cast<std::streamsize>(f.u.size()));
    out.write(reinterpret_cast<const char*>(f.v.data()),
              static_cast<std::streamsize>(f.v.size()));
  }
}

/// 4:2:0 stream with the luma pattern and neutral chroma (U = V = 128),
/// so the decoded RGB is exactly (Y, Y, Y).
inline void write_gray_y4m(const std::string& path, int n_frames, int w,
                           int h) {
  std::vector<YuvFrame> frames(n_frames);
  for (int i = 0; i < n_frames; ++i) {
    frames[i].y.resize(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        frames[i].y[static_cast<std::size_t>(y) * w + x] = luma_at(i, x, y);
    frames[i].u.assign(static_cast<std::size_t>(w / 2) * (h / 2), 128);
    frames[i].v.assign(static_cast<std::size_t>(w / 2) * (h / 2), 128);
  }
  write_y4m(path, w, h, frames, "420");
}

/// The exact PPM bytes expected for one gray fixture frame.
inline std::string expected_gray_ppm(int frame, int w, int h) {
  std::string out =
      "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      char c = static_cast<char>(luma_at(frame, x, y));
      out.push_back(c);
      out.push_back(c);
      out.push_back(c);
    }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string out((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return out;
}

}  // namespace fixtures
