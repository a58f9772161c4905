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

// Reader for uncompressed YUV4MPEG2 streams, restricted to 4:2:0 and
// 4:4:4 chroma. Planes are converted to RGB with BT.601 full-range
// coefficients (nearest rounding, clamped). A self-describing raw format
// keeps video fixtures free of any codec dependency.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lanekeeper/errors.hpp"
#include "lanekeeper/image.hpp"

namespace lanekeeper {

inline Rgb yuv_to_rgb_bt601(double y, double u, double v) {
  double r = y + 1.402 * (v - 128.0);
  double g = y - 0.344136 * (u - 128.0) - 0.714136 * (v - 128.0);
  double b = y + 1.772 * (u - 128.0);
  auto clamp8 = [](double c) {
    return static_cast<std::uint8_t>(
        std::llround(std::min(255.0, std::max(0.0, c))));
  };
  return {clamp8(r), clamp8(g), clamp8(b)};
}

class Y4mReader {
 public:
  enum class Chroma { C420, C444 };

  explicit Y4mReader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot read '" + path + "'");
    parse_header();
  }

  int width() const { return width_; }
  int height() const { return height_; }
  Chroma chroma() const { return chroma_; }
  double fps() const {
    return fps_den_ > 0 ? static_cast<double>(fps_num_) / fps_den_ : 0.0;
  }

  /// Next frame as RGB, or false at a clean end of stream.
  /// Throws ParseError (with byte offset) on malformed or truncated data.
  bool next(Image& out) {
    std::string line;
    if (!read_line(line)) return false;  // EOF at a frame boundary is fine
    if (line.rfind("FRAME", 0) != 0)
      throw ParseError("'" + path_ + "': expected FRAME marker",
                       offset_ - line.size() - 1);

    std::size_t y_size = static_cast<std::size_t>(width_) * height_;
    std::size_t c_size = chroma_ == Chroma::C420
                             ? static_cast<std::size_t>(width_ / 2) *
                                   (height_ / 2)
                             : y_size;
    y_.resize(y_size);
    u_.resize(c_size);
    v_.resize(c_size);
    read_plane(y_.data(), y_size);
    read_plane(u_.data(), c_size);
    read_plane(v_.data(), c_size);

    out.width = width_;
    out.height = height_;
    out.rgb.resize(3 * y_size);
    int cw = chroma_ == Chroma::C420 ? width_ / 2 : width_;
    for (int y = 0; y < height_; ++y) {
      int cy = chroma_ == Chroma::C420 ? y / 2 : y;
      for (int x = 0; x < width_; ++x) {
        int cx = chroma_ == Chroma::C420 ? x / 2 : x;
        std::size_t ci = static_cast<std::size_t>(cy) * cw + cx;
        Rgb rgb = yuv_to_rgb_bt601(y_[static_cast<std::size_t>(y) * width_ + x],
                                   u_[ci], v_[ci]);
        auto* p = out.pixel(x, y);
        p[0] = rgb[0];
        p[1] = rgb[1];
        p[2] = rgb[2];
      }
    }
    return true;
  }

 private:
  void parse_header() {
    std::string line;
    if (!read_line(line) || line.rfind("YUV4MPEG2", 0) != 0)
      throw ParseError("'" + path_ + "': missing YUV4MPEG2 signature", 0);

    std::string chroma_tag = "420";
    std::size_t pos = 9;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      std::size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      std::string param = line.substr(pos, end - pos);
      pos = end;

      char tag = param[0];
      std::string val = param.substr(1);
      try {
        switch (tag) {
          case 'W':
            width_ = std::stoi(val);
            break;
          case 'H':
            height_ = std::stoi(val);
            break;
          case 'F': {
            auto colon = val.find(':');
            if (colon == std::string::npos) throw std::invalid_argument(val);
            fps_num_ = std::stoi(val.substr(0, colon));
            fps_den_ = std::stoi(val.substr(colon + 1));
            break;
          }
          case 'C':
            chroma_tag = val;
            break;
          case 'I':
          case 'A':
          case 'X':
            break;  // interlace, aspect, extensions: accepted, unused
          default:
            throw std::invalid_argument(param);
        }
      } catch (const std::exception&) {
        throw ParseError("'" + path_ + "': bad header parameter '" + param +
                             "'",
                         0);
      }
    }

    if (width_ < 1 || height_ < 1)
      throw ParseError("'" + path_ + "': header lacks valid W/H", 0);
    if (chroma_tag == "444") {
      chroma_ = Chroma::C444;
    } else if (chroma_tag.rfind("420", 0) == 0) {
      chroma_ = Chroma::C420;  // C420, C420jpeg, C420mpeg2, C420paldv
      if (width_ % 2 || height_ % 2)
        throw ParseError("'" + path_ + "': 4:2:0 needs even dimensions", 0);
    } else {
      throw ParseError("'" + path_ + "': unsupported chroma C" + chroma_tag,
                       0);
    }
  }

  bool read_line(std::string& line) {
    line.clear();
    int c;
    while ((c = in_.get()) != EOF) {
      ++offset_;
      if (c == '\n') return true;
      if (line.size() > 512)
        throw ParseError("'" + path_ + "': unterminated header line",
                         offset_);
      line.push_back(static_cast<char>(c));
    }
    if (!line.empty())
      throw ParseError("'" + path_ + "': stream ends mid-line", offset_);
    return false;
  }

  void read_plane(std::uint8_t* dst, std::size_t n) {
    in_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    auto got = static_cast<std::size_t>(in_.gcount());
    offset_ += got;
    if (got != n)
      throw ParseError("'" + path_ + "': truncated frame data", offset_);
  }

  std::string path_;
  std::ifstream in_;
  std::size_t offset_ = 0;
  int width_ = 0;
  int height_ = 0;
  int fps_num_ = 30;
  int fps_den_ = 1;
  Chroma chroma_ = Chroma::C420;
  std::vector<std::uint8_t> y_, u_, v_;
};

}  // namespace lanekeeper
