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

// RGB8 raster plus dependency-free PPM (P6) reading/writing and the few
// drawing primitives the overlay sink needs.

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "lanekeeper/errors.hpp"

namespace lanekeeper {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height, row-major

  static Image filled(int w, int h, Rgb color) {
    Image img;
    img.width = w;
    img.height = h;
    img.rgb.resize(static_cast<std::size_t>(3) * w * h);
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
      img.rgb[i] = color[0];
      img.rgb[i + 1] = color[1];
      img.rgb[i + 2] = color[2];
    }
    return img;
  }

  bool empty() const { return width < 1 || height < 1; }

  std::uint8_t* pixel(int x, int y) {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  void set(int x, int y, Rgb color) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    auto* p = pixel(x, y);
    p[0] = color[0];
    p[1] = color[1];
    p[2] = color[2];
  }

  bool operator==(const Image&) const = default;
};

inline void draw_disc(Image& img, double cx, double cy, int radius,
                      Rgb color) {
  int x0 = static_cast<int>(cx) - radius, x1 = static_cast<int>(cx) + radius;
  int y0 = static_cast<int>(cy) - radius, y1 = static_cast<int>(cy) + radius;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= static_cast<double>(radius) * radius)
        img.set(x, y, color);
    }
}

inline void draw_hline(Image& img, int y, Rgb color) {
  for (int x = 0; x < img.width; ++x) img.set(x, y, color);
}

inline std::string ppm_bytes(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

inline void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  auto bytes = ppm_bytes(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path + "'");
}

namespace detail {

// Skips netpbm whitespace and '#' comments, returning the next token.
inline std::string ppm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace detail

inline Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");

  if (detail::ppm_token(in) != "P6")
    throw ParseError("'" + path + "': not a P6 ppm", 0);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(detail::ppm_token(in));
    h = std::stoi(detail::ppm_token(in));
    maxval = std::stoi(detail::ppm_token(in));
  } catch (const std::exception&) {
    throw ParseError("'" + path + "': malformed ppm header",
                     static_cast<std::size_t>(in.tellg()));
  }
  if (w < 1 || h < 1)
    throw ParseError("'" + path + "': bad dimensions",
                     static_cast<std::size_t>(in.tellg()));
  if (maxval != 255)
    throw ParseError("'" + path + "': only maxval 255 is supported",
                     static_cast<std::size_t>(in.tellg()));

  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(3) * w * h);
  auto data_start = static_cast<std::size_t>(in.tellg());
  in.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  if (static_cast<std::size_t>(in.gcount()) != img.rgb.size())
    throw ParseError("'" + path + "': truncated pixel data",
                     data_start + static_cast<std::size_t>(in.gcount()));
  return img;
}

}  // namespace lanekeeper
