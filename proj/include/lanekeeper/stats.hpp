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

#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

namespace lanekeeper {

struct StageStats {
  double mean = 0;
  double p50 = 0;
  double p95 = 0;
  double max = 0;
  std::size_t count = 0;
};

/// Nearest-rank percentile: sorted[ceil(q*n) - 1].
inline double percentile(std::vector<double> sorted_copy, double q) {
  if (sorted_copy.empty()) return 0;
  std::sort(sorted_copy.begin(), sorted_copy.end());
  auto n = sorted_copy.size();
  std::size_t rank = static_cast<std::size_t>(
      std::max(1.0, std::ceil(q * static_cast<double>(n))));
  if (rank > n) rank = n;
  return sorted_copy[rank - 1];
}

inline StageStats summarize(std::span<const double> values) {
  StageStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
  s.max = *std::max_element(v.begin(), v.end());
  s.p50 = percentile(v, 0.50);
  s.p95 = percentile(v, 0.95);
  return s;
}

}  // namespace lanekeeper
