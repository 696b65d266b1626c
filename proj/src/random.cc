// Copyright 2026 The Fairgrade Authors.
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

#include "fairgrade/random.h"

#include <cmath>
#include <unordered_map>

#include "fairgrade/errors.h"

namespace fairgrade {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double Rng::Uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

uint64_t Rng::UniformInt(uint64_t bound) {
  if (bound == 0) throw ParameterError("UniformInt: bound must be positive");
  // Rejection sampling on the largest multiple of `bound`.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::Normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double x, y, s;
  do {
    x = 2.0 * Uniform01() - 1.0;
    y = 2.0 * Uniform01() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = y * scale;
  has_spare_normal_ = true;
  return x * scale;
}

std::vector<int> Rng::SampleWithoutReplacement(int n, int k) {
  if (k < 0 || k > n) {
    throw ParameterError("cannot sample " + std::to_string(k) +
                         " items without replacement from " +
                         std::to_string(n));
  }
  // Sparse partial Fisher-Yates: only displaced slots are stored, so the cost
  // is O(k) regardless of n.
  std::unordered_map<int, int> displaced;
  displaced.reserve(2 * static_cast<size_t>(k));
  auto slot = [&displaced](int i) {
    auto it = displaced.find(i);
    return it == displaced.end() ? i : it->second;
  };
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(UniformInt(n - i));
    const int picked = slot(j);
    displaced[j] = slot(i);
    out[i] = picked;
  }
  return out;
}

uint64_t DeriveSeed(uint64_t master, std::span<const uint64_t> path) {
  uint64_t h = SplitMix64(master);
  for (uint64_t index : path) h = SplitMix64(h ^ SplitMix64(index + 1));
  return h;
}

}  // namespace fairgrade
