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

#ifndef FAIRGRADE_RANDOM_H_
#define FAIRGRADE_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fairgrade {

// Seedable generator with portable, bit-reproducible draws.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The standard distributions are implementation-defined, so the
// draws below are computed directly from engine output instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform01();

  // Uniform integer on [0, bound); bound must be positive.
  uint64_t UniformInt(uint64_t bound);

  // Standard normal draw (Marsaglia polar method).
  double Normal();

  double Normal(double mean, double stddev) {
    return mean + stddev * Normal();
  }

  // Returns `k` distinct indices from [0, n), uniformly without replacement,
  // in draw order (partial Fisher-Yates).
  std::vector<int> SampleWithoutReplacement(int n, int k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Derives the seed of an independent stream from a master seed and a path of
// indices, e.g. (master, sweep point, graph, replication).
uint64_t DeriveSeed(uint64_t master, std::span<const uint64_t> path);

inline uint64_t DeriveSeed(uint64_t master, uint64_t index) {
  const uint64_t path[] = {index};
  return DeriveSeed(master, path);
}

inline uint64_t DeriveSeed(uint64_t master, uint64_t a, uint64_t b) {
  const uint64_t path[] = {a, b};
  return DeriveSeed(master, path);
}

}  // namespace fairgrade

#endif  // FAIRGRADE_RANDOM_H_
