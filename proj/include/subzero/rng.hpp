// Copyright 2026 The Subzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded random streams. Every sampler in the library takes an explicit
// 64-bit seed and owns its generator; there is no global RNG state.
//
// Stream contract (frozen by golden tests):
//   * engine: std::mt19937_64 seeded with the 64-bit seed;
//   * uniform doubles: top 53 bits of one engine output, scaled by 2^-53;
//   * standard normals: Marsaglia polar Box-Muller on two uniforms mapped
//     to (-1, 1); the second variate of each accepted pair is cached and
//     returned by the next call;
//   * bounded integers: rejection sampling on the raw 64-bit output.

#ifndef SUBZERO_RNG_HPP_
#define SUBZERO_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace subzero {

// SplitMix64 finalizer. Full avalanche on all 64 input bits.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(mix64(a) ^ (b + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) noexcept {
  return mix64(mix64(a, b), c);
}

// Per-step seeds derived from a run's master seed.
constexpr std::uint64_t step_seed(std::uint64_t master, std::uint64_t t) noexcept {
  return mix64(master, t);
}
constexpr std::uint64_t batch_seed(std::uint64_t master, std::uint64_t t) noexcept {
  return mix64(master, t, 0x42);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }

  double normal();

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Same values as calling normal() out.size() times.
  void fill_normal(std::span<double> out);

  // Fisher-Yates shuffle built on below(); portable across standard libraries.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace subzero

#endif  // SUBZERO_RNG_HPP_
