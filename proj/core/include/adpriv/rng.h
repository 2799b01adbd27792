// Copyright 2026 The adpriv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADPRIV_RNG_H_
#define ADPRIV_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace adpriv {

// Deterministic, portable randomness. std::mt19937_64 output is fully pinned
// by the standard; all variate transforms are hand rolled here so that a
// fixed seed reproduces the same draw sequence on every platform. The C++
// <random> distribution classes are implementation defined and must not be
// used anywhere in this project.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double NextUniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); safe as a log() argument.
  double NextUniformOpen() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool NextBernoulli(double p) { return NextUniform() < p; }

  // Unbiased integer in [0, bound) via rejection.
  std::uint64_t NextIndex(std::uint64_t bound);

  // Standard normal via polar Box-Muller (consumes a variable number of
  // uniforms; cached pair member keeps draws amortized).
  double NextGaussian();

 private:
  std::mt19937_64 engine_;
  bool has_cached_gaussian_ = false;
  double cached_gaussian_ = 0.0;
};

// Splittable seed derivation: hashes a master seed with a path of indices so
// that independent components (trials, grid points, users) get decorrelated
// streams. Pure function of its inputs.
std::uint64_t DeriveSeed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// 64-bit finalizer used by DeriveSeed; exposed for hashing elsewhere.
std::uint64_t Mix64(std::uint64_t z);

}  // namespace adpriv

#endif  // ADPRIV_RNG_H_
