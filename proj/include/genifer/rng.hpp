// Copyright 2026 The Genifer Authors
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

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "genifer/tensor.hpp"

namespace genifer {

/// Seeded random source. All randomness in the library flows through this
/// class so that runs are reproducible and the full state round-trips through
/// checkpoints. Gaussian draws use a fresh Box-Muller pair per call (the spare
/// is discarded) so the serialized state is the engine alone.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() {
    // 53 random mantissa bits.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int64_t below(int64_t n) {
    GENIFER_CHECK(n > 0, RangeError, "Rng::below requires n > 0");
    // Rejection sampling keeps the draw unbiased.
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<int64_t>(x % un);
  }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  template <typename Scalar>
  void fill_normal(Tensor<Scalar>& t, double stddev = 1.0, double mean = 0.0) {
    for (Index i = 0; i < t.size(); ++i)
      t[i] = static_cast<Scalar>(mean + stddev * normal());
  }

  template <typename Scalar>
  void fill_uniform(Tensor<Scalar>& t, double lo, double hi) {
    for (Index i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(uniform(lo, hi));
  }

  std::vector<Index> permutation(Index n) {
    std::vector<Index> p(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) p[static_cast<size_t>(i)] = i;
    for (Index i = n - 1; i > 0; --i) std::swap(p[static_cast<size_t>(i)],
                                                p[static_cast<size_t>(below(i + 1))]);
    return p;
  }

  /// Deterministic child stream; distinct tags give independent streams.
  Rng fork(uint64_t tag) {
    uint64_t s = next_u64();
    return Rng(s ^ (tag * 0x9e3779b97f4a7c15ull));
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    GENIFER_CHECK(!is.fail(), IoError, "failed to restore rng state");
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace genifer
