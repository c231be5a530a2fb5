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

#include <atomic>
#include <cstdint>
#include <string>

namespace genifer {

inline uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s, uint64_t seed = 1469598103934665603ull) {
  return fnv1a(s.data(), s.size(), seed);
}

/// Live-instance bookkeeping for the model-retention audit: the trainer must
/// never hold more than one previous copy of each model kind. Scalar
/// instantiations share one counter per tag.
template <typename Tag>
class InstanceCounted {
 public:
  InstanceCounted() { add(); }
  InstanceCounted(const InstanceCounted&) { add(); }
  InstanceCounted(InstanceCounted&&) noexcept { add(); }
  InstanceCounted& operator=(const InstanceCounted&) = default;
  InstanceCounted& operator=(InstanceCounted&&) noexcept = default;
  ~InstanceCounted() { --live_(); }

  static int live() { return live_(); }
  static int peak() { return peak_(); }
  static void reset_peak() { peak_() = live_().load(); }

 private:
  static void add() {
    const int v = ++live_();
    int p = peak_();
    while (v > p && !peak_().compare_exchange_weak(p, v)) {
    }
  }
  static std::atomic<int>& live_() {
    static std::atomic<int> v{0};
    return v;
  }
  static std::atomic<int>& peak_() {
    static std::atomic<int> v{0};
    return v;
  }
};

struct ClassifierTag {};
struct GeneratorTag {};
struct DiscriminatorTag {};

}  // namespace genifer
