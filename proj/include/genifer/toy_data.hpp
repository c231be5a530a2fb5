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

#include <array>
#include <cmath>

#include "genifer/data.hpp"

namespace genifer {

// Procedurally generated 32x32 RGB dataset of colored geometric glyphs, up to
// ten classes. Ships in-repo so tests and the desk-scale protocol need no
// download. Every class is symmetric under horizontal flips, which keeps the
// classifier-side flip augmentation label-preserving.

namespace toy {

inline constexpr Index kImageSize = 32;
inline constexpr Index kChannels = 3;
inline constexpr int kMaxClasses = 10;

struct ClassDef {
  const char* name;
  std::array<float, 3> color;
};

inline const std::array<ClassDef, kMaxClasses>& class_defs() {
  static const std::array<ClassDef, kMaxClasses> defs = {{
      {"red_circle", {0.90f, 0.15f, 0.15f}},
      {"green_square", {0.15f, 0.85f, 0.20f}},
      {"blue_triangle", {0.20f, 0.35f, 0.90f}},
      {"yellow_plus", {0.92f, 0.86f, 0.15f}},
      {"magenta_ring", {0.85f, 0.20f, 0.80f}},
      {"cyan_diamond", {0.15f, 0.80f, 0.85f}},
      {"orange_hbars", {0.95f, 0.55f, 0.10f}},
      {"purple_vbars", {0.55f, 0.20f, 0.85f}},
      {"white_cross", {0.92f, 0.92f, 0.92f}},
      {"mint_checker", {0.40f, 0.95f, 0.55f}},
  }};
  return defs;
}

inline bool inside_glyph(int cls, double dx, double dy, double r) {
  const double ax = std::abs(dx), ay = std::abs(dy);
  switch (cls) {
    case 0:  // circle
      return dx * dx + dy * dy <= r * r;
    case 1:  // square
      return ax <= 0.82 * r && ay <= 0.82 * r;
    case 2: {  // upward triangle
      const double t = dy + r;  // 0 at the apex, 2r at the base line
      return t >= 0.0 && t <= 1.8 * r && ax <= 0.55 * t;
    }
    case 3:  // plus
      return (ax <= 0.32 * r && ay <= r) || (ay <= 0.32 * r && ax <= r);
    case 4: {  // ring
      const double d2 = dx * dx + dy * dy;
      return d2 <= r * r && d2 >= 0.33 * r * r;
    }
    case 5:  // diamond
      return ax + ay <= 1.1 * r;
    case 6:  // horizontal bars
      return ax <= r && ay <= r && (static_cast<int>(std::floor((dy + 16.0) / 3.0)) % 2 == 0);
    case 7:  // vertical bars
      return ax <= r && ay <= r && (static_cast<int>(std::floor((dx + 16.0) / 3.0)) % 2 == 0);
    case 8:  // x cross
      return std::abs(ax - ay) <= 0.38 * r && ax <= r && ay <= r;
    case 9:  // checkerboard patch
      return ax <= r && ay <= r &&
             ((static_cast<int>(std::floor((dx + 16.0) / 4.0)) +
               static_cast<int>(std::floor((dy + 16.0) / 4.0))) %
                  2 ==
              0);
    default:
      return false;
  }
}

}  // namespace toy

/// Build the toy dataset: `per_class` samples for each of `class_count`
/// classes, deterministic for a given (seed, split).
template <typename S>
DatasetIndex<S> make_toy_dataset(int class_count, Index per_class, uint64_t seed, Split split) {
  GENIFER_CHECK(class_count >= 1 && class_count <= toy::kMaxClasses, ConfigError,
                "toy dataset supports 1..10 classes");
  GENIFER_CHECK(per_class >= 1, ConfigError, "per_class must be >= 1");
  Rng rng(seed ^ (split == Split::test ? 0x7e57da7aull : 0ull));
  const Index n = static_cast<Index>(class_count) * per_class;
  const Index hw = toy::kImageSize;
  DatasetIndex<S> out;
  out.class_count = class_count;
  out.split = split;
  for (int c = 0; c < class_count; ++c)
    out.class_names.push_back(toy::class_defs()[static_cast<size_t>(c)].name);
  out.images = Tensor<S>(Shape{n, hw, hw, toy::kChannels});
  out.labels.resize(static_cast<size_t>(n));

  Index sample = 0;
  for (int c = 0; c < class_count; ++c) {
    const auto& def = toy::class_defs()[static_cast<size_t>(c)];
    for (Index i = 0; i < per_class; ++i, ++sample) {
      out.labels[static_cast<size_t>(sample)] = c;
      const double cx = hw / 2.0 + rng.uniform(-3.0, 3.0);
      const double cy = hw / 2.0 + rng.uniform(-3.0, 3.0);
      const double r = rng.uniform(7.0, 10.5);
      std::array<double, 3> color;
      for (int k = 0; k < 3; ++k)
        color[static_cast<size_t>(k)] =
            std::clamp(static_cast<double>(def.color[static_cast<size_t>(k)]) +
                           rng.uniform(-0.06, 0.06),
                       0.0, 1.0);
      const double bg = rng.uniform(0.05, 0.12);
      S* img = out.images.data() + sample * hw * hw * toy::kChannels;
      for (Index y = 0; y < hw; ++y) {
        for (Index x = 0; x < hw; ++x) {
          const bool hit = toy::inside_glyph(c, static_cast<double>(x) + 0.5 - cx,
                                             static_cast<double>(y) + 0.5 - cy, r);
          for (Index k = 0; k < 3; ++k) {
            const double noise = rng.uniform(0.0, 0.05);
            const double v = hit ? color[static_cast<size_t>(k)] - noise : bg + noise;
            img[(y * hw + x) * toy::kChannels + k] =
                static_cast<S>(std::clamp(v, 0.0, 1.0));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace genifer
