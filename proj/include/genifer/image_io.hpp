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

#include <string>

#include "genifer/tensor.hpp"

namespace genifer {

// Binary PPM (P6, RGB) and PGM (P5, grayscale) image files. Pixel values are
// float in [0,1] on the tensor side, 8-bit on disk. Writing is byte-stable:
// no timestamps or comments are embedded.

/// Load a .ppm/.pgm file into an (H,W,C) tensor with C = 3 or 1.
Tensor<float> load_image(const std::string& path);

/// Save an (H,W,C) tensor in [0,1]; C = 3 writes P6, C = 1 writes P5.
void save_image(const Tensor<float>& image, const std::string& path);

}  // namespace genifer
