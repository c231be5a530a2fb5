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

#include "genifer/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

namespace genifer {

namespace {

// Skips whitespace and '#' comment lines between header tokens.
int next_header_int(std::istream& in) {
  int c = in.get();
  while (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '#') {
    if (c == '#')
      while (c != '\n' && c != EOF) c = in.get();
    c = in.get();
  }
  int value = 0;
  bool any = false;
  while (c >= '0' && c <= '9') {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  GENIFER_CHECK(any, IoError, "malformed pnm header");
  return value;
}

}  // namespace

Tensor<float> load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  GENIFER_CHECK(in.good(), IoError, "cannot open image " + path);
  char magic[2];
  in.read(magic, 2);
  GENIFER_CHECK(in.good() && magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6'), IoError,
                "unsupported image format in " + path + " (expected binary pgm/ppm)");
  const Index channels = magic[1] == '6' ? 3 : 1;
  const Index w = next_header_int(in);
  const Index h = next_header_int(in);
  const int maxval = next_header_int(in);
  GENIFER_CHECK(maxval > 0 && maxval < 256, IoError, "only 8-bit pnm supported: " + path);
  std::vector<unsigned char> raw(static_cast<size_t>(h * w * channels));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  GENIFER_CHECK(in.gcount() == static_cast<std::streamsize>(raw.size()), IoError,
                "truncated image " + path);
  Tensor<float> img(Shape{h, w, channels});
  const float scale = 1.0f / static_cast<float>(maxval);
  for (Index i = 0; i < img.size(); ++i) img[i] = static_cast<float>(raw[static_cast<size_t>(i)]) * scale;
  return img;
}

void save_image(const Tensor<float>& image, const std::string& path) {
  GENIFER_CHECK(image.rank() == 3, ShapeError, "save_image expects (H,W,C)");
  const Index h = image.dim(0), w = image.dim(1), c = image.dim(2);
  GENIFER_CHECK(c == 1 || c == 3, ShapeError, "save_image supports 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  GENIFER_CHECK(out.good(), IoError, "cannot write image " + path);
  out << (c == 3 ? "P6" : "P5") << "\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> raw(static_cast<size_t>(image.size()));
  for (Index i = 0; i < image.size(); ++i) {
    const float v = std::clamp(image[i], 0.0f, 1.0f);
    raw[static_cast<size_t>(i)] = static_cast<unsigned char>(std::lround(v * 255.0f));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  GENIFER_CHECK(out.good(), IoError, "failed writing image " + path);
}

}  // namespace genifer
