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

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "genifer/rng.hpp"
#include "genifer/tensor.hpp"

namespace genifer {

enum class Split { train, test };

/// A labeled image collection with images stacked into one (N,H,W,C) tensor,
/// pixel values in [0,1], labels as global class ids in [0, class_count).
template <typename S>
struct DatasetIndex {
  Tensor<S> images;  // (N,H,W,C)
  std::vector<int> labels;
  int class_count = 0;
  std::vector<std::string> class_names;
  Split split = Split::train;

  Index count() const { return images.rank() == 4 ? images.dim(0) : 0; }
  Shape image_shape() const {
    GENIFER_CHECK(images.rank() == 4, ShapeError, "dataset images must be (N,H,W,C)");
    return Shape{images.dim(1), images.dim(2), images.dim(3)};
  }

  void validate() const {
    GENIFER_CHECK(class_count > 0, ConfigError, "dataset has no classes");
    GENIFER_CHECK(static_cast<Index>(labels.size()) == count(), ShapeError,
                  "label count does not match image count");
    for (int y : labels)
      GENIFER_CHECK(y >= 0 && y < class_count, RangeError,
                    "label " + std::to_string(y) + " outside [0, class_count)");
  }

  Tensor<S> image(Index i) const {
    const Shape is = image_shape();
    const Index stride = is[0] * is[1] * is[2];
    Tensor<S> out(is);
    std::memcpy(out.data(), images.data() + i * stride,
                sizeof(S) * static_cast<size_t>(stride));
    return out;
  }
};

/// Ordered, disjoint class partition defining the incremental curriculum.
struct TaskSequence {
  std::vector<std::vector<int>> tasks;  // global class ids per task
  Index first_task_size = 0;
  Index classes_per_task = 0;

  Index num_tasks() const { return static_cast<Index>(tasks.size()); }

  const std::vector<int>& classes_of(Index t) const {  // 1-based task id
    GENIFER_CHECK(t >= 1 && t <= num_tasks(), RangeError,
                  "task id " + std::to_string(t) + " outside [1," +
                      std::to_string(num_tasks()) + "]");
    return tasks[static_cast<size_t>(t - 1)];
  }

  std::vector<int> classes_up_to(Index t) const {
    std::vector<int> out;
    for (Index i = 1; i <= t; ++i) {
      const auto& c = classes_of(i);
      out.insert(out.end(), c.begin(), c.end());
    }
    return out;
  }
};

/// Partition the dataset's classes into T = 1 + (C - first)/per tasks. The
/// class-to-task assignment is a seeded shuffle of the class ids.
template <typename S>
TaskSequence build_task_sequence(const DatasetIndex<S>& index, Index first_task_size,
                                 Index classes_per_task, uint64_t seed) {
  const Index c = index.class_count;
  GENIFER_CHECK(first_task_size >= 1, ConfigError, "first_task_size must be >= 1");
  GENIFER_CHECK(classes_per_task >= 1, ConfigError, "classes_per_task must be >= 1");
  GENIFER_CHECK(first_task_size <= c, ConfigError, "first_task_size exceeds class count");
  GENIFER_CHECK((c - first_task_size) % classes_per_task == 0, ConfigError,
                "class count " + std::to_string(c) + " minus first task size " +
                    std::to_string(first_task_size) + " is not divisible by classes_per_task " +
                    std::to_string(classes_per_task));
  Rng rng(seed);
  const auto perm = rng.permutation(c);
  TaskSequence seq;
  seq.first_task_size = first_task_size;
  seq.classes_per_task = classes_per_task;
  std::vector<int> shuffled(static_cast<size_t>(c));
  for (Index i = 0; i < c; ++i) shuffled[static_cast<size_t>(i)] = static_cast<int>(perm[static_cast<size_t>(i)]);
  Index pos = 0;
  seq.tasks.emplace_back(shuffled.begin(), shuffled.begin() + first_task_size);
  pos = first_task_size;
  while (pos < c) {
    seq.tasks.emplace_back(shuffled.begin() + pos, shuffled.begin() + pos + classes_per_task);
    pos += classes_per_task;
  }
  return seq;
}

/// Deterministic mini-batch iterator over one task's samples. Every epoch is
/// a fresh seeded permutation; the final batch is truncated, never padded.
template <typename S>
class TaskLoader {
 public:
  TaskLoader(const DatasetIndex<S>& index, const TaskSequence& seq, Index task_id,
             Index batch_size, uint64_t seed)
      : index_(&index), batch_size_(batch_size), rng_(seed) {
    GENIFER_CHECK(batch_size >= 1, ConfigError, "batch_size must be >= 1");
    const auto& classes = seq.classes_of(task_id);  // throws RangeError when out of range
    const std::set<int> cls(classes.begin(), classes.end());
    for (Index i = 0; i < index.count(); ++i)
      if (cls.count(index.labels[static_cast<size_t>(i)])) sample_ids_.push_back(i);
    GENIFER_CHECK(!sample_ids_.empty(), StateError,
                  "task " + std::to_string(task_id) + " has no samples");
    new_epoch();
  }

  Index size() const { return static_cast<Index>(sample_ids_.size()); }
  Index batches_per_epoch() const { return (size() + batch_size_ - 1) / batch_size_; }

  /// Fills `images` (B,H,W,C) and global `labels`; false at epoch end.
  bool next(Tensor<S>& images, std::vector<int>& labels) {
    if (cursor_ >= size()) return false;
    const Index b = std::min(batch_size_, size() - cursor_);
    const Shape is = index_->image_shape();
    const Index stride = is[0] * is[1] * is[2];
    images = Tensor<S>(Shape{b, is[0], is[1], is[2]});
    labels.resize(static_cast<size_t>(b));
    for (Index i = 0; i < b; ++i) {
      const Index src = sample_ids_[static_cast<size_t>(order_[static_cast<size_t>(cursor_ + i)])];
      std::memcpy(images.data() + i * stride, index_->images.data() + src * stride,
                  sizeof(S) * static_cast<size_t>(stride));
      labels[static_cast<size_t>(i)] = index_->labels[static_cast<size_t>(src)];
    }
    cursor_ += b;
    return true;
  }

  void new_epoch() {
    order_ = rng_.permutation(size());
    cursor_ = 0;
  }

 private:
  const DatasetIndex<S>* index_;
  Index batch_size_;
  Rng rng_;
  std::vector<Index> sample_ids_;
  std::vector<Index> order_;
  Index cursor_ = 0;
};

/// Per-channel (x - mean) / std with configured constants; accepts (H,W,C) or
/// (N,H,W,C) tensors.
template <typename S>
Tensor<S> normalize_images(const Tensor<S>& images, const std::vector<S>& mean,
                           const std::vector<S>& std_dev) {
  GENIFER_CHECK(images.rank() == 3 || images.rank() == 4, ShapeError,
                "normalize expects (H,W,C) or (N,H,W,C)");
  const Index c = images.dim(images.rank() - 1);
  GENIFER_CHECK(static_cast<Index>(mean.size()) == c &&
                    static_cast<Index>(std_dev.size()) == c,
                ShapeError, "channel count does not match normalization constants");
  for (S s : std_dev) GENIFER_CHECK(s > S(0), ConfigError, "std must be positive");
  Tensor<S> out = images;
  const Index pixels = images.size() / c;
  for (Index p = 0; p < pixels; ++p)
    for (Index k = 0; k < c; ++k)
      out[p * c + k] = (out[p * c + k] - mean[static_cast<size_t>(k)]) /
                       std_dev[static_cast<size_t>(k)];
  return out;
}

template <typename S>
Tensor<S> denormalize_images(const Tensor<S>& images, const std::vector<S>& mean,
                             const std::vector<S>& std_dev) {
  const Index c = images.dim(images.rank() - 1);
  GENIFER_CHECK(static_cast<Index>(mean.size()) == c &&
                    static_cast<Index>(std_dev.size()) == c,
                ShapeError, "channel count does not match normalization constants");
  Tensor<S> out = images;
  const Index pixels = images.size() / c;
  for (Index p = 0; p < pixels; ++p)
    for (Index k = 0; k < c; ++k)
      out[p * c + k] = out[p * c + k] * std_dev[static_cast<size_t>(k)] +
                       mean[static_cast<size_t>(k)];
  return out;
}

/// Restrict a dataset to the given classes (used for incremental test sets).
template <typename S>
DatasetIndex<S> subset_by_classes(const DatasetIndex<S>& index, const std::vector<int>& classes) {
  const std::set<int> keep(classes.begin(), classes.end());
  std::vector<Index> ids;
  for (Index i = 0; i < index.count(); ++i)
    if (keep.count(index.labels[static_cast<size_t>(i)])) ids.push_back(i);
  const Shape is = index.image_shape();
  const Index stride = is[0] * is[1] * is[2];
  DatasetIndex<S> out;
  out.class_count = index.class_count;
  out.class_names = index.class_names;
  out.split = index.split;
  out.images = Tensor<S>(Shape{static_cast<Index>(ids.size()), is[0], is[1], is[2]});
  for (size_t i = 0; i < ids.size(); ++i) {
    std::memcpy(out.images.data() + static_cast<Index>(i) * stride,
                index.images.data() + ids[i] * stride, sizeof(S) * static_cast<size_t>(stride));
    out.labels.push_back(index.labels[static_cast<size_t>(ids[i])]);
  }
  return out;
}

}  // namespace genifer
