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
#include <unordered_map>
#include <utility>
#include <vector>

#include "genifer/autodiff.hpp"
#include "genifer/ops_spatial.hpp"
#include "genifer/rng.hpp"

namespace genifer {

template <typename S>
using NamedTensors = std::vector<std::pair<std::string, Tensor<S>*>>;

/// Maps persistent parameter tensors to graph leaves, one leaf per tensor per
/// graph. The trainable flag of the first binding wins; trainers bind a whole
/// model with a single flag.
template <typename S>
class Binder {
 public:
  explicit Binder(Graph<S>& g) : g_(&g) {}

  Var<S> operator()(Tensor<S>& t, bool trainable) {
    auto it = map_.find(&t);
    if (it != map_.end()) return it->second;
    Var<S> v = g_->leaf(t, trainable);
    map_.emplace(&t, v);
    return v;
  }

  /// The leaf previously created for `t`; the tensor must have been bound.
  Var<S> bound(const Tensor<S>& t) const {
    auto it = map_.find(&t);
    GENIFER_CHECK(it != map_.end(), StateError, "tensor was never bound to this graph");
    return it->second;
  }

  bool has(const Tensor<S>& t) const { return map_.count(&t) > 0; }

 private:
  Graph<S>* g_;
  std::unordered_map<const Tensor<S>*, Var<S>> map_;
};

template <typename S>
struct Dense {
  Tensor<S> w;  // (in, out)
  Tensor<S> b;  // (1, out)

  Dense() = default;
  Dense(Index in, Index out, Rng& rng, double gain = std::sqrt(2.0), double bias_init = 0.0) {
    w = Tensor<S>(Shape{in, out});
    rng.fill_normal(w, gain / std::sqrt(static_cast<double>(in)));
    b = Tensor<S>(Shape{1, out}, static_cast<S>(bias_init));
  }

  Index in_dim() const { return w.dim(0); }
  Index out_dim() const { return w.dim(1); }

  Var<S> operator()(Graph<S>& g, Binder<S>& bind, Var<S> x, bool trainable) {
    Var<S> y = g.matmul(x, bind(w, trainable));
    return g.add_bcast_middle(y, bind(b, trainable), 1, y.value().rows(), out_dim());
  }

  void collect(const std::string& prefix, NamedTensors<S>& out) {
    out.emplace_back(prefix + "/w", &w);
    out.emplace_back(prefix + "/b", &b);
  }
};

template <typename S>
struct Conv {
  ConvSpec spec;
  Tensor<S> w;  // (kh, kw, cin, cout)
  Tensor<S> b;  // (1, cout)

  Conv() = default;
  Conv(Index cin, Index cout, ConvSpec cs, Rng& rng, double gain = std::sqrt(2.0)) : spec(cs) {
    w = Tensor<S>(Shape{cs.kh, cs.kw, cin, cout});
    rng.fill_normal(w, gain / std::sqrt(static_cast<double>(cs.kh * cs.kw * cin)));
    b = Tensor<S>(Shape{1, cout});
  }

  Index out_channels() const { return w.dim(3); }

  Var<S> operator()(Graph<S>& g, Binder<S>& bind, Var<S> x, bool trainable) {
    Var<S> y = conv2d(g, x, bind(w, trainable), spec);
    const Index rows = y.size() / out_channels();
    return g.reshape(g.add_bcast_middle(y, bind(b, trainable), 1, rows, out_channels()),
                     y.shape());
  }

  void collect(const std::string& prefix, NamedTensors<S>& out) {
    out.emplace_back(prefix + "/w", &w);
    out.emplace_back(prefix + "/b", &b);
  }
};

/// Appends one column holding the batch mean of per-feature standard
/// deviations: (N,F) -> (N,F+1). Lets the discriminator see batch statistics.
template <typename S>
Var<S> minibatch_stddev(Graph<S>& g, Var<S> x, S eps = S(1e-8)) {
  const Index n = x.value().rows(), f = x.value().cols();
  GENIFER_CHECK(n >= 1, ContractError, "minibatch_stddev on empty batch");
  Var<S> mean = g.affine(g.sum_rows(x), S(1) / static_cast<S>(n), S(0));           // (1,F)
  Var<S> centered = g.add_bcast_middle(x, g.affine(mean, S(-1), S(0)), 1, n, f);   // (N,F)
  Var<S> var = g.affine(g.sum_rows(g.square(centered)), S(1) / static_cast<S>(n), S(0));
  Var<S> stddev = g.sqrt_(g.affine(var, S(1), eps));                               // (1,F)
  Var<S> stat = g.mean_all(stddev);                                                // scalar
  Var<S> col = g.reshape(g.broadcast_middle(stat, 1, n, 1), Shape{n, 1});
  return g.concat_cols(x, col);
}

/// One-hot rows for a list of class ids, as a graph constant.
template <typename S>
Var<S> one_hot(Graph<S>& g, const std::vector<int>& classes, Index class_count) {
  Tensor<S> t(Shape{static_cast<Index>(classes.size()), class_count});
  for (size_t i = 0; i < classes.size(); ++i) {
    GENIFER_CHECK(classes[i] >= 0 && classes[i] < class_count, RangeError,
                  "class id " + std::to_string(classes[i]) + " out of range");
    t[static_cast<Index>(i) * class_count + classes[i]] = S(1);
  }
  return g.constant(std::move(t));
}

}  // namespace genifer
