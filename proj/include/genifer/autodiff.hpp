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
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "genifer/tensor.hpp"

namespace genifer {

// Reverse-mode tape. Backward rules are expressed with tape ops themselves,
// so a gradient is an ordinary graph value and can be differentiated again
// (needed by the R1 penalty, whose parameter gradient is second order).

template <typename Scalar>
class Graph;

template <typename Scalar>
struct Var {
  Graph<Scalar>* g = nullptr;
  Index idx = -1;
  bool valid() const { return g != nullptr && idx >= 0; }
  const Tensor<Scalar>& value() const { return g->value(idx); }
  const Shape& shape() const { return value().shape(); }
  Index size() const { return value().size(); }
};

template <typename Scalar>
class Graph {
 public:
  using V = Var<Scalar>;
  using T = Tensor<Scalar>;
  /// acc(parent_ordinal, grad) adds a gradient contribution for one parent.
  using Accumulate = std::function<void(int, V)>;
  /// backward(graph, out, grad_out, acc, needs): build gradient expressions
  /// for every parent with needs[ordinal] set.
  using BackwardFn =
      std::function<void(Graph&, V, V, const Accumulate&, const std::array<bool, 3>&)>;

  struct Node {
    T value;
    std::array<Index, 3> parents{-1, -1, -1};
    int n_parents = 0;
    bool requires_grad = false;
    BackwardFn backward;  // empty for leaves and constants
  };

  Index num_nodes() const { return static_cast<Index>(nodes_.size()); }
  const T& value(Index i) const { return nodes_[static_cast<size_t>(i)].value; }
  bool requires_grad(Index i) const { return nodes_[static_cast<size_t>(i)].requires_grad; }

  V leaf(T value, bool requires_grad = true) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return V{this, num_nodes() - 1};
  }

  V constant(T value) { return leaf(std::move(value), false); }

  V make(T value, std::initializer_list<V> parents, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    for (V p : parents) {
      GENIFER_CHECK(p.g == this, StateError, "op mixes variables from different graphs");
      n.parents[static_cast<size_t>(n.n_parents++)] = p.idx;
      n.requires_grad = n.requires_grad || nodes_[static_cast<size_t>(p.idx)].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return V{this, num_nodes() - 1};
  }

  /// Reverse sweep from a scalar. Returns one gradient per entry of `wrt`
  /// (zeros when the loss does not depend on it). The returned gradients are
  /// graph values; differentiating them again is valid.
  std::vector<V> gradients(V loss, const std::vector<V>& wrt) {
    GENIFER_CHECK(loss.g == this, StateError, "loss from different graph");
    GENIFER_CHECK(loss.size() == 1, ContractError, "gradients() expects a scalar loss");
    const Index start = loss.idx;
    std::vector<Index> adjoint(static_cast<size_t>(start) + 1, -1);
    adjoint[static_cast<size_t>(start)] = constant(T::scalar(Scalar(1))).idx;
    for (Index i = start; i >= 0; --i) {
      const Index gi = adjoint[static_cast<size_t>(i)];
      if (gi < 0) continue;
      // Copy descriptors out: creating adjoint nodes may reallocate nodes_.
      const int np = nodes_[static_cast<size_t>(i)].n_parents;
      if (np == 0 || !nodes_[static_cast<size_t>(i)].backward) continue;
      const std::array<Index, 3> parents = nodes_[static_cast<size_t>(i)].parents;
      std::array<bool, 3> needs{false, false, false};
      for (int k = 0; k < np; ++k)
        needs[static_cast<size_t>(k)] =
            nodes_[static_cast<size_t>(parents[static_cast<size_t>(k)])].requires_grad;
      auto acc = [&](int ord, V gv) {
        const Index p = parents[static_cast<size_t>(ord)];
        if (!nodes_[static_cast<size_t>(p)].requires_grad) return;
        GENIFER_CHECK(gv.value().size() == nodes_[static_cast<size_t>(p)].value.size(),
                      ShapeError, "gradient size mismatch in backward rule");
        Index& slot = adjoint[static_cast<size_t>(p)];
        slot = slot < 0 ? gv.idx : add(V{this, slot}, gv).idx;
      };
      BackwardFn fn = nodes_[static_cast<size_t>(i)].backward;
      fn(*this, V{this, i}, V{this, gi}, acc, needs);
    }
    std::vector<V> out;
    out.reserve(wrt.size());
    for (V w : wrt) {
      GENIFER_CHECK(w.g == this, StateError, "wrt from different graph");
      Index a = w.idx <= start ? adjoint[static_cast<size_t>(w.idx)] : -1;
      out.push_back(a >= 0 ? V{this, a} : constant(T::zeros(w.shape())));
    }
    return out;
  }

  // ---- elementwise ----

  V add(V a, V b) {
    GENIFER_CHECK(a.value().same_shape(b.value()), ShapeError, "add: shape mismatch");
    T out = a.value();
    out.flat() += b.value().flat();
    return make(std::move(out), {a, b},
                [](Graph&, V, V gout, const Accumulate& acc, const std::array<bool, 3>& needs) {
                  if (needs[0]) acc(0, gout);
                  if (needs[1]) acc(1, gout);
                });
  }

  V mul(V a, V b) {
    GENIFER_CHECK(a.value().same_shape(b.value()), ShapeError, "mul: shape mismatch");
    T out = a.value();
    out.flat() *= b.value().flat();
    return make(std::move(out), {a, b},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>& needs) {
                  V a{&g, g.parent(v, 0)}, b{&g, g.parent(v, 1)};
                  if (needs[0]) acc(0, g.mul(gout, b));
                  if (needs[1]) acc(1, g.mul(gout, a));
                });
  }

  /// y = scale * x + shift, elementwise with scalar coefficients.
  V affine(V x, Scalar scale, Scalar shift) {
    T out = x.value();
    out.flat() = out.flat() * scale + shift;
    return make(std::move(out), {x},
                [scale](Graph& g, V, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.affine(gout, scale, Scalar(0)));
                });
  }

  V sub(V a, V b) { return add(a, affine(b, Scalar(-1), Scalar(0))); }

  V square(V x) {
    T out = x.value();
    out.flat() = out.flat().square();
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  V x{&g, g.parent(v, 0)};
                  acc(0, g.mul(gout, g.affine(x, Scalar(2), Scalar(0))));
                });
  }

  V sqrt_(V x) {
    T out = x.value();
    out.flat() = out.flat().sqrt();
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  // d sqrt = 0.5 / sqrt(x) = 0.5 * recip(y)
                  acc(0, g.mul(gout, g.affine(g.reciprocal(v), Scalar(0.5), Scalar(0))));
                });
  }

  V reciprocal(V x) {
    T out = x.value();
    out.flat() = out.flat().inverse();
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.mul(gout, g.affine(g.square(v), Scalar(-1), Scalar(0))));
                });
  }

  V exp_(V x) {
    T out = x.value();
    out.flat() = out.flat().exp();
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.mul(gout, v));
                });
  }

  V log_(V x) {
    T out = x.value();
    out.flat() = out.flat().log();
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.mul(gout, g.reciprocal(V{&g, g.parent(v, 0)})));
                });
  }

  V tanh_(V x) {
    T out = x.value();
    out.flat() = out.flat().tanh();
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.mul(gout, g.affine(g.square(v), Scalar(-1), Scalar(1))));
                });
  }

  V sigmoid_(V x) {
    T out = x.value();
    out.flat() = (Scalar(1) / (Scalar(1) + (-out.flat()).exp()));
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.mul(gout, g.mul(v, g.affine(v, Scalar(-1), Scalar(1)))));
                });
  }

  /// Numerically stable log(1 + e^x).
  V softplus_(V x) {
    T out = x.value();
    for (Index i = 0; i < out.size(); ++i) {
      const Scalar v = out[i];
      out[i] = v > Scalar(0) ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    }
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.mul(gout, g.sigmoid_(V{&g, g.parent(v, 0)})));
                });
  }

  V leaky_relu(V x, Scalar alpha) {
    T out = x.value();
    T mask(out.shape());
    for (Index i = 0; i < out.size(); ++i) {
      const bool pos = out[i] > Scalar(0);
      mask[i] = pos ? Scalar(1) : alpha;
      out[i] = pos ? out[i] : out[i] * alpha;
    }
    auto mask_ptr = std::make_shared<T>(std::move(mask));
    return make(std::move(out), {x},
                [mask_ptr](Graph& g, V, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  // Slope mask is treated as locally constant (exact a.e.).
                  acc(0, g.mul(gout, g.constant(*mask_ptr)));
                });
  }

  V relu(V x) { return leaky_relu(x, Scalar(0)); }

  V abs_(V x) {
    T out = x.value();
    T sign(out.shape());
    for (Index i = 0; i < out.size(); ++i) {
      sign[i] = out[i] < Scalar(0) ? Scalar(-1) : Scalar(1);
      out[i] = std::abs(out[i]);
    }
    auto sign_ptr = std::make_shared<T>(std::move(sign));
    return make(std::move(out), {x},
                [sign_ptr](Graph& g, V, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.mul(gout, g.constant(*sign_ptr)));
                });
  }

  // ---- linear algebra ----

  /// op(a) * op(b) with optional transposes; a, b are viewed via their
  /// canonical 2-d matrix view.
  V matmul(V a, V b, bool ta = false, bool tb = false) {
    const auto& av = a.value();
    const auto& bv = b.value();
    const Index am = ta ? av.cols() : av.rows();
    const Index ak = ta ? av.rows() : av.cols();
    const Index bk = tb ? bv.cols() : bv.rows();
    const Index bn = tb ? bv.rows() : bv.cols();
    GENIFER_CHECK(ak == bk, ShapeError,
                  "matmul: inner dims " + std::to_string(ak) + " vs " + std::to_string(bk));
    T out(Shape{am, bn});
    auto A = av.matrix();
    auto B = bv.matrix();
    auto C = out.matrix();
    if (!ta && !tb) C.noalias() = A * B;
    else if (ta && !tb) C.noalias() = A.transpose() * B;
    else if (!ta && tb) C.noalias() = A * B.transpose();
    else C.noalias() = A.transpose() * B.transpose();
    return make(std::move(out), {a, b},
                [ta, tb](Graph& g, V v, V gout, const Accumulate& acc,
                         const std::array<bool, 3>& needs) {
                  V a{&g, g.parent(v, 0)}, b{&g, g.parent(v, 1)};
                  if (needs[0]) {
                    V ga = ta ? g.matmul(b, gout, tb, true) : g.matmul(gout, b, false, !tb);
                    acc(0, g.reshape(ga, a.shape()));
                  }
                  if (needs[1]) {
                    V gb = tb ? g.matmul(gout, a, true, ta) : g.matmul(a, gout, !ta, false);
                    acc(1, g.reshape(gb, b.shape()));
                  }
                });
  }

  V reshape(V x, Shape shape) {
    T out = x.value().reshaped(shape);
    return make(std::move(out), {x},
                [](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.reshape(gout, g.value(g.parent(v, 0)).shape()));
                });
  }

  // ---- reductions / broadcasts over an (n, m, c) view ----
  // Every reduction in the library is a sum over the middle axis of some
  // (n, m, c) factorization of the flat buffer; rows/cols/global sums are the
  // n=1 / c=1 / n=c=1 special cases.

  V sum_middle(V x, Index n, Index m, Index c) {
    GENIFER_CHECK(n * m * c == x.size(), ShapeError, "sum_middle: view mismatch");
    T out(Shape{n, c});
    const auto& xv = x.value();
    for (Index i = 0; i < n; ++i) {
      typename T::template ConstMatrixMap<> slice(xv.data() + i * m * c, m, c);
      typename T::template MatrixMap<>(out.data() + i * c, 1, c).noalias() =
          slice.colwise().sum();
    }
    return make(std::move(out), {x},
                [n, m, c](Graph& g, V v, V gout, const Accumulate& acc,
                          const std::array<bool, 3>&) {
                  acc(0, g.reshape(g.broadcast_middle(gout, n, m, c),
                                   g.value(g.parent(v, 0)).shape()));
                });
  }

  V broadcast_middle(V s, Index n, Index m, Index c) {
    GENIFER_CHECK(n * c == s.size(), ShapeError, "broadcast_middle: view mismatch");
    T out(Shape{n * m * c});
    const auto& sv = s.value();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j)
        std::memcpy(out.data() + (i * m + j) * c, sv.data() + i * c,
                    sizeof(Scalar) * static_cast<size_t>(c));
    return make(std::move(out), {s},
                [n, m, c](Graph& g, V v, V gout, const Accumulate& acc,
                          const std::array<bool, 3>&) {
                  acc(0, g.reshape(g.sum_middle(gout, n, m, c),
                                   g.value(g.parent(v, 0)).shape()));
                });
  }

  /// x viewed (n, m, c) times s of shape (n, c), broadcast over the middle.
  V mul_bcast_middle(V x, V s, Index n, Index m, Index c) {
    GENIFER_CHECK(n * m * c == x.size() && n * c == s.size(), ShapeError,
                  "mul_bcast_middle: view mismatch");
    T out = x.value();
    const auto& sv = s.value();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) {
        Scalar* o = out.data() + (i * m + j) * c;
        const Scalar* sp = sv.data() + i * c;
        for (Index k = 0; k < c; ++k) o[k] *= sp[k];
      }
    return make(std::move(out), {x, s},
                [n, m, c](Graph& g, V v, V gout, const Accumulate& acc,
                          const std::array<bool, 3>& needs) {
                  V x{&g, g.parent(v, 0)}, s{&g, g.parent(v, 1)};
                  if (needs[0]) acc(0, g.mul_bcast_middle(gout, s, n, m, c));
                  if (needs[1])
                    acc(1, g.reshape(g.sum_middle(g.mul(gout, x), n, m, c), s.shape()));
                });
  }

  V add_bcast_middle(V x, V b, Index n, Index m, Index c) {
    GENIFER_CHECK(n * m * c == x.size() && n * c == b.size(), ShapeError,
                  "add_bcast_middle: view mismatch");
    T out = x.value();
    const auto& bv = b.value();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) {
        Scalar* o = out.data() + (i * m + j) * c;
        const Scalar* bp = bv.data() + i * c;
        for (Index k = 0; k < c; ++k) o[k] += bp[k];
      }
    return make(std::move(out), {x, b},
                [n, m, c](Graph& g, V v, V gout, const Accumulate& acc,
                          const std::array<bool, 3>& needs) {
                  if (needs[0]) acc(0, gout);
                  if (needs[1])
                    acc(1, g.reshape(g.sum_middle(gout, n, m, c),
                                     g.value(g.parent(v, 1)).shape()));
                });
  }

  V sum_all(V x) { return reshape(sum_middle(x, 1, x.size(), 1), Shape{1}); }

  V mean_all(V x) {
    GENIFER_CHECK(x.size() > 0, ContractError, "mean of empty tensor");
    return affine(sum_all(x), Scalar(1) / static_cast<Scalar>(x.size()), Scalar(0));
  }

  /// Row sums of the canonical (rows, cols) view -> shape (rows, 1).
  V sum_cols(V x) { return sum_middle(x, x.value().rows(), x.value().cols(), 1); }

  /// Column sums of the canonical view -> shape (1, cols).
  V sum_rows(V x) { return sum_middle(x, 1, x.value().rows(), x.value().cols()); }

  // ---- indexing ----

  V gather_per_row(V x, std::vector<Index> idx) {
    const Index rows = x.value().rows(), cols = x.value().cols();
    GENIFER_CHECK(static_cast<Index>(idx.size()) == rows, ShapeError,
                  "gather_per_row: one index per row required");
    T out(Shape{rows, 1});
    for (Index i = 0; i < rows; ++i) {
      const Index j = idx[static_cast<size_t>(i)];
      GENIFER_CHECK(j >= 0 && j < cols, RangeError, "gather_per_row: index out of range");
      out[i] = x.value()[i * cols + j];
    }
    auto ip = std::make_shared<std::vector<Index>>(std::move(idx));
    return make(std::move(out), {x},
                [ip, cols](Graph& g, V v, V gout, const Accumulate& acc,
                           const std::array<bool, 3>&) {
                  acc(0, g.reshape(g.scatter_per_row(gout, *ip, cols),
                                   g.value(g.parent(v, 0)).shape()));
                });
  }

  V scatter_per_row(V col, const std::vector<Index>& idx, Index cols) {
    const Index rows = col.value().size();
    T out(Shape{rows, cols});
    for (Index i = 0; i < rows; ++i) out[i * cols + idx[static_cast<size_t>(i)]] = col.value()[i];
    auto ip = std::make_shared<std::vector<Index>>(idx);
    return make(std::move(out), {col},
                [ip](Graph& g, V v, V gout, const Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, g.reshape(g.gather_per_row(gout, *ip),
                                   g.value(g.parent(v, 0)).shape()));
                });
  }

  V slice_cols(V x, Index j0, Index width) {
    const Index rows = x.value().rows(), cols = x.value().cols();
    GENIFER_CHECK(j0 >= 0 && j0 + width <= cols, RangeError, "slice_cols out of range");
    T out(Shape{rows, width});
    for (Index i = 0; i < rows; ++i)
      std::memcpy(out.data() + i * width, x.value().data() + i * cols + j0,
                  sizeof(Scalar) * static_cast<size_t>(width));
    return make(std::move(out), {x},
                [j0, cols](Graph& g, V v, V gout, const Accumulate& acc,
                           const std::array<bool, 3>&) {
                  acc(0, g.reshape(g.pad_cols(gout, j0, cols),
                                   g.value(g.parent(v, 0)).shape()));
                });
  }

  V pad_cols(V x, Index j0, Index total_cols) {
    const Index rows = x.value().rows(), width = x.value().cols();
    T out(Shape{rows, total_cols});
    for (Index i = 0; i < rows; ++i)
      std::memcpy(out.data() + i * total_cols + j0, x.value().data() + i * width,
                  sizeof(Scalar) * static_cast<size_t>(width));
    return make(std::move(out), {x},
                [j0, width](Graph& g, V, V gout, const Accumulate& acc,
                            const std::array<bool, 3>&) {
                  acc(0, g.slice_cols(gout, j0, width));
                });
  }

  V concat_cols(V a, V b) {
    const Index rows = a.value().rows();
    GENIFER_CHECK(rows == b.value().rows(), ShapeError, "concat_cols: row mismatch");
    const Index ca = a.value().cols(), cb = b.value().cols();
    T out(Shape{rows, ca + cb});
    for (Index i = 0; i < rows; ++i) {
      std::memcpy(out.data() + i * (ca + cb), a.value().data() + i * ca,
                  sizeof(Scalar) * static_cast<size_t>(ca));
      std::memcpy(out.data() + i * (ca + cb) + ca, b.value().data() + i * cb,
                  sizeof(Scalar) * static_cast<size_t>(cb));
    }
    return make(std::move(out), {a, b},
                [ca, cb](Graph& g, V v, V gout, const Accumulate& acc,
                         const std::array<bool, 3>& needs) {
                  if (needs[0])
                    acc(0, g.reshape(g.slice_cols(gout, 0, ca),
                                     g.value(g.parent(v, 0)).shape()));
                  if (needs[1])
                    acc(1, g.reshape(g.slice_cols(gout, ca, cb),
                                     g.value(g.parent(v, 1)).shape()));
                });
  }

  // ---- composites ----

  /// Row-wise softmax of the canonical (rows, cols) view, stabilized by
  /// max subtraction (the shift is a row constant, so the function and its
  /// gradient are those of the plain softmax).
  V softmax(V logits) {
    GENIFER_CHECK(logits.value().all_finite(), NumericError, "softmax: non-finite logits");
    V z = sub_rowmax(logits);
    V e = exp_(z);
    V denom = sum_cols(e);
    return mul_bcast_middle(e, reciprocal(denom), e.value().rows(), e.value().cols(), 1);
  }

  V log_softmax(V logits) {
    GENIFER_CHECK(logits.value().all_finite(), NumericError, "log_softmax: non-finite logits");
    V z = sub_rowmax(logits);
    V lse = log_(sum_cols(exp_(z)));
    const Index r = z.value().rows(), c = z.value().cols();
    return add_bcast_middle(z, affine(lse, Scalar(-1), Scalar(0)), r, c, 1);
  }

  V stop_gradient(V x) { return constant(x.value()); }

  Index parent(V v, int ord) const {
    return nodes_[static_cast<size_t>(v.idx)].parents[static_cast<size_t>(ord)];
  }

 private:
  V sub_rowmax(V x) {
    const Index rows = x.value().rows(), cols = x.value().cols();
    T mx(Shape{rows, 1});
    for (Index i = 0; i < rows; ++i)
      mx[i] = typename T::template ConstMatrixMap<>(x.value().data() + i * cols, 1, cols)
                  .maxCoeff();
    // Row max enters as a constant shift; see softmax().
    return add_bcast_middle(x, constant([&] {
                              T neg = mx;
                              neg.flat() = -neg.flat();
                              return neg;
                            }()),
                            rows, cols, 1);
  }

  std::vector<Node> nodes_;
};

}  // namespace genifer
