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

#include <memory>
#include <vector>

#include "genifer/autodiff.hpp"

namespace genifer {

// Spatial ops on channel-last (N,H,W,C) tensors. Convolution is im2col plus
// one batched GEMM. The three conv ops (forward, input-grad, weight-grad) are
// mutually adjoint, so gradients of gradients stay inside the op set.

struct ConvSpec {
  Index kh = 3, kw = 3, stride = 1, pad = 1;
  Index out_dim(Index in, Index k) const { return (in + 2 * pad - k) / stride + 1; }
};

namespace detail {

template <typename S>
void im2col(const Tensor<S>& x, const ConvSpec& cs, Tensor<S>& patches) {
  const Index n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const Index oh = cs.out_dim(h, cs.kh), ow = cs.out_dim(w, cs.kw);
  const Index k = cs.kh * cs.kw * c;
  patches = Tensor<S>(Shape{n * oh * ow, k});
  S* dst = patches.data();
  for (Index in = 0; in < n; ++in) {
    const S* img = x.data() + in * h * w * c;
    for (Index oy = 0; oy < oh; ++oy) {
      for (Index ox = 0; ox < ow; ++ox) {
        for (Index ky = 0; ky < cs.kh; ++ky) {
          const Index iy = oy * cs.stride - cs.pad + ky;
          for (Index kx = 0; kx < cs.kw; ++kx) {
            const Index ix = ox * cs.stride - cs.pad + kx;
            if (iy >= 0 && iy < h && ix >= 0 && ix < w)
              std::memcpy(dst, img + (iy * w + ix) * c, sizeof(S) * static_cast<size_t>(c));
            else
              std::memset(dst, 0, sizeof(S) * static_cast<size_t>(c));
            dst += c;
          }
        }
      }
    }
  }
}

template <typename S>
void col2im(const Tensor<S>& patches, const ConvSpec& cs, Tensor<S>& x) {
  const Index n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const Index oh = cs.out_dim(h, cs.kh), ow = cs.out_dim(w, cs.kw);
  x.flat().setZero();
  const S* src = patches.data();
  for (Index in = 0; in < n; ++in) {
    S* img = x.data() + in * h * w * c;
    for (Index oy = 0; oy < oh; ++oy) {
      for (Index ox = 0; ox < ow; ++ox) {
        for (Index ky = 0; ky < cs.kh; ++ky) {
          const Index iy = oy * cs.stride - cs.pad + ky;
          for (Index kx = 0; kx < cs.kw; ++kx) {
            const Index ix = ox * cs.stride - cs.pad + kx;
            if (iy >= 0 && iy < h && ix >= 0 && ix < w) {
              S* dst = img + (iy * w + ix) * c;
              for (Index ic = 0; ic < c; ++ic) dst[ic] += src[ic];
            }
            src += c;
          }
        }
      }
    }
  }
}

}  // namespace detail

template <typename S>
Var<S> conv2d(Graph<S>& g, Var<S> x, Var<S> w, const ConvSpec& cs);
template <typename S>
Var<S> conv2d_input_grad(Graph<S>& g, Var<S> gy, Var<S> w, Shape x_shape, const ConvSpec& cs);
template <typename S>
Var<S> conv2d_weight_grad(Graph<S>& g, Var<S> x, Var<S> gy, Shape w_shape, const ConvSpec& cs);

/// x: (N,H,W,Cin), w: (kh,kw,Cin,Cout) -> (N,OH,OW,Cout). Bias is applied
/// separately (add_bcast_middle).
template <typename S>
Var<S> conv2d(Graph<S>& g, Var<S> x, Var<S> w, const ConvSpec& cs) {
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  GENIFER_CHECK(xs.size() == 4 && ws.size() == 4, ShapeError, "conv2d: rank-4 inputs required");
  GENIFER_CHECK(xs[3] == ws[2] && ws[0] == cs.kh && ws[1] == cs.kw, ShapeError,
                "conv2d: kernel/channel mismatch " + shape_str(xs) + " vs " + shape_str(ws));
  const Index n = xs[0], oh = cs.out_dim(xs[1], cs.kh), ow = cs.out_dim(xs[2], cs.kw);
  GENIFER_CHECK(oh >= 1 && ow >= 1, ShapeError, "conv2d: spatial size below kernel support");
  const Index cout = ws[3];
  Tensor<S> patches;
  detail::im2col(x.value(), cs, patches);
  Tensor<S> out(Shape{n, oh, ow, cout});
  out.matrix(n * oh * ow, cout).noalias() =
      patches.matrix() * w.value().matrix(cs.kh * cs.kw * xs[3], cout);
  Shape xshape = xs, wshape = ws;
  return g.make(std::move(out), {x, w},
                [cs, xshape, wshape](Graph<S>& gr, Var<S> v, Var<S> gout,
                                     const typename Graph<S>::Accumulate& acc,
                                     const std::array<bool, 3>& needs) {
                  Var<S> x{&gr, gr.parent(v, 0)}, w{&gr, gr.parent(v, 1)};
                  if (needs[0]) acc(0, conv2d_input_grad(gr, gout, w, xshape, cs));
                  if (needs[1]) acc(1, conv2d_weight_grad(gr, x, gout, wshape, cs));
                });
}

template <typename S>
Var<S> conv2d_input_grad(Graph<S>& g, Var<S> gy, Var<S> w, Shape x_shape, const ConvSpec& cs) {
  const auto& ws = w.shape();
  const Index cout = ws[3];
  const Index rows = gy.size() / cout;
  Tensor<S> dpatches(Shape{rows, cs.kh * cs.kw * ws[2]});
  dpatches.matrix().noalias() =
      gy.value().matrix(rows, cout) * w.value().matrix(cs.kh * cs.kw * ws[2], cout).transpose();
  Tensor<S> dx(x_shape);
  detail::col2im(dpatches, cs, dx);
  Shape gy_shape = gy.shape();
  return g.make(std::move(dx), {gy, w},
                [cs, x_shape, gy_shape](Graph<S>& gr, Var<S> v, Var<S> gout,
                                        const typename Graph<S>::Accumulate& acc,
                                        const std::array<bool, 3>& needs) {
                  Var<S> gy{&gr, gr.parent(v, 0)}, w{&gr, gr.parent(v, 1)};
                  if (needs[0]) acc(0, gr.reshape(conv2d(gr, gout, w, cs), gy_shape));
                  if (needs[1]) acc(1, conv2d_weight_grad(gr, gout, gy, w.shape(), cs));
                });
}

template <typename S>
Var<S> conv2d_weight_grad(Graph<S>& g, Var<S> x, Var<S> gy, Shape w_shape, const ConvSpec& cs) {
  Tensor<S> patches;
  detail::im2col(x.value(), cs, patches);
  const Index cout = w_shape[3];
  const Index rows = gy.size() / cout;
  Tensor<S> dw(w_shape);
  dw.matrix(cs.kh * cs.kw * w_shape[2], cout).noalias() =
      patches.matrix().transpose() * gy.value().matrix(rows, cout);
  Shape x_shape = x.shape();
  return g.make(std::move(dw), {x, gy},
                [cs, x_shape](Graph<S>& gr, Var<S> v, Var<S> gout,
                              const typename Graph<S>::Accumulate& acc,
                              const std::array<bool, 3>& needs) {
                  Var<S> x{&gr, gr.parent(v, 0)}, gy{&gr, gr.parent(v, 1)};
                  if (needs[0]) acc(0, conv2d_input_grad(gr, gy, gout, x_shape, cs));
                  if (needs[1]) acc(1, gr.reshape(conv2d(gr, x, gout, cs), gy.shape()));
                });
}

/// Nearest-neighbour 2x upsampling: (N,H,W,C) -> (N,2H,2W,C).
template <typename S>
Var<S> upsample2(Graph<S>& g, Var<S> x) {
  const auto& xs = x.shape();
  GENIFER_CHECK(xs.size() == 4, ShapeError, "upsample2: rank-4 input required");
  const Index n = xs[0], h = xs[1], w = xs[2], c = xs[3];
  Tensor<S> out(Shape{n, 2 * h, 2 * w, c});
  for (Index in = 0; in < n; ++in)
    for (Index y = 0; y < 2 * h; ++y)
      for (Index xx = 0; xx < 2 * w; ++xx)
        std::memcpy(out.data() + ((in * 2 * h + y) * 2 * w + xx) * c,
                    x.value().data() + ((in * h + y / 2) * w + xx / 2) * c,
                    sizeof(S) * static_cast<size_t>(c));
  return g.make(std::move(out), {x},
                [](Graph<S>& gr, Var<S>, Var<S> gout, const typename Graph<S>::Accumulate& acc,
                   const std::array<bool, 3>&) {
                  acc(0, sumpool2(gr, gout));
                });
}

/// 2x2 sum pooling, the adjoint of upsample2: (N,H,W,C) -> (N,H/2,W/2,C).
template <typename S>
Var<S> sumpool2(Graph<S>& g, Var<S> x) {
  const auto& xs = x.shape();
  GENIFER_CHECK(xs.size() == 4 && xs[1] % 2 == 0 && xs[2] % 2 == 0, ShapeError,
                "sumpool2: even spatial dims required");
  const Index n = xs[0], h = xs[1] / 2, w = xs[2] / 2, c = xs[3];
  Tensor<S> out(Shape{n, h, w, c});
  for (Index in = 0; in < n; ++in)
    for (Index y = 0; y < h; ++y)
      for (Index xx = 0; xx < w; ++xx) {
        S* o = out.data() + ((in * h + y) * w + xx) * c;
        for (Index dy = 0; dy < 2; ++dy)
          for (Index dx = 0; dx < 2; ++dx) {
            const S* src =
                x.value().data() + ((in * 2 * h + 2 * y + dy) * 2 * w + 2 * xx + dx) * c;
            for (Index ic = 0; ic < c; ++ic) o[ic] += src[ic];
          }
      }
  return g.make(std::move(out), {x},
                [](Graph<S>& gr, Var<S>, Var<S> gout, const typename Graph<S>::Accumulate& acc,
                   const std::array<bool, 3>&) {
                  acc(0, upsample2(gr, gout));
                });
}

/// Per-sample pixel permutation with zero fill: out[n,p,:] = map[n*P+p] >= 0 ?
/// x[n,map[n*P+p],:] : 0, where P = H*W. Flips, 90-degree rotations and
/// integer translations are all instances; the map is a constant of the op so
/// the transform is differentiable through x (adjoint is scatter-add).
template <typename S>
Var<S> gather_pixels(Graph<S>& g, Var<S> x, std::shared_ptr<const std::vector<Index>> map) {
  const auto& xs = x.shape();
  GENIFER_CHECK(xs.size() == 4, ShapeError, "gather_pixels: rank-4 input required");
  const Index n = xs[0], hw = xs[1] * xs[2], c = xs[3];
  GENIFER_CHECK(static_cast<Index>(map->size()) == n * hw, ShapeError,
                "gather_pixels: map size mismatch");
  Tensor<S> out(xs);
  for (Index in = 0; in < n; ++in)
    for (Index p = 0; p < hw; ++p) {
      const Index srcp = (*map)[static_cast<size_t>(in * hw + p)];
      if (srcp >= 0)
        std::memcpy(out.data() + (in * hw + p) * c, x.value().data() + (in * hw + srcp) * c,
                    sizeof(S) * static_cast<size_t>(c));
    }
  return g.make(std::move(out), {x},
                [map](Graph<S>& gr, Var<S>, Var<S> gout,
                      const typename Graph<S>::Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, scatter_pixels(gr, gout, map));
                });
}

template <typename S>
Var<S> scatter_pixels(Graph<S>& g, Var<S> x, std::shared_ptr<const std::vector<Index>> map) {
  const auto& xs = x.shape();
  const Index n = xs[0], hw = xs[1] * xs[2], c = xs[3];
  Tensor<S> out(xs);
  for (Index in = 0; in < n; ++in)
    for (Index p = 0; p < hw; ++p) {
      const Index srcp = (*map)[static_cast<size_t>(in * hw + p)];
      if (srcp >= 0) {
        S* dst = out.data() + (in * hw + srcp) * c;
        const S* src = x.value().data() + (in * hw + p) * c;
        for (Index ic = 0; ic < c; ++ic) dst[ic] += src[ic];
      }
    }
  return g.make(std::move(out), {x},
                [map](Graph<S>& gr, Var<S>, Var<S> gout,
                      const typename Graph<S>::Accumulate& acc, const std::array<bool, 3>&) {
                  acc(0, gather_pixels(gr, gout, map));
                });
}

}  // namespace genifer
