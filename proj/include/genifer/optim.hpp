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
#include <vector>

#include "genifer/tensor.hpp"

namespace genifer {

/// Adam-family optimizer. `rectified` enables the variance rectification of
/// RAdam (warmup-free adaptive rate); weight decay is decoupled from the
/// gradient (applied directly to the parameters).
struct OptimConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  bool rectified = false;
};

template <typename S>
class AdamOpt {
 public:
  AdamOpt(std::vector<Tensor<S>*> params, OptimConfig cfg)
      : params_(std::move(params)), cfg_(cfg) {
    for (Tensor<S>* p : params_) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }

  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }

  void step(const std::vector<Tensor<S>>& grads) {
    GENIFER_CHECK(grads.size() == params_.size(), ShapeError,
                  "optimizer: gradient/parameter count mismatch");
    ++t_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, t_);
    const double bc2 = 1.0 - std::pow(b2, t_);
    double rect = 1.0;
    bool use_adaptive = true;
    if (cfg_.rectified) {
      const double rho_inf = 2.0 / (1.0 - b2) - 1.0;
      const double rho_t =
          rho_inf - 2.0 * static_cast<double>(t_) * std::pow(b2, t_) / bc2;
      if (rho_t > 4.0) {
        rect = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) /
                         ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
      } else {
        use_adaptive = false;  // warmup phase: un-adapted SGD-with-momentum step
      }
    }
    for (size_t i = 0; i < params_.size(); ++i) {
      Tensor<S>& p = *params_[i];
      const Tensor<S>& gr = grads[i];
      GENIFER_CHECK(p.same_shape(gr), ShapeError, "optimizer: gradient shape mismatch");
      auto& m = m_[i].flat();
      auto& v = v_[i].flat();
      m = m * static_cast<S>(b1) + gr.flat() * static_cast<S>(1.0 - b1);
      v = v * static_cast<S>(b2) + gr.flat().square() * static_cast<S>(1.0 - b2);
      if (cfg_.weight_decay > 0.0)
        p.flat() *= static_cast<S>(1.0 - cfg_.lr * cfg_.weight_decay);
      const auto m_hat = m / static_cast<S>(bc1);
      if (use_adaptive) {
        const auto v_hat = (v / static_cast<S>(bc2)).sqrt() + static_cast<S>(cfg_.eps);
        p.flat() -= static_cast<S>(cfg_.lr * rect) * m_hat / v_hat;
      } else {
        p.flat() -= static_cast<S>(cfg_.lr) * m_hat;
      }
    }
  }

 private:
  std::vector<Tensor<S>*> params_;
  std::vector<Tensor<S>> m_, v_;
  OptimConfig cfg_;
  long t_ = 0;
};

/// Milestone schedule: divide the base rate by `factor` at each milestone
/// (epoch indices, 1-based: reaching epoch e applies every milestone <= e).
inline double scheduled_lr(double base_lr, const std::vector<int>& milestones, double factor,
                           int epoch) {
  double lr = base_lr;
  for (int ms : milestones)
    if (epoch >= ms) lr /= factor;
  return lr;
}

}  // namespace genifer
