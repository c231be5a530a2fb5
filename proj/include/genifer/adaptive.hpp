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

#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "genifer/errors.hpp"

namespace genifer {

// Feedback controller for the output-distillation weight. Every `interval`
// batches the weight steps by +-interval/scale toward the configured target
// ratio between the current-task loss and the weighted distillation loss,
// clamped to [0, lambda_max].

struct AdaptiveCoefConfig {
  double rho_target = 0.45;
  int interval = 4;        // batches between updates (I)
  double scale = 10.0;     // update scale (S); step size is interval/scale
  double lambda_max = 100.0;
  double lambda_init = 1.0;
  double eps = 1e-12;      // below this, L_OD counts as zero
};

class AdaptiveCoef {
 public:
  struct Update {
    double rho_mean = 0.0;
    double lambda_after = 0.0;
    long batch_index = 0;
  };

  explicit AdaptiveCoef(AdaptiveCoefConfig cfg) : cfg_(cfg), lambda_(cfg.lambda_init) {
    GENIFER_CHECK(cfg_.interval >= 1, ConfigError, "adaptive coef interval must be >= 1");
    GENIFER_CHECK(cfg_.scale > 0, ConfigError, "adaptive coef scale must be positive");
    GENIFER_CHECK(cfg_.lambda_init >= 0 && cfg_.lambda_init <= cfg_.lambda_max, ConfigError,
                  "lambda_init outside [0, lambda_max]");
  }

  double lambda_od() const { return lambda_; }
  long batch_counter() const { return batch_counter_; }

  /// Record one batch's loss pair using the lambda in effect for that batch.
  /// A vanishing L_OD (or lambda == 0) records the neutral ratio so the
  /// update cadence stays exact.
  void record_batch(double l_curr, double l_od) {
    const double denom = lambda_ * l_od;
    const double ratio =
        (l_od <= cfg_.eps || lambda_ <= 0.0) ? cfg_.rho_target : l_curr / denom;
    window_.push_back(ratio);
    ++batch_counter_;
  }

  /// Call after each record_batch. On every interval boundary the coefficient
  /// steps once and the window clears; otherwise a no-op.
  std::optional<Update> maybe_update() {
    if (batch_counter_ == 0 || batch_counter_ % cfg_.interval != 0) return std::nullopt;
    if (window_.empty()) return std::nullopt;
    double mean = 0.0;
    for (double r : window_) mean += r;
    mean /= static_cast<double>(window_.size());
    window_.clear();
    const double sign = mean > cfg_.rho_target ? 1.0 : (mean < cfg_.rho_target ? -1.0 : 0.0);
    lambda_ += sign * static_cast<double>(cfg_.interval) / cfg_.scale;
    if (lambda_ < 0.0) lambda_ = 0.0;
    if (lambda_ > cfg_.lambda_max) lambda_ = cfg_.lambda_max;
    return Update{mean, lambda_, batch_counter_};
  }

  /// Task boundary: drop stale ratios from the previous regime but keep the
  /// coefficient itself (it carries over between tasks).
  void reset_window() {
    window_.clear();
    batch_counter_ = 0;
  }

 private:
  AdaptiveCoefConfig cfg_;
  double lambda_ = 1.0;
  std::vector<double> window_;
  long batch_counter_ = 0;
};

/// Deterministic lambda trajectory for a given (L_curr, L_OD) trace; one
/// output value per input batch.
inline std::vector<double> simulate_lambda(
    const std::vector<std::pair<double, double>>& trace, const AdaptiveCoefConfig& cfg) {
  AdaptiveCoef coef(cfg);
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& [l_curr, l_od] : trace) {
    coef.record_batch(l_curr, l_od);
    coef.maybe_update();
    out.push_back(coef.lambda_od());
  }
  return out;
}

}  // namespace genifer
