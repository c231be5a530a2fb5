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
#include <functional>
#include <vector>

#include "genifer/autodiff.hpp"

namespace genifer {

// Training losses as pure graph functions. Batch reduction is the arithmetic
// mean everywhere. The distillation loss composes the teacher's K-way softmax
// with the log of the student's joint (K+L)-way softmax restricted to the
// first K logits; that composition is pinned by the unit tests.

template <typename S>
Var<S> softmax_probs(Graph<S>& g, Var<S> logits) {
  return g.softmax(logits);
}

/// Mean over the batch of -sum_{k<K} softmax(old)[k] * log_softmax(new)[k].
/// `old_logits` has K columns, `new_logits` K+L columns, same row count.
template <typename S>
Var<S> output_distillation_loss(Graph<S>& g, Var<S> old_logits, Var<S> new_logits) {
  const Index batch = old_logits.value().rows();
  const Index k = old_logits.value().cols();
  GENIFER_CHECK(k >= 1, ContractError,
                "output distillation requires at least one previous class");
  GENIFER_CHECK(batch >= 1, ContractError, "output distillation on empty batch");
  GENIFER_CHECK(new_logits.value().rows() == batch && new_logits.value().cols() >= k, ShapeError,
                "new logits must cover all previous classes");
  Var<S> q_old = g.softmax(old_logits);
  Var<S> logq_new = g.slice_cols(g.log_softmax(new_logits), 0, k);
  Var<S> per_sample = g.sum_cols(g.mul(q_old, logq_new));
  return g.affine(g.sum_all(per_sample), S(-1) / static_cast<S>(batch), S(0));
}

/// Mean cross-entropy; labels index into the logit columns.
template <typename S>
Var<S> current_task_loss(Graph<S>& g, Var<S> logits, const std::vector<Index>& labels) {
  GENIFER_CHECK(!labels.empty(), ContractError, "cross-entropy on empty batch");
  Var<S> logp = g.gather_per_row(g.log_softmax(logits), labels);
  return g.affine(g.sum_all(logp), S(-1) / static_cast<S>(labels.size()), S(0));
}

template <typename S>
Var<S> classifier_loss(Graph<S>& g, Var<S> curr, Var<S> od, S lambda_od) {
  GENIFER_CHECK(lambda_od >= S(0), ContractError, "lambda_od must be non-negative");
  return g.add(curr, g.affine(od, lambda_od, S(0)));
}

/// Numerically stable scalar softplus, f(x) = log(1 + e^x).
template <typename S>
S softplus(S x) {
  return x > S(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// mean f(fake) + mean f(-real) + r1_term.
template <typename S>
Var<S> discriminator_loss(Graph<S>& g, Var<S> fake_scores, Var<S> real_scores, Var<S> r1_term) {
  GENIFER_CHECK(fake_scores.size() >= 1 && real_scores.size() >= 1, ContractError,
                "discriminator loss on empty batch");
  GENIFER_CHECK(fake_scores.value().all_finite() && real_scores.value().all_finite(),
                NumericError, "discriminator scores must be finite");
  Var<S> fake = g.mean_all(g.softplus_(fake_scores));
  Var<S> real = g.mean_all(g.softplus_(g.affine(real_scores, S(-1), S(0))));
  return g.add(g.add(fake, real), r1_term);
}

template <typename S>
Var<S> discriminator_loss(Graph<S>& g, Var<S> fake_scores, Var<S> real_scores, S r1_term) {
  return discriminator_loss(g, fake_scores, real_scores,
                            g.constant(Tensor<S>::scalar(r1_term)));
}

/// (gamma/2) * mean_batch ||d score / d features||^2. `score_fn` evaluates the
/// discriminator on the graph; `features` must be a differentiable leaf. The
/// result remains differentiable w.r.t. the discriminator parameters.
template <typename S>
Var<S> r1_penalty(Graph<S>& g, const std::function<Var<S>(Graph<S>&, Var<S>)>& score_fn,
                  Var<S> features, S gamma) {
  GENIFER_CHECK(gamma >= S(0), ContractError, "r1 gamma must be non-negative");
  GENIFER_CHECK(g.requires_grad(features.idx), ContractError,
                "r1 penalty needs differentiable features");
  const Index batch = features.shape()[0];
  Var<S> scores = score_fn(g, features);
  Var<S> grad = g.gradients(g.sum_all(scores), {features})[0];
  return g.affine(g.sum_all(g.square(grad)), gamma / (S(2) * static_cast<S>(batch)), S(0));
}

/// mean f(-fake_scores): the non-saturating generator objective.
template <typename S>
Var<S> generator_gan_loss(Graph<S>& g, Var<S> fake_scores) {
  GENIFER_CHECK(fake_scores.size() >= 1, ContractError, "generator loss on empty batch");
  return g.mean_all(g.softplus_(g.affine(fake_scores, S(-1), S(0))));
}

/// Mean absolute pixel difference between current and frozen-generator images
/// produced from the same (z, y).
template <typename S>
Var<S> generator_distillation_loss(Graph<S>& g, Var<S> imgs_new, Var<S> imgs_old) {
  GENIFER_CHECK(imgs_new.shape() == imgs_old.shape(), ShapeError,
                "generator distillation: image shape mismatch");
  return g.mean_all(g.abs_(g.sub(imgs_new, imgs_old)));
}

/// gan_term + lambda_gd * kappa * gd_term; kappa = n_prev / n_curr, zero on
/// the first task.
template <typename S>
Var<S> generator_loss(Graph<S>& g, Var<S> gan_term, Var<S> gd_term, S lambda_gd, S kappa) {
  GENIFER_CHECK(lambda_gd >= S(0) && kappa >= S(0), ContractError,
                "generator loss coefficients must be non-negative");
  return g.add(gan_term, g.affine(gd_term, lambda_gd * kappa, S(0)));
}

// Scalar convenience wrappers used by tests and logging.

template <typename S>
S eval_scalar(Var<S> v) {
  GENIFER_CHECK(v.size() == 1, ContractError, "expected scalar");
  return v.value()[0];
}

template <typename S>
Tensor<S> eval_softmax(const Tensor<S>& logits) {
  Graph<S> g;
  return softmax_probs(g, g.constant(logits)).value();
}

template <typename S>
S eval_output_distillation(const Tensor<S>& old_logits, const Tensor<S>& new_logits) {
  Graph<S> g;
  return eval_scalar(
      output_distillation_loss(g, g.constant(old_logits), g.constant(new_logits)));
}

template <typename S>
S eval_cross_entropy(const Tensor<S>& logits, const std::vector<Index>& labels) {
  Graph<S> g;
  return eval_scalar(current_task_loss(g, g.constant(logits), labels));
}

template <typename S>
S eval_discriminator_loss(const Tensor<S>& fake, const Tensor<S>& real, S r1) {
  Graph<S> g;
  return eval_scalar(discriminator_loss(g, g.constant(fake), g.constant(real), r1));
}

template <typename S>
S eval_generator_gan_loss(const Tensor<S>& fake) {
  Graph<S> g;
  return eval_scalar(generator_gan_loss(g, g.constant(fake)));
}

template <typename S>
S eval_generator_distillation(const Tensor<S>& a, const Tensor<S>& b) {
  Graph<S> g;
  return eval_scalar(generator_distillation_loss(g, g.constant(a), g.constant(b)));
}

}  // namespace genifer
