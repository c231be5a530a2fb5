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

#include <doctest.h>

#include <cmath>

#include "genifer/losses.hpp"
#include "genifer/rng.hpp"
#include "oracles/reference_losses.hpp"
#include "test_util.hpp"

using genifer::Graph;
using genifer::Index;
using genifer::Rng;
using genifer::Shape;
using genifer::Var;
using T = genifer::Tensor<double>;

namespace {

T tensor_from(const oracle::dmat& rows) {
  T t(Shape{static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size())});
  Index i = 0;
  for (const auto& r : rows)
    for (double v : r) t[i++] = v;
  return t;
}

oracle::dmat random_rows(Rng& rng, Index n, Index m, double scale) {
  oracle::dmat rows(static_cast<size_t>(n), oracle::dvec(static_cast<size_t>(m)));
  for (auto& r : rows)
    for (auto& v : r) v = scale * rng.normal();
  return rows;
}

}  // namespace

TEST_CASE("softmax frozen examples") {
  T logits(Shape{1, 4}, {0, 0, 0, 0});
  T probs = genifer::eval_softmax(logits);
  for (Index i = 0; i < 4; ++i) CHECK(probs[i] == doctest::Approx(0.25).epsilon(1e-9));

  T two(Shape{1, 2}, {std::log(2.0), 0.0});
  T p2 = genifer::eval_softmax(two);
  CHECK(p2[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(p2[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  T with_nan(Shape{1, 2}, {std::nan(""), 0.0});
  CHECK_THROWS_AS(genifer::eval_softmax(with_nan), genifer::NumericError);
}

TEST_CASE("output distillation frozen examples") {
  // K=1, L=0: both softmaxes are degenerate and the loss is exactly zero.
  T old1(Shape{2, 1}, {0.3, -1.2});
  T new1(Shape{2, 1}, {2.0, 0.7});
  CHECK(genifer::eval_output_distillation(old1, new1) == doctest::Approx(0.0).epsilon(1e-12));

  // K=2, L=0, identical logits: cross-entropy of a distribution with itself.
  T old2(Shape{1, 2}, {0.4, -0.9});
  const double p = std::exp(0.4) / (std::exp(0.4) + std::exp(-0.9));
  const double entropy = -(p * std::log(p) + (1 - p) * std::log(1 - p));
  CHECK(genifer::eval_output_distillation(old2, old2) == doctest::Approx(entropy).epsilon(1e-9));

  // K=2, L=1, all-zero logits: loss = log 3 (the joint-denominator pin).
  T old3(Shape{1, 2}, {0.0, 0.0});
  T new3(Shape{1, 3}, {0.0, 0.0, 0.0});
  CHECK(genifer::eval_output_distillation(old3, new3) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-9));

  CHECK_THROWS_AS(genifer::eval_output_distillation(T(Shape{1, 0}), T(Shape{1, 2})),
                  genifer::ContractError);
}

TEST_CASE("cross entropy frozen examples") {
  T sharp(Shape{1, 3}, {30.0, 0.0, 0.0});
  CHECK(genifer::eval_cross_entropy(sharp, {0}) == doctest::Approx(0.0).epsilon(1e-9));

  T uniform(Shape{1, 5}, {1.1, 1.1, 1.1, 1.1, 1.1});
  CHECK(genifer::eval_cross_entropy(uniform, {3}) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-9));

  T ex(Shape{1, 3}, {1.0, 0.0, 0.0});
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0));
  CHECK(genifer::eval_cross_entropy(ex, {0}) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.551444).epsilon(1e-4));

  CHECK_THROWS_AS(genifer::eval_cross_entropy(ex, {7}), genifer::RangeError);
}

TEST_CASE("classifier loss combination") {
  Graph<double> g;
  auto scalar = [&](double v) { return g.constant(T::scalar(v)); };
  CHECK(genifer::eval_scalar(genifer::classifier_loss(g, scalar(1.0), scalar(2.0), 0.0)) ==
        doctest::Approx(1.0));
  CHECK(genifer::eval_scalar(genifer::classifier_loss(g, scalar(0.0), scalar(2.0), 3.0)) ==
        doctest::Approx(6.0));
  CHECK(genifer::eval_scalar(genifer::classifier_loss(g, scalar(0.5), scalar(1.0), 0.4)) ==
        doctest::Approx(0.9));
  CHECK_THROWS_AS(genifer::classifier_loss(g, scalar(1.0), scalar(1.0), -0.1),
                  genifer::ContractError);
}

TEST_CASE("softplus scalar and op") {
  CHECK(genifer::softplus(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(genifer::softplus(-60.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(genifer::softplus(100.0) - 100.0) < 1e-6);
  CHECK(genifer::softplus(712.0) == doctest::Approx(712.0));  // no overflow
}

TEST_CASE("discriminator loss frozen examples") {
  T zeros(Shape{3, 1}, {0, 0, 0});
  CHECK(genifer::eval_discriminator_loss(zeros, zeros, 0.0) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));

  T big(Shape{2, 1}, {40.0, 40.0});
  T neg(Shape{2, 1}, {-40.0, -40.0});
  CHECK(genifer::eval_discriminator_loss(neg, big, 0.0) == doctest::Approx(0.0).epsilon(1e-9));

  T one(Shape{1, 1}, {1.0});
  CHECK(genifer::eval_discriminator_loss(one, one, 0.5) ==
        doctest::Approx(genifer::softplus(1.0) + genifer::softplus(-1.0) + 0.5).epsilon(1e-9));
  CHECK(genifer::eval_discriminator_loss(one, one, 0.5) == doctest::Approx(2.1266).epsilon(1e-4));

  CHECK_THROWS_AS(genifer::eval_discriminator_loss(T(Shape{0, 1}), one, 0.0),
                  genifer::ContractError);
}

TEST_CASE("r1 penalty frozen examples") {
  // Constant discriminator -> zero penalty.
  Graph<double> g;
  Var<double> f = g.leaf(T(Shape{2, 4}, {1, 2, 3, 4, 5, 6, 7, 8}));
  auto constant_d = [](Graph<double>& gr, Var<double> feat) {
    return gr.affine(gr.sum_cols(feat), 0.0, 1.5);
  };
  CHECK(genifer::eval_scalar(genifer::r1_penalty<double>(g, constant_d, f, 0.1)) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Linear D with unit weights on n features: penalty = 0.05 * n.
  const Index n = 7;
  Graph<double> g2;
  T feat(Shape{1, n});
  feat.flat().setConstant(0.3);
  Var<double> f2 = g2.leaf(feat);
  auto linear_d = [](Graph<double>& gr, Var<double> x) { return gr.sum_cols(x); };
  CHECK(genifer::eval_scalar(genifer::r1_penalty<double>(g2, linear_d, f2, 0.1)) ==
        doctest::Approx(0.05 * static_cast<double>(n)).epsilon(1e-9));

  // gamma = 0 -> zero regardless of D.
  Graph<double> g3;
  Var<double> f3 = g3.leaf(feat);
  CHECK(genifer::eval_scalar(genifer::r1_penalty<double>(g3, linear_d, f3, 0.0)) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Non-differentiable features are a contract violation.
  Graph<double> g4;
  Var<double> f4 = g4.constant(feat);
  CHECK_THROWS_AS(genifer::r1_penalty<double>(g4, linear_d, f4, 0.1), genifer::ContractError);
}

TEST_CASE("generator losses frozen examples") {
  T zeros(Shape{2, 1}, {0, 0});
  CHECK(genifer::eval_generator_gan_loss(zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  T big(Shape{2, 1}, {50.0, 50.0});
  CHECK(genifer::eval_generator_gan_loss(big) == doctest::Approx(0.0).epsilon(1e-9));
  T minus(Shape{1, 1}, {-1.0});
  CHECK(genifer::eval_generator_gan_loss(minus) ==
        doctest::Approx(genifer::softplus(1.0)).epsilon(1e-9));

  T a(Shape{1, 2, 2, 1}, {0, 1, 1, 0});
  T b(Shape{1, 2, 2, 1}, {1, 1, 0, 0});
  CHECK(genifer::eval_generator_distillation(a, a) == doctest::Approx(0.0));
  CHECK(genifer::eval_generator_distillation(a, b) == doctest::Approx(0.5).epsilon(1e-12));
  T c = a;
  c.flat() += 0.5;
  CHECK(genifer::eval_generator_distillation(c, a) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(genifer::eval_generator_distillation(a, T(Shape{1, 2, 2, 3})),
                  genifer::ShapeError);

  Graph<double> g;
  auto scalar = [&](double v) { return g.constant(T::scalar(v)); };
  CHECK(genifer::eval_scalar(genifer::generator_loss(g, scalar(1.0), scalar(0.2), 10.0, 1.0)) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(genifer::eval_scalar(genifer::generator_loss(g, scalar(0.7), scalar(9.0), 10.0, 0.0)) ==
        doctest::Approx(0.7).epsilon(1e-12));  // first task: kappa = 0
  // lambda_gd=10 with 50 previous and 10 current classes -> effective 50.
  CHECK(genifer::eval_scalar(genifer::generator_loss(g, scalar(0.0), scalar(1.0), 10.0,
                                                     50.0 / 10.0)) ==
        doctest::Approx(50.0).epsilon(1e-12));
  CHECK_THROWS_AS(genifer::generator_loss(g, scalar(1.0), scalar(1.0), -1.0, 1.0),
                  genifer::ContractError);
}

TEST_CASE("oracle equivalence over randomized small instances") {
  Rng rng(12345);
  for (int trial = 0; trial < 100; ++trial) {
    const Index k = 1 + rng.below(5);
    const Index l = rng.below(4);
    const Index batch = 1 + rng.below(4);
    const double scale = 0.5 + rng.uniform() * 3.0;

    const auto old_rows = random_rows(rng, batch, k, scale);
    const auto new_rows = random_rows(rng, batch, k + l, scale);
    CHECK(testutil::rel_error(
              genifer::eval_output_distillation(tensor_from(old_rows), tensor_from(new_rows)),
              oracle::output_distillation(old_rows, new_rows)) < 1e-6);

    std::vector<Index> labels;
    std::vector<int> labels_int;
    for (Index b = 0; b < batch; ++b) {
      labels.push_back(rng.below(k + l));
      labels_int.push_back(static_cast<int>(labels.back()));
    }
    CHECK(testutil::rel_error(genifer::eval_cross_entropy(tensor_from(new_rows), labels),
                              oracle::cross_entropy(new_rows, labels_int)) < 1e-6);

    oracle::dvec fake_all, real_all;
    for (Index b = 0; b < batch; ++b) {
      fake_all.push_back(scale * rng.normal());
      real_all.push_back(scale * rng.normal());
    }
    T fake_t(Shape{batch, 1}), real_t(Shape{batch, 1});
    for (Index b = 0; b < batch; ++b) {
      fake_t[b] = fake_all[static_cast<size_t>(b)];
      real_t[b] = real_all[static_cast<size_t>(b)];
    }
    const double r1 = rng.uniform() * 0.5;
    CHECK(testutil::rel_error(genifer::eval_discriminator_loss(fake_t, real_t, r1),
                              oracle::discriminator_loss(fake_all, real_all, r1)) < 1e-6);
    CHECK(testutil::rel_error(genifer::eval_generator_gan_loss(fake_t),
                              oracle::generator_gan_loss(fake_all)) < 1e-6);

    T img_a(Shape{batch, 2, 2, 3});
    T img_b(Shape{batch, 2, 2, 3});
    rng.fill_uniform(img_a, -1.0, 1.0);
    rng.fill_uniform(img_b, -1.0, 1.0);
    oracle::dvec va(img_a.data(), img_a.data() + img_a.size());
    oracle::dvec vb(img_b.data(), img_b.data() + img_b.size());
    CHECK(testutil::rel_error(genifer::eval_generator_distillation(img_a, img_b),
                              oracle::generator_distillation(va, vb)) < 1e-6);

    const double curr = rng.uniform() * 3.0, od = rng.uniform() * 3.0;
    const double lam = rng.uniform() * 5.0;
    Graph<double> g;
    CHECK(testutil::rel_error(
              genifer::eval_scalar(genifer::classifier_loss(
                  g, g.constant(T::scalar(curr)), g.constant(T::scalar(od)), lam)),
              oracle::classifier_loss(curr, od, lam)) < 1e-6);
    const double gan = rng.uniform() * 2.0, gd = rng.uniform();
    const double kappa = rng.uniform() * 4.0, lgd = rng.uniform() * 10.0;
    CHECK(testutil::rel_error(
              genifer::eval_scalar(genifer::generator_loss(
                  g, g.constant(T::scalar(gan)), g.constant(T::scalar(gd)), lgd, kappa)),
              oracle::generator_loss(gan, gd, lgd, kappa)) < 1e-6);
  }
}

TEST_CASE("distillation loss dominates teacher entropy") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Index k = 1 + rng.below(5);
    const Index l = rng.below(4);
    const auto old_rows = random_rows(rng, 1, k, 2.0);
    const auto new_rows = random_rows(rng, 1, k + l, 2.0);
    const double loss =
        genifer::eval_output_distillation(tensor_from(old_rows), tensor_from(new_rows));
    const auto q = oracle::softmax(old_rows[0]);
    double entropy = 0.0;
    for (double p : q) entropy -= p * std::log(p);
    CHECK(loss >= entropy - 1e-9);
  }
  // Equality: same distribution on the first K and zero mass on new classes.
  T old_l(Shape{1, 2}, {1.0, -0.5});
  T new_l(Shape{1, 3}, {1.0, -0.5, -300.0});
  const auto q = oracle::softmax({1.0, -0.5});
  const double entropy = -(q[0] * std::log(q[0]) + q[1] * std::log(q[1]));
  CHECK(genifer::eval_output_distillation(old_l, new_l) ==
        doctest::Approx(entropy).epsilon(1e-7));
}

TEST_CASE("loss gradients match finite differences") {
  Rng rng(4242);
  auto check = [&](const std::function<Var<double>(Graph<double>&, Var<double>)>& build,
                   const T& x0, double tol = 1e-6) {
    Graph<double> g;
    Var<double> x = g.leaf(x0);
    T analytic = g.gradients(build(g, x), {x})[0].value();
    T numeric = testutil::numeric_gradient(
        [&](const T& t) {
          Graph<double> h;
          return build(h, h.leaf(t)).value()[0];
        },
        x0);
    CHECK(testutil::max_rel_error(analytic, numeric) < tol);
  };

  for (int trial = 0; trial < 20; ++trial) {
    const Index k = 1 + rng.below(4);
    const Index l = rng.below(3);
    const Index batch = 1 + rng.below(3);
    T new_logits(Shape{batch, k + l});
    T old_logits(Shape{batch, k});
    rng.fill_normal(new_logits, 1.5);
    rng.fill_normal(old_logits, 1.5);
    std::vector<Index> labels;
    for (Index b = 0; b < batch; ++b) labels.push_back(rng.below(k + l));

    check(
        [&](Graph<double>& g, Var<double> v) {
          return genifer::current_task_loss(g, v, labels);
        },
        new_logits);
    check(
        [&](Graph<double>& g, Var<double> v) {
          return genifer::output_distillation_loss(g, g.constant(old_logits), v);
        },
        new_logits);
    // Distillation also differentiates w.r.t. the old logits (pure function).
    check(
        [&](Graph<double>& g, Var<double> v) {
          return genifer::output_distillation_loss(g, v, g.constant(new_logits));
        },
        old_logits);

    T scores(Shape{batch, 1});
    rng.fill_normal(scores, 2.0);
    check(
        [&](Graph<double>& g, Var<double> v) {
          return genifer::discriminator_loss(g, v, g.constant(scores), 0.25);
        },
        scores);
    check(
        [&](Graph<double>& g, Var<double> v) {
          return genifer::discriminator_loss(g, g.constant(scores), v, 0.25);
        },
        scores);
    check([&](Graph<double>& g, Var<double> v) { return genifer::generator_gan_loss(g, v); },
          scores);

    T imgs(Shape{batch, 2, 2, 1}), imgs_old(Shape{batch, 2, 2, 1});
    rng.fill_normal(imgs, 0.7);
    rng.fill_normal(imgs_old, 0.7);
    check(
        [&](Graph<double>& g, Var<double> v) {
          return genifer::generator_distillation_loss(g, v, g.constant(imgs_old));
        },
        imgs);
  }
}

TEST_CASE("r1-inclusive discriminator loss differentiates w.r.t. parameters") {
  // The R1 term is second-order in the discriminator parameters; verify the
  // full loss gradient against finite differences for a tiny MLP head.
  Rng rng(777);
  const Index batch = 2, fdim = 3, hidden = 4;
  T w1(Shape{fdim, hidden}), b1(Shape{1, hidden}), w2(Shape{hidden, 1});
  rng.fill_normal(w1, 0.8);
  rng.fill_normal(b1, 0.3);
  rng.fill_normal(w2, 0.8);
  T freal(Shape{batch, fdim}), ffake(Shape{batch, fdim});
  rng.fill_normal(freal, 1.0);
  rng.fill_normal(ffake, 1.0);

  auto loss_of = [&](const T& tw1, const T& tb1, const T& tw2, Graph<double>& g,
                     std::vector<Var<double>>* params_out) {
    Var<double> vw1 = g.leaf(tw1), vb1 = g.leaf(tb1), vw2 = g.leaf(tw2);
    if (params_out) *params_out = {vw1, vb1, vw2};
    auto score = [&](Graph<double>& gr, Var<double> x) {
      Var<double> h =
          gr.leaky_relu(gr.add_bcast_middle(gr.matmul(x, vw1), vb1, 1, batch, hidden), 0.2);
      return gr.matmul(h, vw2);
    };
    Var<double> real_leaf = g.leaf(freal, true);
    Var<double> r1 = genifer::r1_penalty<double>(g, score, real_leaf, 0.1);
    return genifer::discriminator_loss(g, score(g, g.constant(ffake)),
                                       score(g, real_leaf), r1);
  };

  Graph<double> g;
  std::vector<Var<double>> params;
  Var<double> loss = loss_of(w1, b1, w2, g, &params);
  auto grads = g.gradients(loss, params);

  auto eval = [&](const T& tw1, const T& tb1, const T& tw2) {
    Graph<double> h;
    return loss_of(tw1, tb1, tw2, h, nullptr).value()[0];
  };
  T n1 = testutil::numeric_gradient([&](const T& t) { return eval(t, b1, w2); }, w1);
  T n2 = testutil::numeric_gradient([&](const T& t) { return eval(w1, t, w2); }, b1);
  T n3 = testutil::numeric_gradient([&](const T& t) { return eval(w1, b1, t); }, w2);
  CHECK(testutil::max_rel_error(grads[0].value(), n1) < 1e-4);
  CHECK(testutil::max_rel_error(grads[1].value(), n2) < 1e-4);
  CHECK(testutil::max_rel_error(grads[2].value(), n3) < 1e-4);
}
