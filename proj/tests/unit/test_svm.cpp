// Copyright 2026 The maskopt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/qp_oracle.hpp"
#include "../support/smo_corpus.hpp"
#include "errors.hpp"
#include "synthetic.hpp"
#include "svm.hpp"

using namespace maskopt;

TEST_CASE("kernel values") {
  const std::vector<double> x{1, 2}, z{3, 4}, o{-2, 1};
  CHECK(kernel_eval({KernelKind::kLinear}, x, z) == 11.0);
  CHECK(kernel_eval({KernelKind::kRbf, 0.7}, x, x) == 1.0);
  CHECK(kernel_eval({KernelKind::kRbf, 0.5}, x, z) == doctest::Approx(std::exp(-0.5 * 8.0)));
  CHECK(kernel_eval({KernelKind::kSigmoid, 0.5, 3, 0.0}, x, o) == 0.0);
  CHECK(kernel_eval({KernelKind::kPolynomial, 0.5, 2, 1.0}, x, z) == doctest::Approx(42.25));
  const std::vector<double> w{1, 2, 3};
  CHECK_THROWS_AS(kernel_eval({KernelKind::kLinear}, x, w), DataError);
}

TEST_CASE("kernel symmetry on random inputs") {
  Rng rng(3);
  for (KernelKind kind : {KernelKind::kLinear, KernelKind::kPolynomial, KernelKind::kRbf, KernelKind::kSigmoid}) {
    KernelSpec k{kind, 0.3, 3, 0.5};
    for (int t = 0; t < 20; ++t) {
      std::vector<double> a(5), b(5);
      for (auto& v : a) v = rng.normal();
      for (auto& v : b) v = rng.normal();
      CHECK(kernel_eval(k, a, b) == kernel_eval(k, b, a));
    }
  }
}

TEST_CASE("kernel names") {
  CHECK(parse_kernel_kind("poly") == KernelKind::kPolynomial);
  CHECK(parse_kernel_kind("polynomial") == KernelKind::kPolynomial);
  CHECK(parse_kernel_kind("sigmoid") == KernelKind::kSigmoid);
  CHECK_THROWS_AS(parse_kernel_kind("laplace"), ConfigError);
  CHECK_THROWS_AS(KernelSpec({KernelKind::kRbf, 0.0}).validate(), ConfigError);
}

TEST_CASE("scaler standardises training columns") {
  auto x = FeatureMatrix::from_values(3, 2, {1, 5, 3, 5, 2, 5});
  auto s = fit_scaler(x);
  CHECK(s.means[0] == 2.0);
  CHECK(s.stddevs[1] == 1.0);
  auto t = apply_scaler(s, x);
  CHECK(t.at(1, 1) == 0.0);
  CHECK(t.at(2, 0) == 0.0);

  auto two = FeatureMatrix::from_values(2, 1, {1, 3});
  auto t2 = apply_scaler(fit_scaler(two), two);
  CHECK(t2.at(0, 0) == doctest::Approx(-1.0));
  CHECK(t2.at(1, 0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(fit_scaler(FeatureMatrix::from_values(1, 1, {1})), DataError);
  CHECK_THROWS_AS(apply_scaler(s, two), DataError);
}

TEST_CASE("smo matches the dense dual oracle on the corpus") {
  const auto corpus = smo_corpus::build();
  REQUIRE(corpus.size() > 50);
  for (const auto& p : corpus) {
    CAPTURE(p.name);
    const auto kv = smo_corpus::gram_values(p);
    GramMatrix gram(p.y.size(), kv);
    SmoOptions opt;
    opt.C = p.C;
    opt.tol = 1e-6;
    const auto sol = smo_solve(gram, p.y, opt);
    const auto ref = qp_oracle::solve_dual(kv, p.y, p.C);
    REQUIRE(std::isfinite(ref.objective));
    CHECK(sol.converged);
    CHECK(std::abs(sol.dual_objective - ref.objective) <= 1e-4 * std::max(1.0, std::abs(ref.objective)));
    CHECK(smo_corpus::kkt_gap(kv, p.y, sol.alpha, p.C) <= 10 * opt.tol);
    double eq = 0.0;
    for (std::size_t i = 0; i < p.y.size(); ++i) {
      CHECK(sol.alpha[i] >= 0.0);
      CHECK(sol.alpha[i] <= p.C);
      eq += sol.alpha[i] * p.y[i];
    }
    CHECK(std::abs(eq) <= 1e-6);
    CHECK(sol.objective_decreases == 0);
    CHECK(dual_objective(gram, p.y, sol.alpha) == doctest::Approx(sol.dual_objective).epsilon(1e-9));
  }
}

TEST_CASE("free support vectors sit on the margin") {
  for (const auto& p : smo_corpus::build()) {
    CAPTURE(p.name);
    SmoOptions opt;
    opt.C = p.C;
    const auto m = smo_train(p.x, p.y, p.kernel, opt);
    for (std::size_t s = 0; s < m.support_vectors.n_samples(); ++s) {
      const double a = std::abs(m.alphas_signed[s]);
      if (a < 1e-6 || a > p.C - 1e-6) continue;
      const int y = m.alphas_signed[s] > 0 ? 1 : -1;
      CHECK(std::abs(y * m.decision(m.support_vectors.row(s)) - 1.0) <= 10 * opt.tol);
    }
  }
}

TEST_CASE("separable and xor toy problems train perfectly") {
  const auto corpus = smo_corpus::build();
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& p = corpus[k];
    SmoOptions opt;
    opt.C = p.C;
    const auto m = smo_train(p.x, p.y, p.kernel, opt);
    for (std::size_t i = 0; i < p.y.size(); ++i) CHECK((m.decision(p.x.row(i)) > 0 ? 1 : -1) == p.y[i]);
    double eq = 0.0;
    for (double a : m.alphas_signed) eq += a;
    CHECK(std::abs(eq) < 1e-9);
    for (double a : m.alphas_signed) CHECK(std::abs(a) > kSupportThreshold);
  }
}

TEST_CASE("smo rejects single-class and bad options") {
  auto x = FeatureMatrix::from_values(3, 1, {0, 1, 2});
  const std::vector<int> same{1, 1, 1};
  CHECK_THROWS_AS(smo_train(x, same, {KernelKind::kLinear}, {}), DataError);
  const std::vector<int> bad{1, 0, -1};
  CHECK_THROWS_AS(smo_train(x, bad, {KernelKind::kLinear}, {}), DataError);
  const std::vector<int> ok{1, -1, 1};
  SmoOptions opt;
  opt.C = -1;
  CHECK_THROWS_AS(smo_train(x, ok, {KernelKind::kLinear}, opt), ConfigError);
}

TEST_CASE("iteration cap is reported, not thrown") {
  SyntheticSpec spec;
  spec.n_samples = 120;
  spec.class_sep = 1.0;
  auto d = generate(spec);
  std::vector<int> y(d.y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = d.y[i] == 0 ? 1 : -1;
  SmoOptions opt;
  opt.max_iterations = 3;
  const auto m = smo_train(apply_scaler(fit_scaler(d.x), d.x), y, {KernelKind::kRbf, 0.05}, opt);
  CHECK_FALSE(m.diagnostics.converged);
  CHECK(m.diagnostics.iterations == 3);
}

TEST_CASE("one-vs-rest on separated clusters") {
  // Three clusters 120 degrees apart on a circle of radius 8.
  Rng rng(21);
  std::vector<double> values;
  std::vector<int> labels;
  for (int i = 0; i < 150; ++i) {
    const int c = i % 3;
    labels.push_back(c);
    values.push_back(8.0 * std::cos(2.0 * M_PI * c / 3.0) + rng.normal());
    values.push_back(8.0 * std::sin(2.0 * M_PI * c / 3.0) + rng.normal());
  }
  struct {
    FeatureMatrix x;
    LabelVector y;
  } d{FeatureMatrix::from_values(150, 2, std::move(values)), LabelVector(std::move(labels), 3)};
  auto split = stratified_split(d.y, 0.2, 1);
  auto xt = d.x.select_rows(split.train_indices);
  auto yt = d.y.select(split.train_indices);
  SvmConfig cfg;
  cfg.kernel = KernelKind::kLinear;
  auto model = train_multiclass(xt, yt, cfg);
  CHECK(model.converged());
  CHECK(model.num_machines() == 3);

  // Nearest-centroid oracle on the held-out rows.
  auto xs = d.x.select_rows(split.test_indices);
  auto ys = d.y.select(split.test_indices);
  std::vector<std::vector<double>> centroid(3, std::vector<double>(2, 0.0));
  auto counts = yt.class_counts();
  for (std::size_t i = 0; i < xt.n_samples(); ++i)
    for (std::size_t j = 0; j < 2; ++j) centroid[yt[i]][j] += xt.at(i, j) / static_cast<double>(counts[yt[i]]);
  const auto pred = model.predict(xs);
  for (std::size_t i = 0; i < xs.n_samples(); ++i) {
    int best = 0;
    double bd = 1e300;
    for (int c = 0; c < 3; ++c) {
      double dd = 0.0;
      for (std::size_t j = 0; j < 2; ++j) dd += std::pow(xs.at(i, j) - centroid[c][j], 2);
      if (dd < bd) bd = dd, best = c;
    }
    CHECK(pred[i] == best);
    CHECK(pred[i] == ys[i]);
  }
  auto train_eval = evaluate(model, xt, yt);
  CHECK(train_eval.metrics.accuracy == 1.0);
  CHECK(train_eval.metrics.kappa == 1.0);
}

TEST_CASE("two classes use one machine and its negation") {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.n_informative = 3;
  spec.n_noise = 2;
  spec.class_sep = 2.0;
  spec.n_samples = 80;
  auto d = generate(spec);
  SvmConfig cfg;
  auto model = train_multiclass(d.x, d.y, cfg);

  std::vector<int> ypm(d.y.size());
  for (std::size_t i = 0; i < ypm.size(); ++i) ypm[i] = d.y[i] == 1 ? 1 : -1;
  const auto scaled = apply_scaler(fit_scaler(d.x), d.x);
  KernelSpec k{KernelKind::kRbf, model.kernel().gamma};
  const auto bin = smo_train(scaled, ypm, k, {cfg.C, cfg.tol, cfg.max_iterations});
  const auto pred = model.predict(d.x);
  for (std::size_t i = 0; i < d.y.size(); ++i) CHECK(pred[i] == (bin.decision(scaled.row(i)) > 0 ? 1 : 0));
  const auto dv = model.decision_values_scaled(scaled);
  for (std::size_t i = 0; i < d.y.size(); ++i) CHECK(dv[2 * i] == -dv[2 * i + 1]);
}

TEST_CASE("scale gamma and missing classes") {
  auto d = generate(SyntheticSpec{});
  SvmConfig cfg;
  auto model = train_multiclass(d.x, d.y, cfg);
  CHECK(model.kernel().gamma == doctest::Approx(1.0 / 64.0).epsilon(1e-6));

  LabelVector gap({0, 0, 2, 2, 0, 2}, 3);
  auto x = FeatureMatrix::from_values(6, 1, {0, 1, 5, 6, 0.5, 5.5});
  CHECK_THROWS_AS(train_multiclass(x, gap, cfg), DataError);
}

TEST_CASE("evaluate reports the metrics identity and constant predictors") {
  auto d = generate(SyntheticSpec{});
  auto split = stratified_split(d.y, 0.2, 42);
  SvmConfig cfg;
  cfg.kernel = KernelKind::kSigmoid;
  auto model = train_multiclass(d.x.select_rows(split.train_indices), d.y.select(split.train_indices), cfg);
  auto ev = evaluate(model, d.x.select_rows(split.test_indices), d.y.select(split.test_indices));
  CHECK(ev.metrics.recall_weighted == doctest::Approx(ev.metrics.accuracy).epsilon(1e-12));
  CHECK(ev.confusion.total() == static_cast<std::int64_t>(split.test_indices.size()));
  CHECK_THROWS_AS(evaluate(model, d.x.select_rows(split.test_indices).select_columns(std::vector<std::size_t>{0}),
                           d.y.select(split.test_indices)),
                  DataError);
}

TEST_CASE("model json round trip predicts identically") {
  auto d = generate(SyntheticSpec{});
  SvmConfig cfg;
  cfg.kernel = KernelKind::kPolynomial;
  auto model = train_multiclass(d.x, d.y, cfg, 4);
  auto back = MulticlassSvm::from_json(nlohmann::json::parse(model.to_json().dump()));
  CHECK(back.predict(d.x) == model.predict(d.x));
  auto j = model.to_json();
  j["format"] = "other";
  CHECK_THROWS_AS(MulticlassSvm::from_json(j), DataError);
}

TEST_CASE("threaded training matches serial training") {
  auto d = generate(SyntheticSpec{});
  SvmConfig cfg;
  auto a = train_multiclass(d.x, d.y, cfg, 1);
  auto b = train_multiclass(d.x, d.y, cfg, 4);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("svm config json") {
  SvmConfig c;
  c.kernel = KernelKind::kSigmoid;
  c.gamma = 0.25;
  auto back = svm_config_from_json(svm_config_json(c));
  CHECK(back.kernel == KernelKind::kSigmoid);
  CHECK(*back.gamma == 0.25);
  CHECK_FALSE(svm_config_from_json(nlohmann::json{{"gamma", "scale"}}).gamma.has_value());
  CHECK_THROWS_AS(svm_config_from_json(nlohmann::json{{"gamma", "auto"}}), ConfigError);
  CHECK_THROWS_AS(svm_config_from_json(nlohmann::json{{"C", -1.0}}), ConfigError);
  CHECK_THROWS_AS(svm_config_from_json(nlohmann::json{{"kernel", "cubic"}}), ConfigError);
}
