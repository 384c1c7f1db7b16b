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

#include "svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "parallel.hpp"

namespace maskopt {

// ---------------------------------------------------------------------------
// Kernels

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kPolynomial: return "poly";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kSigmoid: return "sigmoid";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "poly" || name == "polynomial") return KernelKind::kPolynomial;
  if (name == "rbf") return KernelKind::kRbf;
  if (name == "sigmoid") return KernelKind::kSigmoid;
  throw ConfigError("unknown kernel '" + std::string(name) + "' (expected linear|poly|rbf|sigmoid)");
}

void KernelSpec::validate() const {
  if (kind != KernelKind::kLinear && !(gamma > 0.0 && std::isfinite(gamma)))
    throw ConfigError("kernel gamma must be positive");
  if (kind == KernelKind::kPolynomial && degree < 1) throw ConfigError("polynomial degree must be >= 1");
  if (!std::isfinite(coef0)) throw ConfigError("kernel coef0 must be finite");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size())
    throw DataError("kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                    std::to_string(z.size()) + ")");
  if (spec.kind == KernelKind::kRbf) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double d = x[k] - z[k];
      d2 += d * d;
    }
    return std::exp(-spec.gamma * d2);
  }
  double dot = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) dot += x[k] * z[k];
  switch (spec.kind) {
    case KernelKind::kLinear: return dot;
    case KernelKind::kPolynomial: return std::pow(spec.gamma * dot + spec.coef0, spec.degree);
    case KernelKind::kSigmoid: return std::tanh(spec.gamma * dot + spec.coef0);
    case KernelKind::kRbf: break;
  }
  return 0.0;
}

GramMatrix::GramMatrix(const KernelSpec& spec, const FeatureMatrix& x)
    : n_(x.n_samples()), values_(n_ * n_) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      const double v = kernel_eval(spec, x.row(i), x.row(j));
      values_[i * n_ + j] = v;
      values_[j * n_ + i] = v;
    }
  }
}

GramMatrix::GramMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw DataError("gram matrix: expected n*n values");
}

// ---------------------------------------------------------------------------
// Scaler

Scaler fit_scaler(const FeatureMatrix& x) {
  if (x.n_samples() < 2) throw DataError("scaler: need at least 2 training samples");
  const std::size_t d = x.n_features();
  const double n = static_cast<double>(x.n_samples());
  Scaler s;
  s.means.assign(d, 0.0);
  s.stddevs.assign(d, 0.0);
  for (std::size_t i = 0; i < x.n_samples(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) s.means[j] += r[j];
  }
  for (auto& m : s.means) m /= n;
  for (std::size_t i = 0; i < x.n_samples(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = r[j] - s.means[j];
      s.stddevs[j] += dv * dv;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double sd = std::sqrt(s.stddevs[j] / n);
    // Constant columns keep stddev 1 and centre to zero.
    s.stddevs[j] = sd > 1e-12 * std::max(1.0, std::abs(s.means[j])) ? sd : 1.0;
  }
  return s;
}

FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& x) {
  if (x.n_features() != s.dimension())
    throw DataError("scaler: matrix has " + std::to_string(x.n_features()) + " features, scaler expects " +
                    std::to_string(s.dimension()));
  std::vector<double> out(x.values().begin(), x.values().end());
  const std::size_t d = s.dimension();
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::size_t j = k % d;
    out[k] = (out[k] - s.means[j]) / s.stddevs[j];
  }
  return FeatureMatrix(x.n_samples(), d, std::move(out), x.columns());
}

// ---------------------------------------------------------------------------
// SMO

double dual_objective(const GramMatrix& k, std::span<const int> y, std::span<const double> alpha) {
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < alpha.size(); ++j)
      quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
  }
  return linear - 0.5 * quad;
}

SmoSolution smo_solve(const GramMatrix& k, std::span<const int> y, const SmoOptions& opt) {
  const std::size_t n = k.size();
  if (y.size() != n) throw DataError("smo: label count does not match kernel matrix");
  if (!(opt.C > 0.0)) throw ConfigError("SVM C must be positive");
  if (!(opt.tol > 0.0)) throw ConfigError("SMO tolerance must be positive");
  bool has_pos = false, has_neg = false;
  for (int v : y) {
    if (v == 1) has_pos = true;
    else if (v == -1) has_neg = true;
    else throw DataError("smo: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw DataError("smo: both classes must be present");

  const double C = opt.C;
  constexpr double kTau = 1e-12;
  SmoSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  auto& a = sol.alpha;

  auto in_up = [&](std::size_t t) { return y[t] == 1 ? a[t] < C : a[t] > 0.0; };
  auto in_low = [&](std::size_t t) { return y[t] == 1 ? a[t] > 0.0 : a[t] < C; };

  while (true) {
    double m = -std::numeric_limits<double>::infinity();
    double big_m = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > m) { m = v; i = t; }
      if (in_low(t) && v < big_m) { big_m = v; j = t; }
    }
    if (i == n || j == n) {
      sol.final_gap = 0.0;
      sol.converged = true;
      break;
    }
    sol.final_gap = m - big_m;
    if (sol.final_gap <= opt.tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= opt.max_iterations) break;
    ++sol.iterations;

    const double eta = k(i, i) + k(j, j) - 2.0 * k(i, j);
    const double bound_i = y[i] == 1 ? C - a[i] : a[i];
    const double bound_j = y[j] == 1 ? a[j] : C - a[j];
    const double step = std::min({sol.final_gap / (eta > kTau ? eta : kTau), bound_i, bound_j});

    const double gain = step * sol.final_gap - 0.5 * step * step * eta;
    if (gain < -1e-12) ++sol.objective_decreases;

    // Land exactly on the box when a bound is the binding constraint.
    a[i] = step == bound_i ? (y[i] == 1 ? C : 0.0) : a[i] + y[i] * step;
    a[j] = step == bound_j ? (y[j] == 1 ? 0.0 : C) : a[j] - y[j] * step;

    const auto ki = k.row(i);
    const auto kj = k.row(j);
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * step * (ki[t] - kj[t]);
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t n_free = 0;
  double half_ag = 0.0, half_a = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (a[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      free_sum += yg;
    }
    half_ag += a[t] * grad[t];
    half_a += a[t];
  }
  sol.rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : 0.5 * (ub + lb);
  sol.dual_objective = 0.5 * half_a - 0.5 * half_ag;
  return sol;
}

double BinarySvm::decision(std::span<const double> x) const {
  double f = bias;
  for (std::size_t s = 0; s < alphas_signed.size(); ++s)
    f += alphas_signed[s] * kernel_eval(kernel, support_vectors.row(s), x);
  return f;
}

namespace {

BinarySvm machine_from_solution(const FeatureMatrix& x, std::span<const int> y, const KernelSpec& kernel,
                                double C, SmoSolution sol) {
  BinarySvm m;
  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < sol.alpha.size(); ++t)
    if (sol.alpha[t] > kSupportThreshold) {
      sv.push_back(t);
      m.alphas_signed.push_back(sol.alpha[t] * y[t]);
    }
  m.support_vectors = x.select_rows(sv);
  m.bias = -sol.rho;
  m.kernel = kernel;
  m.C = C;
  m.diagnostics = std::move(sol);
  return m;
}

}  // namespace

BinarySvm smo_train(const FeatureMatrix& x, std::span<const int> y_pm, const KernelSpec& kernel,
                    const SmoOptions& options) {
  kernel.validate();
  if (x.n_samples() != y_pm.size()) throw DataError("smo: label count does not match sample count");
  GramMatrix gram(kernel, x);
  return machine_from_solution(x, y_pm, kernel, options.C, smo_solve(gram, y_pm, options));
}

// ---------------------------------------------------------------------------
// Multi-class

void SvmConfig::validate() const {
  if (!(C > 0.0 && std::isfinite(C))) throw ConfigError("SVM C must be positive");
  if (!(tol > 0.0)) throw ConfigError("SVM tol must be positive");
  if (gamma && !(*gamma > 0.0)) throw ConfigError("SVM gamma must be positive");
  if (kernel == KernelKind::kPolynomial && degree < 1) throw ConfigError("polynomial degree must be >= 1");
  if (max_iterations == 0) throw ConfigError("SVM max_iterations must be positive");
}

nlohmann::json svm_config_json(const SvmConfig& c) {
  nlohmann::json j{{"kernel", to_string(c.kernel)}, {"C", c.C},          {"degree", c.degree},
                   {"coef0", c.coef0},              {"tol", c.tol},      {"max_iterations", c.max_iterations}};
  j["gamma"] = c.gamma ? nlohmann::json(*c.gamma) : nlohmann::json("scale");
  return j;
}

SvmConfig svm_config_from_json(const nlohmann::json& j) {
  SvmConfig c;
  if (!j.is_object()) throw ConfigError("svm settings must be an object");
  try {
    if (j.contains("kernel")) c.kernel = parse_kernel_kind(j.at("kernel").get<std::string>());
    if (j.contains("gamma") && !j.at("gamma").is_null()) {
      if (j.at("gamma").is_string()) {
        if (j.at("gamma").get<std::string>() != "scale") throw ConfigError("svm.gamma must be a number or \"scale\"");
      } else {
        c.gamma = j.at("gamma").get<double>();
      }
    }
    if (j.contains("degree")) c.degree = j.at("degree").get<int>();
    if (j.contains("coef0")) c.coef0 = j.at("coef0").get<double>();
    if (j.contains("C")) c.C = j.at("C").get<double>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("max_iterations")) c.max_iterations = j.at("max_iterations").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid svm settings: ") + e.what());
  }
  c.validate();
  return c;
}

MulticlassSvm train_multiclass(const FeatureMatrix& x, const LabelVector& y, const SvmConfig& config,
                               int threads) {
  config.validate();
  if (x.n_samples() != y.size())
    throw DataError("train: " + std::to_string(x.n_samples()) + " rows but " + std::to_string(y.size()) +
                    " labels");
  const int k_classes = y.num_classes();
  const auto counts = y.class_counts();
  for (int c = 0; c < k_classes; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw DataError("train: class " + std::to_string(c) + " has no training samples");

  MulticlassSvm model;
  model.num_classes_ = k_classes;
  model.c_ = config.C;
  model.scaler_ = fit_scaler(x);
  const FeatureMatrix xs = apply_scaler(model.scaler_, x);

  KernelSpec spec{config.kernel, 1.0, config.degree, config.coef0};
  if (config.gamma) {
    spec.gamma = *config.gamma;
  } else {
    // "scale": 1 / (n_features * mean per-feature variance) on the scaled data.
    double var_sum = 0.0;
    const double n = static_cast<double>(xs.n_samples());
    for (std::size_t f = 0; f < xs.n_features(); ++f) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < xs.n_samples(); ++i) mean += xs.at(i, f);
      mean /= n;
      for (std::size_t i = 0; i < xs.n_samples(); ++i) sq += (xs.at(i, f) - mean) * (xs.at(i, f) - mean);
      var_sum += sq / n;
    }
    const double denom = var_sum;  // n_features * mean variance
    spec.gamma = denom > 0.0 ? 1.0 / denom : 1.0;
  }
  spec.validate();
  model.kernel_ = spec;

  const GramMatrix gram(spec, xs);
  const SmoOptions opt{config.C, config.tol, config.max_iterations};
  const std::size_t n = xs.n_samples();

  const int trained = k_classes == 2 ? 1 : k_classes;
  std::vector<SmoSolution> solutions(static_cast<std::size_t>(trained));
  std::vector<std::vector<int>> targets(static_cast<std::size_t>(trained));
  parallel_for(static_cast<std::size_t>(trained), threads, [&](std::size_t m) {
    const int positive = k_classes == 2 ? 1 : static_cast<int>(m);
    auto& t = targets[m];
    t.resize(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = y[i] == positive ? 1 : -1;
    solutions[m] = smo_solve(gram, t, opt);
  });

  std::vector<char> is_sv(n, 0);
  for (const auto& s : solutions)
    for (std::size_t i = 0; i < n; ++i)
      if (s.alpha[i] > kSupportThreshold) is_sv[i] = 1;
  std::vector<std::size_t> pool_rows;
  for (std::size_t i = 0; i < n; ++i)
    if (is_sv[i]) pool_rows.push_back(i);
  model.pool_ = xs.select_rows(pool_rows);

  for (std::size_t m = 0; m < solutions.size(); ++m) {
    std::vector<double> coef(pool_rows.size(), 0.0);
    for (std::size_t p = 0; p < pool_rows.size(); ++p) {
      const std::size_t i = pool_rows[p];
      if (solutions[m].alpha[i] > kSupportThreshold) coef[p] = solutions[m].alpha[i] * targets[m][i];
    }
    model.coefs_.push_back(std::move(coef));
    model.biases_.push_back(-solutions[m].rho);
    model.converged_ = model.converged_ && solutions[m].converged;
    model.objective_decreases_ += solutions[m].objective_decreases;
  }
  if (k_classes == 2) {
    std::vector<double> neg = model.coefs_[0];
    for (auto& v : neg) v = -v;
    model.coefs_.insert(model.coefs_.begin(), std::move(neg));
    model.biases_.insert(model.biases_.begin(), -model.biases_[0]);
  }
  return model;
}

std::vector<double> MulticlassSvm::decision_values_scaled(const FeatureMatrix& xs) const {
  if (xs.n_features() != pool_.n_features() && pool_.n_samples() > 0)
    throw DataError("predict: feature dimension mismatch");
  const std::size_t k = num_machines();
  std::vector<double> out(xs.n_samples() * k);
  std::vector<double> kv(pool_.n_samples());
  for (std::size_t i = 0; i < xs.n_samples(); ++i) {
    const auto row = xs.row(i);
    for (std::size_t p = 0; p < pool_.n_samples(); ++p) kv[p] = kernel_eval(kernel_, pool_.row(p), row);
    for (std::size_t m = 0; m < k; ++m) {
      double f = biases_[m];
      const auto& c = coefs_[m];
      for (std::size_t p = 0; p < kv.size(); ++p) f += c[p] * kv[p];
      out[i * k + m] = f;
    }
  }
  return out;
}

std::vector<int> MulticlassSvm::predict(const FeatureMatrix& x) const {
  const FeatureMatrix xs = apply_scaler(scaler_, x);
  const auto dv = decision_values_scaled(xs);
  const std::size_t k = num_machines();
  std::vector<int> pred(x.n_samples());
  for (std::size_t i = 0; i < x.n_samples(); ++i) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < k; ++m)
      if (dv[i * k + m] > dv[i * k + best]) best = m;
    pred[i] = static_cast<int>(best);
  }
  return pred;
}

Evaluation evaluate(const MulticlassSvm& model, const FeatureMatrix& x, const LabelVector& y) {
  if (x.n_samples() != y.size()) throw DataError("evaluate: row/label count mismatch");
  if (x.n_features() != model.scaler().dimension())
    throw DataError("evaluate: matrix has " + std::to_string(x.n_features()) + " features, model expects " +
                    std::to_string(model.scaler().dimension()));
  const auto pred = model.predict(x);
  auto cm = confusion(y.labels(), pred, model.num_classes());
  auto metrics = compute_metrics(cm);
  return {std::move(cm), std::move(metrics)};
}

// ---------------------------------------------------------------------------
// Serialisation

nlohmann::json MulticlassSvm::to_json() const {
  nlohmann::json machines = nlohmann::json::array();
  for (std::size_t m = 0; m < num_machines(); ++m) {
    nlohmann::json svs = nlohmann::json::array();
    std::vector<double> alphas;
    for (std::size_t p = 0; p < pool_.n_samples(); ++p) {
      if (coefs_[m][p] == 0.0) continue;
      auto r = pool_.row(p);
      svs.push_back(std::vector<double>(r.begin(), r.end()));
      alphas.push_back(coefs_[m][p]);
    }
    machines.push_back({{"support_vectors", std::move(svs)}, {"alphas_signed", alphas}, {"bias", biases_[m]}});
  }
  return {{"format", "maskopt-svm"},
          {"version", 1},
          {"num_classes", num_classes_},
          {"C", c_},
          {"kernel",
           {{"kind", to_string(kernel_.kind)},
            {"gamma", kernel_.gamma},
            {"degree", kernel_.degree},
            {"coef0", kernel_.coef0}}},
          {"scaler", {{"means", scaler_.means}, {"stddevs", scaler_.stddevs}}},
          {"machines", std::move(machines)}};
}

MulticlassSvm MulticlassSvm::from_json(const nlohmann::json& j) {
  MulticlassSvm m;
  try {
    if (j.at("format").get<std::string>() != "maskopt-svm") throw DataError("not a maskopt SVM model");
    m.num_classes_ = j.at("num_classes").get<int>();
    m.c_ = j.at("C").get<double>();
    const auto& k = j.at("kernel");
    m.kernel_ = {parse_kernel_kind(k.at("kind").get<std::string>()), k.at("gamma").get<double>(),
                 k.at("degree").get<int>(), k.at("coef0").get<double>()};
    m.scaler_.means = j.at("scaler").at("means").get<std::vector<double>>();
    m.scaler_.stddevs = j.at("scaler").at("stddevs").get<std::vector<double>>();
    const std::size_t d = m.scaler_.dimension();
    if (m.scaler_.stddevs.size() != d) throw DataError("model scaler arrays differ in length");
    for (double s : m.scaler_.stddevs)
      if (!(s > 0.0)) throw DataError("model scaler stddev must be positive");

    const auto& machines = j.at("machines");
    if (m.num_classes_ < 2 || machines.size() != static_cast<std::size_t>(m.num_classes_))
      throw DataError("model must contain exactly num_classes machines");
    std::vector<double> pool;
    std::size_t total = 0;
    for (const auto& mach : machines) total += mach.at("alphas_signed").size();
    std::size_t offset = 0;
    for (const auto& mach : machines) {
      const auto svs = mach.at("support_vectors").get<std::vector<std::vector<double>>>();
      const auto alphas = mach.at("alphas_signed").get<std::vector<double>>();
      if (svs.size() != alphas.size()) throw DataError("support vector / alpha count mismatch");
      std::vector<double> coef(total, 0.0);
      for (std::size_t s = 0; s < svs.size(); ++s) {
        if (svs[s].size() != d) throw DataError("support vector dimension mismatch");
        pool.insert(pool.end(), svs[s].begin(), svs[s].end());
        coef[offset + s] = alphas[s];
      }
      offset += svs.size();
      m.coefs_.push_back(std::move(coef));
      m.biases_.push_back(mach.at("bias").get<double>());
    }
    m.pool_ = FeatureMatrix::from_values(total, d, std::move(pool), "sv");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid model document: ") + e.what());
  }
  return m;
}

}  // namespace maskopt
