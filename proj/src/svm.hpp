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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset_io.hpp"
#include "metrics.hpp"

namespace maskopt {

enum class KernelKind { kLinear, kPolynomial, kRbf, kSigmoid };

std::string to_string(KernelKind kind);
/// Accepts linear, poly|polynomial, rbf, sigmoid.
KernelKind parse_kernel_kind(std::string_view name);

struct KernelSpec {
  KernelKind kind = KernelKind::kRbf;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 0.0;

  /// Throws ConfigError when gamma <= 0 or degree < 1 for kernels that use them.
  void validate() const;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

/// Dense symmetric kernel matrix over the rows of a feature matrix.
class GramMatrix {
 public:
  GramMatrix(const KernelSpec& spec, const FeatureMatrix& x);
  /// Wraps precomputed values (row-major n x n) for solver-level tests.
  GramMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

/// Z-score standardisation fitted on training rows only.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stddevs;

  std::size_t dimension() const { return means.size(); }
};

Scaler fit_scaler(const FeatureMatrix& x_train);
FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& x);

struct SmoOptions {
  double C = 1.0;
  double tol = 1e-3;
  std::size_t max_iterations = 200000;
};

/// Raw dual solution of
///   max  sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
///   s.t. 0 <= alpha_i <= C,  sum_i alpha_i y_i = 0
struct SmoSolution {
  std::vector<double> alpha;
  double rho = 0.0;  // decision f(x) = sum_i alpha_i y_i K(x_i, x) - rho
  double dual_objective = 0.0;
  double final_gap = 0.0;  // max KKT violation m(alpha) - M(alpha)
  std::size_t iterations = 0;
  std::size_t objective_decreases = 0;  // only possible for indefinite kernels
  bool converged = false;
};

/// Pairwise SMO with the maximal-violating-pair working set.
SmoSolution smo_solve(const GramMatrix& k, std::span<const int> y_pm, const SmoOptions& options);

/// Dual objective for an arbitrary alpha vector.
double dual_objective(const GramMatrix& k, std::span<const int> y_pm, std::span<const double> alpha);

struct BinarySvm {
  FeatureMatrix support_vectors;
  std::vector<double> alphas_signed;  // alpha_i * y_i
  double bias = 0.0;                  // f(x) = sum alphas_signed_i K(sv_i, x) + bias
  KernelSpec kernel;
  double C = 1.0;
  SmoSolution diagnostics;

  double decision(std::span<const double> x) const;
};

inline constexpr double kSupportThreshold = 1e-8;

/// Throws DataError when one class is missing. Non-convergence is reported
/// through diagnostics.converged rather than thrown.
BinarySvm smo_train(const FeatureMatrix& x, std::span<const int> y_pm, const KernelSpec& kernel,
                    const SmoOptions& options);

struct SvmConfig {
  KernelKind kernel = KernelKind::kRbf;
  std::optional<double> gamma;  // unset: 1 / (n_features * mean feature variance)
  int degree = 3;
  double coef0 = 0.0;
  double C = 1.0;
  double tol = 1e-3;
  std::size_t max_iterations = 200000;

  void validate() const;
};

nlohmann::json svm_config_json(const SvmConfig& c);
SvmConfig svm_config_from_json(const nlohmann::json& j);

/// One-vs-rest ensemble sharing one scaler. Support vectors of all machines
/// live in one pool; each machine keeps a coefficient per pool row.
class MulticlassSvm {
 public:
  int num_classes() const { return num_classes_; }
  const KernelSpec& kernel() const { return kernel_; }
  const Scaler& scaler() const { return scaler_; }
  double C() const { return c_; }
  std::size_t num_machines() const { return biases_.size(); }
  std::size_t num_support_vectors() const { return pool_.n_samples(); }
  bool converged() const { return converged_; }
  std::size_t objective_decreases() const { return objective_decreases_; }

  /// Decision values for already-scaled rows, n x K row-major.
  std::vector<double> decision_values_scaled(const FeatureMatrix& x_scaled) const;
  std::vector<int> predict(const FeatureMatrix& x) const;

  nlohmann::json to_json() const;
  static MulticlassSvm from_json(const nlohmann::json& j);

  friend MulticlassSvm train_multiclass(const FeatureMatrix&, const LabelVector&, const SvmConfig&, int);

 private:
  int num_classes_ = 0;
  KernelSpec kernel_;
  double c_ = 1.0;
  Scaler scaler_;
  FeatureMatrix pool_;                      // scaled support vectors
  std::vector<std::vector<double>> coefs_;  // per machine, size = pool rows
  std::vector<double> biases_;
  bool converged_ = true;
  std::size_t objective_decreases_ = 0;
};

/// Machine k separates class k from the rest; prediction is argmax of
/// decision values, ties to the lowest class id. For K = 2 a single machine
/// is trained and machine 0 is its negation. `threads` > 1 trains machines
/// concurrently.
MulticlassSvm train_multiclass(const FeatureMatrix& x, const LabelVector& y, const SvmConfig& config,
                               int threads = 1);

struct Evaluation {
  ConfusionMatrix confusion;
  MetricsReport metrics;
};

Evaluation evaluate(const MulticlassSvm& model, const FeatureMatrix& x, const LabelVector& y);

}  // namespace maskopt
