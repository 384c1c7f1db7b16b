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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rng.hpp"

namespace maskopt {

/// Length-N inclusion vector; bit i set keeps feature i.
class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}
  /// Parses a string of '0'/'1' characters; bit i is character i.
  static FeatureMask from_bitstring(std::string_view bits);
  static FeatureMask from_indices(std::size_t n, std::span<const std::size_t> on);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }

  std::size_t popcount() const;
  bool any() const { return popcount() > 0; }
  std::vector<std::size_t> selected_indices() const;
  std::string to_bitstring() const;

  auto operator<=>(const FeatureMask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Sets one uniformly chosen bit of an all-zero mask. Always consumes exactly
/// one draw when the mask is empty and none otherwise.
void repair_empty(FeatureMask& mask, Rng& rng);

enum class Transfer { kSShaped, kVShaped };

std::string to_string(Transfer t);
Transfer parse_transfer(std::string_view name);

double s_shaped(double v);
double v_shaped(double v);

/// Maps a continuous vector to bits. S-shaped: bit = 1 with probability
/// 1/(1+exp(-v)). V-shaped: bit of `current` flips with probability
/// |tanh(v)|. Consumes exactly values.size() draws.
FeatureMask binarize(std::span<const double> values, Transfer transfer, Rng& rng,
                     const FeatureMask& current);

/// Scores a feature subset. Implementations must be pure functions of the
/// mask: the same mask always yields the same score.
class MaskEvaluator {
 public:
  virtual ~MaskEvaluator() = default;
  virtual std::size_t num_features() const = 0;
  /// Classifier trainings per score() call (folds under cross-validation).
  virtual std::size_t fold_factor() const { return 1; }
  virtual double score(const FeatureMask& mask) const = 0;
};

/// Evaluator over an arbitrary function; used for analytic landscapes.
class FunctionEvaluator final : public MaskEvaluator {
 public:
  FunctionEvaluator(std::size_t n, std::function<double(const FeatureMask&)> fn)
      : n_(n), fn_(std::move(fn)) {}
  std::size_t num_features() const override { return n_; }
  double score(const FeatureMask& mask) const override { return fn_(mask); }

 private:
  std::size_t n_;
  std::function<double(const FeatureMask&)> fn_;
};

/// Thread-safe memo of evaluator scores, shareable across runs that use the
/// same evaluator.
class ScoreCache {
 public:
  std::optional<double> find(const FeatureMask& mask) const;
  void insert(const FeatureMask& mask, double score);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<FeatureMask, double> scores_;
};

/// fitness = alpha * score + (1 - alpha) * (1 - popcount / N).
class FitnessContext {
 public:
  FitnessContext(const MaskEvaluator& evaluator, double alpha, int threads = 1,
                 std::shared_ptr<ScoreCache> cache = nullptr);

  std::size_t num_features() const { return evaluator_.num_features(); }
  double alpha() const { return alpha_; }
  int threads() const { return threads_; }

  /// Batch evaluation. Distinct uncached masks are scored in parallel and
  /// the results are independent of thread count. Throws ConfigError if any
  /// mask is all-zero or of the wrong length.
  std::vector<double> evaluate(std::span<const FeatureMask> masks);
  double evaluate(const FeatureMask& mask);

  /// Fitness for a known score without touching counters.
  double combine(double score, std::size_t popcount) const;

  std::size_t fitness_calls() const { return fitness_calls_; }
  /// Classifier trainings actually performed (cache misses x fold factor).
  std::size_t evaluator_calls() const { return evaluator_calls_; }

 private:
  const MaskEvaluator& evaluator_;
  double alpha_;
  int threads_;
  std::shared_ptr<ScoreCache> cache_;
  std::size_t fitness_calls_ = 0;
  std::size_t evaluator_calls_ = 0;
};

struct TraceRecord {
  std::size_t iteration = 0;  // 0 is the initial population
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t best_popcount = 0;
  std::size_t evaluations = 0;  // cumulative fitness calls
  std::size_t resets = 0;       // scout resets (ABC only)
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;
  FeatureMask best_mask;
  double best_fitness = 0.0;
  std::size_t evaluations = 0;
};

/// CSV with columns iteration,best_fitness,mean_fitness,best_popcount,evaluations.
std::string trace_to_csv(const ConvergenceTrace& trace);

enum class Algorithm { kGa, kAbc, kPso, kHho };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct GaParams {
  std::size_t tournament = 3;
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // unset: 1 / N
  std::size_t elite = 1;
};

struct AbcParams {
  std::optional<std::size_t> limit;  // unset: N * (population / 2)
  double borrow_rate = 0.5;          // per-bit chance of copying the peer's bit
};

struct PsoParams {
  double inertia_start = 0.9;
  double inertia_end = 0.4;
  double c1 = 2.0;
  double c2 = 2.0;
  double v_max = 6.0;
};

struct HhoParams {
  double levy_beta = 1.5;
  double position_bound = 6.0;  // continuous positions live in [-bound, bound]
};

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::kHho;
  std::size_t population = 20;
  std::size_t iterations = 50;
  std::uint64_t seed = 1;
  Transfer transfer = Transfer::kSShaped;
  GaParams ga;
  AbcParams abc;
  PsoParams pso;
  HhoParams hho;

  /// Throws ConfigError on population < 4, iterations < 1 or rates outside [0, 1].
  void validate() const;
};

nlohmann::json optimizer_config_json(const OptimizerConfig& c);
/// Fills fields present in `j` over defaults; unknown keys are rejected.
OptimizerConfig optimizer_config_from_json(const nlohmann::json& j);

struct SelectionResult {
  FeatureMask best_mask;
  double best_fitness = 0.0;
  ConvergenceTrace trace;
};

SelectionResult run_ga(const OptimizerConfig& config, FitnessContext& ctx);
SelectionResult run_abc(const OptimizerConfig& config, FitnessContext& ctx);
SelectionResult run_pso(const OptimizerConfig& config, FitnessContext& ctx);
SelectionResult run_hho(const OptimizerConfig& config, FitnessContext& ctx);
SelectionResult run_optimizer(const OptimizerConfig& config, FitnessContext& ctx);

/// Upper bound on fitness calls for one run: population * (iterations + 1).
std::size_t fitness_call_bound(const OptimizerConfig& config);

/// HHO escape energy 2 * e0 * (1 - t / T).
double escape_energy(double e0, std::size_t t, std::size_t total);

/// Mantegna Levy step with index beta; consumes four draws (two normals).
double levy_step(double beta, Rng& rng);

inline constexpr std::size_t kExhaustiveCap = 20;

struct ExhaustiveResult {
  FeatureMask best_mask;
  double best_fitness = 0.0;
};

/// Global optimum over all non-empty masks. Ties go to the smaller
/// popcount, then to the lexicographically smaller bitstring.
ExhaustiveResult exhaustive_search(FitnessContext& ctx);

}  // namespace maskopt
