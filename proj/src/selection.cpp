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

#include "selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "errors.hpp"
#include "parallel.hpp"

namespace maskopt {

// ---------------------------------------------------------------------------
// FeatureMask

FeatureMask FeatureMask::from_bitstring(std::string_view bits) {
  FeatureMask m(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1')
      throw DataError("mask bitstring may only contain '0' and '1'");
    m.bits_[i] = bits[i] == '1' ? 1 : 0;
  }
  return m;
}

FeatureMask FeatureMask::from_indices(std::size_t n, std::span<const std::size_t> on) {
  FeatureMask m(n);
  for (std::size_t i : on) {
    if (i >= n) throw DataError("mask index out of range");
    m.bits_[i] = 1;
  }
  return m;
}

std::size_t FeatureMask::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> FeatureMask::selected_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

std::string FeatureMask::to_bitstring() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) s[i] = '1';
  return s;
}

void repair_empty(FeatureMask& mask, Rng& rng) {
  if (mask.size() == 0 || mask.any()) return;
  mask.set(rng.below(mask.size()), true);
}

// ---------------------------------------------------------------------------
// Transfer functions

std::string to_string(Transfer t) { return t == Transfer::kSShaped ? "s-shaped" : "v-shaped"; }

Transfer parse_transfer(std::string_view name) {
  if (name == "s-shaped" || name == "s") return Transfer::kSShaped;
  if (name == "v-shaped" || name == "v") return Transfer::kVShaped;
  throw ConfigError("unknown transfer '" + std::string(name) + "' (expected s-shaped|v-shaped)");
}

double s_shaped(double v) { return 1.0 / (1.0 + std::exp(-v)); }
double v_shaped(double v) { return std::abs(std::tanh(v)); }

FeatureMask binarize(std::span<const double> values, Transfer transfer, Rng& rng,
                     const FeatureMask& current) {
  if (transfer == Transfer::kVShaped && current.size() != values.size())
    throw DataError("binarize: current mask length differs from input length");
  FeatureMask out(values.size());
  for (std::size_t d = 0; d < values.size(); ++d) {
    if (!std::isfinite(values[d]))
      throw NumericError("binarize: non-finite component at index " + std::to_string(d));
    const double u = rng.uniform();
    if (transfer == Transfer::kSShaped)
      out.set(d, u < s_shaped(values[d]));
    else
      out.set(d, u < v_shaped(values[d]) ? !current[d] : current[d]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitness

std::optional<double> ScoreCache::find(const FeatureMask& mask) const {
  std::lock_guard lock(mu_);
  auto it = scores_.find(mask);
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::insert(const FeatureMask& mask, double score) {
  std::lock_guard lock(mu_);
  scores_.emplace(mask, score);
}

std::size_t ScoreCache::size() const {
  std::lock_guard lock(mu_);
  return scores_.size();
}

FitnessContext::FitnessContext(const MaskEvaluator& evaluator, double alpha, int threads,
                               std::shared_ptr<ScoreCache> cache)
    : evaluator_(evaluator),
      alpha_(alpha),
      threads_(std::max(1, threads)),
      cache_(cache ? std::move(cache) : std::make_shared<ScoreCache>()) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("fitness alpha must lie in [0, 1]");
  if (evaluator.num_features() == 0) throw ConfigError("fitness: evaluator has no features");
}

double FitnessContext::combine(double score, std::size_t popcount) const {
  const double n = static_cast<double>(num_features());
  return alpha_ * score + (1.0 - alpha_) * (1.0 - static_cast<double>(popcount) / n);
}

std::vector<double> FitnessContext::evaluate(std::span<const FeatureMask> masks) {
  const std::size_t n = num_features();
  for (const auto& m : masks) {
    if (m.size() != n)
      throw ConfigError("fitness: mask length " + std::to_string(m.size()) + " differs from " +
                        std::to_string(n) + " features");
    if (!m.any()) throw ConfigError("fitness: all-zero mask submitted without repair");
  }

  std::vector<std::optional<double>> scores(masks.size());
  std::map<FeatureMask, std::size_t> first_seen;
  std::vector<std::size_t> todo;  // indices of first occurrences needing a score
  for (std::size_t i = 0; i < masks.size(); ++i) {
    if (first_seen.count(masks[i])) continue;
    first_seen.emplace(masks[i], i);
    scores[i] = cache_->find(masks[i]);
    if (!scores[i]) todo.push_back(i);
  }

  std::vector<double> fresh(todo.size());
  parallel_for(todo.size(), threads_, [&](std::size_t k) {
    const double s = evaluator_.score(masks[todo[k]]);
    if (!std::isfinite(s)) throw NumericError("fitness: evaluator returned a non-finite score");
    fresh[k] = s;
  });
  for (std::size_t k = 0; k < todo.size(); ++k) {
    cache_->insert(masks[todo[k]], fresh[k]);
    scores[todo[k]] = fresh[k];
  }
  evaluator_calls_ += todo.size() * evaluator_.fold_factor();
  fitness_calls_ += masks.size();

  std::vector<double> out(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const double s = scores[i] ? *scores[i] : *scores[first_seen.at(masks[i])];
    out[i] = combine(s, masks[i].popcount());
  }
  return out;
}

double FitnessContext::evaluate(const FeatureMask& mask) {
  return evaluate(std::span<const FeatureMask>(&mask, 1)).front();
}

// ---------------------------------------------------------------------------
// Trace

std::string trace_to_csv(const ConvergenceTrace& trace) {
  std::ostringstream os;
  os << "iteration,best_fitness,mean_fitness,best_popcount,evaluations\n";
  char buf[160];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%zu,%zu\n", r.iteration, r.best_fitness, r.mean_fitness,
                  r.best_popcount, r.evaluations);
    os << buf;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Configuration

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kGa: return "ga";
    case Algorithm::kAbc: return "abc";
    case Algorithm::kPso: return "pso";
    case Algorithm::kHho: return "hho";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "ga") return Algorithm::kGa;
  if (name == "abc") return Algorithm::kAbc;
  if (name == "pso") return Algorithm::kPso;
  if (name == "hho") return Algorithm::kHho;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected ga|abc|pso|hho)");
}

namespace {
void check_rate(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}
}  // namespace

void OptimizerConfig::validate() const {
  if (population < 4) throw ConfigError("population must be at least 4");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  check_rate(ga.crossover_rate, "ga.crossover_rate");
  if (ga.mutation_rate) check_rate(*ga.mutation_rate, "ga.mutation_rate");
  if (ga.tournament < 1) throw ConfigError("ga.tournament must be at least 1");
  if (ga.elite >= population) throw ConfigError("ga.elite must be smaller than the population");
  check_rate(abc.borrow_rate, "abc.borrow_rate");
  if (abc.limit && *abc.limit < 1) throw ConfigError("abc.limit must be at least 1");
  if (!(pso.v_max >= 0.0)) throw ConfigError("pso.v_max must be non-negative");
  if (!(pso.c1 >= 0.0 && pso.c2 >= 0.0)) throw ConfigError("pso.c1 and pso.c2 must be non-negative");
  if (!std::isfinite(pso.inertia_start) || !std::isfinite(pso.inertia_end))
    throw ConfigError("pso inertia must be finite");
  if (!(hho.levy_beta > 0.0 && hho.levy_beta <= 2.0)) throw ConfigError("hho.levy_beta must lie in (0, 2]");
  if (!(hho.position_bound > 0.0)) throw ConfigError("hho.position_bound must be positive");
}

nlohmann::json optimizer_config_json(const OptimizerConfig& c) {
  nlohmann::json ga{{"tournament", c.ga.tournament}, {"crossover_rate", c.ga.crossover_rate}, {"elite", c.ga.elite}};
  ga["mutation_rate"] = c.ga.mutation_rate ? nlohmann::json(*c.ga.mutation_rate) : nlohmann::json(nullptr);
  nlohmann::json abc{{"borrow_rate", c.abc.borrow_rate}};
  abc["limit"] = c.abc.limit ? nlohmann::json(*c.abc.limit) : nlohmann::json(nullptr);
  return {{"algorithm", to_string(c.algorithm)},
          {"population", c.population},
          {"iterations", c.iterations},
          {"seed", c.seed},
          {"transfer", to_string(c.transfer)},
          {"ga", ga},
          {"abc", abc},
          {"pso",
           {{"inertia_start", c.pso.inertia_start},
            {"inertia_end", c.pso.inertia_end},
            {"c1", c.pso.c1},
            {"c2", c.pso.c2},
            {"v_max", c.pso.v_max}}},
          {"hho", {{"levy_beta", c.hho.levy_beta}, {"position_bound", c.hho.position_bound}}}};
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown key '" + where + it.key() + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) out.reset();
  else out = j.at(key).get<T>();
}

}  // namespace

OptimizerConfig optimizer_config_from_json(const nlohmann::json& j) {
  OptimizerConfig c;
  if (!j.is_object()) throw ConfigError("optimizer settings must be an object");
  try {
    reject_unknown(j, {"algorithm", "population", "iterations", "seed", "transfer", "ga", "abc", "pso", "hho"},
                   "selection.");
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (j.contains("transfer")) c.transfer = parse_transfer(j.at("transfer").get<std::string>());
    read(j, "population", c.population);
    read(j, "iterations", c.iterations);
    read(j, "seed", c.seed);
    if (j.contains("ga")) {
      const auto& g = j.at("ga");
      reject_unknown(g, {"tournament", "crossover_rate", "mutation_rate", "elite"}, "selection.ga.");
      read(g, "tournament", c.ga.tournament);
      read(g, "crossover_rate", c.ga.crossover_rate);
      read(g, "mutation_rate", c.ga.mutation_rate);
      read(g, "elite", c.ga.elite);
    }
    if (j.contains("abc")) {
      const auto& a = j.at("abc");
      reject_unknown(a, {"limit", "borrow_rate"}, "selection.abc.");
      read(a, "limit", c.abc.limit);
      read(a, "borrow_rate", c.abc.borrow_rate);
    }
    if (j.contains("pso")) {
      const auto& p = j.at("pso");
      reject_unknown(p, {"inertia_start", "inertia_end", "c1", "c2", "v_max"}, "selection.pso.");
      read(p, "inertia_start", c.pso.inertia_start);
      read(p, "inertia_end", c.pso.inertia_end);
      read(p, "c1", c.pso.c1);
      read(p, "c2", c.pso.c2);
      read(p, "v_max", c.pso.v_max);
    }
    if (j.contains("hho")) {
      const auto& h = j.at("hho");
      reject_unknown(h, {"levy_beta", "position_bound"}, "selection.hho.");
      read(h, "levy_beta", c.hho.levy_beta);
      read(h, "position_bound", c.hho.position_bound);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid selection settings: ") + e.what());
  }
  c.validate();
  return c;
}

std::size_t fitness_call_bound(const OptimizerConfig& c) {
  return c.population * (c.iterations + 1);
}

SelectionResult run_optimizer(const OptimizerConfig& config, FitnessContext& ctx) {
  switch (config.algorithm) {
    case Algorithm::kGa: return run_ga(config, ctx);
    case Algorithm::kAbc: return run_abc(config, ctx);
    case Algorithm::kPso: return run_pso(config, ctx);
    case Algorithm::kHho: return run_hho(config, ctx);
  }
  throw ConfigError("unknown algorithm");
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

ExhaustiveResult exhaustive_search(FitnessContext& ctx) {
  const std::size_t n = ctx.num_features();
  if (n > kExhaustiveCap)
    throw ConfigError("exhaustive search is capped at " + std::to_string(kExhaustiveCap) + " features, got " +
                      std::to_string(n));
  const std::uint64_t total = (std::uint64_t{1} << n) - 1;
  constexpr std::uint64_t kChunk = 4096;

  ExhaustiveResult best;
  bool have = false;
  auto better = [&](const FeatureMask& m, double f) {
    if (!have) return true;
    if (f != best.best_fitness) return f > best.best_fitness;
    if (m.popcount() != best.best_mask.popcount()) return m.popcount() < best.best_mask.popcount();
    return m < best.best_mask;
  };

  for (std::uint64_t start = 1; start <= total; start += kChunk) {
    const std::uint64_t end = std::min(total + 1, start + kChunk);
    std::vector<FeatureMask> batch;
    batch.reserve(end - start);
    for (std::uint64_t code = start; code < end; ++code) {
      FeatureMask m(n);
      for (std::size_t b = 0; b < n; ++b) m.set(b, (code >> b) & 1U);
      batch.push_back(std::move(m));
    }
    const auto fit = ctx.evaluate(batch);
    for (std::size_t k = 0; k < batch.size(); ++k) {
      if (better(batch[k], fit[k])) {
        best.best_mask = batch[k];
        best.best_fitness = fit[k];
        have = true;
      }
    }
  }
  return best;
}

}  // namespace maskopt
