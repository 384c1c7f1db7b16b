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

// Binary GA, ABC, PSO and HHO over a FitnessContext.
//
// Every stochastic decision for individual i in iteration t draws from
// Rng::substream(seed, {t, i, phase}), and each iteration's candidates are
// scored as one batch. Results are therefore independent of how many threads
// the context uses.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "selection.hpp"

namespace maskopt {

namespace {

enum Phase : std::uint64_t {
  kInit = 1,
  kGaBreed = 2,
  kAbcEmployed = 3,
  kAbcOnlooker = 4,
  kAbcScout = 5,
  kPsoMove = 6,
  kHhoMove = 7,
};

FeatureMask random_mask(std::size_t n, Rng& rng) {
  FeatureMask m(n);
  for (std::size_t d = 0; d < n; ++d) m.set(d, rng.uniform() < 0.5);
  repair_empty(m, rng);
  return m;
}

/// Elitist best-so-far store plus trace bookkeeping.
class Archive {
 public:
  explicit Archive(const FitnessContext& ctx) : ctx_(ctx), start_calls_(ctx.fitness_calls()) {}

  /// Returns true when the candidate becomes the new best.
  bool offer(const FeatureMask& m, double f) {
    if (have_ && !(f > best_fitness_)) return false;
    best_ = m;
    best_fitness_ = f;
    have_ = true;
    return true;
  }

  void record(std::size_t iteration, std::span<const double> population_fitness, std::size_t resets = 0) {
    TraceRecord r;
    r.iteration = iteration;
    r.best_fitness = best_fitness_;
    r.mean_fitness = population_fitness.empty()
                         ? best_fitness_
                         : std::accumulate(population_fitness.begin(), population_fitness.end(), 0.0) /
                               static_cast<double>(population_fitness.size());
    r.best_popcount = best_.popcount();
    r.evaluations = ctx_.fitness_calls() - start_calls_;
    r.resets = resets;
    records_.push_back(r);
  }

  const FeatureMask& best() const { return best_; }
  double best_fitness() const { return best_fitness_; }

  SelectionResult finish() const {
    SelectionResult out;
    out.best_mask = best_;
    out.best_fitness = best_fitness_;
    out.trace.records = records_;
    out.trace.best_mask = best_;
    out.trace.best_fitness = best_fitness_;
    out.trace.evaluations = ctx_.fitness_calls() - start_calls_;
    return out;
  }

 private:
  const FitnessContext& ctx_;
  std::size_t start_calls_;
  FeatureMask best_;
  double best_fitness_ = 0.0;
  bool have_ = false;
  std::vector<TraceRecord> records_;
};

std::vector<FeatureMask> initial_population(const OptimizerConfig& c, std::size_t count, std::size_t n) {
  std::vector<FeatureMask> pop;
  pop.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::substream(c.seed, {0, i, kInit});
    pop.push_back(random_mask(n, rng));
  }
  return pop;
}

void offer_all(Archive& archive, std::span<const FeatureMask> pop, std::span<const double> fit) {
  for (std::size_t i = 0; i < pop.size(); ++i) archive.offer(pop[i], fit[i]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Genetic algorithm: tournament selection, uniform crossover, per-bit
// mutation, elitism.

SelectionResult run_ga(const OptimizerConfig& c, FitnessContext& ctx) {
  c.validate();
  const std::size_t n = ctx.num_features();
  const std::size_t pop_size = c.population;
  const double mutation = c.ga.mutation_rate.value_or(1.0 / static_cast<double>(n));

  Archive archive(ctx);
  auto pop = initial_population(c, pop_size, n);
  auto fit = ctx.evaluate(pop);
  offer_all(archive, pop, fit);
  archive.record(0, fit);

  auto tournament = [&](Rng& rng) {
    std::size_t best = rng.below(pop_size);
    for (std::size_t k = 1; k < c.ga.tournament; ++k) {
      const std::size_t cand = rng.below(pop_size);
      if (fit[cand] > fit[best] || (fit[cand] == fit[best] && cand < best)) best = cand;
    }
    return best;
  };

  for (std::size_t t = 1; t <= c.iterations; ++t) {
    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fit[a] > fit[b]; });

    std::vector<FeatureMask> next;
    std::vector<double> next_fit;
    for (std::size_t e = 0; e < c.ga.elite; ++e) {
      next.push_back(pop[order[e]]);
      next_fit.push_back(fit[order[e]]);
    }
    std::vector<FeatureMask> children;
    for (std::size_t i = c.ga.elite; i < pop_size; ++i) {
      Rng rng = Rng::substream(c.seed, {t, i, kGaBreed});
      const FeatureMask& a = pop[tournament(rng)];
      const FeatureMask& b = pop[tournament(rng)];
      FeatureMask child = a;
      if (rng.uniform() < c.ga.crossover_rate)
        for (std::size_t d = 0; d < n; ++d) child.set(d, rng.uniform() < 0.5 ? a[d] : b[d]);
      for (std::size_t d = 0; d < n; ++d)
        if (rng.uniform() < mutation) child.flip(d);
      repair_empty(child, rng);
      children.push_back(std::move(child));
    }
    const auto child_fit = ctx.evaluate(children);
    offer_all(archive, children, child_fit);
    next.insert(next.end(), children.begin(), children.end());
    next_fit.insert(next_fit.end(), child_fit.begin(), child_fit.end());
    pop = std::move(next);
    fit = std::move(next_fit);
    archive.record(t, fit);
  }
  return archive.finish();
}

// ---------------------------------------------------------------------------
// Artificial bee colony. population / 2 food sources; employed bees and
// onlookers each spend one evaluation per source per cycle. A source whose
// trial counter reaches `limit` is replaced by a random mask that is scored
// in the next cycle's employed slot for that source.

SelectionResult run_abc(const OptimizerConfig& c, FitnessContext& ctx) {
  c.validate();
  const std::size_t n = ctx.num_features();
  const std::size_t sources = std::max<std::size_t>(2, c.population / 2);
  const std::size_t limit = c.abc.limit.value_or(n * sources);

  Archive archive(ctx);
  auto food = initial_population(c, sources, n);
  auto fit = ctx.evaluate(food);
  offer_all(archive, food, fit);
  archive.record(0, fit);

  std::vector<std::size_t> trial(sources, 0);
  std::vector<char> pending(sources, 0);

  auto neighbour = [&](std::size_t i, Rng& rng) {
    std::size_t peer = rng.below(sources - 1);
    if (peer >= i) ++peer;
    FeatureMask v = food[i];
    for (std::size_t d = 0; d < n; ++d)
      if (rng.uniform() < c.abc.borrow_rate) v.set(d, food[peer][d]);
    if (v == food[i]) v.flip(rng.below(n));
    repair_empty(v, rng);
    return v;
  };

  for (std::size_t t = 1; t <= c.iterations; ++t) {
    // Employed bees.
    std::vector<FeatureMask> cand;
    cand.reserve(sources);
    for (std::size_t i = 0; i < sources; ++i) {
      Rng rng = Rng::substream(c.seed, {t, i, kAbcEmployed});
      cand.push_back(pending[i] ? food[i] : neighbour(i, rng));
    }
    auto cand_fit = ctx.evaluate(cand);
    for (std::size_t i = 0; i < sources; ++i) {
      archive.offer(cand[i], cand_fit[i]);
      if (pending[i]) {
        fit[i] = cand_fit[i];
        pending[i] = 0;
        trial[i] = 0;
      } else if (cand_fit[i] > fit[i]) {
        food[i] = std::move(cand[i]);
        fit[i] = cand_fit[i];
        trial[i] = 0;
      } else {
        ++trial[i];
      }
    }

    // Onlookers choose sources in proportion to fitness.
    const double total = std::accumulate(fit.begin(), fit.end(), 0.0);
    std::vector<std::size_t> chosen(sources);
    cand.clear();
    for (std::size_t o = 0; o < sources; ++o) {
      Rng rng = Rng::substream(c.seed, {t, o, kAbcOnlooker});
      std::size_t s = sources - 1;
      if (total > 0.0) {
        double u = rng.uniform() * total;
        for (std::size_t i = 0; i < sources; ++i) {
          if (u < fit[i]) { s = i; break; }
          u -= fit[i];
        }
      } else {
        s = rng.below(sources);
      }
      chosen[o] = s;
      cand.push_back(neighbour(s, rng));
    }
    cand_fit = ctx.evaluate(cand);
    for (std::size_t o = 0; o < sources; ++o) {
      const std::size_t s = chosen[o];
      archive.offer(cand[o], cand_fit[o]);
      if (cand_fit[o] > fit[s]) {
        food[s] = std::move(cand[o]);
        fit[s] = cand_fit[o];
        trial[s] = 0;
      } else {
        ++trial[s];
      }
    }

    // Scouts.
    std::size_t resets = 0;
    for (std::size_t i = 0; i < sources; ++i) {
      if (trial[i] < limit) continue;
      Rng rng = Rng::substream(c.seed, {t, i, kAbcScout});
      food[i] = random_mask(n, rng);
      pending[i] = 1;
      trial[i] = 0;
      ++resets;
    }

    std::vector<double> live;
    for (std::size_t i = 0; i < sources; ++i)
      if (!pending[i]) live.push_back(fit[i]);
    archive.record(t, live.empty() ? std::span<const double>(fit) : std::span<const double>(live), resets);
  }
  return archive.finish();
}

// ---------------------------------------------------------------------------
// Binary PSO: real velocities over 0/1 positions, mapped back through the
// transfer function each step.

SelectionResult run_pso(const OptimizerConfig& c, FitnessContext& ctx) {
  c.validate();
  const std::size_t n = ctx.num_features();
  const std::size_t p = c.population;
  const auto& prm = c.pso;

  Archive archive(ctx);
  std::vector<FeatureMask> x;
  std::vector<std::vector<double>> v(p, std::vector<double>(n));
  for (std::size_t i = 0; i < p; ++i) {
    Rng rng = Rng::substream(c.seed, {0, i, kInit});
    x.push_back(random_mask(n, rng));
    for (auto& vd : v[i]) vd = rng.uniform(-prm.v_max, prm.v_max);
  }
  auto fit = ctx.evaluate(x);
  offer_all(archive, x, fit);
  archive.record(0, fit);
  auto pbest = x;
  auto pbest_fit = fit;

  for (std::size_t t = 1; t <= c.iterations; ++t) {
    const double frac = c.iterations > 1 ? static_cast<double>(t - 1) / static_cast<double>(c.iterations - 1) : 0.0;
    const double w = prm.inertia_start + (prm.inertia_end - prm.inertia_start) * frac;
    const FeatureMask gbest = archive.best();
    for (std::size_t i = 0; i < p; ++i) {
      Rng rng = Rng::substream(c.seed, {t, i, kPsoMove});
      for (std::size_t d = 0; d < n; ++d) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        const double xd = x[i][d] ? 1.0 : 0.0;
        double vd = w * v[i][d] + prm.c1 * r1 * ((pbest[i][d] ? 1.0 : 0.0) - xd) +
                    prm.c2 * r2 * ((gbest[d] ? 1.0 : 0.0) - xd);
        v[i][d] = std::clamp(vd, -prm.v_max, prm.v_max);
      }
      x[i] = binarize(v[i], c.transfer, rng, x[i]);
      repair_empty(x[i], rng);
    }
    fit = ctx.evaluate(x);
    for (std::size_t i = 0; i < p; ++i) {
      if (fit[i] > pbest_fit[i]) {
        pbest[i] = x[i];
        pbest_fit[i] = fit[i];
      }
      archive.offer(x[i], fit[i]);
    }
    archive.record(t, fit);
  }
  return archive.finish();
}

// ---------------------------------------------------------------------------
// Harris hawks optimisation on continuous positions in [-bound, bound],
// binarised for scoring. Hawks move against the population snapshot of the
// iteration start and keep a move only if it does not worsen their fitness.
// When a rapid dive Y fails, its Levy probe Z is scored as the hawk's move in
// the following iteration, so every iteration costs exactly one call per hawk.

double escape_energy(double e0, std::size_t t, std::size_t total) {
  return 2.0 * e0 * (1.0 - static_cast<double>(t) / static_cast<double>(total));
}

double levy_step(double beta, Rng& rng) {
  const double sigma =
      std::pow(std::tgamma(1.0 + beta) * std::sin(M_PI * beta / 2.0) /
                   (std::tgamma((1.0 + beta) / 2.0) * beta * std::pow(2.0, (beta - 1.0) / 2.0)),
               1.0 / beta);
  const double u = rng.normal() * sigma;
  const double v = rng.normal();
  return 0.01 * u / std::pow(std::abs(v) + 1e-300, 1.0 / beta);
}

SelectionResult run_hho(const OptimizerConfig& c, FitnessContext& ctx) {
  c.validate();
  const std::size_t n = ctx.num_features();
  const std::size_t p = c.population;
  const double lb = -c.hho.position_bound;
  const double ub = c.hho.position_bound;
  // S-shaped reads bits off the position; v-shaped flips bits of the current
  // mask with probability |tanh| of the displacement.
  auto to_mask = [&](const std::vector<double>& x, const std::vector<double>& from, Rng& rng,
                     const FeatureMask& current) {
    if (c.transfer == Transfer::kSShaped) return binarize(x, c.transfer, rng, current);
    std::vector<double> step(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) step[d] = x[d] - from[d];
    return binarize(step, c.transfer, rng, current);
  };

  using Position = std::vector<double>;
  auto clamp_all = [&](Position& x) {
    for (auto& xd : x) xd = std::clamp(xd, lb, ub);
  };

  Archive archive(ctx);
  std::vector<Position> pos(p, Position(n));
  std::vector<FeatureMask> mask;
  for (std::size_t i = 0; i < p; ++i) {
    Rng rng = Rng::substream(c.seed, {0, i, kInit});
    for (auto& xd : pos[i]) xd = rng.uniform(lb, ub);
    if (c.transfer == Transfer::kSShaped) {
      mask.push_back(binarize(pos[i], c.transfer, rng, FeatureMask(n)));
      repair_empty(mask.back(), rng);
    } else {
      mask.push_back(random_mask(n, rng));
    }
  }
  auto fit = ctx.evaluate(mask);
  Position rabbit;
  for (std::size_t i = 0; i < p; ++i)
    if (archive.offer(mask[i], fit[i])) rabbit = pos[i];
  archive.record(0, fit);

  struct Move {
    Rng rng{0};
    Position candidate;
    FeatureMask candidate_mask;
    bool dive = false;
  };
  // Levy probe Z of a failed dive, spent as the hawk's next move.
  struct Probe {
    Position z;
    FeatureMask mask;
  };
  std::vector<std::optional<Probe>> pending(p);

  for (std::size_t t = 1; t <= c.iterations; ++t) {
    Position mean(n, 0.0);
    for (const auto& x : pos)
      for (std::size_t d = 0; d < n; ++d) mean[d] += x[d] / static_cast<double>(p);

    std::vector<Move> moves(p);
    std::vector<FeatureMask> batch;
    for (std::size_t i = 0; i < p; ++i) {
      Move& mv = moves[i];
      mv.rng = Rng::substream(c.seed, {t, i, kHhoMove});
      if (pending[i]) {
        mv.candidate = std::move(pending[i]->z);
        mv.candidate_mask = std::move(pending[i]->mask);
        pending[i].reset();
        batch.push_back(mv.candidate_mask);
        continue;
      }
      Rng& rng = mv.rng;
      const Position& x = pos[i];
      const double e0 = 2.0 * rng.uniform() - 1.0;
      const double energy = escape_energy(e0, t, c.iterations);
      const double jump = 2.0 * (1.0 - rng.uniform());
      Position next(n);

      if (std::abs(energy) >= 1.0) {
        // Exploration: perch on a random hawk or relative to the flock mean.
        const double q = rng.uniform();
        if (q >= 0.5) {
          const Position& other = pos[rng.below(p)];
          const double r1 = rng.uniform(), r2 = rng.uniform();
          for (std::size_t d = 0; d < n; ++d) next[d] = other[d] - r1 * std::abs(other[d] - 2.0 * r2 * x[d]);
        } else {
          const double r3 = rng.uniform(), r4 = rng.uniform();
          for (std::size_t d = 0; d < n; ++d) next[d] = (rabbit[d] - mean[d]) - r3 * (lb + r4 * (ub - lb));
        }
      } else {
        const double r = rng.uniform();
        const bool soft = std::abs(energy) >= 0.5;
        if (r >= 0.5 && soft) {
          for (std::size_t d = 0; d < n; ++d)
            next[d] = (rabbit[d] - x[d]) - energy * std::abs(jump * rabbit[d] - x[d]);
        } else if (r >= 0.5) {
          for (std::size_t d = 0; d < n; ++d) next[d] = rabbit[d] - energy * std::abs(rabbit[d] - x[d]);
        } else {
          // Progressive rapid dives.
          const Position& ref = soft ? x : mean;
          for (std::size_t d = 0; d < n; ++d)
            next[d] = rabbit[d] - energy * std::abs(jump * rabbit[d] - ref[d]);
          mv.dive = true;
        }
      }
      clamp_all(next);
      mv.candidate_mask = to_mask(next, pos[i], rng, mask[i]);
      repair_empty(mv.candidate_mask, rng);
      mv.candidate = std::move(next);
      batch.push_back(mv.candidate_mask);
    }
    const auto cand_fit = ctx.evaluate(batch);

    for (std::size_t i = 0; i < p; ++i) {
      Move& mv = moves[i];
      if (cand_fit[i] >= fit[i]) {
        pos[i] = std::move(mv.candidate);
        mask[i] = std::move(mv.candidate_mask);
        fit[i] = cand_fit[i];
        if (archive.offer(mask[i], fit[i])) rabbit = pos[i];
        continue;
      }
      if (!mv.dive || t == c.iterations) continue;
      Position z = std::move(mv.candidate);
      for (std::size_t d = 0; d < n; ++d) {
        const double s = mv.rng.uniform();
        z[d] += s * levy_step(c.hho.levy_beta, mv.rng);
      }
      clamp_all(z);
      FeatureMask zm = to_mask(z, pos[i], mv.rng, mask[i]);
      repair_empty(zm, mv.rng);
      pending[i] = Probe{std::move(z), std::move(zm)};
    }
    archive.record(t, fit);
  }
  return archive.finish();
}

}  // namespace maskopt
