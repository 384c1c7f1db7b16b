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

#include "synthetic.hpp"

#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "rng.hpp"

namespace maskopt {

void SyntheticSpec::validate() const {
  if (n_informative < 1) throw ConfigError("synthetic: n_informative must be at least 1");
  if (num_classes < 2) throw ConfigError("synthetic: need at least 2 classes");
  if (n_samples < 10 * static_cast<std::size_t>(num_classes))
    throw ConfigError("synthetic: n_samples must be at least 10 per class");
  if (!(class_sep >= 0.0 && std::isfinite(class_sep))) throw ConfigError("synthetic: class_sep must be >= 0");
}

SyntheticData generate(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t k = static_cast<std::size_t>(spec.num_classes);
  const std::size_t d_inf = spec.n_informative;
  const std::size_t d = d_inf + spec.n_noise;

  std::vector<std::vector<double>> centroids(k, std::vector<double>(d_inf));
  for (auto& c : centroids) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : c) {
        v = rng.normal();
        norm += v * v;
      }
    } while (norm < 1e-24);
    norm = std::sqrt(norm);
    for (auto& v : c) v = v / norm * spec.class_sep;
  }

  // Random placement of informative columns.
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = d; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<std::size_t> informative_at(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(d_inf));
  FeatureMask truth = FeatureMask::from_indices(d, informative_at);

  std::vector<int> labels(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) labels[i] = static_cast<int>(i % k);
  for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);

  std::vector<double> values(spec.n_samples * d);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    double* row = values.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) row[j] = rng.normal();
    const auto& c = centroids[static_cast<std::size_t>(labels[i])];
    for (std::size_t f = 0; f < d_inf; ++f) row[informative_at[f]] += c[f];
  }

  return {FeatureMatrix::from_values(spec.n_samples, d, std::move(values), "synth"),
          LabelVector(std::move(labels), spec.num_classes), std::move(truth)};
}

}  // namespace maskopt
