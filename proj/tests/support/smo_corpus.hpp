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

// Small SVM dual problems (4 to 10 points) shared by the solver tests and the
// acceptance run.

#include <string>
#include <vector>

#include "dataset_io.hpp"
#include "rng.hpp"
#include "svm.hpp"

namespace smo_corpus {

struct Problem {
  std::string name;
  maskopt::FeatureMatrix x;
  std::vector<int> y;
  maskopt::KernelSpec kernel;
  double C = 1.0;
};

inline Problem fixed(std::string name, std::vector<double> pts, std::vector<int> y, maskopt::KernelSpec k, double c) {
  const std::size_t n = y.size();
  const std::size_t d = pts.size() / n;
  auto x = maskopt::FeatureMatrix::from_values(n, d, std::move(pts));
  return {std::move(name), std::move(x), std::move(y), k, c};
}

inline std::vector<Problem> build() {
  using maskopt::KernelKind;
  std::vector<Problem> out;
  out.push_back(fixed("separable-4", {0, 0, 2, 2, 0, 1, 2, 3}, {-1, 1, -1, 1}, {KernelKind::kLinear}, 10.0));
  out.push_back(fixed("xor-rbf", {0, 0, 1, 1, 0, 1, 1, 0}, {1, 1, -1, -1}, {KernelKind::kRbf, 1.0}, 10.0));

  const KernelKind kinds[] = {KernelKind::kLinear, KernelKind::kRbf, KernelKind::kPolynomial};
  const double cs[] = {0.1, 1.0, 10.0};
  maskopt::Rng rng(2024);
  int id = 0;
  for (std::size_t n = 4; n <= 10; ++n) {
    for (KernelKind kind : kinds) {
      for (double c : cs) {
        std::vector<double> pts(n * 2);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
          y[i] = i % 2 == 0 ? 1 : -1;
          pts[2 * i] = rng.normal() + 0.8 * y[i];
          pts[2 * i + 1] = rng.normal();
        }
        maskopt::KernelSpec k{kind, 0.5, 2, 1.0};
        out.push_back(fixed("random-" + std::to_string(id++) + "-n" + std::to_string(n), std::move(pts), std::move(y),
                            k, c));
      }
    }
  }
  return out;
}

inline std::vector<double> gram_values(const Problem& p) {
  const std::size_t n = p.y.size();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k[i * n + j] = maskopt::kernel_eval(p.kernel, p.x.row(i), p.x.row(j));
  return k;
}

/// Largest KKT violation max_{I_up}(-y G) - min_{I_low}(-y G), G = Q a - e.
inline double kkt_gap(const std::vector<double>& k, const std::vector<int>& y, const std::vector<double>& a, double c) {
  const std::size_t n = y.size();
  double up = -1e300, low = 1e300;
  for (std::size_t i = 0; i < n; ++i) {
    double g = -1.0;
    for (std::size_t j = 0; j < n; ++j) g += y[i] * y[j] * k[i * n + j] * a[j];
    const double v = -y[i] * g;
    const bool in_up = (y[i] > 0 && a[i] < c) || (y[i] < 0 && a[i] > 0);
    const bool in_low = (y[i] > 0 && a[i] > 0) || (y[i] < 0 && a[i] < c);
    if (in_up) up = std::max(up, v);
    if (in_low) low = std::min(low, v);
  }
  return std::max(0.0, up - low);
}

}  // namespace smo_corpus
