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

#include <cstdint>

#include "dataset_io.hpp"
#include "selection.hpp"

namespace maskopt {

struct SyntheticSpec {
  std::size_t n_samples = 400;
  int num_classes = 4;
  std::size_t n_informative = 8;
  std::size_t n_noise = 56;
  double class_sep = 4.0;  // centroid norm, in units of the per-feature stddev
  std::uint64_t seed = 1;

  /// Throws ConfigError unless n_informative >= 1, K >= 2, n_samples >= 10 K
  /// and class_sep >= 0.
  void validate() const;
};

struct SyntheticData {
  FeatureMatrix x;
  LabelVector y;
  FeatureMask ground_truth;  // informative columns
};

/// Isotropic unit-variance Gaussian blobs. Class centroids are random unit
/// directions in the informative subspace scaled by class_sep; noise columns
/// are standard normal for every class. Informative columns sit at random
/// positions among the noise columns. Classes are balanced to within one
/// sample.
SyntheticData generate(const SyntheticSpec& spec);

}  // namespace maskopt
