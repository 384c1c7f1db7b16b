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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset_io.hpp"

namespace maskopt {

/// K x K counts, rows are true classes and columns are predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);
  /// Row-major counts; throws DataError on negative entries or bad size.
  ConfusionMatrix(int num_classes, std::vector<std::int64_t> counts);

  int num_classes() const { return k_; }
  std::int64_t at(int truth, int predicted) const { return counts_[index(truth, predicted)]; }
  void add(int truth, int predicted, std::int64_t n = 1) { counts_[index(truth, predicted)] += n; }

  std::int64_t total() const;
  std::int64_t row_sum(int c) const;
  std::int64_t col_sum(int c) const;
  const std::vector<std::int64_t>& counts() const { return counts_; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(int t, int p) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(k_) + static_cast<std::size_t>(p);
  }
  int k_;
  std::vector<std::int64_t> counts_;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision_weighted = 0.0;
  double recall_weighted = 0.0;
  double f1_weighted = 0.0;
  double kappa = 0.0;
  std::vector<ClassScores> per_class;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int num_classes);

/// Support-weighted precision/recall/F1, accuracy and Cohen's kappa. Classes
/// with an empty row or column score 0 instead of NaN.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// Flat JSON object with keys accuracy, precision_weighted, recall_weighted,
/// f1_weighted, kappa, per_class.
nlohmann::json metrics_json(const MetricsReport& report);
std::string metrics_to_json(const MetricsReport& report);

}  // namespace maskopt
