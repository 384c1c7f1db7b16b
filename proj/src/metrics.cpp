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

#include "metrics.hpp"

#include "errors.hpp"

namespace maskopt {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : k_(num_classes),
      counts_(static_cast<std::size_t>(num_classes > 0 ? num_classes * num_classes : 0), 0) {
  if (num_classes < 1) throw DataError("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(int num_classes, std::vector<std::int64_t> counts)
    : ConfusionMatrix(num_classes) {
  if (counts.size() != counts_.size())
    throw DataError("confusion matrix: expected " + std::to_string(counts_.size()) + " counts, got " +
                    std::to_string(counts.size()));
  for (auto c : counts)
    if (c < 0) throw DataError("confusion matrix: negative count");
  counts_ = std::move(counts);
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::int64_t ConfusionMatrix::row_sum(int c) const {
  std::int64_t s = 0;
  for (int p = 0; p < k_; ++p) s += at(c, p);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(int c) const {
  std::int64_t s = 0;
  for (int t = 0; t < k_; ++t) s += at(t, c);
  return s;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int num_classes) {
  if (y_true.size() != y_pred.size())
    throw DataError("confusion: length mismatch (" + std::to_string(y_true.size()) + " vs " +
                    std::to_string(y_pred.size()) + ")");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= num_classes || y_pred[i] < 0 || y_pred[i] >= num_classes)
      throw DataError("confusion: label out of range at index " + std::to_string(i));
    cm.add(y_true[i], y_pred[i]);
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  const std::int64_t total = cm.total();
  if (total <= 0) throw DataError("metrics: empty confusion matrix");
  const int k = cm.num_classes();
  const double n = static_cast<double>(total);

  MetricsReport r;
  std::int64_t trace = 0;
  double expected = 0.0;
  for (int c = 0; c < k; ++c) {
    const std::int64_t tp = cm.at(c, c);
    const std::int64_t rows = cm.row_sum(c);
    const std::int64_t cols = cm.col_sum(c);
    trace += tp;
    expected += static_cast<double>(rows) * static_cast<double>(cols);

    ClassScores s;
    s.support = rows;
    s.precision = cols > 0 ? static_cast<double>(tp) / static_cast<double>(cols) : 0.0;
    s.recall = rows > 0 ? static_cast<double>(tp) / static_cast<double>(rows) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    r.per_class.push_back(s);

    const double w = static_cast<double>(rows) / n;
    r.precision_weighted += w * s.precision;
    r.f1_weighted += w * s.f1;
  }
  r.accuracy = static_cast<double>(trace) / n;
  // Support weighting collapses recall to trace / total.
  r.recall_weighted = r.accuracy;

  const double p_o = r.accuracy;
  const double p_e = expected / (n * n);
  r.kappa = p_e >= 1.0 ? 1.0 : (p_o - p_e) / (1.0 - p_e);
  return r;
}

nlohmann::json metrics_json(const MetricsReport& r) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& c : r.per_class)
    per_class.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
  return {{"accuracy", r.accuracy},
          {"precision_weighted", r.precision_weighted},
          {"recall_weighted", r.recall_weighted},
          {"f1_weighted", r.f1_weighted},
          {"kappa", r.kappa},
          {"per_class", std::move(per_class)}};
}

std::string metrics_to_json(const MetricsReport& report) { return metrics_json(report).dump(); }

}  // namespace maskopt
