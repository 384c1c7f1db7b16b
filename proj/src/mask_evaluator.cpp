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

#include "mask_evaluator.hpp"

#include <charconv>

#include "errors.hpp"

namespace maskopt {

std::string to_string(Protocol p) { return p == Protocol::kPaperRepro ? "paper-repro" : "cv-k"; }

Protocol parse_protocol(std::string_view name, int* folds) {
  if (name == "paper-repro") return Protocol::kPaperRepro;
  if (name == "cv-k") return Protocol::kCrossValidation;
  if (name.starts_with("cv-")) {
    int k = 0;
    const auto digits = name.substr(3);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && p == digits.data() + digits.size() && k >= 2) {
      if (folds) *folds = k;
      return Protocol::kCrossValidation;
    }
  }
  throw ConfigError("unknown protocol '" + std::string(name) + "' (expected paper-repro|cv-k|cv-<k>)");
}

void FitnessSpec::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("fitness alpha must lie in [0, 1]");
  if (protocol == Protocol::kCrossValidation && folds < 2) throw ConfigError("cv-k needs k >= 2");
}

SvmMaskEvaluator::SvmMaskEvaluator(std::vector<Part> parts, SvmConfig svm, bool reads_test_pool)
    : parts_(std::move(parts)), svm_(std::move(svm)), reads_test_pool_(reads_test_pool) {
  svm_.validate();
  if (parts_.empty()) throw ConfigError("evaluator needs at least one train/eval part");
  n_features_ = parts_.front().train_x.n_features();
}

SvmMaskEvaluator::SvmMaskEvaluator(SvmMaskEvaluator&& other) noexcept
    : parts_(std::move(other.parts_)),
      svm_(std::move(other.svm_)),
      n_features_(other.n_features_),
      reads_test_pool_(other.reads_test_pool_),
      test_rows_accessed_(other.test_rows_accessed_.load()),
      non_converged_(other.non_converged_.load()) {}

SvmMaskEvaluator SvmMaskEvaluator::cross_validated(const FeatureMatrix& x, const LabelVector& y,
                                                   const SvmConfig& svm, int folds, std::uint64_t fold_seed) {
  if (x.n_samples() != y.size()) throw DataError("evaluator: row/label count mismatch");
  std::vector<Part> parts;
  for (const auto& f : stratified_kfold(y, folds, fold_seed)) {
    Part part{x.select_rows(f.train_indices), y.select(f.train_indices), x.select_rows(f.test_indices),
              y.select(f.test_indices)};
    const auto counts = part.train_y.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c)
      if (counts[c] == 0)
        throw DataError("cross-validation fold lacks class " + std::to_string(c) + "; use fewer folds");
    parts.push_back(std::move(part));
  }
  return SvmMaskEvaluator(std::move(parts), svm, false);
}

SvmMaskEvaluator SvmMaskEvaluator::holdout(const FeatureMatrix& train_x, const LabelVector& train_y,
                                           const FeatureMatrix& test_x, const LabelVector& test_y,
                                           const SvmConfig& svm) {
  if (train_x.n_samples() != train_y.size() || test_x.n_samples() != test_y.size())
    throw DataError("evaluator: row/label count mismatch");
  if (train_x.n_features() != test_x.n_features()) throw DataError("evaluator: train/test feature mismatch");
  std::vector<Part> parts;
  parts.push_back({train_x, train_y, test_x, test_y});
  return SvmMaskEvaluator(std::move(parts), svm, true);
}

double SvmMaskEvaluator::score(const FeatureMask& mask) const {
  const auto cols = mask.selected_indices();
  if (cols.empty()) throw ConfigError("evaluator: empty feature subset");
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& part : parts_) {
    const auto model = train_multiclass(part.train_x.select_columns(cols), part.train_y, svm_, 1);
    if (!model.converged()) ++non_converged_;
    const auto pred = model.predict(part.eval_x.select_columns(cols));
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == part.eval_y[i] ? 1 : 0;
    total += pred.size();
    if (reads_test_pool_) test_rows_accessed_ += pred.size();
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace maskopt
