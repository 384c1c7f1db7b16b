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
#include <cstdint>
#include <string>
#include <vector>

#include "dataset_io.hpp"
#include "selection.hpp"
#include "svm.hpp"

namespace maskopt {

enum class Protocol {
  kPaperRepro,  // score on the held-out pool
  kCrossValidation,  // stratified k-fold inside the training pool
};

std::string to_string(Protocol p);
/// Accepts paper-repro, cv-k (k taken from FitnessSpec::folds) or cv-<k>.
Protocol parse_protocol(std::string_view name, int* folds = nullptr);

struct FitnessSpec {
  double alpha = 0.99;
  Protocol protocol = Protocol::kCrossValidation;
  int folds = 5;

  void validate() const;
};

/// Wrapper evaluator: trains the multiclass SVM on the selected columns and
/// returns classification accuracy.
class SvmMaskEvaluator final : public MaskEvaluator {
 public:
  /// Folds are drawn once from `fold_seed`; the held-out pool is never seen.
  static SvmMaskEvaluator cross_validated(const FeatureMatrix& train_x, const LabelVector& train_y,
                                          const SvmConfig& svm, int folds, std::uint64_t fold_seed);
  /// Trains on the training pool and scores on the held-out pool.
  static SvmMaskEvaluator holdout(const FeatureMatrix& train_x, const LabelVector& train_y,
                                  const FeatureMatrix& test_x, const LabelVector& test_y, const SvmConfig& svm);

  std::size_t num_features() const override { return n_features_; }
  std::size_t fold_factor() const override { return parts_.size(); }
  double score(const FeatureMask& mask) const override;

  /// Held-out rows read while scoring; stays 0 under cross-validation.
  std::size_t test_rows_accessed() const { return test_rows_accessed_.load(); }
  std::size_t non_converged_trainings() const { return non_converged_.load(); }

  SvmMaskEvaluator(SvmMaskEvaluator&& other) noexcept;

 private:
  struct Part {
    FeatureMatrix train_x;
    LabelVector train_y;
    FeatureMatrix eval_x;
    LabelVector eval_y;
  };

  SvmMaskEvaluator(std::vector<Part> parts, SvmConfig svm, bool reads_test_pool);

  std::vector<Part> parts_;
  SvmConfig svm_;
  std::size_t n_features_ = 0;
  bool reads_test_pool_ = false;
  mutable std::atomic<std::size_t> test_rows_accessed_{0};
  mutable std::atomic<std::size_t> non_converged_{0};
};

}  // namespace maskopt
