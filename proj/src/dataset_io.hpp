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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace maskopt {

struct FeatureProvenance {
  std::string source_name;
  std::size_t source_index = 0;

  bool operator==(const FeatureProvenance&) const = default;
};

/// Dense row-major sample-by-feature matrix. Each column remembers which
/// extractor and which source column it came from so fused and selected
/// subsets can be traced back.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;

  /// Validates shape, finiteness and provenance uniqueness.
  FeatureMatrix(std::size_t n_samples, std::size_t n_features, std::vector<double> values,
                std::vector<FeatureProvenance> columns);

  /// Columns default to (source_name, 0..n_features-1).
  static FeatureMatrix from_values(std::size_t n_samples, std::size_t n_features,
                                   std::vector<double> values,
                                   const std::string& source_name = "features");

  std::size_t n_samples() const { return n_samples_; }
  std::size_t n_features() const { return n_features_; }
  std::span<const double> values() const { return values_; }
  const std::vector<FeatureProvenance>& columns() const { return columns_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_features_, n_features_};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_features_ + j]; }

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
  FeatureMatrix select_columns(std::span<const std::size_t> cols) const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t n_samples_ = 0;
  std::size_t n_features_ = 0;
  std::vector<double> values_;
  std::vector<FeatureProvenance> columns_;
};

class LabelVector {
 public:
  LabelVector() = default;
  /// Throws DataError when K < 2 or any label is out of range.
  LabelVector(std::vector<int> labels, int num_classes);
  /// K inferred as max(label) + 1 (at least 2).
  static LabelVector infer(std::vector<int> labels);

  std::size_t size() const { return labels_.size(); }
  int num_classes() const { return num_classes_; }
  int operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }

  std::vector<std::size_t> class_counts() const;
  LabelVector select(std::span<const std::size_t> rows) const;

  bool operator==(const LabelVector&) const = default;

 private:
  std::vector<int> labels_;
  int num_classes_ = 0;
};

struct DatasetSplit {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

struct LoadedCsv {
  FeatureMatrix matrix;
  std::optional<LabelVector> labels;
};

/// Reads a comma-separated feature file with a header row. When
/// `label_column` names a header field, that column is parsed as integer
/// class ids and removed from the matrix. Header fields of the form
/// `<source>:<index>` restore provenance written by save_feature_csv; other
/// headers get (file stem, column position).
LoadedCsv load_feature_csv(const std::filesystem::path& path,
                           const std::optional<std::string>& label_column = std::nullopt,
                           std::optional<int> num_classes = std::nullopt);

/// Header fields are `<source>:<index>`; values use shortest round-trip form.
void save_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                      const LabelVector* labels = nullptr, const std::string& label_column = "label");

/// Single-column label file with header.
void save_label_csv(const std::filesystem::path& path, const LabelVector& y,
                    const std::string& column = "label");

/// Binary sidecar: "MOPT", version byte, little-endian u64 rows and cols,
/// per-column provenance, then row-major little-endian binary64 values.
void save_feature_binary(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix load_feature_binary(const std::filesystem::path& path);

/// Horizontal concatenation in list order. Rows are aligned by position.
FeatureMatrix fuse(std::span<const FeatureMatrix> matrices);

/// Largest-remainder apportionment of `total` across `weights`, floor first,
/// leftover units to the largest fractional remainders (ties to lower index).
std::vector<std::size_t> largest_remainder(std::span<const double> quotas, std::size_t total);

/// Per-class test counts for a stratified split.
std::vector<std::size_t> stratified_test_counts(std::span<const std::size_t> class_counts,
                                                double test_fraction);

DatasetSplit stratified_split(const LabelVector& y, double test_fraction, std::uint64_t seed);

/// k stratified folds; fold f holds roughly 1/k of every class. Each returned
/// split has the fold as test and the remainder as train.
std::vector<DatasetSplit> stratified_kfold(const LabelVector& y, int k, std::uint64_t seed);

}  // namespace maskopt
