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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset_io.hpp"
#include "mask_evaluator.hpp"
#include "selection.hpp"
#include "svm.hpp"
#include "synthetic.hpp"

namespace maskopt {

/// Default experiment document; every field a run reads is present so the
/// frozen echo in each run directory is complete.
nlohmann::json default_experiment_json();

/// Merges `base` over the defaults and applies `key.path=value` overrides.
/// Values parse as JSON when possible and fall back to plain strings.
nlohmann::json resolve_config(const nlohmann::json& base, std::span<const std::string> overrides);

struct LabelSource {
  std::optional<std::filesystem::path> path;  // unset: first input holding the column
  std::string column = "label";
};

struct ExperimentConfig {
  std::vector<std::filesystem::path> inputs;
  LabelSource labels;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 42;
  SvmConfig svm;
  OptimizerConfig selection;
  FitnessSpec fitness;
  int threads = 1;
  std::filesystem::path out;
  nlohmann::json echo;  // resolved document

  /// Throws ConfigError before any data is read; missing files are DataError.
  static ExperimentConfig from_json(const nlohmann::json& resolved);
};

struct PreparedData {
  FeatureMatrix x;
  LabelVector y;
  DatasetSplit split;
};

/// Loads, fuses and splits as configured. Row-count mismatches name the file.
PreparedData prepare_data(const ExperimentConfig& config);

/// Loads one matrix: `.bin` through the binary sidecar, otherwise CSV.
LoadedCsv load_matrix(const std::filesystem::path& path, const std::optional<std::string>& label_column);
void save_matrix(const std::filesystem::path& path, const FeatureMatrix& m, const LabelVector* labels,
                 const std::string& label_column = "label");

struct RunOutcome {
  nlohmann::json report;
  bool converged = true;
};

/// Split, scale, train on all fused columns, score the held-out pool.
RunOutcome run_baseline(const ExperimentConfig& config);

/// Selection over the fused columns, retrain on the selected subset, score
/// the held-out pool. Writes report.json, result.json, trace.csv, mask.txt,
/// split.json, config.json and run.log into the output directory.
RunOutcome run_select(const ExperimentConfig& config);

struct ReportTable {
  std::string text;
  std::string csv;
  std::vector<std::string> warnings;
  std::size_t rows = 0;
};

/// Collects every report.json under `dir`, one row per run, sorted by
/// accuracy descending. Scores are recomputed from each stored confusion
/// matrix. Unreadable files are skipped with a warning.
ReportTable build_report(const std::filesystem::path& dir);

/// Writes features.csv, labels.csv and ground_truth_mask.txt (and
/// features.bin when `binary`), returning the generated data.
SyntheticData write_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir, bool binary);

/// Concatenates files in order; an optional label column is taken from the
/// first input carrying it and written as the last column of the output.
void fuse_files(std::span<const std::filesystem::path> inputs, const std::filesystem::path& output,
                const std::optional<std::string>& label_column);

}  // namespace maskopt
