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

#include "maskopt/maskopt.h"

#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "dataset_io.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "pipeline.hpp"
#include "svm.hpp"
#include "synthetic.hpp"

struct mo_dataset {
  maskopt::FeatureMatrix x;
  std::optional<maskopt::LabelVector> y;
};

struct mo_model {
  maskopt::MulticlassSvm svm;
};

namespace {

thread_local std::string g_last_error;

mo_status fail(mo_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
mo_status guarded(F&& body) {
  try {
    return body();
  } catch (const maskopt::Error& e) {
    return fail(static_cast<mo_status>(static_cast<int>(e.kind())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MO_ERR_CONFIG, std::string("invalid JSON: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MO_ERR_DATA, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MO_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MO_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  if (out) *out = dup_string(s);
}

nlohmann::json parse_or_empty(const char* text) {
  if (!text || !*text) return nlohmann::json::object();
  return nlohmann::json::parse(text);
}

#define MO_REQUIRE(cond, what) \
  if (!(cond)) return fail(MO_ERR_INVALID_ARGUMENT, what)

}  // namespace

// Definitions take C linkage from the declarations in maskopt.h.

const char* mo_version(void) { return "0.1.0"; }
const char* mo_last_error(void) { return g_last_error.c_str(); }
void mo_string_free(char* s) { delete[] s; }

mo_status mo_dataset_load(const char* path, const char* label_column, mo_dataset** out) {
  MO_REQUIRE(path && out, "path and out are required");
  return guarded([&] {
    std::optional<std::string> col;
    if (label_column) col = label_column;
    auto loaded = maskopt::load_matrix(path, col);
    *out = new mo_dataset{std::move(loaded.matrix), std::move(loaded.labels)};
    return MO_OK;
  });
}

mo_status mo_dataset_save(const mo_dataset* ds, const char* path) {
  MO_REQUIRE(ds && path, "dataset and path are required");
  return guarded([&] {
    maskopt::save_matrix(path, ds->x, ds->y ? &*ds->y : nullptr);
    return MO_OK;
  });
}

mo_status mo_dataset_fuse(const mo_dataset* const* parts, size_t n, mo_dataset** out) {
  MO_REQUIRE(parts && n > 0 && out, "at least one dataset is required");
  return guarded([&] {
    std::vector<maskopt::FeatureMatrix> mats;
    std::optional<maskopt::LabelVector> labels;
    for (size_t i = 0; i < n; ++i) {
      if (!parts[i]) return fail(MO_ERR_INVALID_ARGUMENT, "null dataset in list");
      mats.push_back(parts[i]->x);
      if (!labels && parts[i]->y) labels = parts[i]->y;
    }
    *out = new mo_dataset{maskopt::fuse(mats), std::move(labels)};
    return MO_OK;
  });
}

mo_status mo_dataset_from_values(const double* values, size_t rows, size_t cols, const int32_t* labels,
                                 mo_dataset** out) {
  MO_REQUIRE(values && out, "values and out are required");
  return guarded([&] {
    auto x = maskopt::FeatureMatrix::from_values(rows, cols, std::vector<double>(values, values + rows * cols));
    std::optional<maskopt::LabelVector> y;
    if (labels) y = maskopt::LabelVector::infer(std::vector<int>(labels, labels + rows));
    *out = new mo_dataset{std::move(x), std::move(y)};
    return MO_OK;
  });
}

size_t mo_dataset_rows(const mo_dataset* ds) { return ds ? ds->x.n_samples() : 0; }
size_t mo_dataset_cols(const mo_dataset* ds) { return ds ? ds->x.n_features() : 0; }
int mo_dataset_num_classes(const mo_dataset* ds) { return ds && ds->y ? ds->y->num_classes() : 0; }

mo_status mo_dataset_column(const mo_dataset* ds, size_t col, double* out) {
  MO_REQUIRE(ds && out, "dataset and out are required");
  MO_REQUIRE(col < ds->x.n_features(), "column out of range");
  for (size_t i = 0; i < ds->x.n_samples(); ++i) out[i] = ds->x.at(i, col);
  return MO_OK;
}

mo_status mo_dataset_column_name(const mo_dataset* ds, size_t col, char** out) {
  MO_REQUIRE(ds && out, "dataset and out are required");
  MO_REQUIRE(col < ds->x.n_features(), "column out of range");
  const auto& p = ds->x.columns()[col];
  *out = dup_string(p.source_name + ":" + std::to_string(p.source_index));
  return MO_OK;
}

mo_status mo_dataset_labels(const mo_dataset* ds, int32_t* out) {
  MO_REQUIRE(ds && out, "dataset and out are required");
  if (!ds->y) return fail(MO_ERR_DATA, "dataset has no labels");
  for (size_t i = 0; i < ds->y->size(); ++i) out[i] = (*ds->y)[i];
  return MO_OK;
}

void mo_dataset_free(mo_dataset* ds) { delete ds; }

mo_status mo_stratified_test_counts(const size_t* class_counts, size_t k, double test_fraction, size_t* out) {
  MO_REQUIRE(class_counts && out && k > 0, "counts and out are required");
  return guarded([&] {
    const auto r = maskopt::stratified_test_counts(std::span<const size_t>(class_counts, k), test_fraction);
    std::copy(r.begin(), r.end(), out);
    return MO_OK;
  });
}

namespace {
maskopt::ConfusionMatrix make_cm(const int64_t* counts, int k) {
  return maskopt::ConfusionMatrix(k, std::vector<std::int64_t>(counts, counts + static_cast<size_t>(k) * k));
}
void fill(const maskopt::MetricsReport& r, mo_metrics* out) {
  *out = {r.accuracy, r.precision_weighted, r.recall_weighted, r.f1_weighted, r.kappa};
}
}  // namespace

mo_status mo_metrics_compute(const int64_t* counts, int k, mo_metrics* out) {
  MO_REQUIRE(counts && out && k > 0, "counts and out are required");
  return guarded([&] {
    fill(maskopt::compute_metrics(make_cm(counts, k)), out);
    return MO_OK;
  });
}

mo_status mo_metrics_json(const int64_t* counts, int k, char** out) {
  MO_REQUIRE(counts && out && k > 0, "counts and out are required");
  return guarded([&] {
    *out = dup_string(maskopt::metrics_to_json(maskopt::compute_metrics(make_cm(counts, k))));
    return MO_OK;
  });
}

void mo_synth_spec_default(mo_synth_spec* spec) {
  if (!spec) return;
  const maskopt::SyntheticSpec d;
  *spec = {d.n_samples, d.num_classes, d.n_informative, d.n_noise, d.class_sep, d.seed};
}

namespace {
maskopt::SyntheticSpec to_spec(const mo_synth_spec& s) {
  maskopt::SyntheticSpec out;
  out.n_samples = s.n_samples;
  out.num_classes = s.num_classes;
  out.n_informative = s.n_informative;
  out.n_noise = s.n_noise;
  out.class_sep = s.class_sep;
  out.seed = s.seed;
  return out;
}
}  // namespace

mo_status mo_synth_generate(const mo_synth_spec* spec, mo_dataset** out, uint8_t* ground_truth) {
  MO_REQUIRE(spec && out, "spec and out are required");
  return guarded([&] {
    auto data = maskopt::generate(to_spec(*spec));
    if (ground_truth)
      for (size_t i = 0; i < data.ground_truth.size(); ++i) ground_truth[i] = data.ground_truth[i] ? 1 : 0;
    *out = new mo_dataset{std::move(data.x), std::move(data.y)};
    return MO_OK;
  });
}

mo_status mo_synth_write(const mo_synth_spec* spec, const char* out_dir, int binary) {
  MO_REQUIRE(spec && out_dir, "spec and out_dir are required");
  return guarded([&] {
    maskopt::write_synthetic(to_spec(*spec), out_dir, binary != 0);
    return MO_OK;
  });
}

mo_status mo_model_train(const mo_dataset* train, const char* svm_json, int threads, mo_model** out) {
  MO_REQUIRE(train && out, "dataset and out are required");
  if (!train->y) return fail(MO_ERR_DATA, "training dataset has no labels");
  return guarded([&] {
    const auto config = maskopt::svm_config_from_json(parse_or_empty(svm_json));
    auto* m = new mo_model{maskopt::train_multiclass(train->x, *train->y, config, threads < 1 ? 1 : threads)};
    *out = m;
    if (!m->svm.converged()) return fail(MO_ERR_NUMERIC, "SMO reached max_iterations before converging");
    return MO_OK;
  });
}

mo_status mo_model_predict(const mo_model* m, const mo_dataset* ds, int32_t* out) {
  MO_REQUIRE(m && ds && out, "model, dataset and out are required");
  return guarded([&] {
    const auto pred = m->svm.predict(ds->x);
    std::copy(pred.begin(), pred.end(), out);
    return MO_OK;
  });
}

mo_status mo_model_evaluate(const mo_model* m, const mo_dataset* ds, int64_t* confusion, mo_metrics* out) {
  MO_REQUIRE(m && ds && out, "model, dataset and out are required");
  if (!ds->y) return fail(MO_ERR_DATA, "evaluation dataset has no labels");
  return guarded([&] {
    const auto ev = maskopt::evaluate(m->svm, ds->x, *ds->y);
    if (confusion) std::copy(ev.confusion.counts().begin(), ev.confusion.counts().end(), confusion);
    fill(ev.metrics, out);
    return MO_OK;
  });
}

int mo_model_num_classes(const mo_model* m) { return m ? m->svm.num_classes() : 0; }

mo_status mo_model_to_json(const mo_model* m, char** out) {
  MO_REQUIRE(m && out, "model and out are required");
  return guarded([&] {
    *out = dup_string(m->svm.to_json().dump());
    return MO_OK;
  });
}

mo_status mo_model_from_json(const char* json, mo_model** out) {
  MO_REQUIRE(json && out, "json and out are required");
  return guarded([&] {
    *out = new mo_model{maskopt::MulticlassSvm::from_json(nlohmann::json::parse(json))};
    return MO_OK;
  });
}

void mo_model_free(mo_model* m) { delete m; }

mo_status mo_config_resolve(const char* config_json, const char* const* overrides, size_t n_overrides,
                            char** out) {
  MO_REQUIRE(out && (overrides || n_overrides == 0), "out is required");
  return guarded([&] {
    nlohmann::json base;
    if (config_json && *config_json) base = nlohmann::json::parse(config_json);
    std::vector<std::string> ov(overrides, overrides + n_overrides);
    const auto resolved = maskopt::resolve_config(base, ov);
    maskopt::ExperimentConfig::from_json(resolved);
    *out = dup_string(resolved.dump(2));
    return MO_OK;
  });
}

namespace {
template <class Run>
mo_status run_stage(const char* resolved_json, char** report_json, Run run) {
  MO_REQUIRE(resolved_json, "config is required");
  return guarded([&] {
    const auto config = maskopt::ExperimentConfig::from_json(nlohmann::json::parse(resolved_json));
    const auto outcome = run(config);
    emit(report_json, outcome.report.dump(2));
    if (!outcome.converged) return fail(MO_ERR_NUMERIC, "SMO reached max_iterations before converging");
    return MO_OK;
  });
}
}  // namespace

mo_status mo_run_baseline(const char* resolved_json, char** report_json) {
  return run_stage(resolved_json, report_json, maskopt::run_baseline);
}

mo_status mo_run_select(const char* resolved_json, char** report_json) {
  return run_stage(resolved_json, report_json, maskopt::run_select);
}

mo_status mo_run_report(const char* dir, char** text, char** csv, char** warnings) {
  MO_REQUIRE(dir, "dir is required");
  return guarded([&] {
    const auto table = maskopt::build_report(dir);
    const std::filesystem::path d(dir);
    std::ofstream(d / "comparison.csv", std::ios::binary) << table.csv;
    std::ofstream(d / "comparison.txt", std::ios::binary) << table.text;
    std::string w;
    for (const auto& line : table.warnings) w += line + "\n";
    emit(text, table.text);
    emit(csv, table.csv);
    emit(warnings, w);
    return MO_OK;
  });
}

mo_status mo_fuse_files(const char* const* inputs, size_t n, const char* output, const char* label_column) {
  MO_REQUIRE(inputs && n > 0 && output, "inputs and output are required");
  return guarded([&] {
    std::vector<std::filesystem::path> paths(inputs, inputs + n);
    std::optional<std::string> col;
    if (label_column) col = label_column;
    maskopt::fuse_files(paths, output, col);
    return MO_OK;
  });
}

