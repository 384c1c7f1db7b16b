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

#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "errors.hpp"
#include "metrics.hpp"

namespace maskopt {

namespace fs = std::filesystem;

namespace {

bool has_extension(const fs::path& p, std::string_view ext) { return p.extension().string() == ext; }

std::vector<std::string> csv_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

bool csv_has_column(const fs::path& path, const std::string& column) {
  const auto h = csv_header(path);
  return std::find(h.begin(), h.end(), column) != h.end();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json confusion_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t < cm.num_classes(); ++t) {
    std::vector<std::int64_t> r;
    for (int p = 0; p < cm.num_classes(); ++p) r.push_back(cm.at(t, p));
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json provenance_breakdown(const FeatureMatrix& x) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : x.columns()) ++counts[c.source_name];
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : counts) j[k] = v;
  return j;
}

nlohmann::json split_json(const DatasetSplit& s) {
  return {{"train_indices", s.train_indices}, {"test_indices", s.test_indices}};
}

nlohmann::json make_report(const std::string& stage, const Evaluation& ev, const FeatureMatrix& used,
                           std::size_t total_features, double seconds, const nlohmann::json& echo,
                           const std::vector<std::string>& warnings, bool converged) {
  return {{"stage", stage},
          {"metrics", metrics_json(ev.metrics)},
          {"num_classes", ev.confusion.num_classes()},
          {"confusion_matrix", confusion_json(ev.confusion)},
          {"selected_count", used.n_features()},
          {"total_features", total_features},
          {"provenance", provenance_breakdown(used)},
          {"svm_converged", converged},
          {"wall_clock_seconds", seconds},
          {"warnings", warnings},
          {"config", echo}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void set_path(nlohmann::json& doc, const std::string& dotted, nlohmann::json value) {
  nlohmann::json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override key '" + dotted + "' has an empty component");
    if (!node->is_object()) *node = nlohmann::json::object();
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

nlohmann::json default_experiment_json() {
  SvmConfig svm;
  svm.kernel = KernelKind::kSigmoid;
  return {{"inputs", nlohmann::json::array()},
          {"labels", nullptr},
          {"split", {{"test_fraction", 0.2}, {"seed", 42}}},
          {"svm", svm_config_json(svm)},
          {"selection", optimizer_config_json(OptimizerConfig{})},
          {"fitness", {{"alpha", 0.99}, {"protocol", "cv-k"}, {"folds", 5}}},
          {"threads", 1},
          {"out", "run"}};
}

nlohmann::json resolve_config(const nlohmann::json& base, std::span<const std::string> overrides) {
  if (!base.is_null() && !base.is_object()) throw ConfigError("config document must be a JSON object");
  nlohmann::json doc = default_experiment_json();
  if (base.is_object()) {
    for (auto it = base.begin(); it != base.end(); ++it)
      if (!doc.contains(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
    doc.merge_patch(base);
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    const std::string top = key.substr(0, key.find('.'));
    if (!doc.contains(top)) throw ConfigError("unknown config key '" + top + "'");
    auto parsed = nlohmann::json::parse(raw, nullptr, false);
    set_path(doc, key, parsed.is_discarded() ? nlohmann::json(raw) : std::move(parsed));
  }
  return doc;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    const auto& inputs = j.at("inputs");
    if (!inputs.is_array() || inputs.empty()) throw ConfigError("config needs a non-empty 'inputs' list");
    for (const auto& p : inputs) c.inputs.emplace_back(p.get<std::string>());

    const auto& labels = j.at("labels");
    if (labels.is_null()) throw ConfigError("config is missing a label source ('labels')");
    if (labels.is_string()) {
      c.labels.column = labels.get<std::string>();
    } else if (labels.is_object()) {
      if (labels.contains("column")) c.labels.column = labels.at("column").get<std::string>();
      if (labels.contains("path") && !labels.at("path").is_null())
        c.labels.path = labels.at("path").get<std::string>();
    } else {
      throw ConfigError("labels must be a column name or {column, path}");
    }
    if (c.labels.column.empty()) throw ConfigError("labels.column must not be empty");

    const auto& split = j.at("split");
    c.test_fraction = split.at("test_fraction").get<double>();
    c.split_seed = split.at("seed").get<std::uint64_t>();
    if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("split.test_fraction must lie in (0, 1)");

    c.svm = svm_config_from_json(j.at("svm"));
    c.selection = optimizer_config_from_json(j.at("selection"));

    const auto& fit = j.at("fitness");
    c.fitness.alpha = fit.value("alpha", 0.99);
    c.fitness.folds = fit.value("folds", 5);
    c.fitness.protocol = parse_protocol(fit.value("protocol", std::string("cv-k")), &c.fitness.folds);
    c.fitness.validate();

    const int threads = j.at("threads").get<int>();
    if (threads < 0) throw ConfigError("threads must be >= 0");
    c.threads = threads == 0 ? std::max(1, static_cast<int>(std::thread::hardware_concurrency())) : threads;

    c.out = j.at("out").get<std::string>();
    if (c.out.empty()) throw ConfigError("out must name a directory");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  c.echo = j;
  // The echo keeps the protocol's fold count explicit.
  c.echo["fitness"]["folds"] = c.fitness.folds;
  c.echo["fitness"]["protocol"] = to_string(c.fitness.protocol);
  return c;
}

// ---------------------------------------------------------------------------
// Data

LoadedCsv load_matrix(const fs::path& path, const std::optional<std::string>& label_column) {
  if (has_extension(path, ".bin")) {
    if (!fs::exists(path)) throw DataError("missing input file: " + path.string());
    return {load_feature_binary(path), std::nullopt};
  }
  return load_feature_csv(path, label_column);
}

void save_matrix(const fs::path& path, const FeatureMatrix& m, const LabelVector* labels,
                 const std::string& label_column) {
  if (has_extension(path, ".bin")) {
    save_feature_binary(path, m);
    return;
  }
  save_feature_csv(path, m, labels, label_column);
}

namespace {

struct Loaded {
  std::vector<FeatureMatrix> parts;
  std::optional<LabelVector> labels;
};

Loaded load_inputs(std::span<const fs::path> inputs, const std::optional<std::string>& label_column) {
  Loaded out;
  for (const auto& p : inputs) {
    if (!fs::exists(p)) throw DataError("missing input file: " + p.string());
    std::optional<std::string> col;
    if (label_column && !has_extension(p, ".bin") && csv_has_column(p, *label_column)) col = label_column;
    auto loaded = load_matrix(p, col);
    if (!out.parts.empty() && loaded.matrix.n_samples() != out.parts.front().n_samples())
      throw DataError("row-count mismatch: " + p.string() + " has " + std::to_string(loaded.matrix.n_samples()) +
                      " rows, " + inputs.front().string() + " has " +
                      std::to_string(out.parts.front().n_samples()));
    if (loaded.labels && !out.labels) out.labels = std::move(loaded.labels);
    out.parts.push_back(std::move(loaded.matrix));
  }
  return out;
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& config) {
  auto loaded = load_inputs(config.inputs, config.labels.column);
  FeatureMatrix x = fuse(loaded.parts);
  std::optional<LabelVector> y;
  if (config.labels.path) {
    if (!fs::exists(*config.labels.path)) throw DataError("missing label file: " + config.labels.path->string());
    y = load_feature_csv(*config.labels.path, config.labels.column).labels;
  } else {
    y = std::move(loaded.labels);
  }
  if (!y) throw DataError("label column '" + config.labels.column + "' not found in any input");
  if (y->size() != x.n_samples())
    throw DataError("label count " + std::to_string(y->size()) + " does not match " + std::to_string(x.n_samples()) +
                    " feature rows");
  if (x.n_features() == 0) throw DataError("inputs contain no feature columns");
  auto split = stratified_split(*y, config.test_fraction, config.split_seed);
  return {std::move(x), std::move(*y), std::move(split)};
}

// ---------------------------------------------------------------------------
// Runs

RunOutcome run_baseline(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = prepare_data(config);
  fs::create_directories(config.out);
  write_json(config.out / "config.json", config.echo);
  write_json(config.out / "split.json", split_json(data.split));

  const auto x_train = data.x.select_rows(data.split.train_indices);
  const auto y_train = data.y.select(data.split.train_indices);
  const auto x_test = data.x.select_rows(data.split.test_indices);
  const auto y_test = data.y.select(data.split.test_indices);

  const auto model = train_multiclass(x_train, y_train, config.svm, config.threads);
  const auto ev = evaluate(model, x_test, y_test);
  std::vector<std::string> warnings;
  if (!model.converged()) warnings.push_back("SMO reached max_iterations before converging");
  if (model.objective_decreases() > 0)
    warnings.push_back("dual objective decreased in " + std::to_string(model.objective_decreases()) +
                       " SMO steps (indefinite kernel)");

  RunOutcome out;
  out.converged = model.converged();
  out.report = make_report("baseline-fused", ev, data.x, data.x.n_features(), seconds_since(t0), config.echo,
                           warnings, out.converged);
  write_json(config.out / "model.json", model.to_json());
  write_json(config.out / "report.json", out.report);
  return out;
}

RunOutcome run_select(const ExperimentConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = prepare_data(config);
  fs::create_directories(config.out);
  write_json(config.out / "config.json", config.echo);
  write_json(config.out / "split.json", split_json(data.split));

  const auto x_train = data.x.select_rows(data.split.train_indices);
  const auto y_train = data.y.select(data.split.train_indices);
  const auto x_test = data.x.select_rows(data.split.test_indices);
  const auto y_test = data.y.select(data.split.test_indices);

  auto evaluator = config.fitness.protocol == Protocol::kCrossValidation
                       ? SvmMaskEvaluator::cross_validated(x_train, y_train, config.svm, config.fitness.folds,
                                                           config.split_seed)
                       : SvmMaskEvaluator::holdout(x_train, y_train, x_test, y_test, config.svm);
  FitnessContext ctx(evaluator, config.fitness.alpha, config.threads);
  const auto result = run_optimizer(config.selection, ctx);

  const auto cols = result.best_mask.selected_indices();
  const auto x_train_sel = x_train.select_columns(cols);
  const auto x_test_sel = x_test.select_columns(cols);
  const auto model = train_multiclass(x_train_sel, y_train, config.svm, config.threads);
  const auto ev = evaluate(model, x_test_sel, y_test);

  std::vector<std::string> warnings;
  if (!model.converged()) warnings.push_back("SMO reached max_iterations before converging");
  if (evaluator.non_converged_trainings() > 0)
    warnings.push_back(std::to_string(evaluator.non_converged_trainings()) +
                       " fitness trainings stopped at max_iterations");

  RunOutcome out;
  out.converged = model.converged();
  const std::string stage = "selected-" + to_string(config.selection.algorithm);
  out.report = make_report(stage, ev, x_train_sel, data.x.n_features(), seconds_since(t0), config.echo, warnings,
                           out.converged);

  nlohmann::json selected_columns = nlohmann::json::array();
  for (const auto& c : x_train_sel.columns()) selected_columns.push_back(c.source_name + ":" + std::to_string(c.source_index));
  const nlohmann::json result_doc{
      {"algorithm", to_string(config.selection.algorithm)},
      {"config", {{"selection", config.echo.at("selection")}, {"fitness", config.echo.at("fitness")}}},
      {"best_mask", result.best_mask.to_bitstring()},
      {"selected_indices", cols},
      {"selected_columns", selected_columns},
      {"fitness", result.best_fitness},
      {"metrics", metrics_json(ev.metrics)},
      {"confusion_matrix", confusion_json(ev.confusion)},
      {"fitness_calls", ctx.fitness_calls()},
      {"fitness_call_bound", fitness_call_bound(config.selection)},
      {"evaluator_trainings", ctx.evaluator_calls()},
      {"test_rows_accessed_during_selection", evaluator.test_rows_accessed()}};

  write_text(config.out / "trace.csv", trace_to_csv(result.trace));
  write_text(config.out / "mask.txt", result.best_mask.to_bitstring() + "\n");
  write_json(config.out / "result.json", result_doc);
  write_json(config.out / "report.json", out.report);
  write_json(config.out / "model.json", model.to_json());

  std::ostringstream log;
  log << "split: train=" << data.split.train_indices.size() << " test=" << data.split.test_indices.size() << "\n"
      << "protocol: " << to_string(config.fitness.protocol);
  if (config.fitness.protocol == Protocol::kCrossValidation) log << " (k=" << config.fitness.folds << ")";
  log << "\n"
      << "algorithm: " << to_string(config.selection.algorithm) << " population=" << config.selection.population
      << " iterations=" << config.selection.iterations << " seed=" << config.selection.seed << "\n"
      << "fitness calls: " << ctx.fitness_calls() << " (bound " << fitness_call_bound(config.selection) << ")\n"
      << "evaluator trainings: " << ctx.evaluator_calls() << "\n"
      << "test rows accessed during selection: " << evaluator.test_rows_accessed() << "\n"
      << "selected features: " << cols.size() << " of " << data.x.n_features() << "\n"
      << "best fitness: " << result.best_fitness << "\n";
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  write_text(config.out / "run.log", log.str());
  return out;
}

// ---------------------------------------------------------------------------
// Reporting

ReportTable build_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() == "report.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  struct Row {
    std::string run, stage;
    MetricsReport m;
  };
  std::vector<Row> rows;
  ReportTable table;
  for (const auto& f : files) {
    try {
      std::ifstream in(f);
      const auto j = nlohmann::json::parse(in);
      const auto& cmj = j.at("confusion_matrix");
      const int k = static_cast<int>(cmj.size());
      std::vector<std::int64_t> counts;
      for (const auto& r : cmj) {
        if (r.size() != cmj.size()) throw DataError("confusion matrix is not square");
        for (const auto& v : r) counts.push_back(v.get<std::int64_t>());
      }
      const auto m = compute_metrics(ConfusionMatrix(k, std::move(counts)));
      const auto& stored = j.at("metrics");
      for (const char* key : {"accuracy", "precision_weighted", "recall_weighted", "f1_weighted", "kappa"}) {
        const double s = stored.at(key).get<double>();
        const double r = key == std::string("accuracy") ? m.accuracy
                         : key == std::string("precision_weighted") ? m.precision_weighted
                         : key == std::string("recall_weighted") ? m.recall_weighted
                         : key == std::string("f1_weighted") ? m.f1_weighted
                                                            : m.kappa;
        if (std::abs(s - r) > 1e-12)
          table.warnings.push_back(f.string() + ": stored " + key + " differs from its confusion matrix");
      }
      auto rel = fs::relative(f.parent_path(), dir).generic_string();
      rows.push_back({rel.empty() ? "." : rel, j.at("stage").get<std::string>(), m});
    } catch (const std::exception& e) {
      table.warnings.push_back("skipping " + f.string() + ": " + e.what());
    }
  }
  if (rows.empty()) throw DataError("no readable report.json under " + dir.string());
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.m.accuracy > b.m.accuracy; });

  auto fix4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  const std::vector<std::string> header{"run", "stage", "accuracy", "precision", "recall", "f1", "kappa"};
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& r : rows)
    cells.push_back({r.run, r.stage, fix4(r.m.accuracy), fix4(r.m.precision_weighted), fix4(r.m.recall_weighted),
                     fix4(r.m.f1_weighted), fix4(r.m.kappa)});

  std::ostringstream csv, text;
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      csv << (c ? "," : "") << row[c];
      const std::size_t pad = width[c] - row[c].size();
      if (c < 2) text << row[c] << std::string(pad, ' ');
      else text << std::string(pad, ' ') << row[c];
      text << (c + 1 < row.size() ? "  " : "");
    }
    csv << "\n";
    text << "\n";
  }
  table.csv = csv.str();
  table.text = text.str();
  table.rows = rows.size();
  return table;
}

SyntheticData write_synthetic(const SyntheticSpec& spec, const fs::path& out_dir, bool binary) {
  auto data = generate(spec);
  fs::create_directories(out_dir);
  save_feature_csv(out_dir / "features.csv", data.x);
  save_label_csv(out_dir / "labels.csv", data.y);
  write_text(out_dir / "ground_truth_mask.txt", data.ground_truth.to_bitstring() + "\n");
  if (binary) save_feature_binary(out_dir / "features.bin", data.x);
  return data;
}

void fuse_files(std::span<const fs::path> inputs, const fs::path& output,
                const std::optional<std::string>& label_column) {
  if (inputs.empty()) throw ConfigError("fuse needs at least one input");
  auto loaded = load_inputs(inputs, label_column);
  const auto fused = fuse(loaded.parts);
  if (label_column && !loaded.labels)
    throw DataError("label column '" + *label_column + "' not found in any input");
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  save_matrix(output, fused, loaded.labels ? &*loaded.labels : nullptr, label_column.value_or("label"));
}

}  // namespace maskopt
