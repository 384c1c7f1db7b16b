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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maskopt/maskopt.h"

namespace {

struct Owned {
  char* s = nullptr;
  ~Owned() { mo_string_free(s); }
};

int report_error(mo_status s) {
  std::cerr << "maskopt: " << mo_last_error() << "\n";
  return static_cast<int>(s);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

struct RunFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::vector<std::string> inputs;
  std::optional<std::string> label_column;
  std::optional<std::string> labels_file;
  std::optional<long long> seed;
  std::optional<std::string> algo;
  std::optional<std::string> kernel;
  std::optional<std::string> protocol;
  std::optional<int> threads;
  std::optional<std::string> out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_algo) {
  cmd->add_option("--config", f.config_path, "JSON experiment document")->check(CLI::ExistingFile);
  cmd->add_option("--set", f.sets, "Override, key.path=value (repeatable)");
  cmd->add_option("--input", f.inputs, "Feature matrix, in fusion order (repeatable)");
  cmd->add_option("--label-column", f.label_column, "Label column name");
  cmd->add_option("--labels", f.labels_file, "Separate label file");
  cmd->add_option("--seed", f.seed, "Split and selection seed");
  if (with_algo) cmd->add_option("--algo", f.algo, "ga | abc | pso | hho");
  cmd->add_option("--kernel", f.kernel, "linear | poly | rbf | sigmoid");
  cmd->add_option("--protocol", f.protocol, "paper-repro | cv-k | cv-<k>");
  cmd->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  cmd->add_option("--out", f.out, "Output directory");
}

// Overrides apply in order: config file, --set, then dedicated flags.
int resolve(const RunFlags& f, Owned& resolved) {
  std::string text;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  std::vector<std::string> ov = f.sets;
  if (!f.inputs.empty()) {
    std::string arr = "[";
    for (std::size_t i = 0; i < f.inputs.size(); ++i) arr += (i ? "," : "") + quote(f.inputs[i]);
    ov.push_back("inputs=" + arr + "]");
  }
  if (f.label_column) ov.push_back("labels.column=" + quote(*f.label_column));
  if (f.labels_file) ov.push_back("labels.path=" + quote(*f.labels_file));
  if (f.seed) {
    ov.push_back("split.seed=" + std::to_string(*f.seed));
    ov.push_back("selection.seed=" + std::to_string(*f.seed));
  }
  if (f.algo) ov.push_back("selection.algorithm=" + quote(*f.algo));
  if (f.kernel) ov.push_back("svm.kernel=" + quote(*f.kernel));
  if (f.protocol) ov.push_back("fitness.protocol=" + quote(*f.protocol));
  if (f.threads) {
    ov.push_back("threads=" + std::to_string(*f.threads));
  } else if (const char* env = std::getenv("MASKOPT_THREADS"); env && *env) {
    ov.push_back("threads=" + std::string(env));
  }
  if (f.out) ov.push_back("out=" + quote(*f.out));

  std::vector<const char*> ptrs;
  for (const auto& o : ov) ptrs.push_back(o.c_str());
  const mo_status s = mo_config_resolve(text.empty() ? nullptr : text.c_str(), ptrs.data(), ptrs.size(), &resolved.s);
  return s == MO_OK ? 0 : report_error(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maskopt: fused-feature SVM baselines and wrapper feature selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mo_version());

  auto* fuse = app.add_subcommand("fuse", "Concatenate feature matrices column-wise");
  std::vector<std::string> fuse_inputs;
  std::string fuse_out;
  std::optional<std::string> fuse_label;
  fuse->add_option("inputs", fuse_inputs, "Input matrices in order")->required();
  fuse->add_option("--out,-o", fuse_out, "Output file (.csv or .bin)")->required();
  fuse->add_option("--label-column", fuse_label, "Label column carried through to the output");

  RunFlags baseline_flags, select_flags;
  auto* baseline = app.add_subcommand("baseline", "Train the SVM on all fused features");
  add_run_flags(baseline, baseline_flags, false);
  auto* select = app.add_subcommand("select", "Run feature selection, then retrain on the subset");
  add_run_flags(select, select_flags, true);

  auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark");
  mo_synth_spec spec;
  mo_synth_spec_default(&spec);
  std::string synth_out = "synth";
  bool synth_binary = false;
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--seed", spec.seed, "Generator seed");
  synth->add_option("--samples", spec.n_samples, "Number of samples");
  synth->add_option("--classes", spec.num_classes, "Number of classes");
  synth->add_option("--informative", spec.n_informative, "Informative columns");
  synth->add_option("--noise", spec.n_noise, "Noise columns");
  synth->add_option("--class-sep", spec.class_sep, "Centroid norm");
  synth->add_flag("--binary", synth_binary, "Also write features.bin");

  auto* report = app.add_subcommand("report", "Tabulate every report.json under a directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*fuse) {
    std::vector<const char*> ptrs;
    for (const auto& p : fuse_inputs) ptrs.push_back(p.c_str());
    const mo_status s =
        mo_fuse_files(ptrs.data(), ptrs.size(), fuse_out.c_str(), fuse_label ? fuse_label->c_str() : nullptr);
    if (s != MO_OK) return report_error(s);
    std::cout << "wrote " << fuse_out << "\n";
    return 0;
  }

  if (*baseline || *select) {
    const bool is_select = static_cast<bool>(*select);
    Owned resolved, rep;
    if (int rc = resolve(is_select ? select_flags : baseline_flags, resolved)) return rc;
    const mo_status s = is_select ? mo_run_select(resolved.s, &rep.s) : mo_run_baseline(resolved.s, &rep.s);
    if (rep.s) std::cout << rep.s << "\n";
    return s == MO_OK ? 0 : report_error(s);
  }

  if (*synth) {
    const mo_status s = mo_synth_write(&spec, synth_out.c_str(), synth_binary ? 1 : 0);
    if (s != MO_OK) return report_error(s);
    std::cout << "wrote " << synth_out << ": " << spec.n_samples << " samples x "
              << (spec.n_informative + spec.n_noise) << " features (" << spec.n_informative << " informative), "
              << spec.num_classes << " classes\n";
    return 0;
  }

  if (*report) {
    Owned text, csv, warnings;
    const mo_status s = mo_run_report(report_dir.c_str(), &text.s, &csv.s, &warnings.s);
    if (s != MO_OK) return report_error(s);
    if (warnings.s && *warnings.s) std::cerr << warnings.s;
    std::cout << text.s;
    return 0;
  }
  return 0;
}
