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

#include "dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

namespace maskopt {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::optional<FeatureProvenance> parse_provenance(std::string_view header) {
  const std::size_t colon = header.rfind(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::size_t idx = 0;
  const auto digits = header.substr(colon + 1);
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
  if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
  return FeatureProvenance{std::string(header.substr(0, colon)), idx};
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <typename T>
void write_le(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const std::filesystem::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw DataError("truncated binary matrix: " + path.string());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

constexpr char kMagic[4] = {'M', 'O', 'P', 'T'};
constexpr std::uint8_t kBinaryVersion = 1;

}  // namespace

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix::FeatureMatrix(std::size_t n_samples, std::size_t n_features,
                             std::vector<double> values, std::vector<FeatureProvenance> columns)
    : n_samples_(n_samples),
      n_features_(n_features),
      values_(std::move(values)),
      columns_(std::move(columns)) {
  if (values_.size() != n_samples_ * n_features_)
    throw DataError("feature matrix: value count " + std::to_string(values_.size()) +
                    " does not match " + std::to_string(n_samples_) + "x" +
                    std::to_string(n_features_));
  if (columns_.size() != n_features_)
    throw DataError("feature matrix: provenance count does not match feature count");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      throw DataError("feature matrix: non-finite value at row " +
                      std::to_string(k / std::max<std::size_t>(n_features_, 1)) + ", column " +
                      std::to_string(k % std::max<std::size_t>(n_features_, 1)));
  }
  std::set<std::pair<std::string_view, std::size_t>> seen;
  for (const auto& c : columns_) {
    if (!seen.emplace(c.source_name, c.source_index).second)
      throw DataError("feature matrix: duplicate provenance " + c.source_name + ":" +
                      std::to_string(c.source_index));
  }
}

FeatureMatrix FeatureMatrix::from_values(std::size_t n_samples, std::size_t n_features,
                                         std::vector<double> values,
                                         const std::string& source_name) {
  std::vector<FeatureProvenance> cols(n_features);
  for (std::size_t j = 0; j < n_features; ++j) cols[j] = {source_name, j};
  return FeatureMatrix(n_samples, n_features, std::move(values), std::move(cols));
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> out;
  out.reserve(rows.size() * n_features_);
  for (std::size_t r : rows) {
    if (r >= n_samples_) throw DataError("row index out of range");
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  FeatureMatrix m;
  m.n_samples_ = rows.size();
  m.n_features_ = n_features_;
  m.values_ = std::move(out);
  m.columns_ = columns_;
  return m;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> cols) const {
  FeatureMatrix m;
  m.n_samples_ = n_samples_;
  m.n_features_ = cols.size();
  m.values_.resize(n_samples_ * cols.size());
  m.columns_.reserve(cols.size());
  for (std::size_t c : cols) {
    if (c >= n_features_) throw DataError("column index out of range");
    m.columns_.push_back(columns_[c]);
  }
  for (std::size_t i = 0; i < n_samples_; ++i) {
    const double* src = values_.data() + i * n_features_;
    double* dst = m.values_.data() + i * cols.size();
    for (std::size_t k = 0; k < cols.size(); ++k) dst[k] = src[cols[k]];
  }
  return m;
}

// ---------------------------------------------------------------------------
// LabelVector

LabelVector::LabelVector(std::vector<int> labels, int num_classes)
    : labels_(std::move(labels)), num_classes_(num_classes) {
  if (num_classes_ < 2) throw DataError("labels: need at least 2 classes");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_)
      throw DataError("labels: label " + std::to_string(labels_[i]) + " at index " +
                      std::to_string(i) + " outside 0.." + std::to_string(num_classes_ - 1));
  }
}

LabelVector LabelVector::infer(std::vector<int> labels) {
  int k = 2;
  for (int l : labels) {
    if (l < 0) throw DataError("labels: negative class id " + std::to_string(l));
    k = std::max(k, l + 1);
  }
  return LabelVector(std::move(labels), k);
}

std::vector<std::size_t> LabelVector::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int l : labels_) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

LabelVector LabelVector::select(std::span<const std::size_t> rows) const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(labels_.at(r));
  LabelVector y;
  y.labels_ = std::move(out);
  y.num_classes_ = num_classes_;
  return y;
}

// ---------------------------------------------------------------------------
// CSV

LoadedCsv load_feature_csv(const std::filesystem::path& path,
                           const std::optional<std::string>& label_column,
                           std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw DataError("empty file (no header): " + path.string());
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = split_commas(line);
  std::optional<std::size_t> label_pos;
  if (label_column) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == *label_column) label_pos = j;
    if (!label_pos)
      throw DataError("label column '" + *label_column + "' not found in " + path.string());
  }

  const std::string stem = path.stem().string();
  std::vector<FeatureProvenance> columns;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (label_pos && j == *label_pos) continue;
    auto prov = parse_provenance(header[j]);
    columns.push_back(prov ? *prov : FeatureProvenance{stem, columns.size()});
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      throw DataError(path.string() + ": ragged row at line " + std::to_string(line_no) +
                      " (" + std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()) + ")");
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto cell = cells[j];
      if (label_pos && j == *label_pos) {
        long long v = 0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || p != cell.data() + cell.size() || v < 0 ||
            v > std::numeric_limits<int>::max())
          throw DataError(path.string() + ": invalid label '" + std::string(cell) + "' at line " +
                          std::to_string(line_no));
        if (num_classes && v >= *num_classes)
          throw DataError(path.string() + ": label " + std::to_string(v) + " at line " +
                          std::to_string(line_no) + " not below declared class count " +
                          std::to_string(*num_classes));
        labels.push_back(static_cast<int>(v));
        continue;
      }
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(v))
        throw DataError(path.string() + ": non-numeric or non-finite cell '" + std::string(cell) +
                        "' at line " + std::to_string(line_no) + ", column " +
                        std::to_string(j + 1) + " (" + std::string(header[j]) + ")");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("empty dataset: " + path.string());

  const std::size_t n_cols = columns.size();
  LoadedCsv out{FeatureMatrix(rows, n_cols, std::move(values), std::move(columns)),
                std::nullopt};
  if (label_pos)
    out.labels = num_classes ? LabelVector(std::move(labels), *num_classes)
                             : LabelVector::infer(std::move(labels));
  return out;
}

void save_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m,
                      const LabelVector* labels, const std::string& label_column) {
  if (labels && labels->size() != m.n_samples())
    throw DataError("label count does not match matrix rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t j = 0; j < m.n_features(); ++j) {
    if (j) out << ',';
    out << m.columns()[j].source_name << ':' << m.columns()[j].source_index;
  }
  if (labels) out << (m.n_features() ? "," : "") << label_column;
  out << '\n';
  for (std::size_t i = 0; i < m.n_samples(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      out << format_double(r[j]);
    }
    if (labels) out << (r.empty() ? "" : ",") << (*labels)[i];
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void save_label_csv(const std::filesystem::path& path, const LabelVector& y,
                    const std::string& column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << column << '\n';
  for (int l : y.labels()) out << l << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Binary sidecar

void save_feature_binary(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, 4);
  out.put(static_cast<char>(kBinaryVersion));
  write_le<std::uint64_t>(out, m.n_samples());
  write_le<std::uint64_t>(out, m.n_features());
  for (const auto& c : m.columns()) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.source_name.size()));
    out.write(c.source_name.data(), static_cast<std::streamsize>(c.source_name.size()));
    write_le<std::uint64_t>(out, c.source_index);
  }
  for (double v : m.values()) write_le<double>(out, v);
  if (!out) throw DataError("write failed: " + path.string());
}

FeatureMatrix load_feature_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open binary matrix: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a MOPT binary matrix: " + path.string());
  const int version = in.get();
  if (version != kBinaryVersion)
    throw DataError("unsupported MOPT version " + std::to_string(version) + ": " + path.string());
  const auto rows = read_le<std::uint64_t>(in, path);
  const auto cols = read_le<std::uint64_t>(in, path);
  constexpr std::uint64_t kSanity = std::uint64_t{1} << 40;
  if (rows > kSanity || cols > kSanity || (cols && rows > kSanity / cols))
    throw DataError("implausible dimensions in " + path.string());
  std::vector<FeatureProvenance> columns(cols);
  for (auto& c : columns) {
    const auto len = read_le<std::uint32_t>(in, path);
    c.source_name.resize(len);
    if (!in.read(c.source_name.data(), len)) throw DataError("truncated binary matrix: " + path.string());
    c.source_index = read_le<std::uint64_t>(in, path);
  }
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = read_le<double>(in, path);
  return FeatureMatrix(rows, cols, std::move(values), std::move(columns));
}

// ---------------------------------------------------------------------------
// Fusion and splitting

FeatureMatrix fuse(std::span<const FeatureMatrix> matrices) {
  if (matrices.empty()) throw DataError("fuse: empty input list");
  const std::size_t n = matrices[0].n_samples();
  std::size_t total = 0;
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    if (matrices[k].n_samples() != n)
      throw DataError("fuse: input " + std::to_string(k) + " has " +
                      std::to_string(matrices[k].n_samples()) + " rows, expected " +
                      std::to_string(n));
    total += matrices[k].n_features();
  }
  std::vector<double> values;
  values.reserve(n * total);
  std::vector<FeatureProvenance> columns;
  columns.reserve(total);
  for (const auto& m : matrices) columns.insert(columns.end(), m.columns().begin(), m.columns().end());
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& m : matrices) {
      auto r = m.row(i);
      values.insert(values.end(), r.begin(), r.end());
    }
  return FeatureMatrix(n, total, std::move(values), std::move(columns));
}

std::vector<std::size_t> largest_remainder(std::span<const double> quotas, std::size_t total) {
  std::vector<std::size_t> out(quotas.size());
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < quotas.size(); ++c) {
    out[c] = static_cast<std::size_t>(std::floor(quotas[c]));
    assigned += out[c];
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a] - std::floor(quotas[a]) > quotas[b] - std::floor(quotas[b]);
  });
  for (std::size_t k = 0; assigned < total && !order.empty(); ++k) {
    ++out[order[k % order.size()]];
    ++assigned;
  }
  return out;
}

std::vector<std::size_t> stratified_test_counts(std::span<const std::size_t> class_counts,
                                                double test_fraction) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ConfigError("test fraction must lie in (0, 1)");
  std::size_t n = 0;
  std::vector<double> quotas;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    if (class_counts[c] < 2)
      throw DataError("class " + std::to_string(c) + " has " + std::to_string(class_counts[c]) +
                      " samples; stratified split needs at least 2");
    n += class_counts[c];
    quotas.push_back(test_fraction * static_cast<double>(class_counts[c]));
  }
  const auto total = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (total == 0 || total >= n)
    throw ConfigError("test fraction " + std::to_string(test_fraction) +
                      " yields an empty train or test set");
  auto counts = largest_remainder(quotas, total);
  for (std::size_t c = 0; c < counts.size(); ++c) counts[c] = std::min(counts[c], class_counts[c]);
  return counts;
}

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const LabelVector& y) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(y.num_classes()));
  for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);
  return by_class;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

DatasetSplit stratified_split(const LabelVector& y, double test_fraction, std::uint64_t seed) {
  const auto counts = y.class_counts();
  const auto test_counts = stratified_test_counts(counts, test_fraction);
  auto by_class = indices_by_class(y);
  DatasetSplit split;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    Rng rng = Rng::substream(seed, {c});
    shuffle(by_class[c], rng);
    split.test_indices.insert(split.test_indices.end(), by_class[c].begin(),
                              by_class[c].begin() + static_cast<std::ptrdiff_t>(test_counts[c]));
    split.train_indices.insert(split.train_indices.end(),
                               by_class[c].begin() + static_cast<std::ptrdiff_t>(test_counts[c]),
                               by_class[c].end());
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

std::vector<DatasetSplit> stratified_kfold(const LabelVector& y, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (y.size() < static_cast<std::size_t>(k)) throw DataError("fewer samples than folds");
  auto by_class = indices_by_class(y);
  std::vector<int> fold_of(y.size(), 0);
  // Continue the round-robin across classes so fold sizes stay balanced.
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    Rng rng = Rng::substream(seed, {0x6b666f6c64ULL, c});
    shuffle(by_class[c], rng);
    for (std::size_t idx : by_class[c]) fold_of[idx] = static_cast<int>(cursor++ % static_cast<std::size_t>(k));
  }
  std::vector<DatasetSplit> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < y.size(); ++i)
    for (int f = 0; f < k; ++f)
      (fold_of[i] == f ? folds[f].test_indices : folds[f].train_indices).push_back(i);
  return folds;
}

}  // namespace maskopt
