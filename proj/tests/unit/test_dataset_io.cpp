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

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "../support/test_util.hpp"
#include "dataset_io.hpp"
#include "errors.hpp"
#include "rng.hpp"

using namespace maskopt;
using testutil::TempDir;
using testutil::write_file;

namespace {

FeatureMatrix ramp(std::size_t rows, std::size_t cols, const std::string& name, double offset = 0.0) {
  std::vector<double> v(rows * cols);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = offset + 0.25 * static_cast<double>(i);
  return FeatureMatrix::from_values(rows, cols, std::move(v), name);
}

LabelVector labels_from_counts(const std::vector<std::size_t>& counts) {
  std::vector<int> y;
  for (std::size_t c = 0; c < counts.size(); ++c) y.insert(y.end(), counts[c], static_cast<int>(c));
  return LabelVector(std::move(y), static_cast<int>(counts.size()));
}

}  // namespace

TEST_CASE("feature matrix validates shape and values") {
  CHECK_THROWS_AS(FeatureMatrix(2, 2, {1, 2, 3}, {{"a", 0}, {"a", 1}}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1, std::nan("")}, {{"a", 0}, {"a", 1}}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1, 2}, {{"a", 0}, {"a", 0}}), DataError);
  auto m = ramp(3, 2, "f");
  CHECK(m.at(2, 1) == 1.25);
  CHECK(m.columns()[1] == FeatureProvenance{"f", 1});
}

TEST_CASE("select rows and columns keep provenance") {
  auto m = ramp(4, 3, "f");
  const std::vector<std::size_t> rows{3, 1}, cols{2, 0};
  auto r = m.select_rows(rows).select_columns(cols);
  CHECK(r.n_samples() == 2);
  CHECK(r.n_features() == 2);
  CHECK(r.at(0, 0) == m.at(3, 2));
  CHECK(r.at(1, 1) == m.at(1, 0));
  CHECK(r.columns()[0] == FeatureProvenance{"f", 2});
}

TEST_CASE("label vector checks range") {
  CHECK_THROWS_AS(LabelVector({0, 3}, 3), DataError);
  CHECK_THROWS_AS(LabelVector({0, -1}, 3), DataError);
  auto y = LabelVector::infer({0, 2, 2});
  CHECK(y.num_classes() == 3);
  CHECK(y.class_counts() == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("csv load with label column") {
  TempDir dir("csv");
  write_file(dir / "resnet.csv", "a,b,label\n1,2,0\n3,4.5,1\n-1e-3,7,1\n");
  auto loaded = load_feature_csv(dir / "resnet.csv", std::string("label"));
  CHECK(loaded.matrix.n_samples() == 3);
  CHECK(loaded.matrix.n_features() == 2);
  CHECK(loaded.matrix.at(2, 0) == -1e-3);
  CHECK(loaded.matrix.columns()[1] == FeatureProvenance{"resnet", 1});
  REQUIRE(loaded.labels);
  CHECK(loaded.labels->labels() == std::vector<int>{0, 1, 1});
}

TEST_CASE("csv errors name line and column") {
  TempDir dir("csv_err");
  write_file(dir / "a.csv", "x,y\n1,2\n3,abc\n");
  try {
    load_feature_csv(dir / "a.csv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
  write_file(dir / "b.csv", "x,y\n1,2\n3\n");
  CHECK_THROWS_AS(load_feature_csv(dir / "b.csv"), DataError);
  write_file(dir / "c.csv", "x,y\n");
  CHECK_THROWS_WITH_AS(load_feature_csv(dir / "c.csv"), doctest::Contains("empty dataset"), DataError);
  write_file(dir / "d.csv", "x,label\n1,0\n2,4\n");
  CHECK_THROWS_AS(load_feature_csv(dir / "d.csv", std::string("label"), 3), DataError);
  CHECK_THROWS_AS(load_feature_csv(dir / "d.csv", std::string("nope")), DataError);
  CHECK_THROWS_AS(load_feature_csv(dir / "missing.csv"), DataError);
  write_file(dir / "e.csv", "x\ninf\n");
  CHECK_THROWS_AS(load_feature_csv(dir / "e.csv"), DataError);
}

TEST_CASE("csv round trip is exact and restores provenance") {
  TempDir dir("rt");
  Rng rng(5);
  std::vector<double> v(30);
  for (auto& x : v) x = rng.normal() * 1e3;
  FeatureMatrix m(10, 3, v, {{"vgg", 4}, {"vgg", 9}, {"dense", 0}});
  LabelVector y({0, 1, 2, 0, 1, 2, 0, 1, 2, 0}, 3);
  save_feature_csv(dir / "m.csv", m, &y);
  auto back = load_feature_csv(dir / "m.csv", std::string("label"));
  CHECK(back.matrix == m);
  CHECK(*back.labels == y);

  save_label_csv(dir / "y.csv", y);
  CHECK(load_feature_csv(dir / "y.csv", std::string("label")).labels->labels() == y.labels());
}

TEST_CASE("binary sidecar round trip") {
  TempDir dir("bin");
  FeatureMatrix m(2, 2, {1.5, -2.0, 1e-300, 4e300}, {{"a", 0}, {"b", 7}});
  save_feature_binary(dir / "m.bin", m);
  CHECK(load_feature_binary(dir / "m.bin") == m);
  write_file(dir / "bad.bin", "MOPX");
  CHECK_THROWS_AS(load_feature_binary(dir / "bad.bin"), DataError);
  auto bytes = testutil::read_file(dir / "m.bin");
  write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_feature_binary(dir / "short.bin"), DataError);
}

TEST_CASE("fuse concatenates columns in order") {
  const std::vector<FeatureMatrix> parts{ramp(5, 2, "a"), ramp(5, 3, "b", 100), ramp(5, 4, "c", 200)};
  auto f = fuse(parts);
  CHECK(f.n_features() == 9);
  CHECK(f.n_samples() == 5);
  CHECK(f.at(3, 2) == parts[1].at(3, 0));
  CHECK(f.at(4, 8) == parts[2].at(4, 3));
  CHECK(f.columns()[5].source_name == "c");

  const std::vector<FeatureMatrix> one{ramp(5, 2, "a")};
  CHECK(fuse(one) == one[0]);

  const std::vector<FeatureMatrix> bad{ramp(5, 2, "a"), ramp(4, 2, "b")};
  CHECK_THROWS_AS(fuse(bad), DataError);
  CHECK_THROWS_AS(fuse(std::vector<FeatureMatrix>{}), DataError);
}

TEST_CASE("largest remainder apportionment") {
  const std::vector<double> q{100.8, 97.0, 100.0, 77.0};
  CHECK(largest_remainder(q, 375) == std::vector<std::size_t>{101, 97, 100, 77});
  const std::vector<double> tie{0.5, 0.5};
  CHECK(largest_remainder(tie, 1) == std::vector<std::size_t>{1, 0});
}

TEST_CASE("stratified test counts") {
  const std::vector<std::size_t> counts{504, 485, 500, 385};
  CHECK(stratified_test_counts(counts, 0.2) == std::vector<std::size_t>{101, 97, 100, 77});
  const std::vector<std::size_t> even{100, 100};
  CHECK(stratified_test_counts(even, 0.25) == std::vector<std::size_t>{25, 25});
  const std::vector<std::size_t> tiny{1, 10};
  CHECK_THROWS_AS(stratified_test_counts(tiny, 0.2), DataError);
  CHECK_THROWS_AS(stratified_test_counts(even, 0.0), ConfigError);
  CHECK_THROWS_AS(stratified_test_counts(even, 1.0), ConfigError);
}

TEST_CASE("stratified split properties") {
  auto y = labels_from_counts({504, 485, 500, 385});
  auto s = stratified_split(y, 0.2, 42);
  std::vector<std::size_t> per(4, 0);
  for (auto i : s.test_indices) ++per[y[i]];
  CHECK(per == std::vector<std::size_t>{101, 97, 100, 77});
  CHECK(s.test_indices.size() + s.train_indices.size() == y.size());
  std::set<std::size_t> all(s.test_indices.begin(), s.test_indices.end());
  all.insert(s.train_indices.begin(), s.train_indices.end());
  CHECK(all.size() == y.size());
  CHECK(std::is_sorted(s.test_indices.begin(), s.test_indices.end()));

  auto again = stratified_split(y, 0.2, 42);
  CHECK(again.test_indices == s.test_indices);
  auto other = stratified_split(y, 0.2, 43);
  CHECK(other.test_indices != s.test_indices);
}

TEST_CASE("stratified folds partition the rows") {
  auto y = labels_from_counts({23, 17, 31});
  auto folds = stratified_kfold(y, 5, 7);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen(y.size(), 0);
  for (const auto& f : folds) {
    CHECK(f.train_indices.size() + f.test_indices.size() == y.size());
    for (auto i : f.test_indices) ++seen[i];
    std::vector<std::size_t> per(3, 0);
    for (auto i : f.test_indices) ++per[y[i]];
    CHECK(per[0] >= 4);
    CHECK(per[0] <= 5);
    CHECK(per[2] >= 6);
    CHECK(per[2] <= 7);
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  CHECK_THROWS_AS(stratified_kfold(y, 1, 7), ConfigError);
}
