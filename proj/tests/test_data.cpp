// Copyright 2026 The dpreg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "dpreg/dataset.hpp"
#include "dpreg/rng.hpp"
#include "dpreg/table.hpp"

namespace fs = std::filesystem;
using dpreg::Dataset;
using dpreg::load_table;
using dpreg::RawTable;
using dpreg::SplitSpec;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dpreg_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("load_table parses a tiny CSV with header") {
  TempDir dir;
  write_file(dir.path / "t.csv", "id,g1,g2\na,1,2\nb,3,4\nc,5,6\n");
  const RawTable t = load_table(dir.path / "t.csv");
  CHECK(t.rows() == 3);
  CHECK(t.cols() == 2);
  CHECK(t.values(2, 1) == 6.0);
  CHECK(t.missing_count() == 0);
  CHECK(t.row_labels[0] == "a");
  CHECK(t.column_labels[1] == "g2");
}

TEST_CASE("empty cells are flagged missing, exactly once each") {
  TempDir dir;
  write_file(dir.path / "t.csv", "id,g1,g2\na,1,\nb,3,4\n");
  const RawTable t = load_table(dir.path / "t.csv");
  CHECK(t.missing_count() == 1);
  CHECK(t.is_missing(0, 1));
  CHECK_FALSE(t.is_missing(0, 0));
}

TEST_CASE("parse failures name line and column") {
  TempDir dir;
  write_file(dir.path / "t.csv", "id,g1\na,1\nb,oops\n");
  try {
    load_table(dir.path / "t.csv");
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
}

TEST_CASE("ragged rows are rejected") {
  TempDir dir;
  write_file(dir.path / "t.csv", "id,g1,g2\na,1,2\nb,3\n");
  CHECK_THROWS_AS(load_table(dir.path / "t.csv"), std::runtime_error);
}

TEST_CASE("985x64 synthetic expression file round-trips") {
  TempDir dir;
  RawTable t;
  t.values.resize(985, 64);
  dpreg::RngStream rng(80, 0);
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    t.row_labels.push_back("cell" + std::to_string(i));
    for (Eigen::Index j = 0; j < t.values.cols(); ++j) {
      t.values(i, j) = rng.next_normal();
    }
  }
  for (Eigen::Index j = 0; j < 64; ++j) {
    t.column_labels.push_back("gene" + std::to_string(j));
  }
  t.missing.assign(985 * 64, 0);
  dpreg::save_table(t, dir.path / "expr.csv");
  const RawTable back = load_table(dir.path / "expr.csv");
  CHECK(back.rows() == 985);
  CHECK(back.cols() == 64);
  CHECK(back.values == t.values);
  CHECK(back.row_labels == t.row_labels);
}

TEST_CASE("select_genes keeps order and handles k=0") {
  TempDir dir;
  write_file(dir.path / "t.csv",
             "id,g1,g2,g3,g4,g5\na,1,2,3,4,5\nb,6,7,8,9,10\n");
  const RawTable t = load_table(dir.path / "t.csv");

  const RawTable none = select_genes(t, {"g1"}, 0);
  CHECK(none.cols() == 0);
  CHECK(none.rows() == 2);

  const RawTable two = select_genes(t, {"g3", "g1"}, 2);
  CHECK(two.column_labels == std::vector<std::string>{"g3", "g1"});
  CHECK(two.values(0, 0) == 3.0);
  CHECK(two.values(0, 1) == 1.0);

  CHECK_THROWS_WITH_AS(select_genes(t, {"g9"}, 1),
                       doctest::Contains("g9"), std::invalid_argument);
}

TEST_CASE("select_genes top-10 of a 64-gene order matches a column-pick oracle") {
  RawTable t;
  t.values.resize(20, 64);
  dpreg::RngStream rng(81, 0);
  std::vector<std::string> order;
  for (Eigen::Index j = 0; j < 64; ++j) {
    t.column_labels.push_back("g" + std::to_string(j));
  }
  // Order list permutes the columns.
  for (Eigen::Index j = 63; j >= 0; --j) order.push_back("g" + std::to_string(j));
  for (Eigen::Index i = 0; i < 20; ++i) {
    t.row_labels.push_back("r" + std::to_string(i));
    for (Eigen::Index j = 0; j < 64; ++j) t.values(i, j) = rng.next_normal();
  }
  t.missing.assign(20 * 64, 0);
  const RawTable picked = select_genes(t, order, 10);
  CHECK(picked.cols() == 10);
  for (int jj = 0; jj < 10; ++jj) {
    const int j = 63 - jj;  // independent column-pick oracle
    for (int i = 0; i < 20; ++i) {
      CHECK(picked.values(i, jj) == t.values(i, j));
    }
  }
}

TEST_CASE("preprocess_features on the 2x1 example") {
  Eigen::MatrixXd X(2, 1);
  X << 1, 3;
  const Eigen::MatrixXd out = dpreg::preprocess_features(X);
  CHECK(out(0, 0) == doctest::Approx(-1.0));
  CHECK(out(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("preprocess_features: unit rows and centered columns") {
  dpreg::RngStream rng(82, 0);
  Eigen::MatrixXd X(20, 5);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    X(i / 5, i % 5) = rng.next_normal() * 2 + 1;
  }
  const Eigen::MatrixXd out = dpreg::preprocess_features(X);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    CHECK(std::abs(out.row(i).norm() - 1.0) < 1e-9);
  }
  // The intermediate centered matrix has zero column sums; recompute the
  // centering independently.
  Eigen::MatrixXd centered = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) mean += X(i, j);
    mean /= static_cast<double>(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) centered(i, j) -= mean;
  }
  for (Eigen::Index j = 0; j < centered.cols(); ++j) {
    CHECK(std::abs(centered.col(j).sum()) < 1e-9);
  }
}

TEST_CASE("preprocess_features rejects degenerate input") {
  Eigen::MatrixXd one_row(1, 3);
  one_row.setOnes();
  CHECK_THROWS_AS(dpreg::preprocess_features(one_row), std::invalid_argument);

  Eigen::MatrixXd constant_rows(3, 2);
  constant_rows.setConstant(4.0);  // all rows zero after centering
  CHECK_THROWS_AS(dpreg::preprocess_features(constant_rows),
                  std::invalid_argument);
}

TEST_CASE("both preprocessing steps are idempotent up to 1e-9") {
  dpreg::RngStream rng(83, 0);
  Eigen::MatrixXd X(30, 4);
  for (Eigen::Index i = 0; i < X.size(); ++i) {
    X(i / 4, i % 4) = rng.next_normal();
  }
  // Re-centering a centered column changes nothing.
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd recentered =
      centered.rowwise() - centered.colwise().mean();
  CHECK((centered - recentered).cwiseAbs().maxCoeff() < 1e-9);
  // Re-normalising a unit row changes nothing.
  const Eigen::MatrixXd unit = dpreg::preprocess_features(X);
  Eigen::MatrixXd renormalised = unit;
  for (Eigen::Index i = 0; i < renormalised.rows(); ++i) {
    renormalised.row(i) /= renormalised.row(i).norm();
  }
  CHECK((unit - renormalised).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("train-fitted scaler applies train statistics to test rows") {
  Eigen::MatrixXd train(4, 2);
  train << 1, 10, 3, 30, 5, 50, 7, 70;
  Eigen::MatrixXd test(1, 2);
  test << 5, 20;
  const dpreg::FeatureScaler scaler = dpreg::FeatureScaler::fit(train);
  CHECK(scaler.column_means(0) == doctest::Approx(4.0));
  const Eigen::MatrixXd out = scaler.apply(test);
  CHECK(std::abs(out.row(0).norm() - 1.0) < 1e-12);
  // Centering uses the train means, not the row's own statistics.
  CHECK(out(0, 0) > 0.0);   // 5 - 4
  CHECK(out(0, 1) < 0.0);   // 20 - 40
  Eigen::MatrixXd zero_row(1, 2);
  zero_row << 4, 40;  // equals the train means exactly
  CHECK_THROWS_AS(scaler.apply(zero_row), std::invalid_argument);
}

TEST_CASE("center_targets examples") {
  Eigen::VectorXd constant(3);
  constant << 5, 5, 5;
  CHECK(dpreg::center_targets(constant).isZero(0.0));

  Eigen::VectorXd symmetric(3);
  symmetric << 1, 2, 3;
  const Eigen::VectorXd out = dpreg::center_targets(symmetric);
  CHECK(out(0) == doctest::Approx(-1.0));
  CHECK(out(1) == doctest::Approx(0.0));
  CHECK(out(2) == doctest::Approx(1.0));

  dpreg::RngStream rng(84, 0);
  Eigen::VectorXd random(100);
  for (Eigen::Index i = 0; i < 100; ++i) random(i) = rng.next_normal() * 3;
  double mean = 0.0;  // independent mean computation
  const Eigen::VectorXd centered = dpreg::center_targets(random);
  for (Eigen::Index i = 0; i < 100; ++i) mean += centered(i);
  CHECK(std::abs(mean / 100.0) < 1e-12);

  CHECK_THROWS_AS(dpreg::center_targets(Eigen::VectorXd()),
                  std::invalid_argument);
}

TEST_CASE("recentering a centered vector changes nothing") {
  dpreg::RngStream rng(85, 0);
  Eigen::VectorXd y(50);
  for (Eigen::Index i = 0; i < 50; ++i) y(i) = rng.next_normal();
  const Eigen::VectorXd once = dpreg::center_targets(y);
  const Eigen::VectorXd twice = dpreg::center_targets(once);
  CHECK((once - twice).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("split sizes follow the protocol arithmetic") {
  dpreg::RngStream rng(86, 0);
  Dataset d;
  d.inputs.resize(985, 3);
  d.targets.resize(985);
  for (Eigen::Index i = 0; i < 985; ++i) {
    for (int j = 0; j < 3; ++j) d.inputs(i, j) = rng.next_normal();
    d.targets(i) = rng.next_normal();
  }
  const auto split = dpreg::split_dataset(d, SplitSpec{100, 30, 7});
  CHECK(split.test.size() == 100);
  CHECK(split.nonprivate.size() == 30);
  CHECK(split.private_part.size() == 855);
}

TEST_CASE("exhaustive test split leaves an empty private set") {
  Dataset d;
  d.inputs = Eigen::MatrixXd::Random(10, 2);
  d.targets = Eigen::VectorXd::Random(10);
  const auto split = dpreg::split_dataset(d, SplitSpec{10, 0, 3});
  CHECK(split.private_part.size() == 0);
  CHECK(split.test.size() == 10);
}

TEST_CASE("a spec exceeding n is rejected") {
  Dataset d;
  d.inputs = Eigen::MatrixXd::Random(5, 2);
  d.targets = Eigen::VectorXd::Random(5);
  CHECK_THROWS_AS(dpreg::split_dataset(d, SplitSpec{4, 2, 0}),
                  std::invalid_argument);
}

TEST_CASE("same seed reproduces the identical partition") {
  const auto a = dpreg::split_indices(37, SplitSpec{10, 5, 99});
  const auto b = dpreg::split_indices(37, SplitSpec{10, 5, 99});
  CHECK(a.test == b.test);
  CHECK(a.nonprivate == b.nonprivate);
  CHECK(a.private_part == b.private_part);
}

TEST_CASE("split indices partition the index range for any seed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto idx = dpreg::split_indices(37, SplitSpec{10, 5, seed});
    std::set<std::size_t> all;
    all.insert(idx.test.begin(), idx.test.end());
    all.insert(idx.nonprivate.begin(), idx.nonprivate.end());
    all.insert(idx.private_part.begin(), idx.private_part.end());
    CHECK(all.size() == 37);  // disjoint and covering
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 36);
    CHECK(idx.test.size() == 10);
    CHECK(idx.nonprivate.size() == 5);
  }
}

TEST_CASE("per-drug cleaning drops exactly the missing responses") {
  TempDir dir;
  write_file(dir.path / "expr.csv",
             "id,g1,g2\nc1,1,2\nc2,3,4\nc3,5,6\nc4,7,8\n");
  write_file(dir.path / "resp.csv",
             "cell,drug,ic50\n"
             "c1,drugA,0.5\nc2,drugA,\nc3,drugA,1.5\nc4,drugA,\n"
             "c1,drugB,2.0\nc2,drugB,2.5\n");
  const RawTable expr = load_table(dir.path / "expr.csv");
  const auto resp = dpreg::load_responses(dir.path / "resp.csv");

  const auto a = dpreg::make_drug_dataset(expr, resp, "drugA");
  CHECK(a.data.size() == 2);
  CHECK(a.dropped_missing == 2);
  CHECK(a.cell_lines == std::vector<std::string>{"c1", "c3"});
  // Cleaning never alters the surviving values: row-subset of the raw table.
  CHECK(a.data.inputs(0, 0) == 1.0);
  CHECK(a.data.inputs(1, 1) == 6.0);
  CHECK(a.data.targets(1) == 1.5);

  const auto b = dpreg::make_drug_dataset(expr, resp, "drugB");
  CHECK(b.data.size() == 2);
  CHECK(b.dropped_missing == 0);
}

TEST_CASE("dataset CSV round-trip") {
  TempDir dir;
  dpreg::RngStream rng(87, 0);
  Dataset d;
  d.inputs.resize(12, 3);
  d.targets.resize(12);
  for (Eigen::Index i = 0; i < 12; ++i) {
    for (int j = 0; j < 3; ++j) d.inputs(i, j) = rng.next_normal();
    d.targets(i) = rng.next_normal();
  }
  dpreg::save_dataset_csv(d, dir.path / "d.csv");
  const Dataset back = dpreg::load_dataset_csv(dir.path / "d.csv");
  CHECK(back.inputs == d.inputs);
  CHECK(back.targets == d.targets);
}
