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

#include "dpreg/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dpreg/rng.hpp"

namespace dpreg {
namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
  Dataset out;
  out.inputs.resize(static_cast<Eigen::Index>(idx.size()), d.inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.inputs.row(static_cast<Eigen::Index>(i)) =
        d.inputs.row(static_cast<Eigen::Index>(idx[i]));
    out.targets(static_cast<Eigen::Index>(i)) =
        d.targets(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

}  // namespace

Dataset make_dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets) {
  if (inputs.rows() != targets.size()) {
    throw std::invalid_argument(
        "make_dataset: inputs row count must equal targets length");
  }
  if (!inputs.allFinite() || !targets.allFinite()) {
    throw std::invalid_argument(
        "make_dataset: inputs and targets must be finite");
  }
  return Dataset{std::move(inputs), std::move(targets)};
}

DrugDataset make_drug_dataset(const RawTable& expression,
                              const ResponseTable& responses,
                              const std::string& drug) {
  if (expression.missing_count() != 0) {
    throw std::invalid_argument(
        "make_drug_dataset: expression table contains missing entries");
  }
  const auto it = responses.find(drug);
  if (it == responses.end()) {
    throw std::invalid_argument("make_drug_dataset: unknown drug: " + drug);
  }
  std::unordered_map<std::string, std::size_t> row_index;
  for (std::size_t i = 0; i < expression.rows(); ++i) {
    row_index.emplace(expression.row_labels[i], i);
  }
  std::vector<std::size_t> keep;
  std::vector<double> values;
  std::vector<std::string> labels;
  std::size_t dropped = 0;
  for (const auto& rec : it->second) {
    if (!rec.value.has_value()) {
      ++dropped;
      continue;
    }
    const auto found = row_index.find(rec.cell_line);
    if (found == row_index.end()) {
      throw std::invalid_argument(
          "make_drug_dataset: response names cell line not present in the "
          "expression table: " +
          rec.cell_line);
    }
    keep.push_back(found->second);
    values.push_back(*rec.value);
    labels.push_back(rec.cell_line);
  }
  DrugDataset out;
  out.cell_lines = std::move(labels);
  out.dropped_missing = dropped;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(keep.size()),
                    expression.values.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) =
        expression.values.row(static_cast<Eigen::Index>(keep[i]));
    y(static_cast<Eigen::Index>(i)) = values[i];
  }
  out.data = make_dataset(std::move(X), std::move(y));
  return out;
}

FeatureScaler FeatureScaler::fit(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) {
    throw std::invalid_argument(
        "FeatureScaler::fit: at least 2 rows are required");
  }
  if (!X.allFinite()) {
    throw std::invalid_argument("FeatureScaler::fit: non-finite values");
  }
  return FeatureScaler{X.colwise().mean()};
}

Eigen::MatrixXd FeatureScaler::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != column_means.cols()) {
    throw std::invalid_argument("FeatureScaler::apply: dimension mismatch");
  }
  Eigen::MatrixXd out = X.rowwise() - column_means;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm == 0.0) {
      throw std::invalid_argument(
          "preprocess_features: row " + std::to_string(i) +
          " is exactly zero after centering");
    }
    out.row(i) /= norm;
  }
  return out;
}

Eigen::MatrixXd preprocess_features(const Eigen::MatrixXd& X) {
  return FeatureScaler::fit(X).apply(X);
}

Eigen::VectorXd center_targets(const Eigen::VectorXd& y) {
  if (y.size() == 0) {
    throw std::invalid_argument("center_targets: empty vector");
  }
  if (!y.allFinite()) {
    throw std::invalid_argument("center_targets: non-finite values");
  }
  return y.array() - y.mean();
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  if (spec.n_test + spec.n_nonprivate > n) {
    throw std::invalid_argument(
        "split_dataset: n_test + n_nonprivate exceeds the dataset size");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  RngStream rng(spec.seed, derive_stream("data.split"));
  // Fisher-Yates over the index range.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i)));
    std::swap(perm[i - 1], perm[j]);
  }
  SplitIndices out;
  out.test.assign(perm.begin(),
                  perm.begin() + static_cast<std::ptrdiff_t>(spec.n_test));
  out.nonprivate.assign(
      perm.begin() + static_cast<std::ptrdiff_t>(spec.n_test),
      perm.begin() +
          static_cast<std::ptrdiff_t>(spec.n_test + spec.n_nonprivate));
  out.private_part.assign(
      perm.begin() +
          static_cast<std::ptrdiff_t>(spec.n_test + spec.n_nonprivate),
      perm.end());
  return out;
}

SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(dataset.size(), spec);
  return SplitResult{take_rows(dataset, idx.test),
                     take_rows(dataset, idx.nonprivate),
                     take_rows(dataset, idx.private_part)};
}

void save_dataset_csv(const Dataset& dataset,
                      const std::filesystem::path& path,
                      const std::vector<std::string>* row_labels) {
  if (row_labels && row_labels->size() != dataset.size()) {
    throw std::invalid_argument("save_dataset_csv: label count mismatch");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out << "id";
  for (int j = 0; j < dataset.dim(); ++j) out << ",f" << j + 1;
  out << ",target\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (row_labels) {
      out << (*row_labels)[i];
    } else {
      out << "r" << i + 1;
    }
    for (int j = 0; j < dataset.dim(); ++j) {
      out << ","
          << format_value(dataset.inputs(static_cast<Eigen::Index>(i), j));
    }
    out << "," << format_value(dataset.targets(static_cast<Eigen::Index>(i)))
        << "\n";
  }
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  const RawTable table = load_table(path, ',');
  if (table.cols() < 1) {
    throw std::runtime_error("load_dataset_csv: no target column in " +
                             path.string());
  }
  if (table.missing_count() != 0) {
    throw std::runtime_error("load_dataset_csv: missing cells in " +
                             path.string());
  }
  const Eigen::Index d = table.values.cols() - 1;
  return make_dataset(table.values.leftCols(d), table.values.col(d));
}

}  // namespace dpreg
