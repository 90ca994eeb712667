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

#ifndef DPREG_DATASET_HPP_
#define DPREG_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpreg/table.hpp"

namespace dpreg {

/// Paired inputs (n x d) and targets (n). Free of missing and non-finite
/// values by construction; cleaning happens before a Dataset exists.
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;

  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
};

/// Validates shape and finiteness; throws std::invalid_argument otherwise.
Dataset make_dataset(Eigen::MatrixXd inputs, Eigen::VectorXd targets);

/// Joins an expression table with one drug's responses, dropping rows whose
/// response is missing. The expression table must be complete. Returns the
/// dataset together with the kept cell-line labels.
struct DrugDataset {
  Dataset data;
  std::vector<std::string> cell_lines;
  std::size_t dropped_missing = 0;
};
DrugDataset make_drug_dataset(const RawTable& expression,
                              const ResponseTable& responses,
                              const std::string& drug);

/// Column-centering statistics learned on one dataset (train) and applied
/// to another, so cross-validation never leaks test information.
struct FeatureScaler {
  Eigen::RowVectorXd column_means;

  static FeatureScaler fit(const Eigen::MatrixXd& X);
  /// Subtracts the stored means, then normalises each row to unit L2 norm.
  /// A row that is exactly zero after centering is an error.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

/// Centers each column on its own mean, then normalises rows to unit L2
/// norm. Requires n >= 2 rows.
Eigen::MatrixXd preprocess_features(const Eigen::MatrixXd& X);

/// Subtracts the mean: output sums to zero.
Eigen::VectorXd center_targets(const Eigen::VectorXd& y);

/// Deterministic split recipe: same seed + same dataset => same partition.
struct SplitSpec {
  std::size_t n_test = 0;
  std::size_t n_nonprivate = 0;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset test;
  Dataset nonprivate;
  Dataset private_part;
};

/// Disjoint (test, non-private, private) partition covering all rows;
/// the private set is the remainder.
SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec);

/// Index-level variant, exposed for property tests.
struct SplitIndices {
  std::vector<std::size_t> test;
  std::vector<std::size_t> nonprivate;
  std::vector<std::size_t> private_part;
};
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

/// Dataset CSV: header `id,f1..fd,target`, one row per sample.
void save_dataset_csv(const Dataset& dataset,
                      const std::filesystem::path& path,
                      const std::vector<std::string>* row_labels = nullptr);
Dataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace dpreg

#endif  // DPREG_DATASET_HPP_
