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

#ifndef DPREG_TABLE_HPP_
#define DPREG_TABLE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dpreg {

/// Labelled rectangular table as parsed from a delimited text file.
/// Missing cells are explicitly flagged (and hold NaN), never silent zeros.
struct RawTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
  Eigen::MatrixXd values;
  // Row-major missing mask, same shape as `values`.
  std::vector<std::uint8_t> missing;

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return column_labels.size(); }
  bool is_missing(std::size_t i, std::size_t j) const {
    return missing[i * cols() + j] != 0;
  }
  std::size_t missing_count() const;
};

/// Parses a delimited table with one header row and one leading label
/// column. Empty cells are flagged missing; non-numeric cells and ragged
/// rows raise std::runtime_error naming the line and column.
RawTable load_table(const std::filesystem::path& path, char delimiter = ',');

void save_table(const RawTable& table, const std::filesystem::path& path,
                char delimiter = ',');

/// Keeps the first `k` columns of `order`, in that order. Every identifier
/// in `order` must exist in `table`; unknown names raise with a full list.
RawTable select_genes(const RawTable& table,
                      const std::vector<std::string>& order, std::size_t k);

/// One identifier per line, ordered by descending mutation count.
std::vector<std::string> load_gene_order(const std::filesystem::path& path);

/// Long-format response file: (cell line id, drug id, value) columns with a
/// header row. Empty values are kept as flagged-missing entries so the
/// per-drug drop count is observable.
struct ResponseRecord {
  std::string cell_line;
  std::optional<double> value;  // nullopt = missing response
};

using ResponseTable = std::map<std::string, std::vector<ResponseRecord>>;

ResponseTable load_responses(const std::filesystem::path& path,
                             char delimiter = ',');

}  // namespace dpreg

#endif  // DPREG_TABLE_HPP_
