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

#include "dpreg/table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace dpreg {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delimiter) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_cell(const std::string& cell, std::size_t line_no,
                  std::size_t col_no, const std::filesystem::path& path) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != cell.size() || pos == 0) {
    std::ostringstream msg;
    msg << path.string() << ": parse failure at line " << line_no
        << ", column " << col_no << ": '" << cell << "' is not a number";
    throw std::runtime_error(msg.str());
  }
  return v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // Ignore trailing blank lines only.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::size_t RawTable::missing_count() const {
  std::size_t n = 0;
  for (std::uint8_t m : missing) n += m != 0;
  return n;
}

RawTable load_table(const std::filesystem::path& path, char delimiter) {
  const auto lines = read_lines(path);
  if (lines.empty()) {
    throw std::runtime_error("empty table file: " + path.string());
  }
  const auto header = split_line(lines[0], delimiter);
  if (header.size() < 2) {
    throw std::runtime_error(path.string() +
                             ": header must contain a label column and at "
                             "least one data column");
  }
  RawTable table;
  table.column_labels.assign(header.begin() + 1, header.end());
  const std::size_t m = table.column_labels.size();
  const std::size_t n = lines.size() - 1;
  table.values.resize(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(m));
  table.missing.assign(n * m, 0);
  table.row_labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t line_no = i + 2;
    const auto cells = split_line(lines[i + 1], delimiter);
    if (cells.size() != m + 1) {
      std::ostringstream msg;
      msg << path.string() << ": ragged row at line " << line_no
          << ": expected " << m + 1 << " cells, found " << cells.size();
      throw std::runtime_error(msg.str());
    }
    table.row_labels.push_back(cells[0]);
    for (std::size_t j = 0; j < m; ++j) {
      if (cells[j + 1].empty()) {
        table.missing[i * m + j] = 1;
        table.values(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(j)) =
            std::numeric_limits<double>::quiet_NaN();
      } else {
        table.values(static_cast<Eigen::Index>(i),
                     static_cast<Eigen::Index>(j)) =
            parse_cell(cells[j + 1], line_no, j + 2, path);
      }
    }
  }
  return table;
}

void save_table(const RawTable& table, const std::filesystem::path& path,
                char delimiter) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out << "id";
  for (const auto& c : table.column_labels) out << delimiter << c;
  out << "\n";
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out << table.row_labels[i];
    for (std::size_t j = 0; j < table.cols(); ++j) {
      out << delimiter;
      if (!table.is_missing(i, j)) {
        out << format_value(table.values(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j)));
      }
    }
    out << "\n";
  }
}

RawTable select_genes(const RawTable& table,
                      const std::vector<std::string>& order, std::size_t k) {
  if (k > order.size()) {
    throw std::invalid_argument(
        "select_genes: k exceeds the length of the gene order list");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < table.cols(); ++j) {
    index.emplace(table.column_labels[j], j);
  }
  std::vector<std::string> unknown;
  for (const auto& g : order) {
    if (index.find(g) == index.end()) unknown.push_back(g);
  }
  if (!unknown.empty()) {
    std::ostringstream msg;
    msg << "select_genes: unknown identifiers:";
    for (const auto& g : unknown) msg << " " << g;
    throw std::invalid_argument(msg.str());
  }
  RawTable out;
  out.row_labels = table.row_labels;
  out.column_labels.assign(order.begin(),
                           order.begin() + static_cast<std::ptrdiff_t>(k));
  const std::size_t n = table.rows();
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  out.missing.assign(n * k, 0);
  for (std::size_t jj = 0; jj < k; ++jj) {
    const std::size_t j = index[order[jj]];
    for (std::size_t i = 0; i < n; ++i) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) =
          table.values(static_cast<Eigen::Index>(i),
                       static_cast<Eigen::Index>(j));
      out.missing[i * k + jj] = table.missing[i * table.cols() + j];
    }
  }
  return out;
}

std::vector<std::string> load_gene_order(const std::filesystem::path& path) {
  std::vector<std::string> order;
  for (const auto& line : read_lines(path)) {
    const std::string id = trim(line);
    if (!id.empty()) order.push_back(id);
  }
  return order;
}

ResponseTable load_responses(const std::filesystem::path& path,
                             char delimiter) {
  const auto lines = read_lines(path);
  if (lines.empty()) {
    throw std::runtime_error("empty response file: " + path.string());
  }
  ResponseTable table;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto cells = split_line(lines[i], delimiter);
    if (cells.size() != 3) {
      std::ostringstream msg;
      msg << path.string() << ": ragged row at line " << line_no
          << ": expected 3 cells, found " << cells.size();
      throw std::runtime_error(msg.str());
    }
    ResponseRecord rec;
    rec.cell_line = cells[0];
    if (!cells[2].empty()) {
      rec.value = parse_cell(cells[2], line_no, 3, path);
    }
    table[cells[1]].push_back(std::move(rec));
  }
  return table;
}

}  // namespace dpreg
