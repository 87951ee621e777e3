// Copyright 2026 The etaudit Authors.
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

#include "etaudit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace etaudit {

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Vector take(const Vector& v, const std::vector<std::size_t>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
  }
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("ETAUDIT_THREADS")) {
    const long requested = std::strtol(env, nullptr, 10);
    if (requested >= 1) return static_cast<std::size_t>(requested);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

const std::string& Column::label(std::size_t row) const {
  return categories.at(static_cast<std::size_t>(values.at(row)));
}

GroupPair::GroupPair(std::string a, std::string b) : group_a(std::move(a)), group_b(std::move(b)) {
  if (group_a == group_b) {
    throw UsageError("group pair needs two distinct labels, got '" + group_a + "' twice");
  }
}

GroupPair GroupPair::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw UsageError("group pair must look like A:B, got '" + std::string(text) + "'");
  }
  return GroupPair(std::string(text.substr(0, colon)), std::string(text.substr(colon + 1)));
}

void TabularDataset::add_column(Column column) {
  if (has_column(column.name)) {
    throw DataError("duplicate column name '" + column.name + "'");
  }
  if (columns_.empty()) {
    n_rows_ = column.values.size();
  } else if (column.values.size() != n_rows_) {
    throw DataError("column '" + column.name + "' has " + std::to_string(column.values.size()) +
                    " values, expected " + std::to_string(n_rows_));
  }
  columns_.push_back(std::move(column));
}

void TabularDataset::set_target(std::string name) {
  index_of(name);
  target_ = std::move(name);
}

void TabularDataset::set_protected(std::string name) {
  const Column& c = columns_[index_of(name)];
  if (!c.categorical()) {
    throw DataError("protected column '" + name + "' must carry group labels");
  }
  protected_ = std::move(name);
}

void TabularDataset::set_ignored(std::string name) {
  index_of(name);
  if (std::find(ignored_.begin(), ignored_.end(), name) == ignored_.end()) {
    ignored_.push_back(std::move(name));
  }
}

bool TabularDataset::has_column(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(),
                     [&](const Column& c) { return c.name == name; });
}

std::size_t TabularDataset::index_of(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name == name) return j;
  }
  throw DataError("no column named '" + std::string(name) + "'");
}

const Column& TabularDataset::column(std::string_view name) const {
  return columns_[index_of(name)];
}

std::vector<std::string> TabularDataset::feature_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns_) {
    if (target_ && c.name == *target_) continue;
    if (protected_ && c.name == *protected_) continue;
    if (std::find(ignored_.begin(), ignored_.end(), c.name) != ignored_.end()) continue;
    names.push_back(c.name);
  }
  return names;
}

Matrix TabularDataset::features() const { return features(feature_names()); }

Matrix TabularDataset::features(const std::vector<std::string>& names) const {
  Matrix x(static_cast<Eigen::Index>(n_rows_), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& values = column(names[j]).values;
    for (std::size_t i = 0; i < n_rows_; ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i];
    }
  }
  return x;
}

Vector TabularDataset::target_values() const {
  if (!target_) throw DataError("dataset has no target column");
  const auto& values = column(*target_).values;
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<std::string> TabularDataset::protected_labels() const {
  if (!protected_) throw DataError("dataset has no protected column");
  const Column& c = column(*protected_);
  std::vector<std::string> labels(n_rows_);
  for (std::size_t i = 0; i < n_rows_; ++i) labels[i] = c.label(i);
  return labels;
}

std::vector<std::string> TabularDataset::group_labels() const {
  const auto labels = protected_labels();
  std::set<std::string> distinct(labels.begin(), labels.end());
  return {distinct.begin(), distinct.end()};
}

Vector TabularDataset::protected_codes(const GroupPair& pair) const {
  const auto labels = protected_labels();
  Vector z(static_cast<Eigen::Index>(n_rows_));
  for (std::size_t i = 0; i < n_rows_; ++i) {
    if (labels[i] == pair.group_a) {
      z[static_cast<Eigen::Index>(i)] = 0.0;
    } else if (labels[i] == pair.group_b) {
      z[static_cast<Eigen::Index>(i)] = 1.0;
    } else {
      throw DataError("row " + std::to_string(i) + " has protected label '" + labels[i] +
                      "' outside pair " + pair.str());
    }
  }
  return z;
}

TabularDataset TabularDataset::subset(const std::vector<std::size_t>& rows) const {
  TabularDataset out;
  for (const auto& c : columns_) {
    Column picked{c.name, {}, c.categories};
    picked.values.reserve(rows.size());
    for (auto r : rows) picked.values.push_back(c.values.at(r));
    out.add_column(std::move(picked));
  }
  if (columns_.empty()) out.n_rows_ = 0;
  out.target_ = target_;
  out.protected_ = protected_;
  out.ignored_ = ignored_;
  return out;
}

std::vector<GroupPair> all_group_pairs(const TabularDataset& data) {
  const auto labels = data.group_labels();
  std::vector<GroupPair> pairs;
  for (std::size_t a = 0; a < labels.size(); ++a) {
    for (std::size_t b = a + 1; b < labels.size(); ++b) pairs.emplace_back(labels[a], labels[b]);
  }
  return pairs;
}

TabularDataset filter_by_pair(const TabularDataset& data, const GroupPair& pair) {
  const auto labels = data.protected_labels();
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == pair.group_a || labels[i] == pair.group_b) keep.push_back(i);
  }
  return data.subset(keep);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// Splits one RFC-4180 record starting at `pos`; advances `pos` past the
// record terminator. Quoted fields may contain separators and newlines.
bool read_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= text.size()) return false;
  std::string field;
  bool quoted = false;
  while (pos < text.size()) {
    const char ch = text[pos];
    if (quoted) {
      if (ch == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      field.push_back(ch);
      ++pos;
      continue;
    }
    if (ch == '"') {
      quoted = true;
      ++pos;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      break;
    } else {
      field.push_back(ch);
      ++pos;
    }
  }
  if (quoted) throw DataError("unterminated quoted field in CSV");
  fields.push_back(std::move(field));
  return true;
}

bool parse_real(std::string_view cell, double& out) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return ec == std::errc() && ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

Column encode_labels(std::string name, const std::vector<std::string>& cells) {
  std::set<std::string> distinct(cells.begin(), cells.end());
  Column c{std::move(name), {}, {distinct.begin(), distinct.end()}};
  std::map<std::string, double> code;
  for (std::size_t k = 0; k < c.categories.size(); ++k) code[c.categories[k]] = static_cast<double>(k);
  c.values.reserve(cells.size());
  for (const auto& cell : cells) c.values.push_back(code[cell]);
  return c;
}

}  // namespace

TabularDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open CSV file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
    text.erase(0, 3);
  }

  std::size_t pos = 0;
  std::vector<std::string> header;
  if (!read_record(text, pos, header) || (header.size() == 1 && header[0].empty())) {
    throw DataError("CSV file '" + path + "' has no header row");
  }
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (!seen.insert(h).second) throw DataError("duplicate column name '" + h + "' in CSV header");
    }
  }
  auto require = [&](const std::string& name, const char* role) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw DataError(std::string(role) + " column '" + name + "' not found in '" + path + "'");
    }
  };
  if (schema.target) require(*schema.target, "target");
  if (schema.protected_column) require(*schema.protected_column, "protected");
  for (const auto& d : schema.drop) require(d, "dropped");
  for (const auto& c : schema.categorical) require(c, "categorical");

  std::vector<std::vector<std::string>> cells(header.size());
  std::vector<std::string> record;
  std::size_t line = 1;
  while (read_record(text, pos, record)) {
    ++line;
    if (record.size() == 1 && record[0].empty()) continue;  // blank line
    if (record.size() != header.size()) {
      throw DataError("row " + std::to_string(line) + " has " + std::to_string(record.size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (record[j].empty()) {
        throw DataError("missing value at row " + std::to_string(line) + ", column '" + header[j] + "'");
      }
      cells[j].push_back(std::move(record[j]));
    }
  }

  auto listed = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };

  TabularDataset data;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& name = header[j];
    if (listed(schema.drop, name)) continue;
    const bool is_protected = schema.protected_column && *schema.protected_column == name;
    if (is_protected || listed(schema.categorical, name)) {
      data.add_column(encode_labels(name, cells[j]));
      continue;
    }
    Column c{name, {}, {}};
    c.values.resize(cells[j].size());
    for (std::size_t i = 0; i < cells[j].size(); ++i) {
      if (!parse_real(cells[j][i], c.values[i])) {
        throw DataError("non-numeric value '" + cells[j][i] + "' at row " + std::to_string(i + 2) +
                        ", column '" + name + "'");
      }
    }
    data.add_column(std::move(c));
  }
  if (schema.target) data.set_target(*schema.target);
  if (schema.protected_column) data.set_protected(*schema.protected_column);
  return data;
}

void save_csv(const TabularDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write CSV file '" + path + "'");
  const auto& cols = data.columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (j) out << ',';
    out << quote_if_needed(cols[j].name);
  }
  out << '\n';
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (j) out << ',';
      if (cols[j].categorical()) out << quote_if_needed(cols[j].label(i));
      else out << format_real(cols[j].values[i]);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing CSV file '" + path + "'");
}

// ---------------------------------------------------------------------------
// Splitting and resampling

void SplitSpec::validate() const {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw UsageError("split fractions must all be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("split fractions must sum to 1");
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % b);
}

std::vector<std::size_t> shuffled_range(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  }
  return idx;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = fractions[k] * static_cast<double>(n);
    // Guard against 3.0000000000000004 style floors.
    double whole = std::floor(exact + 1e-9);
    sizes[k] = static_cast<std::size_t>(whole);
    remainder[k] = exact - whole;
    assigned += sizes[k];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) sizes[order[r % 3]] += 1;
  return sizes;
}

std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 9) throw DataError("need at least 9 rows to split, got " + std::to_string(n));
  const auto sizes = split_sizes(n, spec.fractions);
  for (auto s : sizes) {
    if (s == 0) throw DataError("dataset of " + std::to_string(n) + " rows too small for requested split");
  }
  const auto perm = shuffled_range(n, spec.seed);
  std::array<std::vector<std::size_t>, 3> parts;
  std::size_t offset = 0;
  for (int k = 0; k < 3; ++k) {
    parts[k].assign(perm.begin() + static_cast<std::ptrdiff_t>(offset),
                    perm.begin() + static_cast<std::ptrdiff_t>(offset + sizes[k]));
    offset += sizes[k];
  }
  return parts;
}

std::array<TabularDataset, 3> split_three_way(const TabularDataset& data, const SplitSpec& spec) {
  const auto parts = split_indices(data.n_rows(), spec);
  return {data.subset(parts[0]), data.subset(parts[1]), data.subset(parts[2])};
}

std::vector<std::vector<std::size_t>> bootstrap_indices(std::size_t n, std::size_t runs,
                                                        std::uint64_t seed) {
  if (n == 0 || runs == 0) throw UsageError("bootstrap needs n >= 1 and runs >= 1");
  std::vector<std::vector<std::size_t>> out;
  out.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r) out.push_back(shuffled_range(n, derive_seed(seed, r)));
  return out;
}

}  // namespace etaudit
