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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "etaudit/common.hpp"

namespace etaudit {

// A named column of reals. Categorical columns carry a dictionary mapping the
// integer code stored in `values` back to the original label.
struct Column {
  std::string name;
  std::vector<double> values;
  std::vector<std::string> categories;

  bool categorical() const { return !categories.empty(); }
  const std::string& label(std::size_t row) const;
};

// Column roles used when loading a CSV.
struct CsvSchema {
  std::optional<std::string> target;
  std::optional<std::string> protected_column;
  std::vector<std::string> drop;
  std::vector<std::string> categorical;
};

// Two protected-group labels; group_a is recoded to 0 and group_b to 1.
struct GroupPair {
  std::string group_a;
  std::string group_b;

  GroupPair() = default;
  GroupPair(std::string a, std::string b);

  // Parses "A:B".
  static GroupPair parse(std::string_view text);
  std::string str() const { return group_a + ":" + group_b; }
  bool operator==(const GroupPair&) const = default;
};

// Immutable-after-construction table of columns with roles. The protected
// column is stored as a categorical column whose dictionary holds the group
// labels; it never appears among the features.
class TabularDataset {
 public:
  TabularDataset() = default;

  void add_column(Column column);
  void set_target(std::string name);
  void set_protected(std::string name);
  void set_ignored(std::string name);

  std::size_t n_rows() const { return n_rows_; }
  const std::vector<Column>& columns() const { return columns_; }
  bool has_column(std::string_view name) const;
  const Column& column(std::string_view name) const;

  const std::optional<std::string>& target() const { return target_; }
  const std::optional<std::string>& protected_column() const { return protected_; }
  const std::vector<std::string>& ignored() const { return ignored_; }

  // Columns that are neither target, protected nor ignored, in table order.
  std::vector<std::string> feature_names() const;
  Matrix features() const;
  Matrix features(const std::vector<std::string>& names) const;
  Vector target_values() const;

  // Protected label of every row.
  std::vector<std::string> protected_labels() const;
  // Distinct protected labels, sorted.
  std::vector<std::string> group_labels() const;

  // 0/1 codes for rows of a dataset already filtered to `pair`.
  Vector protected_codes(const GroupPair& pair) const;

  TabularDataset subset(const std::vector<std::size_t>& rows) const;

 private:
  std::size_t index_of(std::string_view name) const;

  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
  std::optional<std::string> target_;
  std::optional<std::string> protected_;
  std::vector<std::string> ignored_;
};

// All unordered pairs of distinct protected labels (sorted labels, a < b).
std::vector<GroupPair> all_group_pairs(const TabularDataset& data);

// Keeps only rows whose protected label is one of the pair's labels, in
// original order.
TabularDataset filter_by_pair(const TabularDataset& data, const GroupPair& pair);

TabularDataset load_csv(const std::string& path, const CsvSchema& schema);
void save_csv(const TabularDataset& data, const std::string& path);

struct SplitSpec {
  std::array<double, 3> fractions{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::uint64_t seed = 0;

  void validate() const;
};

// Row indices of the (train, val, test) parts. Part sizes are floor(n*f)
// plus largest-remainder allocation, ties resolved train, val, test.
std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n, const SplitSpec& spec);
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& fractions);
std::array<TabularDataset, 3> split_three_way(const TabularDataset& data, const SplitSpec& spec);

// One reshuffled index permutation of [0, n) per run, each driven by a seed
// derived from the master seed.
std::vector<std::vector<std::size_t>> bootstrap_indices(std::size_t n, std::size_t runs,
                                                        std::uint64_t seed);

// Uniform integer in [0, bound) independent of the standard library's
// distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound);
std::vector<std::size_t> shuffled_range(std::size_t n, std::uint64_t seed);

}  // namespace etaudit
