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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace etaudit {

inline constexpr const char* kVersion = "0.3.0";

// Row-major so that a sample is contiguous; most kernels walk rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Invalid arguments, unknown flags, malformed configuration.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Problems with the data itself: missing files, bad cells, too few rows.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Derives an independent 64-bit seed for stream `index` of a master seed
// (splitmix64 finalizer over the pair).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double sigmoid(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// Gathers the listed rows of a matrix / vector.
Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows);
Vector take(const Vector& v, const std::vector<std::size_t>& rows);

// Worker count from ETAUDIT_THREADS (default: hardware concurrency, min 1).
std::size_t worker_count();

}  // namespace etaudit
