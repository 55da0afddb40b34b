// Copyright 2026 The lrevent Authors. All Rights Reserved.
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

#ifndef LREVENT_OBS_MATRIX_HPP_
#define LREVENT_OBS_MATRIX_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lrevent {

// How an observed cell constrains the fitted value.
enum class EntryKind : std::uint8_t {
  kExact = 0,     // lower == upper == value
  kLower = 1,     // value >= lower, upper is +inf
  kUpper = 2,     // value <= upper, lower is -inf
  kInterval = 3,  // lower <= value <= upper
};

struct Entry {
  std::size_t row = 0;
  std::size_t col = 0;
  double lower = 0.0;
  double upper = 0.0;
  EntryKind kind = EntryKind::kExact;

  bool HasLower() const { return kind != EntryKind::kUpper; }
  bool HasUpper() const { return kind != EntryKind::kLower; }
  // Exact value, or the interval midpoint. Undefined for one-sided entries.
  double Center() const { return kind == EntryKind::kExact ? lower : 0.5 * (lower + upper); }

  static Entry Exact(std::size_t i, std::size_t j, double v) {
    return {i, j, v, v, EntryKind::kExact};
  }
  static Entry Interval(std::size_t i, std::size_t j, double lo, double hi) {
    return {i, j, lo, hi, EntryKind::kInterval};
  }
  static Entry Lower(std::size_t i, std::size_t j, double lo);
  static Entry Upper(std::size_t i, std::size_t j, double hi);

  friend bool operator==(const Entry&, const Entry&) = default;
};

// One raw sample from a sensor stream.
struct TimeSeriesRecord {
  std::int64_t sensor = 0;
  std::int64_t day = 0;
  std::int64_t period = 0;
  double value = 0.0;
};

// Partially observed m x n matrix with per-entry interval constraints.
//
// Entries are stored as a coordinate list sorted row-major with row offsets.
// A column-major permutation is built on first use and shared between copies.
// The matrix is immutable once constructed and safe to read concurrently.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;

  // Validates bounds, uniqueness and lower <= upper; sorts the entries.
  ObservationMatrix(std::size_t rows, std::size_t cols, std::vector<Entry> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double density() const;

  std::span<const Entry> entries() const { return entries_; }
  std::span<const Entry> row(std::size_t i) const;

  // Entry indices (into entries()) belonging to column j.
  std::span<const std::size_t> column(std::size_t j) const;

  // Dense copy of row i with NaN for missing cells; interval entries map to
  // their midpoint.
  std::vector<double> DenseRow(std::size_t i) const;

  // Matrix made of the given rows of this one, in order.
  ObservationMatrix SelectRows(std::span<const std::size_t> row_ids) const;

  // Builds an all-exact matrix from row-major dense data; NaN marks missing.
  static ObservationMatrix FromDense(std::size_t rows, std::size_t cols,
                                     std::span<const double> data);

  friend bool operator==(const ObservationMatrix& a, const ObservationMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  struct ColumnIndex;
  const ColumnIndex& columns() const;

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::size_t> row_ptr_{0};
  std::shared_ptr<ColumnIndex> column_index_;
};

struct FlattenOptions {
  bool zeros_as_missing = false;
};

struct FlattenResult {
  ObservationMatrix matrix;
  std::size_t duplicates = 0;  // cells overwritten by a later record
};

// Packs D days x S sensors x T periods into a D x (T*S) matrix with column
// index sensor*T + period. Cells without a record stay missing.
FlattenResult Flatten(std::span<const TimeSeriesRecord> records, std::size_t days,
                      std::size_t periods, std::size_t sensors,
                      const FlattenOptions& options = {});

// Replaces every exact entry v with the interval [v - delta, v + delta].
ObservationMatrix Widen(const ObservationMatrix& obs, double delta);

// CSV with header "sensor,day,period,value".
std::vector<TimeSeriesRecord> ReadRecordsCsv(std::istream& in);
std::vector<TimeSeriesRecord> ReadRecordsCsv(const std::string& path);
void WriteRecordsCsv(std::ostream& out, const ObservationMatrix& obs, std::size_t periods,
                     std::size_t sensors);

// Binary container "LREV1": little-endian u64 m, n, count, then per entry
// u64 i, u64 j, f64 lower, f64 upper, u8 kind.
void WriteMatrix(std::ostream& out, const ObservationMatrix& obs);
ObservationMatrix ReadMatrix(std::istream& in);
void SaveMatrix(const std::string& path, const ObservationMatrix& obs);
ObservationMatrix LoadMatrix(const std::string& path);

}  // namespace lrevent

#endif  // LREVENT_OBS_MATRIX_HPP_
