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

#include "lrevent/obs_matrix.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string_view>

#include "binary_io.hpp"
#include "lrevent/error.hpp"

namespace lrevent {

namespace {

constexpr std::string_view kMatrixMagic = "LREV1";

std::string Describe(const Entry& e) {
  std::ostringstream os;
  os << "(" << e.row << ", " << e.col << ")";
  return os.str();
}

std::string Describe(const TimeSeriesRecord& r, std::size_t index) {
  std::ostringstream os;
  os << "record #" << index << " (sensor=" << r.sensor << ", day=" << r.day
     << ", period=" << r.period << ", value=" << r.value << ")";
  return os.str();
}

}  // namespace

Entry Entry::Lower(std::size_t i, std::size_t j, double lo) {
  return {i, j, lo, std::numeric_limits<double>::infinity(), EntryKind::kLower};
}

Entry Entry::Upper(std::size_t i, std::size_t j, double hi) {
  return {i, j, -std::numeric_limits<double>::infinity(), hi, EntryKind::kUpper};
}

struct ObservationMatrix::ColumnIndex {
  std::once_flag once;
  std::vector<std::size_t> col_ptr;
  std::vector<std::size_t> perm;
};

ObservationMatrix::ObservationMatrix(std::size_t rows, std::size_t cols,
                                     std::vector<Entry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  for (const Entry& e : entries_) {
    if (e.row >= rows_ || e.col >= cols_) {
      Fail(ErrorCode::kOutOfRange, "entry " + Describe(e) + " outside matrix bounds");
    }
    switch (e.kind) {
      case EntryKind::kExact:
        if (!std::isfinite(e.lower) || e.lower != e.upper) {
          Fail(ErrorCode::kInvalidArgument, "exact entry " + Describe(e) + " is not a finite value");
        }
        break;
      case EntryKind::kLower:
        if (!std::isfinite(e.lower)) Fail(ErrorCode::kInvalidArgument, "non-finite lower bound at " + Describe(e));
        break;
      case EntryKind::kUpper:
        if (!std::isfinite(e.upper)) Fail(ErrorCode::kInvalidArgument, "non-finite upper bound at " + Describe(e));
        break;
      case EntryKind::kInterval:
        if (!std::isfinite(e.lower) || !std::isfinite(e.upper)) {
          Fail(ErrorCode::kInvalidArgument, "non-finite interval at " + Describe(e));
        }
        if (e.lower > e.upper) Fail(ErrorCode::kInvalidArgument, "empty interval at " + Describe(e));
        break;
      default:
        Fail(ErrorCode::kInvalidArgument, "unknown entry kind at " + Describe(e));
    }
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < entries_.size(); ++k) {
    if (entries_[k].row == entries_[k - 1].row && entries_[k].col == entries_[k - 1].col) {
      Fail(ErrorCode::kInvalidArgument, "duplicate entry at " + Describe(entries_[k]));
    }
  }
  row_ptr_.assign(rows_ + 1, 0);
  for (const Entry& e : entries_) ++row_ptr_[e.row + 1];
  for (std::size_t i = 0; i < rows_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  column_index_ = std::make_shared<ColumnIndex>();
}

double ObservationMatrix::density() const {
  if (rows_ == 0 || cols_ == 0) return 0.0;
  return static_cast<double>(entries_.size()) /
         (static_cast<double>(rows_) * static_cast<double>(cols_));
}

std::span<const Entry> ObservationMatrix::row(std::size_t i) const {
  if (i >= rows_) Fail(ErrorCode::kOutOfRange, "row index out of range");
  return std::span<const Entry>(entries_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

const ObservationMatrix::ColumnIndex& ObservationMatrix::columns() const {
  ColumnIndex& index = *column_index_;
  std::call_once(index.once, [&] {
    index.col_ptr.assign(cols_ + 1, 0);
    for (const Entry& e : entries_) ++index.col_ptr[e.col + 1];
    for (std::size_t j = 0; j < cols_; ++j) index.col_ptr[j + 1] += index.col_ptr[j];
    index.perm.resize(entries_.size());
    std::vector<std::size_t> fill(index.col_ptr.begin(), index.col_ptr.end() - 1);
    for (std::size_t k = 0; k < entries_.size(); ++k) index.perm[fill[entries_[k].col]++] = k;
  });
  return index;
}

std::span<const std::size_t> ObservationMatrix::column(std::size_t j) const {
  if (j >= cols_) Fail(ErrorCode::kOutOfRange, "column index out of range");
  const ColumnIndex& index = columns();
  return std::span<const std::size_t>(index.perm)
      .subspan(index.col_ptr[j], index.col_ptr[j + 1] - index.col_ptr[j]);
}

std::vector<double> ObservationMatrix::DenseRow(std::size_t i) const {
  std::vector<double> out(cols_, std::numeric_limits<double>::quiet_NaN());
  for (const Entry& e : row(i)) {
    switch (e.kind) {
      case EntryKind::kExact:
      case EntryKind::kInterval:
        out[e.col] = e.Center();
        break;
      case EntryKind::kLower:
        out[e.col] = e.lower;
        break;
      case EntryKind::kUpper:
        out[e.col] = e.upper;
        break;
    }
  }
  return out;
}

ObservationMatrix ObservationMatrix::SelectRows(std::span<const std::size_t> row_ids) const {
  std::vector<Entry> out;
  for (std::size_t k = 0; k < row_ids.size(); ++k) {
    for (Entry e : row(row_ids[k])) {
      e.row = k;
      out.push_back(e);
    }
  }
  return ObservationMatrix(row_ids.size(), cols_, std::move(out));
}

ObservationMatrix ObservationMatrix::FromDense(std::size_t rows, std::size_t cols,
                                               std::span<const double> data) {
  if (data.size() != rows * cols) Fail(ErrorCode::kInvalidArgument, "dense data size mismatch");
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = data[i * cols + j];
      if (!std::isnan(v)) entries.push_back(Entry::Exact(i, j, v));
    }
  }
  return ObservationMatrix(rows, cols, std::move(entries));
}

FlattenResult Flatten(std::span<const TimeSeriesRecord> records, std::size_t days,
                      std::size_t periods, std::size_t sensors, const FlattenOptions& options) {
  const std::size_t n = periods * sensors;
  // Cell -> position in `cells`, so that later records overwrite earlier ones.
  std::vector<std::int64_t> slot;
  const bool dense_slots = days * n <= (std::size_t{1} << 26);
  if (dense_slots) slot.assign(days * n, -1);
  std::vector<Entry> cells;
  std::vector<std::pair<std::size_t, std::size_t>> keyed;
  std::size_t duplicates = 0;

  for (std::size_t k = 0; k < records.size(); ++k) {
    const TimeSeriesRecord& r = records[k];
    if (r.sensor < 0 || static_cast<std::size_t>(r.sensor) >= sensors || r.day < 0 ||
        static_cast<std::size_t>(r.day) >= days || r.period < 0 ||
        static_cast<std::size_t>(r.period) >= periods) {
      Fail(ErrorCode::kOutOfRange, Describe(r, k) + " is outside the declared dimensions");
    }
    if (!std::isfinite(r.value)) Fail(ErrorCode::kInvalidArgument, Describe(r, k) + " has a non-finite value");
    const auto i = static_cast<std::size_t>(r.day);
    const auto j = static_cast<std::size_t>(r.sensor) * periods + static_cast<std::size_t>(r.period);
    if (dense_slots) {
      std::int64_t& s = slot[i * n + j];
      if (s >= 0) {
        ++duplicates;
        cells[static_cast<std::size_t>(s)] = Entry::Exact(i, j, r.value);
      } else {
        s = static_cast<std::int64_t>(cells.size());
        cells.push_back(Entry::Exact(i, j, r.value));
      }
    } else {
      keyed.emplace_back(i * n + j, k);
    }
  }

  if (!dense_slots) {
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      if (k + 1 < keyed.size() && keyed[k + 1].first == keyed[k].first) {
        ++duplicates;
        continue;
      }
      const TimeSeriesRecord& r = records[keyed[k].second];
      cells.push_back(Entry::Exact(keyed[k].first / n, keyed[k].first % n, r.value));
    }
  }

  if (options.zeros_as_missing) {
    std::erase_if(cells, [](const Entry& e) { return e.lower == 0.0; });
  }
  return {ObservationMatrix(days, n, std::move(cells)), duplicates};
}

ObservationMatrix Widen(const ObservationMatrix& obs, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    Fail(ErrorCode::kInvalidArgument, "widening half-width must be finite and non-negative");
  }
  std::vector<Entry> out(obs.entries().begin(), obs.entries().end());
  for (Entry& e : out) {
    if (e.kind != EntryKind::kExact) {
      Fail(ErrorCode::kInvalidArgument, "widen expects exact entries, found a bound at " + Describe(e));
    }
    const double v = e.lower;
    e = Entry::Interval(e.row, e.col, v - delta, v + delta);
  }
  return ObservationMatrix(obs.rows(), obs.cols(), std::move(out));
}

std::vector<TimeSeriesRecord> ReadRecordsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kFormat, "empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != "sensor,day,period,value") {
    Fail(ErrorCode::kFormat, "expected CSV header 'sensor,day,period,value', got '" + line + "'");
  }
  std::vector<TimeSeriesRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string_view rest(line);
    std::array<std::string_view, 4> fields;
    for (std::size_t f = 0; f < 4; ++f) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (f == 3)) {
        Fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": expected 4 fields");
      }
      fields[f] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    TimeSeriesRecord r;
    auto parse_int = [&](std::string_view s, std::int64_t& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        Fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": bad integer '" + std::string(s) + "'");
      }
    };
    parse_int(fields[0], r.sensor);
    parse_int(fields[1], r.day);
    parse_int(fields[2], r.period);
    auto [p, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), r.value);
    if (ec != std::errc() || p != fields[3].data() + fields[3].size()) {
      Fail(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": bad value '" + std::string(fields[3]) + "'");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<TimeSeriesRecord> ReadRecordsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return ReadRecordsCsv(in);
}

void WriteRecordsCsv(std::ostream& out, const ObservationMatrix& obs, std::size_t periods,
                     std::size_t sensors) {
  if (periods * sensors != obs.cols()) Fail(ErrorCode::kInvalidArgument, "periods * sensors must equal column count");
  out << "sensor,day,period,value\n";
  char buf[64];
  for (const Entry& e : obs.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.Center());
    out << e.col / periods << ',' << e.row << ',' << e.col % periods << ',' << buf << '\n';
  }
}

void WriteMatrix(std::ostream& out, const ObservationMatrix& obs) {
  detail::PutMagic(out, kMatrixMagic);
  detail::PutU64(out, obs.rows());
  detail::PutU64(out, obs.cols());
  detail::PutU64(out, obs.size());
  for (const Entry& e : obs.entries()) {
    detail::PutU64(out, e.row);
    detail::PutU64(out, e.col);
    detail::PutF64(out, e.lower);
    detail::PutF64(out, e.upper);
    detail::PutU8(out, static_cast<std::uint8_t>(e.kind));
  }
}

ObservationMatrix ReadMatrix(std::istream& in) {
  detail::ExpectMagic(in, kMatrixMagic);
  const std::uint64_t m = detail::GetU64(in);
  const std::uint64_t n = detail::GetU64(in);
  const std::uint64_t count = detail::GetU64(in);
  if (n != 0 && m > std::numeric_limits<std::uint64_t>::max() / n) Fail(ErrorCode::kFormat, "matrix dimensions overflow");
  if (count > m * n) Fail(ErrorCode::kFormat, "entry count exceeds matrix size");
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t k = 0; k < count; ++k) {
    Entry e;
    e.row = detail::GetU64(in);
    e.col = detail::GetU64(in);
    e.lower = detail::GetF64(in);
    e.upper = detail::GetF64(in);
    const std::uint8_t kind = detail::GetU8(in);
    if (kind > 3) Fail(ErrorCode::kFormat, "unknown entry kind " + std::to_string(kind));
    e.kind = static_cast<EntryKind>(kind);
    entries.push_back(e);
  }
  try {
    return ObservationMatrix(m, n, std::move(entries));
  } catch (const Error& err) {
    Fail(ErrorCode::kFormat, std::string("invalid matrix container: ") + err.what());
  }
}

void SaveMatrix(const std::string& path, const ObservationMatrix& obs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  WriteMatrix(out, obs);
  if (!out) Fail(ErrorCode::kIo, "write failed: " + path);
}

ObservationMatrix LoadMatrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return ReadMatrix(in);
}

}  // namespace lrevent
