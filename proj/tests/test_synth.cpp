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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "lrevent/error.hpp"
#include "lrevent/synth.hpp"

namespace lrevent {
namespace {

SynthConfig SmallConfig() {
  SynthConfig c;
  c.base_rows = 8;
  c.periods = 6;
  c.sensors = 5;
  c.base_rank = 3;
  c.rows_out = 40;
  c.train_rows = 30;
  c.event_rows = 6;
  c.noise_delta = 2.0;
  c.seed = 5;
  return c;
}

bool SameMatrix(const ObservationMatrix& a, const ObservationMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.size() != b.size()) return false;
  return std::equal(a.entries().begin(), a.entries().end(), b.entries().begin());
}

TEST_CASE("ground truth examples") {
  const GroundTruth full = MakeGroundTruth(6, 7, 1, 2.0, 1.0, 3);
  CHECK(full.observed.size() == 42);
  CHECK(full.left.cols() == 1);
  for (const Entry& e : full.observed.entries()) {
    CHECK(e.kind == EntryKind::kExact);
    CHECK(e.lower == (full.left.row(static_cast<Eigen::Index>(e.row)) * full.right.col(static_cast<Eigen::Index>(e.col)))(0));
    CHECK(e.lower >= 0.0);
  }

  const GroundTruth sparse = MakeGroundTruth(100, 100, 2, 1.0, 0.3, 4);
  const double sd = std::sqrt(1e4 * 0.3 * 0.7);
  CHECK(std::abs(static_cast<double>(sparse.observed.size()) - 3000.0) <= 3.0 * sd);
  const Eigen::MatrixXd product = sparse.left * sparse.right;
  for (const Entry& e : sparse.observed.entries()) {
    CHECK(e.lower == doctest::Approx(product(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col))));
  }
  CHECK_THROWS_AS(MakeGroundTruth(3, 3, 1, 1.0, 0.0, 1), Error);
  CHECK_THROWS_AS(MakeGroundTruth(3, 3, 1, 1.0, 1.5, 1), Error);
}

TEST_CASE("traffic ground truth has the requested shape, scale and rank") {
  const GroundTruth t = MakeTrafficGroundTruth(12, 20, 4, 3, 50.0, 1.0, 7);
  CHECK(t.observed.rows() == 12);
  CHECK(t.observed.cols() == 80);
  const Eigen::MatrixXd product = t.left * t.right;
  CHECK(product.mean() == doctest::Approx(50.0));
  CHECK(product.minCoeff() > 0.0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(product);
  lu.setThreshold(1e-10);
  CHECK(lu.rank() == 3);
}

TEST_CASE("non-event rows copy the source when noise and scaling are trivial") {
  SynthConfig c = SmallConfig();
  c.scalar_min = c.scalar_max = 1.0;
  c.noise_delta = 0.0;
  const GroundTruth base = MakeGroundTruth(c.base_rows, c.cols(), 3, 10.0, 0.7, 2);
  const NonEventSet y = MakeNonEvents(base.observed, c);
  CHECK(y.matrix.rows() == c.rows_out);
  for (std::size_t k = 0; k < c.rows_out; ++k) {
    const auto out = y.matrix.row(k);
    const auto src = base.observed.row(y.source_rows[k]);
    REQUIRE(out.size() == src.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
      CHECK(out[t].col == src[t].col);
      CHECK(out[t].lower == src[t].lower);
    }
  }
}

TEST_CASE("non-event noise stays within its half-width") {
  const SynthConfig c = SmallConfig();
  const GroundTruth base = MakeGroundTruth(c.base_rows, c.cols(), 3, 10.0, 0.7, 2);
  const NonEventSet y = MakeNonEvents(base.observed, c);
  const double w = c.noise_fraction * c.noise_delta;
  for (std::size_t k = 0; k < c.rows_out; ++k) {
    const auto out = y.matrix.row(k);
    const auto src = base.observed.row(y.source_rows[k]);
    REQUIRE(out.size() == src.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
      CHECK(std::abs(out[t].lower - y.scalars[k] * src[t].lower) <= w + 1e-12);
    }
    CHECK(y.scalars[k] >= 0.0);
    CHECK(y.scalars[k] <= 2.0);
  }
}

TEST_CASE("scalar draws have mean one") {
  SynthConfig c = SmallConfig();
  c.rows_out = 100000;
  c.train_rows = 0;
  const ObservationMatrix base(1, 1, {Entry::Exact(0, 0, 1.0)});
  const NonEventSet y = MakeNonEvents(base, c);
  const double mean = std::accumulate(y.scalars.begin(), y.scalars.end(), 0.0) / 1e5;
  const double sigma = (2.0 / std::sqrt(12.0)) / std::sqrt(1e5);
  CHECK(std::abs(mean - 1.0) <= 3.0 * sigma);
}

TEST_CASE("events shift observed cells by the mean") {
  SynthConfig c = SmallConfig();
  c.event_sigma = 1e-9;
  const GroundTruth base = MakeGroundTruth(c.base_rows, c.cols(), 3, 10.0, 0.7, 2);
  const NonEventSet y = MakeNonEvents(base.observed, c);
  const EventSet g = MakeEvents(y.matrix, c, 15.0);
  CHECK(g.matrix.rows() == c.event_rows);
  CHECK(std::set<std::size_t>(g.source_rows.begin(), g.source_rows.end()).size() == c.event_rows);
  for (std::size_t k = 0; k < c.event_rows; ++k) {
    const auto out = g.matrix.row(k);
    const auto src = y.matrix.row(g.source_rows[k]);
    REQUIRE(out.size() == src.size());
    for (std::size_t t = 0; t < out.size(); ++t) CHECK(out[t].lower - src[t].lower == doctest::Approx(15.0));
  }
  c.event_sigma = 1.0;
  const EventSet far = MakeEvents(y.matrix, c, 35.0);
  for (std::size_t k = 0; k < c.event_rows; ++k) {
    double diff = 0.0;
    const auto out = far.matrix.row(k);
    const auto src = y.matrix.row(far.source_rows[k]);
    for (std::size_t t = 0; t < out.size(); ++t) diff += out[t].lower - src[t].lower;
    if (!out.empty()) CHECK(diff / static_cast<double>(out.size()) == doctest::Approx(35.0).epsilon(0.05));
  }
  CHECK_THROWS_AS(MakeEvents(y.matrix, c, std::nan("")), Error);
}

TEST_CASE("small event means overlap the non-event value range") {
  SynthConfig c = SmallConfig();
  const GroundTruth base = MakeGroundTruth(c.base_rows, c.cols(), 3, 10.0, 0.7, 2);
  const NonEventSet y = MakeNonEvents(base.observed, c);
  const EventSet g = MakeEvents(y.matrix, c, 5.0);
  double y_min = INFINITY, y_max = -INFINITY;
  for (const Entry& e : y.matrix.entries()) {
    y_min = std::min(y_min, e.lower);
    y_max = std::max(y_max, e.lower);
  }
  std::size_t overlap = 0;
  for (const Entry& e : g.matrix.entries()) overlap += (e.lower >= y_min && e.lower <= y_max) ? 1 : 0;
  CHECK(overlap > 0);
}

TEST_CASE("dataset is deterministic and labels partition the rows") {
  const SynthConfig c = SmallConfig();
  const Dataset a = MakeDataset(c);
  const Dataset b = MakeDataset(c);
  CHECK(SameMatrix(a.train, b.train));
  REQUIRE(a.eval.size() == 4);
  for (std::size_t v = 0; v < a.eval.size(); ++v) {
    CHECK(SameMatrix(a.eval[v], b.eval[v]));
    const std::size_t test_rows = c.rows_out - c.train_rows;
    CHECK(a.eval[v].rows() == test_rows + c.event_rows);
    CHECK(a.eval_labels[v].size() == a.eval[v].rows());
    CHECK(std::count(a.eval_labels[v].begin(), a.eval_labels[v].end(), Label::kEvent) ==
          static_cast<std::ptrdiff_t>(c.event_rows));
    for (std::size_t k = 0; k < test_rows; ++k) CHECK(a.eval_labels[v][k] == Label::kNonEvent);
    CHECK(a.events[v].mean == c.event_means[v]);
    CHECK(a.events[v].source_rows == a.events[0].source_rows);
  }
  CHECK(a.train.rows() == c.train_rows);

  SynthConfig other = c;
  other.seed = 6;
  const Dataset d = MakeDataset(other);
  CHECK_FALSE(SameMatrix(a.train, d.train));
}

TEST_CASE("noise from different seeds is uncorrelated") {
  SynthConfig c = SmallConfig();
  c.rows_out = 2000;
  c.train_rows = 0;
  c.scalar_min = c.scalar_max = 1.0;
  const ObservationMatrix base(1, 1, {Entry::Exact(0, 0, 0.0)});
  const NonEventSet a = MakeNonEvents(base, c);
  c.seed = 99;
  const NonEventSet b = MakeNonEvents(base, c);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < 2000; ++k) {
    const double x = a.matrix.entries()[k].lower, y = b.matrix.entries()[k].lower;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 4.0 / std::sqrt(2000.0));
}

TEST_CASE("synth configuration validation") {
  SynthConfig c = SmallConfig();
  c.event_rows = c.rows_out;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = SmallConfig();
  c.noise_delta = -1.0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = SmallConfig();
  c.event_sigma = 0.0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = SmallConfig();
  c.scalar_min = 3.0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = SmallConfig();
  c.train_rows = c.rows_out + 1;
  CHECK_THROWS_AS(c.Validate(), Error);
  CHECK_NOTHROW(SmallConfig().Validate());
}

}  // namespace
}  // namespace lrevent
