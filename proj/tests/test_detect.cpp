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

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "lrevent/detect.hpp"
#include "lrevent/error.hpp"
#include "lrevent/query.hpp"

namespace lrevent {
namespace {

// A rank-2 model over n columns whose rows lie in span(R) exactly.
Factorization SpanModel(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  Factorization f;
  f.left.resize(static_cast<Eigen::Index>(m), 2);
  f.right.resize(2, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < f.left.size(); ++i) f.left.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < f.right.size(); ++i) f.right.data()[i] = u(rng);
  f.mu = 0.1;
  return f;
}

std::vector<double> Row(const Factorization& f, Eigen::Index i) {
  const Eigen::RowVectorXd row = f.left.row(i) * f.right;
  return {row.data(), row.data() + row.size()};
}

TEST_CASE("label names") {
  CHECK(std::string(LabelName(Label::kEvent)) == "event");
  CHECK(std::string(LabelName(Label::kNonEvent)) == "nonevent");
  CHECK(ParseLabel("event") == Label::kEvent);
  CHECK(ParseLabel("nonevent") == Label::kNonEvent);
  CHECK_THROWS_AS(ParseLabel("Event"), Error);
}

TEST_CASE("calibration examples") {
  const Factorization f = SpanModel(3, 20, 1);
  std::vector<std::vector<double>> rows{Row(f, 0), Row(f, 1), Row(f, 2)};
  CHECK(CalibrateDelta(f, rows) == doctest::Approx(0.0).epsilon(1e-9).scale(1));

  std::vector<std::vector<double>> spiked{Row(f, 0)};
  spiked[0][7] += 1.7;
  CHECK(CalibrateDelta(f, spiked) == doctest::Approx(ExactMembership(f.right, spiked[0], 0.0).distance));

  // Distances 0.3, 1.1 and 0.9 from a zero basis are the max absolute values.
  Factorization zero;
  zero.left = RowMajorMatrix::Zero(1, 1);
  zero.right = ColMajorMatrix::Zero(1, 2);
  std::vector<std::vector<double>> three{{0.3, -0.1}, {-1.1, 0.0}, {0.2, 0.9}};
  CHECK(CalibrateDelta(zero, three) == doctest::Approx(1.1));
  CHECK(CalibrateDelta(zero, three, 3) == CalibrateDelta(zero, three, 1));

  const ObservationMatrix holdout(3, 2, {Entry::Exact(0, 0, 0.3), Entry::Exact(1, 0, -1.1),
                                         Entry::Exact(2, 1, 0.9)});
  CHECK(CalibrateDelta(zero, holdout) == doctest::Approx(1.1));
  CHECK_THROWS_AS(CalibrateDelta(zero, std::vector<std::vector<double>>{}), Error);
  CHECK_THROWS_AS(CalibrateDelta(zero, ObservationMatrix(0, 2, {})), Error);
}

TEST_CASE("classification examples") {
  const Factorization f = SpanModel(4, 60, 2);
  DetectorModel model;
  model.factors = f;
  model.query.delta = 0.5;
  model.query.sample_size = 10;
  CHECK(Classify(model, Row(f, 1)).label == Label::kNonEvent);

  std::vector<double> shifted = Row(f, 2);
  for (double& v : shifted) v += 10.0 * model.query.delta;
  // The constant vector is not in span(R) for generic R.
  model.exact = true;
  const double exact_distance = Classify(model, shifted).distance;
  REQUIRE(exact_distance > model.query.delta);
  model.exact = false;
  CHECK(Classify(model, shifted, 7).label == Label::kEvent);

  // Exactly on the threshold counts as a non-event.
  model.exact = true;
  model.query.delta = exact_distance;
  CHECK(Classify(model, shifted).label == Label::kNonEvent);
}

TEST_CASE("classification with a saturated sample equals the exact verdict") {
  std::mt19937_64 rng(5);
  const Factorization f = SpanModel(2, 30, 3);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x = Row(f, trial % 2);
    for (double& v : x) v += noise(rng);
    DetectorModel model;
    model.factors = f;
    model.query.delta = 0.4;
    model.query.sample_size = 30;
    const Classification sampled = Classify(model, x, rng());
    CHECK(sampled.label == (ExactMembership(f.right, x, 0.4).inside ? Label::kNonEvent : Label::kEvent));
  }
}

TEST_CASE("metric identities") {
  DetectionMetrics m = ComputeMetrics({6, 2, 4, 8});
  CHECK(m.precision == doctest::Approx(0.75));
  CHECK(m.recall == doctest::Approx(0.6));
  CHECK(m.f1 == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(m.precision_defined);
  CHECK(m.recall_defined);

  m = ComputeMetrics({0, 0, 0, 10});
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
  CHECK_FALSE(m.precision_defined);
  CHECK_FALSE(m.recall_defined);

  m = ComputeMetrics({0, 3, 5, 0});
  CHECK(m.f1 == 0.0);
  CHECK(m.precision_defined);
  m = ComputeMetrics({5, 0, 0, 5});
  CHECK(m.f1 == 1.0);
}

TEST_CASE("evaluation over a grid") {
  const Factorization f = SpanModel(6, 40, 4);
  std::vector<Entry> entries;
  std::vector<Label> labels;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (std::size_t i = 0; i < 6; ++i) {
    const std::vector<double> row = Row(f, static_cast<Eigen::Index>(i));
    const bool event = i >= 3;
    for (std::size_t j = 0; j < row.size(); ++j) {
      entries.push_back(Entry::Exact(i, j, row[j] + u(rng) + (event ? 3.0 + u(rng) : 0.0)));
    }
    labels.push_back(event ? Label::kEvent : Label::kNonEvent);
  }
  const ObservationMatrix samples(6, 40, entries);
  DetectorModel model;
  model.factors = f;
  model.query.sample_size = 12;
  std::vector<double> grid;
  for (double d = 0.0; d <= 4.0; d += 0.05) grid.push_back(d);
  const EvalReport report = Evaluate(model, samples, labels, grid, 5, 11);
  CHECK(report.rows.size() == grid.size());
  CHECK(report.repetitions == 5);
  CHECK(report.sample_size == 12);
  CHECK(report.seed == 11);
  bool perfect = false;
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const EvalRow& row = report.rows[k];
    CHECK(row.delta == grid[k]);
    CHECK(row.counts.tp + row.counts.fp + row.counts.fn + row.counts.tn == doctest::Approx(6.0));
    if (k > 0) {
      CHECK(row.metrics.recall <= report.rows[k - 1].metrics.recall + 1e-12);
      CHECK(row.counts.tn + row.counts.fn >= report.rows[k - 1].counts.tn + report.rows[k - 1].counts.fn - 1e-12);
    }
    perfect = perfect || row.metrics.f1 == 1.0;
  }
  CHECK(perfect);
  CHECK(report.rows.front().metrics.recall == 1.0);
  CHECK(report.rows.back().metrics.recall == 0.0);
  CHECK_FALSE(report.rows.back().metrics.precision_defined);

  const EvalReport again = Evaluate(model, samples, labels, grid, 5, 11, 3);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(again.rows[k].metrics.f1 == report.rows[k].metrics.f1);

  model.exact = true;
  const EvalReport exact = Evaluate(model, samples, labels, grid, 5, 11);
  CHECK(exact.exact);
  CHECK(exact.sample_size == 0);
  CHECK(exact.repetitions == 1);

  std::vector<Label> short_labels(2, Label::kEvent);
  CHECK_THROWS_AS(Evaluate(model, samples, short_labels, grid, 5, 11), Error);
  CHECK_THROWS_AS(Evaluate(model, samples, labels, std::vector<double>{}, 5, 11), Error);
}

TEST_CASE("all non-event samples classified non-event") {
  const Factorization f = SpanModel(3, 10, 6);
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto row = Row(f, static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < row.size(); ++j) entries.push_back(Entry::Exact(i, j, row[j]));
  }
  DetectorModel model;
  model.factors = f;
  model.query.sample_size = 5;
  const std::vector<Label> labels(3, Label::kNonEvent);
  const std::vector<double> grid{0.1};
  const EvalReport report = Evaluate(model, ObservationMatrix(3, 10, entries), labels, grid, 2, 1);
  CHECK(report.rows[0].counts.tn == 3.0);
  CHECK(report.rows[0].metrics.precision == 0.0);
  CHECK(report.rows[0].metrics.recall == 0.0);
  CHECK_FALSE(report.rows[0].metrics.recall_defined);
}

TEST_CASE("report and label csv") {
  EvalReport report;
  EvalRow row;
  row.delta = 0.1;
  row.counts = {1, 2, 3, 4};
  row.metrics = ComputeMetrics(row.counts);
  report.rows.push_back(row);
  std::ostringstream out;
  WriteReportCsv(out, report);
  CHECK(out.str() ==
        "delta,tp,fp,fn,tn,precision,recall,f1\n"
        "0.10000000000000001,1,2,3,4,0.33333333333333331,0.25,0.28571428571428575\n");

  const std::vector<Label> labels{Label::kEvent, Label::kNonEvent, Label::kEvent};
  std::ostringstream lout;
  WriteLabelsCsv(lout, labels);
  CHECK(lout.str() == "row,label\n0,event\n1,nonevent\n2,event\n");
  std::istringstream lin(lout.str());
  CHECK(ReadLabelsCsv(lin) == labels);
  std::istringstream bad("row,label\n0,maybe\n");
  CHECK_THROWS_AS(ReadLabelsCsv(bad), Error);
  std::istringstream gap("row,label\n1,event\n");
  CHECK_THROWS_AS(ReadLabelsCsv(gap), Error);
}

}  // namespace
}  // namespace lrevent
