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

#include "lrevent/detect.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "lrevent/error.hpp"
#include "lrevent/parallel.hpp"
#include "random.hpp"

namespace lrevent {

namespace {

constexpr std::uint64_t kEvaluationStream = 0xe7a1;

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t EffectiveSampleSize(const DetectorModel& model) {
  if (model.exact) return 0;
  return model.query.sample_size.value_or(SampleSize(model.factors.rank(), model.query.epsilon,
                                                     model.query.failure_probability,
                                                     model.query.constant));
}

// Sampled (or exact) distance; independent of the threshold.
double Score(const DetectorModel& model, std::span<const double> x, std::uint64_t seed) {
  if (model.exact) return ExactMembership(model.factors.right, x, 0.0).distance;
  QueryConfig config = model.query;
  config.seed = seed;
  return Membership(model.factors.right, x, config).distance;
}

double PointScale(std::span<const double> x) {
  double scale = 0.0;
  for (double v : x)
    if (!std::isnan(v)) scale = std::max(scale, std::abs(v));
  return scale;
}

}  // namespace

const char* LabelName(Label label) { return label == Label::kEvent ? "event" : "nonevent"; }

Label ParseLabel(const std::string& text) {
  if (text == "event") return Label::kEvent;
  if (text == "nonevent") return Label::kNonEvent;
  Fail(ErrorCode::kFormat, "unknown label '" + text + "'");
}

double CalibrateDelta(const Factorization& factors, std::span<const std::vector<double>> holdout,
                      unsigned threads) {
  if (holdout.empty()) Fail(ErrorCode::kInvalidArgument, "calibration needs at least one holdout row");
  std::vector<double> distance(holdout.size());
  ParallelFor(holdout.size(), threads, [&](std::size_t k) {
    distance[k] = ExactMembership(factors.right, holdout[k], 0.0).distance;
  });
  const double delta = *std::max_element(distance.begin(), distance.end());
  if (!std::isfinite(delta)) Fail(ErrorCode::kNumerical, "calibrated delta is not finite");
  return delta;
}

double CalibrateDelta(const Factorization& factors, const ObservationMatrix& holdout,
                      unsigned threads) {
  std::vector<std::vector<double>> rows(holdout.rows());
  for (std::size_t i = 0; i < holdout.rows(); ++i) rows[i] = holdout.DenseRow(i);
  return CalibrateDelta(factors, rows, threads);
}

Classification Classify(const DetectorModel& model, std::span<const double> x) {
  return Classify(model, x, model.query.seed);
}

Classification Classify(const DetectorModel& model, std::span<const double> x, std::uint64_t seed) {
  Classification out;
  out.distance = Score(model, x, seed);
  out.label = WithinDelta(out.distance, model.query.delta, PointScale(x)) ? Label::kNonEvent : Label::kEvent;
  return out;
}

DetectionMetrics ComputeMetrics(const ConfusionCounts& c) {
  DetectionMetrics m;
  m.precision_defined = c.tp + c.fp > 0;
  m.recall_defined = c.tp + c.fn > 0;
  m.precision = m.precision_defined ? c.tp / (c.tp + c.fp) : 0.0;
  m.recall = m.recall_defined ? c.tp / (c.tp + c.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

std::uint64_t EvaluationSeed(std::uint64_t seed, std::size_t rep, std::size_t index) {
  return detail::DeriveSeed(seed ^ kEvaluationStream, rep, index);
}

EvalReport Evaluate(const DetectorModel& model, const ObservationMatrix& samples,
                    std::span<const Label> labels, std::span<const double> delta_grid,
                    std::size_t repetitions, std::uint64_t seed, unsigned threads) {
  if (delta_grid.empty()) Fail(ErrorCode::kInvalidArgument, "delta grid is empty");
  if (samples.rows() == 0) Fail(ErrorCode::kInvalidArgument, "no samples to evaluate");
  if (labels.size() != samples.rows()) Fail(ErrorCode::kInvalidArgument, "one label per sample row required");
  if (repetitions < 1) Fail(ErrorCode::kInvalidArgument, "repetitions must be >= 1");
  if (samples.cols() != model.factors.cols()) Fail(ErrorCode::kInvalidArgument, "sample length does not match the model");
  for (double d : delta_grid) {
    if (!(d >= 0.0) || !std::isfinite(d)) Fail(ErrorCode::kInvalidArgument, "delta grid values must be finite and >= 0");
  }
  model.query.Validate();

  const std::size_t count = samples.rows();
  const std::size_t reps = model.exact ? 1 : repetitions;
  std::vector<std::vector<double>> points(count);
  std::vector<double> scale(count);
  for (std::size_t i = 0; i < count; ++i) {
    points[i] = samples.DenseRow(i);
    scale[i] = PointScale(points[i]);
  }

  // The sampled coordinates depend only on the seed, so one distance per
  // (repetition, sample) serves every threshold on the grid.
  std::vector<double> distance(reps * count);
  ParallelFor(reps * count, threads, [&](std::size_t cell) {
    const std::size_t rep = cell / count;
    const std::size_t i = cell % count;
    distance[cell] = Score(model, points[i], EvaluationSeed(seed, rep, i));
  });

  EvalReport report;
  report.seed = seed;
  report.sample_size = EffectiveSampleSize(model);
  report.repetitions = reps;
  report.exact = model.exact;
  for (double delta : delta_grid) {
    EvalRow row;
    row.delta = delta;
    row.metrics.precision_defined = row.metrics.recall_defined = true;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      ConfusionCounts c;
      for (std::size_t i = 0; i < count; ++i) {
        const bool event = !WithinDelta(distance[rep * count + i], delta, scale[i]);
        const bool truth = labels[i] == Label::kEvent;
        (event ? (truth ? c.tp : c.fp) : (truth ? c.fn : c.tn)) += 1.0;
      }
      const DetectionMetrics m = ComputeMetrics(c);
      row.counts.tp += c.tp;
      row.counts.fp += c.fp;
      row.counts.fn += c.fn;
      row.counts.tn += c.tn;
      row.metrics.precision += m.precision;
      row.metrics.recall += m.recall;
      row.metrics.f1 += m.f1;
      row.metrics.precision_defined = row.metrics.precision_defined && m.precision_defined;
      row.metrics.recall_defined = row.metrics.recall_defined && m.recall_defined;
    }
    const double k = static_cast<double>(reps);
    row.counts.tp /= k;
    row.counts.fp /= k;
    row.counts.fn /= k;
    row.counts.tn /= k;
    row.metrics.precision /= k;
    row.metrics.recall /= k;
    row.metrics.f1 /= k;
    report.rows.push_back(row);
  }
  return report;
}

void WriteReportCsv(std::ostream& out, const EvalReport& report) {
  out << "delta,tp,fp,fn,tn,precision,recall,f1\n";
  for (const EvalRow& row : report.rows) {
    out << Num(row.delta) << ',' << Num(row.counts.tp) << ',' << Num(row.counts.fp) << ','
        << Num(row.counts.fn) << ',' << Num(row.counts.tn) << ',' << Num(row.metrics.precision) << ','
        << Num(row.metrics.recall) << ',' << Num(row.metrics.f1) << '\n';
  }
}

void WriteLabelsCsv(std::ostream& out, std::span<const Label> labels) {
  out << "row,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << LabelName(labels[i]) << '\n';
}

std::vector<Label> ReadLabelsCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorCode::kFormat, "empty labels CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "row,label") Fail(ErrorCode::kFormat, "expected labels header 'row,label', got '" + line + "'");
  std::vector<std::pair<std::size_t, Label>> parsed;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) Fail(ErrorCode::kFormat, "bad labels line '" + line + "'");
    std::size_t row = 0;
    auto [p, ec] = std::from_chars(line.data(), line.data() + comma, row);
    if (ec != std::errc() || p != line.data() + comma) Fail(ErrorCode::kFormat, "bad row index in '" + line + "'");
    parsed.emplace_back(row, ParseLabel(line.substr(comma + 1)));
  }
  std::vector<Label> labels(parsed.size());
  std::vector<bool> seen(parsed.size(), false);
  for (const auto& [row, label] : parsed) {
    if (row >= parsed.size() || seen[row]) Fail(ErrorCode::kFormat, "label rows must be 0..N-1, each once");
    seen[row] = true;
    labels[row] = label;
  }
  return labels;
}

std::vector<Label> ReadLabelsCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return ReadLabelsCsv(in);
}

}  // namespace lrevent
