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

#ifndef LREVENT_DETECT_HPP_
#define LREVENT_DETECT_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lrevent/completion.hpp"
#include "lrevent/obs_matrix.hpp"
#include "lrevent/query.hpp"

namespace lrevent {

enum class Label : std::uint8_t { kNonEvent = 0, kEvent = 1 };

const char* LabelName(Label label);
Label ParseLabel(const std::string& text);

struct DetectorModel {
  Factorization factors;
  // query.delta is the calibrated threshold; query.seed the default seed.
  QueryConfig query;
  // Test every observed coordinate instead of a sample.
  bool exact = false;
};

struct Classification {
  Label label = Label::kNonEvent;
  double distance = 0.0;  // abnormality score
};

// Max over holdout rows of the exact l-inf distance to span(R).
double CalibrateDelta(const Factorization& factors, const ObservationMatrix& holdout,
                      unsigned threads = 1);
double CalibrateDelta(const Factorization& factors, std::span<const std::vector<double>> holdout,
                      unsigned threads = 1);

// Outside the subspace (beyond delta) is an event.
Classification Classify(const DetectorModel& model, std::span<const double> x);
Classification Classify(const DetectorModel& model, std::span<const double> x, std::uint64_t seed);

// Event is the positive class.
struct ConfusionCounts {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

struct DetectionMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = false;  // TP + FP > 0
  bool recall_defined = false;     // TP + FN > 0
};

DetectionMetrics ComputeMetrics(const ConfusionCounts& counts);

struct EvalRow {
  double delta = 0.0;
  ConfusionCounts counts;    // means over repetitions
  DetectionMetrics metrics;  // means over repetitions; defined flags hold for every repetition
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;  // 0 in exact mode
  std::size_t repetitions = 0;
  bool exact = false;
};

// Classifies every sample at every grid threshold with `repetitions`
// independent coordinate samples and averages the metrics.
EvalReport Evaluate(const DetectorModel& model, const ObservationMatrix& samples,
                    std::span<const Label> labels, std::span<const double> delta_grid,
                    std::size_t repetitions, std::uint64_t seed, unsigned threads = 1);

// Seed used for sample `index` in repetition `rep`.
std::uint64_t EvaluationSeed(std::uint64_t seed, std::size_t rep, std::size_t index);

// "delta,tp,fp,fn,tn,precision,recall,f1" with 17 significant digits.
void WriteReportCsv(std::ostream& out, const EvalReport& report);

// "row,label" with label in {event, nonevent}.
void WriteLabelsCsv(std::ostream& out, std::span<const Label> labels);
std::vector<Label> ReadLabelsCsv(std::istream& in);
std::vector<Label> ReadLabelsCsv(const std::string& path);

}  // namespace lrevent

#endif  // LREVENT_DETECT_HPP_
