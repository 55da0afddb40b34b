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

#ifndef LREVENT_SYNTH_HPP_
#define LREVENT_SYNTH_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lrevent/completion.hpp"
#include "lrevent/detect.hpp"
#include "lrevent/obs_matrix.hpp"

namespace lrevent {

struct GroundTruth {
  ObservationMatrix observed;
  RowMajorMatrix left;   // m x r
  ColMajorMatrix right;  // r x n
};

// Rank-r nonnegative factors with entries of mean value `value_scale`,
// observed through an independent Bernoulli(density) mask.
GroundTruth MakeGroundTruth(std::size_t rows, std::size_t cols, std::size_t rank,
                            double value_scale, double density, std::uint64_t seed);

// Rank-r traffic-like days: each of the r prototype days is a morning and
// evening peak over a 7:00-22:00 grid, scaled per sensor by a log-normal
// factor; each day mixes the prototypes with nonnegative weights. Columns
// are sensor * periods + period and the mean observed value is `value_scale`.
GroundTruth MakeTrafficGroundTruth(std::size_t days, std::size_t periods, std::size_t sensors,
                                   std::size_t rank, double value_scale, double density,
                                   std::uint64_t seed);

enum class BaseShape : std::uint8_t { kUniform = 0, kTraffic = 1 };

struct SynthConfig {
  // Base matrix (stand-in for historical data).
  BaseShape base_shape = BaseShape::kTraffic;
  std::size_t base_rows = 30;
  std::size_t periods = 100;
  std::size_t sensors = 30;
  std::size_t base_rank = 10;
  double value_scale = 50.0;
  double density = 0.58;

  // Non-event rows: alpha * base row + U(-w, w) with w = noise_fraction * noise_delta.
  std::size_t rows_out = 1200;
  std::size_t train_rows = 1000;
  double scalar_min = 0.0;
  double scalar_max = 2.0;
  double noise_delta = 1.0;
  double noise_fraction = 0.8;

  // Event rows: non-event rows plus N(mean, sigma^2) on observed cells.
  std::vector<double> event_means{5.0, 15.0, 25.0, 35.0};
  double event_sigma = 1.0;
  std::size_t event_rows = 200;

  std::uint64_t seed = 1;

  std::size_t cols() const { return periods * sensors; }
  void Validate() const;
};

struct NonEventSet {
  ObservationMatrix matrix;
  std::vector<std::size_t> source_rows;
  std::vector<double> scalars;
};

struct EventSet {
  double mean = 0.0;
  ObservationMatrix matrix;
  std::vector<std::size_t> source_rows;  // rows of the non-event matrix
};

NonEventSet MakeNonEvents(const ObservationMatrix& base, const SynthConfig& config);
EventSet MakeEvents(const ObservationMatrix& nonevents, const SynthConfig& config, double mean);

struct Dataset {
  GroundTruth base;
  NonEventSet nonevents;
  std::vector<EventSet> events;  // one per configured mean
  ObservationMatrix train;       // first train_rows non-event rows
  // Per mean: held-out non-event rows followed by that mean's event rows.
  std::vector<ObservationMatrix> eval;
  std::vector<std::vector<Label>> eval_labels;
};

Dataset MakeDataset(const SynthConfig& config);

}  // namespace lrevent

#endif  // LREVENT_SYNTH_HPP_
