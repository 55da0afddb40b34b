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

#include "lrevent/synth.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include "lrevent/error.hpp"
#include "random.hpp"

namespace lrevent {

namespace {

constexpr std::uint64_t kFactorStream = 0x6661;
constexpr std::uint64_t kMaskStream = 0x6d61;
constexpr std::uint64_t kNonEventStream = 0x6e65;
constexpr std::uint64_t kEventRowStream = 0x6572;
constexpr std::uint64_t kEventNoiseStream = 0x656e;

ObservationMatrix ObserveThroughMask(const RowMajorMatrix& left, const ColMajorMatrix& right,
                                     double density, std::uint64_t seed) {
  const auto rows = static_cast<std::size_t>(left.rows());
  const auto cols = static_cast<std::size_t>(right.cols());
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(density * static_cast<double>(rows * cols)) + 16);
  for (std::size_t i = 0; i < rows; ++i) {
    detail::Rng mask(detail::DeriveSeed(seed, kMaskStream, i));
    for (std::size_t j = 0; j < cols; ++j) {
      if (density < 1.0 && mask.Uniform() >= density) continue;
      const double v = left.row(static_cast<Eigen::Index>(i)).dot(right.col(static_cast<Eigen::Index>(j)));
      entries.push_back(Entry::Exact(i, j, v));
    }
  }
  return ObservationMatrix(rows, cols, std::move(entries));
}

void CheckTruthArgs(std::size_t rows, std::size_t cols, std::size_t rank, double value_scale,
                    double density) {
  if (rows < 1 || cols < 1 || rank < 1) Fail(ErrorCode::kInvalidArgument, "ground truth needs m, n, r >= 1");
  if (!(density > 0.0 && density <= 1.0)) Fail(ErrorCode::kInvalidArgument, "density must lie in (0, 1]");
  if (!(value_scale > 0.0) || !std::isfinite(value_scale)) Fail(ErrorCode::kInvalidArgument, "value scale must be > 0");
}

}  // namespace

GroundTruth MakeGroundTruth(std::size_t rows, std::size_t cols, std::size_t rank,
                            double value_scale, double density, std::uint64_t seed) {
  CheckTruthArgs(rows, cols, rank, value_scale, density);
  GroundTruth truth;
  const auto m = static_cast<Eigen::Index>(rows);
  const auto n = static_cast<Eigen::Index>(cols);
  const auto r = static_cast<Eigen::Index>(rank);
  truth.left.resize(m, r);
  truth.right.resize(r, n);
  // E[L] = 1 and E[R] = scale / r, so E[(LR)_ij] = scale.
  detail::Rng factors(detail::DeriveSeed(seed, kFactorStream));
  const double right_max = 2.0 * value_scale / static_cast<double>(rank);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < r; ++k) truth.left(i, k) = factors.Uniform(0.0, 2.0);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < r; ++k) truth.right(k, j) = factors.Uniform(0.0, right_max);
  truth.observed = ObserveThroughMask(truth.left, truth.right, density, seed);
  return truth;
}

GroundTruth MakeTrafficGroundTruth(std::size_t days, std::size_t periods, std::size_t sensors,
                                   std::size_t rank, double value_scale, double density,
                                   std::uint64_t seed) {
  CheckTruthArgs(days, periods * sensors, rank, value_scale, density);
  detail::Rng rng(detail::DeriveSeed(seed, kFactorStream));
  const auto r = static_cast<Eigen::Index>(rank);

  // Prototype daily profiles over hours 7..22.
  Eigen::MatrixXd profile(r, static_cast<Eigen::Index>(periods));
  for (Eigen::Index k = 0; k < r; ++k) {
    const double floor = rng.Uniform(0.05, 0.3);
    const double morning = rng.Uniform(0.3, 1.0), evening = rng.Uniform(0.3, 1.0);
    const double am = rng.Uniform(7.5, 9.0), pm = rng.Uniform(16.5, 18.5);
    const double am_width = rng.Uniform(0.6, 1.8), pm_width = rng.Uniform(0.8, 2.2);
    for (std::size_t p = 0; p < periods; ++p) {
      const double h = 7.0 + 15.0 * (static_cast<double>(p) + 0.5) / static_cast<double>(periods);
      const double a = (h - am) / am_width, b = (h - pm) / pm_width;
      profile(k, static_cast<Eigen::Index>(p)) =
          floor + morning * std::exp(-0.5 * a * a) + evening * std::exp(-0.5 * b * b);
    }
  }

  GroundTruth truth;
  truth.right.resize(r, static_cast<Eigen::Index>(periods * sensors));
  for (std::size_t s = 0; s < sensors; ++s) {
    const double sensor_scale = std::exp(0.3 * rng.Normal());
    for (Eigen::Index k = 0; k < r; ++k) {
      const double mix = sensor_scale * std::exp(0.7 * rng.Normal());
      for (std::size_t p = 0; p < periods; ++p) {
        truth.right(k, static_cast<Eigen::Index>(s * periods + p)) = mix * profile(k, static_cast<Eigen::Index>(p));
      }
    }
  }
  truth.left.resize(static_cast<Eigen::Index>(days), r);
  for (Eigen::Index d = 0; d < truth.left.rows(); ++d) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) total += truth.left(d, k) = -std::log(1.0 - rng.Uniform());
    truth.left.row(d) *= rng.Uniform(0.6, 1.4) / total;
  }
  const double mean = (truth.left * truth.right).mean();
  truth.right *= value_scale / mean;
  truth.observed = ObserveThroughMask(truth.left, truth.right, density, seed);
  return truth;
}

void SynthConfig::Validate() const {
  if (base_rows < 1 || periods < 1 || sensors < 1 || base_rank < 1) {
    Fail(ErrorCode::kInvalidArgument, "base dimensions and rank must be >= 1");
  }
  if (!(density > 0.0 && density <= 1.0)) Fail(ErrorCode::kInvalidArgument, "density must lie in (0, 1]");
  if (!(value_scale > 0.0) || !std::isfinite(value_scale)) Fail(ErrorCode::kInvalidArgument, "value scale must be > 0");
  if (rows_out < 1 || rows_out <= event_rows) Fail(ErrorCode::kInvalidArgument, "rows out must exceed the event-row count");
  if (train_rows > rows_out) Fail(ErrorCode::kInvalidArgument, "train rows cannot exceed rows out");
  if (!(scalar_min <= scalar_max) || !std::isfinite(scalar_min) || !std::isfinite(scalar_max)) {
    Fail(ErrorCode::kInvalidArgument, "scalar range must be finite with min <= max");
  }
  if (!(noise_delta >= 0.0) || !(noise_fraction >= 0.0) || !std::isfinite(noise_delta * noise_fraction)) {
    Fail(ErrorCode::kInvalidArgument, "noise half-width must be finite and >= 0");
  }
  if (!(event_sigma > 0.0) || !std::isfinite(event_sigma)) Fail(ErrorCode::kInvalidArgument, "event sigma must be > 0");
  for (double mu : event_means) {
    if (!std::isfinite(mu)) Fail(ErrorCode::kInvalidArgument, "event means must be finite");
  }
}

NonEventSet MakeNonEvents(const ObservationMatrix& base, const SynthConfig& config) {
  config.Validate();
  if (base.rows() == 0 || base.empty()) Fail(ErrorCode::kInvalidArgument, "base matrix has no observations");
  const double half_width = config.noise_fraction * config.noise_delta;
  NonEventSet out;
  out.source_rows.resize(config.rows_out);
  out.scalars.resize(config.rows_out);
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < config.rows_out; ++k) {
    detail::Rng rng(detail::DeriveSeed(config.seed, kNonEventStream, k));
    const auto src = static_cast<std::size_t>(rng.Below(base.rows()));
    const double alpha = rng.Uniform(config.scalar_min, config.scalar_max);
    out.source_rows[k] = src;
    out.scalars[k] = alpha;
    for (const Entry& e : base.row(src)) {
      double v = alpha * e.Center();
      if (half_width > 0.0) v += rng.Uniform(-half_width, half_width);
      entries.push_back(Entry::Exact(k, e.col, v));
    }
  }
  out.matrix = ObservationMatrix(config.rows_out, base.cols(), std::move(entries));
  return out;
}

EventSet MakeEvents(const ObservationMatrix& nonevents, const SynthConfig& config, double mean) {
  config.Validate();
  if (!std::isfinite(mean)) Fail(ErrorCode::kInvalidArgument, "event mean must be finite");
  if (config.event_rows > nonevents.rows()) Fail(ErrorCode::kInvalidArgument, "more event rows than non-event rows");
  EventSet out;
  out.mean = mean;
  detail::Rng picker(detail::DeriveSeed(config.seed, kEventRowStream));
  out.source_rows = picker.Sample(nonevents.rows(), config.event_rows);
  const std::uint64_t noise_seed = detail::DeriveSeed(config.seed, kEventNoiseStream, std::bit_cast<std::uint64_t>(mean));
  std::vector<Entry> entries;
  for (std::size_t k = 0; k < out.source_rows.size(); ++k) {
    detail::Rng rng(detail::DeriveSeed(noise_seed, k));
    for (const Entry& e : nonevents.row(out.source_rows[k])) {
      entries.push_back(Entry::Exact(k, e.col, e.Center() + mean + config.event_sigma * rng.Normal()));
    }
  }
  out.matrix = ObservationMatrix(out.source_rows.size(), nonevents.cols(), std::move(entries));
  return out;
}

Dataset MakeDataset(const SynthConfig& config) {
  config.Validate();
  Dataset data;
  data.base = config.base_shape == BaseShape::kTraffic
                  ? MakeTrafficGroundTruth(config.base_rows, config.periods, config.sensors,
                                           config.base_rank, config.value_scale, config.density,
                                           config.seed)
                  : MakeGroundTruth(config.base_rows, config.cols(), config.base_rank,
                                    config.value_scale, config.density, config.seed);
  data.nonevents = MakeNonEvents(data.base.observed, config);

  std::vector<std::size_t> train_ids(config.train_rows);
  std::iota(train_ids.begin(), train_ids.end(), std::size_t{0});
  data.train = data.nonevents.matrix.SelectRows(train_ids);

  std::vector<std::size_t> test_ids(config.rows_out - config.train_rows);
  std::iota(test_ids.begin(), test_ids.end(), config.train_rows);
  for (double mean : config.event_means) {
    EventSet events = MakeEvents(data.nonevents.matrix, config, mean);
    std::vector<Entry> entries;
    std::vector<Label> labels;
    for (std::size_t k = 0; k < test_ids.size(); ++k) {
      for (Entry e : data.nonevents.matrix.row(test_ids[k])) {
        e.row = k;
        entries.push_back(e);
      }
      labels.push_back(Label::kNonEvent);
    }
    for (std::size_t k = 0; k < events.matrix.rows(); ++k) {
      for (Entry e : events.matrix.row(k)) {
        e.row = test_ids.size() + k;
        entries.push_back(e);
      }
      labels.push_back(Label::kEvent);
    }
    data.eval.emplace_back(labels.size(), config.cols(), std::move(entries));
    data.eval_labels.push_back(std::move(labels));
    data.events.push_back(std::move(events));
  }
  return data;
}

}  // namespace lrevent
