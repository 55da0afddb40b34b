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

#include "lrevent/query.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrevent/chebyshev_lp.hpp"
#include "lrevent/error.hpp"
#include "random.hpp"

namespace lrevent {

namespace {

constexpr std::uint64_t kCoordinateStream = 0x5a3e;
constexpr double kFeasibilityTol = 1e-9;

struct Support {
  std::vector<std::size_t> observed;  // empty when every coordinate is observed
  std::size_t count = 0;
  double scale = 0.0;                 // max |x_i| over observed coordinates

  std::size_t operator[](std::size_t k) const { return observed.empty() ? k : observed[k]; }
};

Support ObservedSupport(std::span<const double> x) {
  Support support;
  bool dense = true;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i])) {
      if (dense) {
        dense = false;
        support.observed.reserve(x.size());
        for (std::size_t k = 0; k < i; ++k) support.observed.push_back(k);
      }
      continue;
    }
    if (!dense) support.observed.push_back(i);
    support.scale = std::max(support.scale, std::abs(x[i]));
  }
  support.count = dense ? x.size() : support.observed.size();
  return support;
}

void CheckPoint(const Eigen::MatrixXd& right, std::span<const double> x) {
  if (right.rows() < 1) Fail(ErrorCode::kInvalidArgument, "subspace basis must have rank >= 1");
  if (static_cast<std::size_t>(right.cols()) != x.size()) {
    Fail(ErrorCode::kInvalidArgument, "query point length " + std::to_string(x.size()) +
                                          " does not match subspace dimension " +
                                          std::to_string(right.cols()));
  }
  for (double v : x) {
    if (std::isinf(v)) Fail(ErrorCode::kInvalidArgument, "query point has an infinite coordinate");
  }
}

QueryResult Evaluate(const Eigen::MatrixXd& right, std::span<const double> x,
                     std::vector<std::size_t> coords, double delta, double scale) {
  QueryResult result;
  LinfFit fit = LinfDistance(right, x, coords);
  result.distance = fit.distance;
  result.coefficients = std::move(fit.coefficients);
  result.sampled = std::move(coords);
  result.inside = WithinDelta(result.distance, delta, scale);
  return result;
}

}  // namespace

void QueryConfig::Validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) Fail(ErrorCode::kInvalidArgument, "delta must be finite and >= 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) Fail(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  if (!(failure_probability > 0.0 && failure_probability < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "failure probability must lie in (0, 1)");
  }
  if (!(constant > 0.0) || !std::isfinite(constant)) Fail(ErrorCode::kInvalidArgument, "sample-size constant must be > 0");
  if (sample_size && *sample_size == 0) Fail(ErrorCode::kInvalidArgument, "sample size must be >= 1");
}

std::size_t SampleSize(std::size_t rank, double epsilon, double failure_probability,
                       double constant) {
  if (rank < 1) Fail(ErrorCode::kInvalidArgument, "rank must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) Fail(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  if (!(failure_probability > 0.0 && failure_probability < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "failure probability must lie in (0, 1)");
  }
  if (!(constant > 0.0) || !std::isfinite(constant)) Fail(ErrorCode::kInvalidArgument, "constant must be > 0");
  const double r = static_cast<double>(rank);
  const double d = std::max(1.0, r * std::log(r));
  const double bound =
      constant * ((1.0 / epsilon) * std::log(1.0 / failure_probability) + (d / epsilon) * std::log(d / epsilon));
  const double s = std::ceil(bound);
  if (!(s < 1e15)) Fail(ErrorCode::kInvalidArgument, "sample size overflows");
  return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

std::vector<std::size_t> SampleCoordinates(std::size_t n, std::size_t s, std::uint64_t seed) {
  if (n < 1) Fail(ErrorCode::kInvalidArgument, "cannot sample from zero coordinates");
  detail::Rng rng(detail::DeriveSeed(seed, kCoordinateStream));
  return rng.Sample(n, std::min(s, n));
}

LinfFit LinfDistance(const Eigen::MatrixXd& right, std::span<const double> x,
                     std::span<const std::size_t> coords) {
  CheckPoint(right, x);
  const Eigen::Index r = right.rows();
  std::vector<double> target;
  std::vector<Eigen::Index> columns;
  target.reserve(coords.size());
  columns.reserve(coords.size());
  for (std::size_t i : coords) {
    if (i >= x.size()) Fail(ErrorCode::kOutOfRange, "coordinate index out of range");
    if (std::isnan(x[i])) continue;
    target.push_back(x[i]);
    columns.push_back(static_cast<Eigen::Index>(i));
  }
  if (target.empty()) Fail(ErrorCode::kInvalidArgument, "no observed coordinates to test");
  Eigen::MatrixXd basis(r, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = right.col(columns[k]);
  ChebyshevFit fit = SolveChebyshev(basis, target);
  return {fit.distance, std::move(fit.coefficients)};
}

bool WithinDelta(double distance, double delta, double point_scale) {
  return distance <= delta + kFeasibilityTol * std::max(1.0, point_scale);
}

QueryResult Membership(const Eigen::MatrixXd& right, std::span<const double> x,
                       const QueryConfig& config) {
  config.Validate();
  CheckPoint(right, x);
  const Support support = ObservedSupport(x);
  if (support.count == 0) Fail(ErrorCode::kInvalidArgument, "every coordinate of the query point is missing");
  const std::size_t s = config.sample_size.value_or(
      SampleSize(static_cast<std::size_t>(right.rows()), config.epsilon, config.failure_probability,
                 config.constant));
  std::vector<std::size_t> coords = SampleCoordinates(support.count, s, config.seed);
  for (std::size_t& c : coords) c = support[c];
  return Evaluate(right, x, std::move(coords), config.delta, support.scale);
}

QueryResult ExactMembership(const Eigen::MatrixXd& right, std::span<const double> x,
                            double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) Fail(ErrorCode::kInvalidArgument, "delta must be finite and >= 0");
  CheckPoint(right, x);
  const Support support = ObservedSupport(x);
  if (support.count == 0) Fail(ErrorCode::kInvalidArgument, "every coordinate of the query point is missing");
  std::vector<std::size_t> coords(support.count);
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] = support[k];
  return Evaluate(right, x, std::move(coords), delta, support.scale);
}

}  // namespace lrevent
