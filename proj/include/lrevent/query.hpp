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

#ifndef LREVENT_QUERY_HPP_
#define LREVENT_QUERY_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lrevent {

struct QueryConfig {
  double delta = 0.0;                      // noise half-width
  double epsilon = 0.1;                    // fraction of violated coordinates to catch
  double failure_probability = 1.0 / 3.0;  // allowed probability of missing them
  double constant = 1.0;                   // constant in front of the sample-size bound
  std::optional<std::size_t> sample_size;  // overrides the derived size
  std::uint64_t seed = 1;

  void Validate() const;
};

struct QueryResult {
  bool inside = false;
  double distance = 0.0;            // l-inf residual over the sampled coordinates
  Eigen::VectorXd coefficients;     // attains `distance`
  std::vector<std::size_t> sampled; // coordinates used, ascending
};

struct LinfFit {
  double distance = 0.0;
  Eigen::VectorXd coefficients;
};

// ceil(C * [(1/eps) ln(1/delta) + (d/eps) ln(d/eps)]) with d = max(1, r ln r),
// never below 1.
std::size_t SampleSize(std::size_t rank, double epsilon, double failure_probability,
                       double constant = 1.0);

// min(s, n) distinct coordinates drawn uniformly without replacement, sorted.
std::vector<std::size_t> SampleCoordinates(std::size_t n, std::size_t s, std::uint64_t seed);

// min_c max_{i in coords} |x_i - (c R)_i|. Coordinates where x is NaN are
// skipped; throws if none remain.
LinfFit LinfDistance(const Eigen::MatrixXd& right, std::span<const double> x,
                     std::span<const std::size_t> coords);

// Verdict rule shared by every query: distance <= delta up to a relative
// round-off allowance of 1e-9 * max(1, |x|_inf).
bool WithinDelta(double distance, double delta, double point_scale);

// Randomized test over a sample of the observed coordinates of x.
QueryResult Membership(const Eigen::MatrixXd& right, std::span<const double> x,
                       const QueryConfig& config);

// Same test over every observed coordinate of x.
QueryResult ExactMembership(const Eigen::MatrixXd& right, std::span<const double> x,
                            double delta);

}  // namespace lrevent

#endif  // LREVENT_QUERY_HPP_
