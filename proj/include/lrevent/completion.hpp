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

#ifndef LREVENT_COMPLETION_HPP_
#define LREVENT_COMPLETION_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrevent/obs_matrix.hpp"

namespace lrevent {

// L is stored row-major and R column-major so that both L_{i:} and R_{:j}
// are contiguous.
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMajorMatrix = Eigen::MatrixXd;

// Low-rank model X ~= L * R with Frobenius regularization weight mu.
struct Factorization {
  RowMajorMatrix left;   // m x r
  ColMajorMatrix right;  // r x n
  double mu = 0.1;

  std::size_t rows() const { return static_cast<std::size_t>(left.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(right.cols()); }
  std::size_t rank() const { return static_cast<std::size_t>(right.rows()); }

  double Predict(std::size_t i, std::size_t j) const { return left.row(i).dot(right.col(j)); }

  // Throws unless L, R have a common rank >= 1 and finite entries.
  void Validate() const;
};

struct FitConfig {
  std::size_t rank = 10;
  double mu = 0.1;
  double row_fraction = 1.0;
  double column_fraction = 1.0;
  std::size_t max_epochs = 1000;
  // Stop once (f_prev - f) / f_prev falls below this.
  double tolerance = 1e-4;
  std::uint64_t seed = 1;
  // Upper end of the uniform initialization; 0 derives sqrt(mean / rank).
  double init_scale = 0.0;
  unsigned threads = 0;

  void Validate() const;
};

struct FitTrace {
  double initial_objective = 0.0;
  std::vector<double> objective;
  std::vector<double> rmse;
  std::vector<double> seconds;

  std::size_t epochs() const { return objective.size(); }
};

struct FitResult {
  Factorization model;
  FitTrace trace;
};

struct CoordinateStep {
  double delta = 0.0;      // -gradient / curvature
  double gradient = 0.0;
  double curvature = 0.0;  // mu + sum of squared partner coefficients
};

// f = f_E + f_L + f_U + mu/2 (|L|_F^2 + |R|_F^2).
double Objective(const Factorization& model, const ObservationMatrix& obs);

// Partial derivative of the data terms with respect to the prediction at e.
double EntryGradient(const Entry& e, double prediction);

// Coordinate step for L(i, k) with R fixed.
CoordinateStep CoordinateDeltaL(const Factorization& model, const ObservationMatrix& obs,
                                std::size_t i, std::size_t k);
// Coordinate step for R(k, j) with L fixed.
CoordinateStep CoordinateDeltaR(const Factorization& model, const ObservationMatrix& obs,
                                std::size_t k, std::size_t j);

// Applies one coordinate step to each listed row of L (coords[t] picks the
// coordinate of rows[t]). Rows must be distinct; R is only read.
void UpdateRows(Factorization& model, const ObservationMatrix& obs,
                std::span<const std::size_t> rows, std::span<const std::size_t> coords,
                unsigned threads);
// Column counterpart of UpdateRows acting on R.
void UpdateColumns(Factorization& model, const ObservationMatrix& obs,
                   std::span<const std::size_t> cols, std::span<const std::size_t> coords,
                   unsigned threads);

// Uniform [0, scale) initialization for the given data and config.
Factorization InitialFactorization(const ObservationMatrix& obs, const FitConfig& config);

// Alternating parallel coordinate descent from a given starting point.
FitResult Fit(const ObservationMatrix& obs, const FitConfig& config, Factorization start);
FitResult Fit(const ObservationMatrix& obs, const FitConfig& config);

// Root-mean-square distance from L*R to each observed value or interval.
double Rmse(const Factorization& model, const ObservationMatrix& obs);
// Root-mean-square difference against a dense reference over all m*n cells.
double DenseRmse(const Factorization& model, const Eigen::MatrixXd& reference);

// Euclidean norm of the full gradient of the objective.
double GradientNorm(const Factorization& model, const ObservationMatrix& obs);

// Binary container "LRFA1": little-endian u64 m, n, r, f64 mu, L row-major,
// R row-major.
void WriteModel(std::ostream& out, const Factorization& model);
Factorization ReadModel(std::istream& in);
void SaveModel(const std::string& path, const Factorization& model);
Factorization LoadModel(const std::string& path);

}  // namespace lrevent

#endif  // LREVENT_COMPLETION_HPP_
