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

#include "lrevent/completion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string_view>
#include <utility>
#include <vector>

#include "binary_io.hpp"
#include "lrevent/error.hpp"
#include "lrevent/parallel.hpp"
#include "random.hpp"

namespace lrevent {

namespace {

constexpr std::string_view kModelMagic = "LRFA1";

double PositivePart(double x) { return x > 0.0 ? x : 0.0; }

// Data-term penalty of one entry at the given prediction.
double EntryPenalty(const Entry& e, double p) {
  switch (e.kind) {
    case EntryKind::kExact: {
      const double d = p - e.lower;
      return 0.5 * d * d;
    }
    case EntryKind::kLower: {
      const double d = PositivePart(e.lower - p);
      return 0.5 * d * d;
    }
    case EntryKind::kUpper: {
      const double d = PositivePart(p - e.upper);
      return 0.5 * d * d;
    }
    case EntryKind::kInterval: {
      const double lo = PositivePart(e.lower - p);
      const double hi = PositivePart(p - e.upper);
      return 0.5 * (lo * lo + hi * hi);
    }
  }
  return 0.0;
}

// Distance from p to the feasible set of the entry.
double EntryResidual(const Entry& e, double p) {
  if (e.kind == EntryKind::kExact) return std::abs(p - e.lower);
  double r = 0.0;
  if (e.HasLower()) r += PositivePart(e.lower - p);
  if (e.HasUpper()) r += PositivePart(p - e.upper);
  return r;
}

std::vector<std::size_t> SampleSubset(std::size_t count, double fraction, detail::Rng& rng) {
  if (fraction >= 1.0) {
    std::vector<std::size_t> all(count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count))));
  return rng.Sample(count, k);
}

void CheckShape(const Factorization& model, const ObservationMatrix& obs) {
  if (model.rows() != obs.rows() || model.cols() != obs.cols() ||
      static_cast<std::size_t>(model.left.cols()) != model.rank()) {
    std::ostringstream os;
    os << "factorization " << model.left.rows() << "x" << model.left.cols() << " * "
       << model.right.rows() << "x" << model.right.cols() << " does not match observations "
       << obs.rows() << "x" << obs.cols();
    Fail(ErrorCode::kInvalidArgument, os.str());
  }
}

double ObjectiveImpl(const Factorization& model, const ObservationMatrix& obs, unsigned threads) {
  CheckShape(model, obs);
  std::vector<double> per_row(obs.rows(), 0.0);
  ParallelFor(obs.rows(), threads, [&](std::size_t i) {
    double sum = 0.0;
    for (const Entry& e : obs.row(i)) sum += EntryPenalty(e, model.Predict(i, e.col));
    per_row[i] = sum;
  });
  const double data = std::accumulate(per_row.begin(), per_row.end(), 0.0);
  return data + 0.5 * model.mu * (model.left.squaredNorm() + model.right.squaredNorm());
}

// Predictions L_i.R_j cached per entry (in entry order) so that a coordinate
// step costs one pass over the touched entries instead of a rank-r product
// per entry. Refreshed exactly every kRefreshEpochs epochs.
constexpr std::size_t kRefreshEpochs = 256;

class PredictionCache {
 public:
  explicit PredictionCache(const ObservationMatrix& obs) : obs_(obs), pred_(obs.size()) {}

  void Refresh(const Factorization& model, unsigned threads) {
    const Entry* base = obs_.entries().data();
    ParallelFor(obs_.rows(), threads, [&](std::size_t i) {
      for (const Entry& e : obs_.row(i)) pred_[static_cast<std::size_t>(&e - base)] = model.Predict(i, e.col);
    });
  }

  void StepRow(Factorization& model, std::size_t i, std::size_t k) {
    const auto row = obs_.row(i);
    const std::size_t offset = static_cast<std::size_t>(row.data() - obs_.entries().data());
    const auto kk = static_cast<Eigen::Index>(k);
    double g = model.mu * model.left(i, k);
    double w = model.mu;
    for (std::size_t t = 0; t < row.size(); ++t) {
      const double c = model.right(kk, static_cast<Eigen::Index>(row[t].col));
      g += EntryGradient(row[t], pred_[offset + t]) * c;
      w += c * c;
    }
    const double delta = -g / w;
    model.left(i, k) += delta;
    for (std::size_t t = 0; t < row.size(); ++t) {
      pred_[offset + t] += delta * model.right(kk, static_cast<Eigen::Index>(row[t].col));
    }
  }

  void StepColumn(Factorization& model, std::size_t k, std::size_t j) {
    const auto ids = obs_.column(j);
    const auto kk = static_cast<Eigen::Index>(k);
    const auto jj = static_cast<Eigen::Index>(j);
    const auto entries = obs_.entries();
    double g = model.mu * model.right(kk, jj);
    double w = model.mu;
    for (std::size_t idx : ids) {
      const double c = model.left(static_cast<Eigen::Index>(entries[idx].row), kk);
      g += EntryGradient(entries[idx], pred_[idx]) * c;
      w += c * c;
    }
    const double delta = -g / w;
    model.right(kk, jj) += delta;
    for (std::size_t idx : ids) pred_[idx] += delta * model.left(static_cast<Eigen::Index>(entries[idx].row), kk);
  }

  // Objective and observed-entry RMSE from the cached predictions.
  std::pair<double, double> Measure(const Factorization& model) const {
    const auto entries = obs_.entries();
    double data = 0.0, sq = 0.0;
    for (std::size_t idx = 0; idx < entries.size(); ++idx) {
      data += EntryPenalty(entries[idx], pred_[idx]);
      const double r = EntryResidual(entries[idx], pred_[idx]);
      sq += r * r;
    }
    const double f = data + 0.5 * model.mu * (model.left.squaredNorm() + model.right.squaredNorm());
    return {f, std::sqrt(sq / static_cast<double>(entries.size()))};
  }

 private:
  const ObservationMatrix& obs_;
  std::vector<double> pred_;
};

}  // namespace

void Factorization::Validate() const {
  if (right.rows() < 1 || left.cols() != right.rows()) {
    Fail(ErrorCode::kInvalidArgument, "factorization rank must be >= 1 and consistent");
  }
  if (!left.allFinite() || !right.allFinite()) Fail(ErrorCode::kNumerical, "factorization has non-finite entries");
  if (!(mu >= 0.0) || !std::isfinite(mu)) Fail(ErrorCode::kInvalidArgument, "regularization weight must be finite and >= 0");
}

void FitConfig::Validate() const {
  if (rank < 1) Fail(ErrorCode::kInvalidArgument, "rank must be >= 1");
  if (!(mu > 0.0) || !std::isfinite(mu)) Fail(ErrorCode::kInvalidArgument, "mu must be > 0");
  if (!(row_fraction > 0.0 && row_fraction <= 1.0) || !(column_fraction > 0.0 && column_fraction <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "subset fractions must lie in (0, 1]");
  }
  if (max_epochs < 1) Fail(ErrorCode::kInvalidArgument, "max epochs must be >= 1");
  if (!(tolerance >= 0.0)) Fail(ErrorCode::kInvalidArgument, "tolerance must be >= 0");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) Fail(ErrorCode::kInvalidArgument, "init scale must be >= 0");
}

double Objective(const Factorization& model, const ObservationMatrix& obs) {
  return ObjectiveImpl(model, obs, 1);
}

double EntryGradient(const Entry& e, double p) {
  switch (e.kind) {
    case EntryKind::kExact:
      return p - e.lower;
    case EntryKind::kLower:
      return -PositivePart(e.lower - p);
    case EntryKind::kUpper:
      return PositivePart(p - e.upper);
    case EntryKind::kInterval:
      return PositivePart(p - e.upper) - PositivePart(e.lower - p);
  }
  return 0.0;
}

CoordinateStep CoordinateDeltaL(const Factorization& model, const ObservationMatrix& obs,
                                std::size_t i, std::size_t k) {
  if (i >= model.rows() || k >= model.rank()) Fail(ErrorCode::kOutOfRange, "L coordinate out of range");
  CoordinateStep step;
  step.gradient = model.mu * model.left(i, k);
  step.curvature = model.mu;
  for (const Entry& e : obs.row(i)) {
    const double coeff = model.right(k, e.col);
    step.gradient += EntryGradient(e, model.Predict(i, e.col)) * coeff;
    step.curvature += coeff * coeff;
  }
  step.delta = step.curvature > 0.0 ? -step.gradient / step.curvature : 0.0;
  return step;
}

CoordinateStep CoordinateDeltaR(const Factorization& model, const ObservationMatrix& obs,
                                std::size_t k, std::size_t j) {
  if (j >= model.cols() || k >= model.rank()) Fail(ErrorCode::kOutOfRange, "R coordinate out of range");
  CoordinateStep step;
  step.gradient = model.mu * model.right(k, j);
  step.curvature = model.mu;
  const auto entries = obs.entries();
  for (std::size_t idx : obs.column(j)) {
    const Entry& e = entries[idx];
    const double coeff = model.left(e.row, k);
    step.gradient += EntryGradient(e, model.Predict(e.row, j)) * coeff;
    step.curvature += coeff * coeff;
  }
  step.delta = step.curvature > 0.0 ? -step.gradient / step.curvature : 0.0;
  return step;
}

void UpdateRows(Factorization& model, const ObservationMatrix& obs,
                std::span<const std::size_t> rows, std::span<const std::size_t> coords,
                unsigned threads) {
  if (rows.size() != coords.size()) Fail(ErrorCode::kInvalidArgument, "one coordinate per row required");
  ParallelFor(rows.size(), threads, [&](std::size_t t) {
    const CoordinateStep step = CoordinateDeltaL(model, obs, rows[t], coords[t]);
    model.left(rows[t], coords[t]) += step.delta;
  });
}

void UpdateColumns(Factorization& model, const ObservationMatrix& obs,
                   std::span<const std::size_t> cols, std::span<const std::size_t> coords,
                   unsigned threads) {
  if (cols.size() != coords.size()) Fail(ErrorCode::kInvalidArgument, "one coordinate per column required");
  ParallelFor(cols.size(), threads, [&](std::size_t t) {
    const CoordinateStep step = CoordinateDeltaR(model, obs, coords[t], cols[t]);
    model.right(coords[t], cols[t]) += step.delta;
  });
}

Factorization InitialFactorization(const ObservationMatrix& obs, const FitConfig& config) {
  config.Validate();
  double scale = config.init_scale;
  if (scale == 0.0) {
    double sum = 0.0;
    for (const Entry& e : obs.entries()) {
      sum += e.kind == EntryKind::kLower ? e.lower : e.kind == EntryKind::kUpper ? e.upper : e.Center();
    }
    const double mean = obs.empty() ? 0.0 : sum / static_cast<double>(obs.size());
    scale = std::sqrt(std::max(mean, 0.0) / static_cast<double>(config.rank));
    if (!(scale > 1e-3)) scale = 1e-3;
  }
  detail::Rng rng(detail::DeriveSeed(config.seed, 0));
  Factorization model;
  model.mu = config.mu;
  const auto m = static_cast<Eigen::Index>(obs.rows());
  const auto n = static_cast<Eigen::Index>(obs.cols());
  const auto r = static_cast<Eigen::Index>(config.rank);
  model.left.resize(m, r);
  model.right.resize(r, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index k = 0; k < r; ++k) model.left(i, k) = rng.Uniform(0.0, scale);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < r; ++k) model.right(k, j) = rng.Uniform(0.0, scale);
  return model;
}

FitResult Fit(const ObservationMatrix& obs, const FitConfig& config, Factorization start) {
  config.Validate();
  if (obs.empty()) Fail(ErrorCode::kInvalidArgument, "cannot fit a matrix without observations");
  start.mu = config.mu;
  CheckShape(start, obs);
  if (start.rank() != config.rank) Fail(ErrorCode::kInvalidArgument, "starting point rank differs from config");
  start.Validate();

  using Clock = std::chrono::steady_clock;
  FitResult result{std::move(start), {}};
  Factorization& model = result.model;
  FitTrace& trace = result.trace;
  trace.initial_objective = ObjectiveImpl(model, obs, config.threads);
  double previous = trace.initial_objective;

  PredictionCache cache(obs);
  std::vector<std::size_t> coords;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const auto t0 = Clock::now();
    detail::Rng rng(detail::DeriveSeed(config.seed, epoch + 1));
    if (epoch % kRefreshEpochs == 0) cache.Refresh(model, config.threads);

    const std::vector<std::size_t> rows = SampleSubset(obs.rows(), config.row_fraction, rng);
    coords.resize(rows.size());
    for (auto& k : coords) k = rng.Below(config.rank);
    ParallelFor(rows.size(), config.threads, [&](std::size_t t) { cache.StepRow(model, rows[t], coords[t]); });

    const std::vector<std::size_t> cols = SampleSubset(obs.cols(), config.column_fraction, rng);
    coords.resize(cols.size());
    for (auto& k : coords) k = rng.Below(config.rank);
    ParallelFor(cols.size(), config.threads, [&](std::size_t t) { cache.StepColumn(model, coords[t], cols[t]); });

    const auto [f, rmse] = cache.Measure(model);
    if (!std::isfinite(f)) {
      Fail(ErrorCode::kNumerical, "objective became non-finite at epoch " + std::to_string(epoch + 1));
    }
    trace.objective.push_back(f);
    trace.rmse.push_back(rmse);
    trace.seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    if (previous - f < config.tolerance * std::max(std::abs(previous), std::numeric_limits<double>::min())) break;
    previous = f;
  }
  return result;
}

FitResult Fit(const ObservationMatrix& obs, const FitConfig& config) {
  return Fit(obs, config, InitialFactorization(obs, config));
}

double Rmse(const Factorization& model, const ObservationMatrix& obs) {
  CheckShape(model, obs);
  if (obs.empty()) Fail(ErrorCode::kInvalidArgument, "RMSE is undefined without observations");
  double sum = 0.0;
  for (const Entry& e : obs.entries()) {
    const double r = EntryResidual(e, model.Predict(e.row, e.col));
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(obs.size()));
}

double DenseRmse(const Factorization& model, const Eigen::MatrixXd& reference) {
  if (static_cast<std::size_t>(reference.rows()) != model.rows() ||
      static_cast<std::size_t>(reference.cols()) != model.cols() || reference.size() == 0) {
    Fail(ErrorCode::kInvalidArgument, "reference matrix shape mismatch");
  }
  const Eigen::MatrixXd diff = model.left * model.right - reference;
  return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

double GradientNorm(const Factorization& model, const ObservationMatrix& obs) {
  CheckShape(model, obs);
  RowMajorMatrix grad_left = model.mu * model.left;
  ColMajorMatrix grad_right = model.mu * model.right;
  for (const Entry& e : obs.entries()) {
    const double g = EntryGradient(e, model.Predict(e.row, e.col));
    grad_left.row(e.row) += g * model.right.col(e.col).transpose();
    grad_right.col(e.col) += g * model.left.row(e.row).transpose();
  }
  return std::sqrt(grad_left.squaredNorm() + grad_right.squaredNorm());
}

void WriteModel(std::ostream& out, const Factorization& model) {
  detail::PutMagic(out, kModelMagic);
  detail::PutU64(out, model.rows());
  detail::PutU64(out, model.cols());
  detail::PutU64(out, model.rank());
  detail::PutF64(out, model.mu);
  for (Eigen::Index i = 0; i < model.left.rows(); ++i)
    for (Eigen::Index k = 0; k < model.left.cols(); ++k) detail::PutF64(out, model.left(i, k));
  for (Eigen::Index k = 0; k < model.right.rows(); ++k)
    for (Eigen::Index j = 0; j < model.right.cols(); ++j) detail::PutF64(out, model.right(k, j));
}

Factorization ReadModel(std::istream& in) {
  detail::ExpectMagic(in, kModelMagic);
  const std::uint64_t m = detail::GetU64(in);
  const std::uint64_t n = detail::GetU64(in);
  const std::uint64_t r = detail::GetU64(in);
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 31;
  if (m >= kLimit || n >= kLimit || r >= kLimit || r == 0) Fail(ErrorCode::kFormat, "implausible model dimensions");
  Factorization model;
  model.mu = detail::GetF64(in);
  model.left.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(r));
  model.right.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < model.left.rows(); ++i)
    for (Eigen::Index k = 0; k < model.left.cols(); ++k) model.left(i, k) = detail::GetF64(in);
  for (Eigen::Index k = 0; k < model.right.rows(); ++k)
    for (Eigen::Index j = 0; j < model.right.cols(); ++j) model.right(k, j) = detail::GetF64(in);
  try {
    model.Validate();
  } catch (const Error& err) {
    Fail(ErrorCode::kFormat, std::string("invalid model container: ") + err.what());
  }
  return model;
}

void SaveModel(const std::string& path, const Factorization& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot open " + path + " for writing");
  WriteModel(out, model);
  if (!out) Fail(ErrorCode::kIo, "write failed: " + path);
}

Factorization LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return ReadModel(in);
}

}  // namespace lrevent
