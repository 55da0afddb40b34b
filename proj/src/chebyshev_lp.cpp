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

#include "lrevent/chebyshev_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lrevent/error.hpp"

namespace lrevent {

namespace {

constexpr double kReducedCostTol = 1e-11;
constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-14;
constexpr std::size_t kRefactorEvery = 50;
constexpr std::size_t kDegenerateRunBeforeBland = 30;

// Dual of the Chebyshev program on normalized data:
//
//   min  sum_i -x_i u_i + x_i w_i
//   s.t. sum_i (u_i - w_i) B_{k,i} = 0       k = 0..r-1  (c is free)
//        sum_i (u_i + w_i) + slack = 1                   (t >= 0)
//        u, w, slack >= 0
//
// Columns 0..s-1 are u, s..2s-1 are w, 2s is the slack and 2s+1+k the
// artificial variable of equality row k. Artificials start basic at zero,
// never enter, and leave on any nonzero pivot entry, so they stay at zero.
// The simplex multipliers pi at optimality give c = -pi[0..r), t = -pi[r].
class DualSimplex {
 public:
  DualSimplex(const Eigen::MatrixXd& basis, const Eigen::VectorXd& target)
      : basis_(basis), target_(target), r_(basis.rows()), s_(basis.cols()), m_(r_ + 1) {}

  Eigen::VectorXd Solve(std::size_t& pivots) {
    head_.resize(static_cast<std::size_t>(m_));
    is_basic_.assign(static_cast<std::size_t>(2 * s_ + 1 + r_), false);
    for (Eigen::Index k = 0; k < r_; ++k) SetHead(k, Artificial(k));
    SetHead(r_, Slack());
    binv_ = Eigen::MatrixXd::Identity(m_, m_);
    xb_ = Eigen::VectorXd::Zero(m_);
    xb_(r_) = 1.0;

    const std::size_t limit = 50 * static_cast<std::size_t>(2 * s_ + m_) + 1000;
    bool bland = false;
    std::size_t degenerate_run = 0;
    Eigen::VectorXd pi(m_), y(m_), column(m_);
    for (pivots = 0;; ++pivots) {
      if (pivots >= limit) Fail(ErrorCode::kNumerical, "Chebyshev LP: simplex iteration limit reached");
      if (pivots > 0 && pivots % kRefactorEvery == 0) Refactor();
      pi = Multipliers();
      const Eigen::Index entering = Price(pi, bland);
      if (entering < 0) break;
      Column(entering, column);
      y.noalias() = binv_ * column;
      const Eigen::Index leave = RatioTest(y, bland);
      if (leave < 0) Fail(ErrorCode::kNumerical, "Chebyshev LP: no admissible pivot (ill-conditioned basis)");
      const double step = std::max(xb_(leave), 0.0) / y(leave);
      Pivot(leave, entering, y, IsArtificial(head_[static_cast<std::size_t>(leave)]) ? 0.0 : step);
      if (step <= kDegenerateStep) {
        if (++degenerate_run >= kDegenerateRunBeforeBland) bland = true;
      } else {
        degenerate_run = 0;
      }
    }
    Refactor();
    return Multipliers();
  }

 private:
  Eigen::Index Slack() const { return 2 * s_; }
  Eigen::Index Artificial(Eigen::Index k) const { return 2 * s_ + 1 + k; }
  bool IsArtificial(Eigen::Index j) const { return j > 2 * s_; }

  void SetHead(Eigen::Index row, Eigen::Index var) {
    head_[static_cast<std::size_t>(row)] = var;
    is_basic_[static_cast<std::size_t>(var)] = true;
  }

  double Cost(Eigen::Index j) const {
    if (j < s_) return -target_(j);
    if (j < 2 * s_) return target_(j - s_);
    return 0.0;
  }

  void Column(Eigen::Index j, Eigen::VectorXd& out) const {
    out.setZero();
    if (j < s_) {
      out.head(r_) = basis_.col(j);
      out(r_) = 1.0;
    } else if (j < 2 * s_) {
      out.head(r_) = -basis_.col(j - s_);
      out(r_) = 1.0;
    } else if (j == Slack()) {
      out(r_) = 1.0;
    } else {
      out(j - Artificial(0)) = 1.0;
    }
  }

  Eigen::VectorXd Multipliers() const {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index p = 0; p < m_; ++p) cb(p) = Cost(head_[static_cast<std::size_t>(p)]);
    return binv_.transpose() * cb;
  }

  // Entering column, or -1 at optimality.
  Eigen::Index Price(const Eigen::VectorXd& pi, bool bland) {
    q_.noalias() = basis_.transpose() * pi.head(r_);
    q_ += target_;
    const double pr = pi(r_);
    Eigen::Index best = -1;
    double best_cost = -kReducedCostTol;
    auto consider = [&](Eigen::Index j, double d) {
      if (d >= best_cost || is_basic_[static_cast<std::size_t>(j)]) return false;
      best = j;
      best_cost = bland ? -kReducedCostTol : d;
      return bland;
    };
    for (Eigen::Index i = 0; i < s_; ++i)
      if (consider(i, -q_(i) - pr)) return best;
    for (Eigen::Index i = 0; i < s_; ++i)
      if (consider(s_ + i, q_(i) - pr)) return best;
    consider(Slack(), -pr);
    return best;
  }

  Eigen::Index RatioTest(const Eigen::VectorXd& y, bool bland) const {
    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index p = 0; p < m_; ++p) {
      const Eigen::Index var = head_[static_cast<std::size_t>(p)];
      double ratio;
      if (IsArtificial(var)) {
        if (std::abs(y(p)) <= kPivotTol) continue;
        ratio = 0.0;
      } else {
        if (y(p) <= kPivotTol) continue;
        ratio = std::max(xb_(p), 0.0) / y(p);
      }
      bool take = false;
      if (leave < 0 || ratio < best_ratio - 1e-12) {
        take = true;
      } else if (ratio <= best_ratio + 1e-12) {
        const Eigen::Index cur = head_[static_cast<std::size_t>(leave)];
        take = bland ? var < cur : std::abs(y(p)) > std::abs(y(leave));
      }
      if (take) {
        leave = p;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    return leave;
  }

  void Pivot(Eigen::Index leave, Eigen::Index entering, const Eigen::VectorXd& y, double step) {
    xb_ -= step * y;
    xb_(leave) = step;
    binv_.row(leave) /= y(leave);
    for (Eigen::Index p = 0; p < m_; ++p) {
      if (p != leave && y(p) != 0.0) binv_.row(p) -= y(p) * binv_.row(leave);
    }
    is_basic_[static_cast<std::size_t>(head_[static_cast<std::size_t>(leave)])] = false;
    SetHead(leave, entering);
  }

  void Refactor() {
    Eigen::MatrixXd b(m_, m_);
    Eigen::VectorXd column(m_);
    for (Eigen::Index p = 0; p < m_; ++p) {
      Column(head_[static_cast<std::size_t>(p)], column);
      b.col(p) = column;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) Fail(ErrorCode::kNumerical, "Chebyshev LP: singular basis");
    xb_ = binv_.col(r_);
    for (Eigen::Index p = 0; p < m_; ++p) {
      if (IsArtificial(head_[static_cast<std::size_t>(p)]) || xb_(p) < 0.0) xb_(p) = 0.0;
    }
  }

  const Eigen::MatrixXd& basis_;
  const Eigen::VectorXd& target_;
  Eigen::Index r_, s_, m_;
  std::vector<Eigen::Index> head_;
  std::vector<bool> is_basic_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd q_;
};

}  // namespace

ChebyshevFit SolveChebyshev(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                            std::span<const double> target) {
  const Eigen::Index r = basis.rows();
  const auto s = static_cast<Eigen::Index>(target.size());
  if (r < 1) Fail(ErrorCode::kInvalidArgument, "Chebyshev LP needs at least one basis row");
  if (s < 1 || basis.cols() != s) Fail(ErrorCode::kInvalidArgument, "Chebyshev LP: basis/target size mismatch");

  Eigen::Map<const Eigen::VectorXd> x(target.data(), s);
  if (!x.allFinite() || !basis.allFinite()) Fail(ErrorCode::kInvalidArgument, "Chebyshev LP: non-finite input");

  ChebyshevFit fit;
  fit.coefficients = Eigen::VectorXd::Zero(r);
  const double x_scale = x.cwiseAbs().maxCoeff();
  if (x_scale == 0.0) return fit;

  // Normalize the target and each basis row to unit max-norm.
  Eigen::VectorXd row_scale(r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const double v = basis.row(k).cwiseAbs().maxCoeff();
    row_scale(k) = v > 0.0 ? v : 1.0;
  }
  const Eigen::MatrixXd scaled_basis = row_scale.cwiseInverse().asDiagonal() * basis;
  const Eigen::VectorXd scaled_target = x / x_scale;

  DualSimplex lp(scaled_basis, scaled_target);
  const Eigen::VectorXd pi = lp.Solve(fit.pivots);
  fit.coefficients = (-pi.head(r)).cwiseQuotient(row_scale) * x_scale;
  if (!fit.coefficients.allFinite()) Fail(ErrorCode::kNumerical, "Chebyshev LP: non-finite solution");
  fit.distance = (x - basis.transpose() * fit.coefficients).cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace lrevent
