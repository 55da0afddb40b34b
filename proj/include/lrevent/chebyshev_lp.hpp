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

#ifndef LREVENT_CHEBYSHEV_LP_HPP_
#define LREVENT_CHEBYSHEV_LP_HPP_

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace lrevent {

struct ChebyshevFit {
  double distance = 0.0;         // max_i |target_i - c . basis_i| at c = coefficients
  Eigen::VectorXd coefficients;  // length r
  std::size_t pivots = 0;
};

// Minimax fit of `target` (length s) by combinations of the rows of `basis`
// (r x s): minimizes max_i |target_i - (c^T basis)_i| over c in R^r.
//
// Solves the linear program  min t  s.t.  -t <= target_i - (c^T basis)_i <= t
// exactly by a revised simplex method applied to its dual, which has r + 1
// equality rows and 2s bounded columns. Pricing is Dantzig's rule, falling
// back to Bland's rule after a run of degenerate pivots. Throws kNumerical if
// the iteration limit is reached.
ChebyshevFit SolveChebyshev(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                            std::span<const double> target);

}  // namespace lrevent

#endif  // LREVENT_CHEBYSHEV_LP_HPP_
