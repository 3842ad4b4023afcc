// Copyright 2026 The dexgrasp Authors
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

#include "dexgrasp/simplex.hpp"

#include <vector>

#include "dexgrasp/errors.hpp"

namespace dexgrasp {

bool lp_equality_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          double tol) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (b.size() != m) throw InvalidInputError("lp_equality_feasible: size mismatch");

  // Tableau [A' | I | b'] with rows flipped so b' >= 0; artificial identity
  // basis; minimize the sum of artificials.
  Eigen::MatrixXd tab(m, n + m + 1);
  for (int i = 0; i < m; ++i) {
    const double s = b[i] < 0.0 ? -1.0 : 1.0;
    tab.row(i).head(n) = s * A.row(i);
    tab.row(i).segment(n, m).setZero();
    tab(i, n + i) = 1.0;
    tab(i, n + m) = s * b[i];
  }
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  // Reduced-cost row for cost c = [0_n, 1_m] with the artificial basis.
  Eigen::RowVectorXd red = Eigen::RowVectorXd::Zero(n + m + 1);
  for (int j = 0; j <= n + m; ++j) {
    const double cj = (j >= n && j < n + m) ? 1.0 : 0.0;
    red[j] = cj - tab.col(j).sum();
  }

  // Columns whose pivot candidates all fall below the pivot tolerance are
  // numerically unusable and get excluded from the entering choice.
  std::vector<bool> unusable(n + m, false);
  constexpr double kPivotTol = 1e-12;
  const long max_iters = 2000L + 50L * (n + m);
  for (long iter = 0; iter < max_iters; ++iter) {
    // Bland: entering column = smallest usable index with negative reduced
    // cost.
    int enter = -1, leave = -1;
    double best_ratio = 0.0;
    for (int j = 0; j < n + m && enter < 0; ++j) {
      if (unusable[j] || red[j] >= -tol) continue;
      // Ratio test, Bland ties by smallest basis index.
      for (int i = 0; i < m; ++i) {
        if (tab(i, j) > kPivotTol) {
          const double ratio = tab(i, n + m) / tab(i, j);
          if (leave < 0 || ratio < best_ratio - 1e-15 ||
              (ratio < best_ratio + 1e-15 && basis[i] < basis[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      }
      if (leave >= 0) {
        enter = j;
      } else {
        // Phase 1 is bounded below by zero, so a column with no positive
        // pivot entry cannot actually improve; skip it.
        unusable[j] = true;
      }
    }
    if (enter < 0) {
      return -red[n + m] <= tol;  // objective value = -red(rhs)
    }
    tab.row(leave) /= tab(leave, enter);
    for (int i = 0; i < m; ++i) {
      if (i != leave && tab(i, enter) != 0.0) {
        tab.row(i) -= tab(i, enter) * tab.row(leave);
      }
    }
    red -= red[enter] * tab.row(leave);
    basis[leave] = enter;
  }
  throw IndeterminateError("lp_equality_feasible: iteration cap exceeded");
}

}  // namespace dexgrasp
