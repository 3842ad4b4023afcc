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

#pragma once

#include <Eigen/Dense>

namespace dexgrasp {

/// Phase-1 simplex feasibility test for { x >= 0 : A x = b }. Bland's rule,
/// so it terminates on degenerate problems. Throws IndeterminateError if the
/// iteration cap is hit (never reports a silent pass).
bool lp_equality_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          double tol = 1e-9);

}  // namespace dexgrasp
