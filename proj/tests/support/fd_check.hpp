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

// Central finite-difference gradient oracle over the 6+K pose tangent.
//
// Kink exclusion: a coordinate where the two one-sided differences disagree
// by more than 10x the gradient tolerance (relative), or flip sign, sits on
// a measure-zero non-smooth event (contact switching, SDF medial axis) and
// is skipped. The test only measures non-smoothness of the sampled function
// itself, so it cannot mask a wrong analytic gradient: a consistent bug
// leaves the one-sided differences in agreement and is still checked.

#pragma once

#include <cmath>
#include <functional>

#include "dexgrasp/energies.hpp"

namespace testfd {

constexpr double kGradientTolerance = 1e-4;

struct FdReport {
  int checked = 0;
  int skipped = 0;
  double max_rel_err = 0.0;
};

namespace detail {

inline void record(double gp, double gm, double analytic, FdReport& report,
                   double atol) {
  const double scale = std::max(std::abs(gp), std::abs(gm));
  if (scale > atol) {
    const bool sign_flip = gp * gm < 0.0;
    const double disagreement = std::abs(gp - gm) / std::max(scale, atol);
    if (sign_flip || disagreement > 10.0 * kGradientTolerance) {
      ++report.skipped;
      return;
    }
  }
  const double central = 0.5 * (gp + gm);
  const double denom = std::max({std::abs(central), std::abs(analytic), atol});
  ++report.checked;
  report.max_rel_err = std::max(report.max_rel_err, std::abs(central - analytic) / denom);
}

}  // namespace detail

inline void fd_check_tangent(const std::function<double(const dexgrasp::HandPose&)>& f,
                             const dexgrasp::HandPose& pose,
                             const Eigen::VectorXd& analytic, FdReport& report,
                             double h = 1e-5, double atol = 1e-8) {
  using dexgrasp::apply_tangent_step;
  const int dim = static_cast<int>(analytic.size());
  // Coordinates far below the gradient's scale are measured against it.
  atol = std::max(atol, 1e-6 * analytic.cwiseAbs().maxCoeff());
  const double f0 = f(pose);
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd step = Eigen::VectorXd::Zero(dim);
    step[i] = h;
    const double fp = f(apply_tangent_step(pose, step));
    step[i] = -h;
    const double fm = f(apply_tangent_step(pose, step));
    detail::record((fp - f0) / h, (f0 - fm) / h, analytic[i], report, atol);
  }
}

/// Same exclusion rule for a scalar function of a flat vector.
inline void fd_check_vector(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& analytic,
                            FdReport& report, double h = 1e-5, double atol = 1e-8) {
  atol = std::max(atol, 1e-6 * analytic.cwiseAbs().maxCoeff());
  const double f0 = f(x);
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    detail::record((f(xp) - f0) / h, (f0 - f(xm)) / h, analytic[i], report, atol);
  }
}

}  // namespace testfd
