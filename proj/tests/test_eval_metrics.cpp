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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/eval_metrics.hpp"
#include "dexgrasp/rng.hpp"

using namespace dexgrasp;

namespace {

HandPose base_pose(const HandModel& m) {
  HandPose p = HandPose::zeros(m.dof());
  p.root.translation = Vec3(0, 0, 0.2);
  return p;
}

}  // namespace

TEST_CASE("conditional std: zeros, closed form, offset invariance") {
  const HandModel& m = HandModel::bundled();
  const HandPose a = base_pose(m);

  SUBCASE("identical poses have zero spread") {
    const auto [st, sq] = conditional_std({a, a, a});
    CHECK(st <= 1e-12);
    CHECK(sq <= 1e-12);
  }
  SUBCASE("two poses 2 cm apart in x alone") {
    HandPose b = a;
    b.root.translation.x() += 0.02;
    const auto [st, sq] = conditional_std({a, b});
    // Population std in x is 1 cm; RMS over the three dimensions.
    CHECK(st == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
    CHECK(sq <= 1e-12);
  }
  SUBCASE("joint spread in degrees") {
    HandPose b = a;
    b.q[3] += 0.2;  // radians
    const auto [st, sq] = conditional_std({a, b});
    CHECK(st <= 1e-12);
    const double expected =
        std::sqrt(0.01 / m.dof()) * 180.0 / std::numbers::pi;  // std 0.1 rad in one dim
    CHECK(sq == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("a common translation offset changes nothing") {
    HandPose b = a;
    b.root.translation.x() += 0.02;
    const auto [st1, sq1] = conditional_std({a, b});
    HandPose a2 = a, b2 = b;
    a2.root.translation += Vec3(0.5, -0.3, 0.1);
    b2.root.translation += Vec3(0.5, -0.3, 0.1);
    const auto [st2, sq2] = conditional_std({a2, b2});
    CHECK(st1 == doctest::Approx(st2).epsilon(1e-12));
    CHECK(sq1 == doctest::Approx(sq2).epsilon(1e-12));
  }
  SUBCASE("mixed rotations are rejected") {
    HandPose b = a;
    b.root.rotation = Rotation::about_axis(Vec3::UnitZ(), 0.3);
    CHECK_THROWS_AS(conditional_std({a, b}), InvalidInputError);
    CHECK_THROWS_AS(conditional_std({a}), InvalidInputError);
  }
}

TEST_CASE("keypoint std: zero case, shift invariance, brute oracle") {
  const HandModel& m = HandModel::bundled();
  const HandPose a = base_pose(m);
  CHECK(keypoint_std(m, {a, a}) == 0.0);

  Rng rng(3);
  std::vector<HandPose> poses;
  for (int i = 0; i < 4; ++i) {
    HandPose p = a;
    p.root.translation += 0.02 * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian());
    p.q = m.mid_limit_q();
    for (int j = 0; j < m.dof(); ++j) p.q[j] += 0.1 * rng.uniform(-1, 1);
    poses.push_back(p);
  }
  const double got = keypoint_std(m, poses);

  // Brute per-keypoint recomputation.
  std::vector<std::vector<Vec3>> kps;
  for (const HandPose& p : poses) kps.push_back(m.keypoints(p));
  double acc = 0.0;
  for (int k = 0; k < 15; ++k) {
    Vec3 mean = Vec3::Zero();
    for (const auto& kp : kps) mean += kp[k];
    mean /= 4.0;
    double var = 0.0;
    for (const auto& kp : kps) var += (kp[k] - mean).squaredNorm();
    acc += std::sqrt(var / 4.0);
  }
  CHECK(got == doctest::Approx(acc / 15.0 * 100.0).epsilon(1e-12));

  // A shift applied identically to every pose leaves the spread unchanged.
  std::vector<HandPose> shifted = poses;
  for (HandPose& p : shifted) p.root.translation += Vec3(1, 2, 3);
  CHECK(keypoint_std(m, shifted) == doctest::Approx(got).epsilon(1e-9));
}

TEST_CASE("mpe: zero at goal, rigid shifts, symmetry, brute oracle") {
  const HandModel& m = HandModel::bundled();
  const HandPose a = base_pose(m);
  CHECK(mpe(m, a, a) == 0.0);

  HandPose shifted = a;
  shifted.root.translation += Vec3(0, 0.03, 0);
  CHECK(mpe(m, a, shifted) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(mpe(m, shifted, a) == doctest::Approx(mpe(m, a, shifted)).epsilon(1e-12));

  Rng rng(5);
  HandPose b = a;
  b.q = m.mid_limit_q();
  const auto ka = m.keypoints(a), kb = m.keypoints(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < ka.size(); ++i) acc += (ka[i] - kb[i]).norm();
  CHECK(mpe(m, a, b) == doctest::Approx(acc / 15.0 * 100.0).epsilon(1e-12));
}

TEST_CASE("success threshold at 0.05 m around the +0.3 m lift target") {
  const Vec3 init(0.1, 0.2, 0.0);
  const Vec3 target = init + Vec3(0, 0, 0.3);
  CHECK(success(target, init));
  CHECK(success(target + Vec3(0.04, 0, 0), init));
  CHECK_FALSE(success(target + Vec3(0.06, 0, 0), init));
  CHECK(success(target + Vec3(0, 0, -0.04), init));
  CHECK_FALSE(success(target + Vec3(0, 0, 0.06), init));
  CHECK(success(target - Vec3(0.04, 0, 0), init) ==
        success(target + Vec3(0.04, 0, 0), init));
  CHECK_THROWS_AS(success(Vec3(std::nan(""), 0, 0), init), InvalidInputError);
}

TEST_CASE("metric csv emits the table column order") {
  MetricReport r;
  r.sample_count = 3;
  r.q1_mean = 0.05;
  r.sigma_r_deg = 12.5;
  std::stringstream out;
  write_metric_csv(out, r);
  std::string header;
  std::getline(out, header);
  CHECK(header ==
        "n,q1_mean,obj_pen_cm,sigma_R_deg,sigma_T_given_R_cm,"
        "sigma_theta_given_R_deg,sigma_keypoints_cm,sigma_applicable");
  std::string row;
  std::getline(out, row);
  CHECK(row.rfind("3,0.05,", 0) == 0);
}
