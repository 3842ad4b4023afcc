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

#include "dexgrasp/policy_support.hpp"
#include "dexgrasp/rng.hpp"

using namespace dexgrasp;

namespace {

constexpr double kPi = std::numbers::pi;

RolloutState random_state(const HandModel& m, Rng& rng) {
  HandPose hand;
  hand.root = RigidTransform(
      haar_rotation(rng),
      Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.1, 0.4)));
  hand.q = m.mid_limit_q();
  for (int j = 0; j < m.dof(); ++j) hand.q[j] += 0.1 * rng.uniform(-1, 1);

  HandPose goal;
  goal.root = RigidTransform(haar_rotation(rng),
                             0.05 * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()));
  goal.q = m.mid_limit_q();

  const Vec3 obj(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(0.0, 0.1));
  return make_rollout_state(m, hand, obj, haar_rotation(rng), goal,
                            rng.uniform(-1, 1), obj + Vec3(0, 0, 0.3));
}

RolloutState yawed(const RolloutState& s, double phi) {
  const Rotation yaw = Rotation::about_axis(Vec3::UnitZ(), phi);
  RolloutState out = s;
  out.hand.root = RigidTransform(yaw * s.hand.root.rotation,
                                 yaw * s.hand.root.translation);
  for (std::size_t i = 0; i < s.fingertips.size(); ++i) {
    out.fingertips[i] = yaw * s.fingertips[i];
  }
  for (std::size_t i = 0; i < s.keypoints.size(); ++i) {
    out.keypoints[i] = yaw * s.keypoints[i];
  }
  out.object_position = yaw * s.object_position;
  out.object_rotation = yaw * s.object_rotation;
  out.target_position = yaw * s.target_position;
  return out;
}

}  // namespace

TEST_CASE("reward weight defaults match the published table") {
  const RewardWeights w;
  CHECK(w.w_gq == 0.1);
  CHECK(w.w_gt == 0.6);
  CHECK(w.w_gr == 0.1);
  CHECK(w.w_r == 0.5);
  CHECK(w.w_l == 0.1);
  CHECK(w.w_m == 2.0);
  CHECK(w.w_b == 10.0);
  CHECK(w.lambda_f1 == 0.05);
  CHECK(w.lambda_f2 == 0.25);
  CHECK(w.lambda_0 == 0.02);
}

TEST_CASE("r_goal vanishes when the hand sits exactly at the goal") {
  const HandModel& m = HandModel::bundled();
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Rotation obj_rot = haar_rotation(rng);
    const Vec3 obj_pos(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0.05);
    HandPose goal;
    goal.root = RigidTransform(
        haar_rotation(rng), 0.08 * Vec3(rng.gaussian(), rng.gaussian(), rng.gaussian()));
    goal.q = m.mid_limit_q();
    HandPose hand;
    hand.root = RigidTransform(obj_rot * goal.root.rotation,
                               obj_pos + obj_rot * goal.root.translation);
    hand.q = goal.q;
    const RolloutState s = make_rollout_state(m, hand, obj_pos, obj_rot, goal, 0.2,
                                              obj_pos + Vec3(0, 0, 0.3));
    const RewardBreakdown r = reward(s);
    CHECK(std::abs(r.r_goal) < 1e-9);
    CHECK(r.r_reach <= 0.0);
    CHECK(r.r_lift >= 0.0);
    CHECK(r.total == doctest::Approx(r.r_goal + r.r_reach + r.r_lift + r.r_move)
                         .epsilon(1e-12));
  }
}

TEST_CASE("rotation loss equals the geodesic angle") {
  Rng rng(9);
  CHECK(rotation_loss(Rotation::identity(), Rotation::identity()) == 0.0);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = haar_rotation(rng), b = haar_rotation(rng);
    CHECK(rotation_loss(a, b) == doctest::Approx(geodesic_angle(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("full reward is invariant under a common yaw") {
  const HandModel& m = HandModel::bundled();
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const RolloutState s = random_state(m, rng);
    const RewardBreakdown base = reward(s);
    const double phi = rng.uniform(0, 2 * kPi);
    const RewardBreakdown rotated = reward(yawed(s, phi));
    CHECK(std::abs(rotated.total - base.total) < 1e-6);
    CHECK(rotated.flag == base.flag);
  }
}

TEST_CASE("lift flag counts its three conditions") {
  const HandModel& m = HandModel::bundled();
  Rng rng(13);
  RolloutState s = random_state(m, rng);
  RewardWeights w;

  // Force each condition on or off through the thresholds.
  w.lambda_f1 = 1e9;
  w.lambda_f2 = 1e9;
  w.lambda_0 = -1.0;  // d_obj > lambda_0 always true
  RewardBreakdown r = reward(s, w);
  CHECK(r.flag == 3);
  CHECK(r.r_lift == doctest::Approx(w.w_l * (1.0 + s.a_z)).epsilon(1e-12));

  w.lambda_f1 = -1.0;  // first condition now impossible
  r = reward(s, w);
  CHECK(r.flag == 2);
  CHECK(r.r_lift == 0.0);

  w.lambda_f2 = -1.0;
  r = reward(s, w);
  CHECK(r.flag == 1);
}

TEST_CASE("move reward switches its bonus at lambda_0") {
  const HandModel& m = HandModel::bundled();
  Rng rng(15);
  RolloutState s = random_state(m, rng);
  RewardWeights w;
  // Far from the target: pure -w_m * d.
  s.target_position = s.object_position + Vec3(0.5, 0, 0);
  RewardBreakdown r = reward(s, w);
  CHECK(r.r_move == doctest::Approx(-w.w_m * 0.5).epsilon(1e-12));
  // Within lambda_0: bonus 1/(1 + w_b d).
  s.target_position = s.object_position + Vec3(0.01, 0, 0);
  r = reward(s, w);
  CHECK(r.r_move ==
        doctest::Approx(-w.w_m * 0.01 + 1.0 / (1.0 + w.w_b * 0.01)).epsilon(1e-12));
}

TEST_CASE("state canonicalization: identity, equivariance, idempotence") {
  const HandModel& m = HandModel::bundled();
  Rng rng(17);
  const RolloutState s = random_state(m, rng);

  SUBCASE("zero frame is the identity") {
    const RolloutState c = canonicalize_state(s, {0.0, 0.0});
    CHECK((c.hand.root.translation - s.hand.root.translation).norm() < 1e-15);
    CHECK(c.hand.root.rotation.approx_equal(s.hand.root.rotation, 1e-15));
    CHECK((c.object_position - s.object_position).norm() < 1e-15);
  }
  SUBCASE("yawing the world then canonicalizing with that yaw is a no-op") {
    const double phi = rng.uniform(0, 2 * kPi);
    const RolloutState direct = canonicalize_state(s, {0.0, 0.0});
    const RolloutState via = canonicalize_state(yawed(s, phi), {0.0, phi});
    CHECK((via.hand.root.translation - direct.hand.root.translation).norm() < 1e-9);
    CHECK(via.hand.root.rotation.approx_equal(direct.hand.root.rotation, 1e-9));
    CHECK((via.object_position - direct.object_position).norm() < 1e-9);
    for (std::size_t i = 0; i < via.keypoints.size(); ++i) {
      CHECK((via.keypoints[i] - direct.keypoints[i]).norm() < 1e-9);
    }
  }
  SUBCASE("the canonical hand start has Euler (pi/2, 0, 0)") {
    const double phi = rng.uniform(0, 2 * kPi);
    RolloutState init = s;
    init.hand.root = RigidTransform(Rotation::from_euler(kPi / 2, 0, phi),
                                    Vec3(0, 0, 0.22));
    const RolloutState c = canonicalize_state(init, {0.22, phi});
    const Vec3 euler = c.hand.root.rotation.euler();
    CHECK(euler[0] == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(std::abs(euler[1]) < 1e-9);
    CHECK(std::abs(euler[2]) < 1e-9);
    CHECK(c.hand.root.translation.norm() < 1e-12);
  }
  SUBCASE("reward is untouched by canonicalization") {
    const double phi = rng.uniform(0, 2 * kPi);
    const RewardBreakdown a = reward(s);
    const RewardBreakdown b = reward(canonicalize_state(s, {0.1, phi}));
    CHECK(a.total == doctest::Approx(b.total).epsilon(1e-9));
  }
}
