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

#include "dexgrasp/policy_support.hpp"

#include <cmath>

#include "dexgrasp/errors.hpp"

namespace dexgrasp {

double rotation_loss(const Rotation& a, const Rotation& b) {
  return geodesic_angle(a, b);
}

RolloutState make_rollout_state(const HandModel& model, const HandPose& hand_world,
                                const Vec3& object_position,
                                const Rotation& object_rotation,
                                const HandPose& goal_in_object_frame, double a_z,
                                const Vec3& target_position) {
  RolloutState s;
  s.hand = hand_world;
  s.keypoints = model.keypoints(hand_world);
  // Fingertips are the distal keypoints (every third of the 15).
  for (std::size_t i = 2; i < s.keypoints.size(); i += 3) {
    s.fingertips.push_back(s.keypoints[i]);
  }
  s.object_position = object_position;
  s.object_rotation = object_rotation;
  s.goal = goal_in_object_frame;
  s.goal_keypoints_obj = model.keypoints(goal_in_object_frame);
  s.a_z = a_z;
  s.target_position = target_position;
  return s;
}

RolloutState canonicalize_state(const RolloutState& state, const CanonicalFrame& frame) {
  const Rotation unyaw = Rotation::about_axis(Vec3::UnitZ(), -frame.yaw);
  const Vec3 origin(0, 0, frame.h0);
  auto map_point = [&](const Vec3& p) { return unyaw * (p - origin); };

  RolloutState out = state;
  out.hand.root =
      RigidTransform(unyaw * state.hand.root.rotation, map_point(state.hand.root.translation));
  for (Vec3& p : out.fingertips) p = map_point(p);
  for (Vec3& p : out.keypoints) p = map_point(p);
  out.object_position = map_point(state.object_position);
  out.object_rotation = unyaw * state.object_rotation;
  out.target_position = map_point(state.target_position);
  return out;
}

RewardBreakdown reward(const RolloutState& state, const RewardWeights& weights) {
  const std::size_t nk = state.keypoints.size();
  if (state.goal_keypoints_obj.size() != nk) {
    throw InvalidInputError("reward: keypoint/goal keypoint count mismatch");
  }
  if (state.goal.q.size() != state.hand.q.size()) {
    throw InvalidInputError("reward: joint vector size mismatch with goal");
  }
  std::vector<double> w_gj = weights.w_gj;
  if (w_gj.empty()) w_gj.assign(nk, 1.0 / static_cast<double>(nk));
  if (w_gj.size() != nk) {
    throw InvalidInputError("reward: per-keypoint weight count mismatch");
  }

  const Rotation obj_inv = state.object_rotation.inverse();

  // Hand root expressed in the object frame, compared to the goal label.
  const Vec3 t_h_obj = obj_inv * (state.hand.root.translation - state.object_position);
  const Rotation r_h_obj = obj_inv * state.hand.root.rotation;
  const double q_term = (state.hand.q - state.goal.q).cwiseAbs().sum();
  const double t_term = (t_h_obj - state.goal.root.translation).norm();
  const double rot_term = rotation_loss(r_h_obj, state.goal.root.rotation);
  RewardBreakdown r;
  r.r_goal = -weights.w_gq * q_term - weights.w_gt * t_term - weights.w_gr * rot_term;

  double reach_sum = 0.0;
  for (const Vec3& f : state.fingertips) {
    reach_sum += (f - state.object_position).norm();
  }
  r.r_reach = -weights.w_r * reach_sum;

  double keypoint_sum = 0.0;
  for (std::size_t j = 0; j < nk; ++j) {
    const Vec3 kp_obj = obj_inv * (state.keypoints[j] - state.object_position);
    keypoint_sum += w_gj[j] * (kp_obj - state.goal_keypoints_obj[j]).norm();
  }
  const double d_obj = (state.object_position - state.target_position).norm();
  r.flag = (keypoint_sum < weights.lambda_f1 ? 1 : 0) +
           (reach_sum < weights.lambda_f2 ? 1 : 0) + (d_obj > weights.lambda_0 ? 1 : 0);
  r.r_lift = r.flag == 3 ? weights.w_l * (1.0 + state.a_z) : 0.0;

  r.r_move = -weights.w_m * d_obj;
  if (d_obj < weights.lambda_0) r.r_move += 1.0 / (1.0 + weights.w_b * d_obj);

  r.total = r.r_goal + r.r_reach + r.r_lift + r.r_move;
  return r;
}

}  // namespace dexgrasp
