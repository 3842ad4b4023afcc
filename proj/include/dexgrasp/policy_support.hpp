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

#include <vector>

#include "dexgrasp/hand_model.hpp"

namespace dexgrasp {

/// Static reference frame for SO(2) state canonicalization: origin at the
/// initial hand translation (0, 0, h0), orientation a pure yaw.
struct CanonicalFrame {
  double h0 = 0.0;
  double yaw = 0.0;
};

/// Goal-conditioned reward weights and thresholds. The omega values follow
/// the published defaults; the thresholds and per-keypoint weights are
/// artifact-declared (empty w_gj means uniform 1/15).
struct RewardWeights {
  double w_gq = 0.1;
  double w_gt = 0.6;
  double w_gr = 0.1;
  double w_r = 0.5;
  double w_l = 0.1;
  double w_m = 2.0;
  double w_b = 10.0;
  double lambda_f1 = 0.05;
  double lambda_f2 = 0.25;
  double lambda_0 = 0.02;
  std::vector<double> w_gj;
};

/// One rollout step as seen by the reward: world-frame hand and object
/// state, the object-frame goal grasp, and the scaled root-lift action.
struct RolloutState {
  HandPose hand;                         // world frame
  std::vector<Vec3> fingertips;          // 5, world frame
  std::vector<Vec3> keypoints;           // 15, world frame
  Vec3 object_position = Vec3::Zero();   // world frame
  Rotation object_rotation;              // world frame
  HandPose goal;                         // object frame (grasp label)
  std::vector<Vec3> goal_keypoints_obj;  // 15, object frame
  double a_z = 0.0;                      // normalized root-lift action in [-1, 1]
  Vec3 target_position = Vec3::Zero();   // world frame
};

struct RewardBreakdown {
  double total = 0.0;
  double r_goal = 0.0;
  double r_reach = 0.0;
  double r_lift = 0.0;
  double r_move = 0.0;
  int flag = 0;  // lifting-condition count, 0..3
};

/// Builds a RolloutState from the model: fingertips are the five distal
/// keypoints; goal keypoints are computed in the object frame from the goal
/// grasp label.
RolloutState make_rollout_state(const HandModel& model, const HandPose& hand_world,
                                const Vec3& object_position,
                                const Rotation& object_rotation,
                                const HandPose& goal_in_object_frame, double a_z,
                                const Vec3& target_position);

/// Expresses all world-frame quantities in the canonical frame. Object-frame
/// quantities and joint angles are untouched.
RolloutState canonicalize_state(const RolloutState& state, const CanonicalFrame& frame);

/// r = r_goal + r_reach + r_lift + r_move with the published component
/// definitions; components are returned alongside the total.
RewardBreakdown reward(const RolloutState& state, const RewardWeights& weights = {});

/// Rotation distance used by r_goal: acos(0.5 (trace(A B^T) - 1)).
double rotation_loss(const Rotation& a, const Rotation& b);

}  // namespace dexgrasp
