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

#include <iosfwd>
#include <vector>

#include "dexgrasp/hand_model.hpp"

namespace dexgrasp {

/// Diversity and quality summary. Standard deviations use the population
/// (1/n) convention; translation/keypoint values in cm, angles in degrees.
struct MetricReport {
  std::size_t sample_count = 0;
  double q1_mean = 0.0;
  double penetration_mean_cm = 0.0;
  double sigma_r_deg = 0.0;
  double sigma_t_given_r_cm = 0.0;
  double sigma_theta_given_r_deg = 0.0;
  double sigma_keypoints_cm = 0.0;
  bool sigma_applicable = true;  // false for single-sample sets
};

/// (translation std in cm, joint std in degrees) across poses that share one
/// rotation: RMS over dimensions of the per-dimension population std.
/// Throws InvalidInputError when rotations differ.
std::pair<double, double> conditional_std(const std::vector<HandPose>& poses);

/// Mean over the 15 keypoints of the per-keypoint positional std, in cm.
double keypoint_std(const HandModel& model, const std::vector<HandPose>& poses);

/// Mean keypoint position error between two poses, in cm.
double mpe(const HandModel& model, const HandPose& pose_final, const HandPose& goal);

/// Lift success: the object sits within 0.05 m of the point 0.3 m above its
/// initial position.
bool success(const Vec3& object_pos, const Vec3& initial_pos);

/// CSV in Table-style column order (a header row plus one data row).
void write_metric_csv(std::ostream& out, const MetricReport& report);

}  // namespace dexgrasp
