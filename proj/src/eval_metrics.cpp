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

#include "dexgrasp/eval_metrics.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "dexgrasp/errors.hpp"

namespace dexgrasp {

std::pair<double, double> conditional_std(const std::vector<HandPose>& poses) {
  if (poses.size() < 2) {
    throw InvalidInputError("conditional_std: need at least two poses");
  }
  for (const HandPose& p : poses) {
    if (geodesic_angle(p.root.rotation, poses[0].root.rotation) > 1e-9) {
      throw InvalidInputError("conditional_std: poses do not share one rotation");
    }
  }
  const double n = static_cast<double>(poses.size());

  Vec3 t_mean = Vec3::Zero();
  for (const HandPose& p : poses) t_mean += p.root.translation;
  t_mean /= n;
  Vec3 t_var = Vec3::Zero();
  for (const HandPose& p : poses) {
    t_var += (p.root.translation - t_mean).cwiseAbs2();
  }
  t_var /= n;
  const double sigma_t_cm = std::sqrt(t_var.mean()) * 100.0;

  const Eigen::Index k = poses[0].q.size();
  Eigen::VectorXd q_mean = Eigen::VectorXd::Zero(k);
  for (const HandPose& p : poses) q_mean += p.q;
  q_mean /= n;
  Eigen::VectorXd q_var = Eigen::VectorXd::Zero(k);
  for (const HandPose& p : poses) q_var += (p.q - q_mean).cwiseAbs2();
  q_var /= n;
  const double sigma_q_deg = std::sqrt(q_var.mean()) * 180.0 / std::numbers::pi;

  return {sigma_t_cm, sigma_q_deg};
}

double keypoint_std(const HandModel& model, const std::vector<HandPose>& poses) {
  if (poses.size() < 2) {
    throw InvalidInputError("keypoint_std: need at least two poses");
  }
  std::vector<std::vector<Vec3>> kps;
  kps.reserve(poses.size());
  for (const HandPose& p : poses) kps.push_back(model.keypoints(p));
  const std::size_t nk = kps[0].size();
  const double n = static_cast<double>(poses.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < nk; ++k) {
    Vec3 mean = Vec3::Zero();
    for (const auto& kp : kps) mean += kp[k];
    mean /= n;
    double var = 0.0;
    for (const auto& kp : kps) var += (kp[k] - mean).squaredNorm();
    acc += std::sqrt(var / n);
  }
  return acc / static_cast<double>(nk) * 100.0;
}

double mpe(const HandModel& model, const HandPose& pose_final, const HandPose& goal) {
  const auto a = model.keypoints(pose_final);
  const auto b = model.keypoints(goal);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]).norm();
  return acc / static_cast<double>(a.size()) * 100.0;
}

bool success(const Vec3& object_pos, const Vec3& initial_pos) {
  if (!object_pos.allFinite() || !initial_pos.allFinite()) {
    throw InvalidInputError("success: non-finite position");
  }
  const Vec3 target = initial_pos + Vec3(0, 0, 0.3);
  return (object_pos - target).norm() < 0.05;
}

void write_metric_csv(std::ostream& out, const MetricReport& report) {
  out << "n,q1_mean,obj_pen_cm,sigma_R_deg,sigma_T_given_R_cm,"
         "sigma_theta_given_R_deg,sigma_keypoints_cm,sigma_applicable\n";
  out.precision(12);
  out << report.sample_count << "," << report.q1_mean << ","
      << report.penetration_mean_cm << "," << report.sigma_r_deg << ","
      << report.sigma_t_given_r_cm << "," << report.sigma_theta_given_r_deg << ","
      << report.sigma_keypoints_cm << "," << (report.sigma_applicable ? 1 : 0)
      << "\n";
}

}  // namespace dexgrasp
