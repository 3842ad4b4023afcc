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

#include <string>
#include <vector>

#include "dexgrasp/quality.hpp"
#include "dexgrasp/scene_contact.hpp"

namespace dexgrasp {

struct SynthesisWeights {
  double w_dis = 100.0;
  double w_pen = 100000.0;
  double w_tpen = 50.0;
  double w_joints = 1.0;
  double w_spen = 10.0;
  // Bandwidth (m) of the Gaussian normal blend used for the force-closure
  // proxy contacts. Nearest-point normals would make the energy jump across
  // cloud Voronoi boundaries; the blend keeps it continuous in the pose.
  double fc_normal_bandwidth = 0.01;
};

struct TtaWeights {
  double lambda_cmap = 0.07;
  double lambda_pen = 10000.0;
  double lambda_tpen = 1000.0;
  double lambda_spen = 10.0;
  double step_size = 0.001;
};

struct JointLossWeights {
  double lambda_cmap = 0.02;
  double lambda_pen = 500.0;
  double lambda_tpen = 50.0;
  double lambda_spen = 10.0;
};

/// Energy value, per-term breakdown, and the gradient with respect to the
/// 6+K tangent coordinates: rotation tangent at the current R (left
/// perturbation exp(w) * R), translation, joint angles.
struct EnergyReport {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> terms;
  Eigen::VectorXd gradient;

  double term(const std::string& name) const;
};

/// Value + gradient of a pose-dependent scalar.
struct ScalarGrad {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Force-closure estimator ||G c||^2 on a contact set with torques about
/// `centroid`; c stacks the inward unit normals (the set stores outward
/// ones). Gradients are with respect to the stored points and outward
/// normals. Throws UndefinedEnergyError below two contacts.
struct FcEnergy {
  double value = 0.0;
  std::vector<Vec3> d_points;
  std::vector<Vec3> d_normals;  // w.r.t. the stored outward normals
};
FcEnergy e_fc(const ContactSet& contacts, const Vec3& centroid);

/// Attraction: sum over fingertip contact candidates of the distance to the
/// nearest object point.
ScalarGrad e_dis(const Scene& scene, const HandModel& model, const HandPose& pose);
ScalarGrad e_dis(const Scene& scene, const HandModel& model, const FkCache& cache);

/// Repulsion: sum of squared signed distances over penetrating object points.
ScalarGrad e_pen(const Scene& scene, const HandModel& model, const HandPose& pose);
ScalarGrad e_pen(const Scene& scene, const HandModel& model, const FkCache& cache);

/// Table clearance: sum of max(-z, 0) over the 15 keypoints and the
/// fingertip contact candidates.
ScalarGrad e_tpen(const HandModel& model, const HandPose& pose);
ScalarGrad e_tpen(const HandModel& model, const FkCache& cache);

/// Joint-limit excess: sum of max(q - upper, 0) + max(lower - q, 0).
ScalarGrad e_joints(const HandModel& model, const Eigen::VectorXd& q);

/// Self-penetration: sum over non-adjacent primitive pairs of
/// max(d_thresh - dist, 0)^2. Default clearance threshold 2 mm.
ScalarGrad e_spen(const HandModel& model, const HandPose& pose,
                  double d_thresh = 0.002);
ScalarGrad e_spen(const HandModel& model, const FkCache& cache,
                  double d_thresh = 0.002);

/// MSE between two contact maps; gradient w.r.t. the current map entries.
struct CmapEnergy {
  double value = 0.0;
  std::vector<double> d_current;
};
CmapEnergy e_cmap(const ContactMap& current, const ContactMap& target);

/// E_cmap chained through the contact-heat sigmoid and the hand surface
/// samples into pose coordinates. `hand_samples` is the fixed material
/// sample set whose world positions form the hand cloud. An optional frozen
/// nearest-hand-point assignment pins the (measure-zero) switching structure,
/// which finite-difference oracles need at finite step sizes.
ScalarGrad e_cmap_pose(const Scene& scene, const HandModel& model,
                       const FkCache& cache,
                       const std::vector<MaterialPoint>& hand_samples,
                       const ContactMap& target, double beta = 60.0,
                       const std::vector<int>* frozen_assignment = nullptr);

/// Index of the nearest hand sample per object point at this pose.
std::vector<int> cmap_nearest_assignments(const Scene& scene, const FkCache& cache,
                                          const std::vector<MaterialPoint>& hand_samples);

/// Grasp-synthesis energy
///   E = E_fc + w_dis E_dis + w_pen E_pen + w_tpen E_tpen
///       + w_joints E_joints + w_spen E_spen.
/// E_fc acts on the fingertip contact candidates paired with the outward
/// normal of the nearest object point.
EnergyReport synthesis_energy(const Scene& scene, const HandModel& model,
                              const HandPose& pose, const SynthesisWeights& weights);

/// Test-time adaptation energy: lambda_cmap E_cmap + lambda_pen E_pen +
/// lambda_tpen E_tpen + lambda_spen E_spen against a fixed target map.
EnergyReport tta_energy(const Scene& scene, const HandModel& model,
                        const HandPose& pose, const ContactMap& target_map,
                        const TtaWeights& weights,
                        const std::vector<MaterialPoint>& hand_samples,
                        const std::vector<int>* frozen_cmap_assignment = nullptr);
EnergyReport tta_energy(const Scene& scene, const HandModel& model,
                        const HandPose& pose, const ContactMap& target_map,
                        const TtaWeights& weights = {});

/// The additional training loss: same four terms with the end-to-end
/// training weights.
EnergyReport joint_additional_loss(const Scene& scene, const HandModel& model,
                                   const HandPose& pose, const ContactMap& target_map,
                                   const JointLossWeights& weights = {},
                                   std::size_t hand_cloud_samples = 2048,
                                   std::uint64_t hand_cloud_seed = 0x5EEDu);

/// Default material hand-cloud sample count used when none is supplied.
constexpr std::size_t kDefaultHandCloudSamples = 2048;

/// Applies a tangent step: root rotation left-multiplied by exp(delta_w),
/// translation and joints shifted.
HandPose apply_tangent_step(const HandPose& pose, const Eigen::VectorXd& step);

}  // namespace dexgrasp
