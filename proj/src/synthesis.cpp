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

#include "dexgrasp/synthesis.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/rng.hpp"

namespace dexgrasp {

void OptimizerConfig::validate() const {
  if (steps < 1) throw InvalidInputError("OptimizerConfig: steps must be >= 1");
  if (!(step_size > 0.0) || !(rot_step > 0.0) || !(trans_step > 0.0) ||
      !(joint_step > 0.0)) {
    throw InvalidInputError("OptimizerConfig: step sizes must be positive");
  }
}

HandPose init_grasp(const Scene& scene, std::uint64_t rng_seed) {
  scene.validate();
  Rng rng(rng_seed);
  const HandModel& model = HandModel::bundled();
  const Vec3 center = scene.centroid();
  const double top = scene.max_z();

  Vec3 root = Vec3::Zero();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double radius = rng.uniform(0.2, 0.35);
    const double z = rng.uniform();  // upper hemisphere
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
    root = center + radius * dir;
    if (root.z() > top) break;
  }

  // Palm axis toward the object center, random roll about the view axis.
  const Vec3 forward = (center - root).normalized();
  const Vec3 palm = model.palm_axis();
  Rotation align;
  const double c = palm.dot(forward);
  if (c < -1.0 + 1e-12) {
    // Opposite direction: rotate pi about any perpendicular axis.
    Vec3 perp = palm.cross(Vec3::UnitX());
    if (perp.norm() < 1e-6) perp = palm.cross(Vec3::UnitY());
    align = Rotation::about_axis(perp.normalized(), std::numbers::pi);
  } else {
    const Vec3 axis = palm.cross(forward);
    const double angle = std::atan2(axis.norm(), c);
    align = axis.norm() < 1e-12 ? Rotation::identity()
                                : Rotation::about_axis(axis.normalized(), angle);
  }
  const Rotation roll = Rotation::about_axis(forward, rng.uniform(0.0, 2.0 * std::numbers::pi));

  HandPose pose;
  pose.root = RigidTransform(roll * align, root);
  const Eigen::VectorXd lo = model.joint_lower(), hi = model.joint_upper();
  pose.q = model.mid_limit_q();
  for (int j = 0; j < pose.q.size(); ++j) {
    pose.q[j] = std::clamp(pose.q[j] + rng.uniform(-0.05, 0.05), lo[j], hi[j]);
  }
  return pose;
}

namespace {

using EnergyFn = std::function<EnergyReport(const HandPose&)>;

/// Shared descent loop. `block_steps` scales the gradient blocks into a raw
/// step; backtracking halves it until the energy does not increase.
GraspTrajectory descend(const HandPose& start, const EnergyFn& energy,
                        const OptimizerConfig& config,
                        const Eigen::Vector3d& block_scales) {
  config.validate();
  HandPose pose = start;
  if (!pose.root.translation.allFinite() || !pose.q.allFinite() ||
      !pose.root.rotation.matrix().allFinite()) {
    throw DivergedError(0, "optimization diverged at step 0 (non-finite pose)");
  }
  EnergyReport report = energy(pose);
  if (!std::isfinite(report.total)) {
    throw DivergedError(0, "optimization diverged at step 0 (non-finite energy)");
  }
  GraspTrajectory traj;
  traj.energies.reserve(config.steps + 1);
  traj.energies.push_back(report.total);
  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  int stalled = 0;
  // Warm-started backtracking: begin each search near the last accepted
  // scale instead of re-probing from 1.
  double lambda_init = 1.0;

  for (int step = 1; step <= config.steps; ++step) {
    if (stalled >= 2 && !config.langevin) {
      // Line search failed twice at the same point; the remaining steps
      // cannot move either.
      traj.energies.push_back(report.total);
      continue;
    }
    const int k = static_cast<int>(report.gradient.size()) - 6;
    Eigen::VectorXd delta(6 + k);
    delta.segment<3>(0) = -block_scales[0] * report.gradient.segment<3>(0);
    delta.segment<3>(3) = -block_scales[1] * report.gradient.segment<3>(3);
    delta.tail(k) = -block_scales[2] * report.gradient.tail(k);
    if (!delta.allFinite()) {
      throw DivergedError(step, "optimization diverged at step " + std::to_string(step) +
                                    " (non-finite step)");
    }
    auto clamp_block = [](Eigen::Ref<Eigen::VectorXd> seg, double cap) {
      const double n = seg.norm();
      if (n > cap) seg *= cap / n;
    };
    clamp_block(delta.segment<3>(0), config.max_rot_step);
    clamp_block(delta.segment<3>(3), config.max_trans_step);
    clamp_block(delta.tail(k), config.max_joint_step);

    if (config.langevin) {
      const double t = config.langevin_temperature *
                       (1.0 - static_cast<double>(step) / (config.steps + 1.0));
      const double sigma = std::sqrt(2.0 * t);
      for (int i = 0; i < delta.size(); ++i) {
        const double scale = i < 3 ? block_scales[0] : (i < 6 ? block_scales[1] : block_scales[2]);
        delta[i] += sigma * scale * rng.gaussian();
      }
      const HandPose proposal = apply_tangent_step(pose, delta);
      const EnergyReport next = energy(proposal);
      if (!std::isfinite(next.total)) {
        throw DivergedError(step, "optimization diverged at step " + std::to_string(step));
      }
      const double dE = next.total - report.total;
      if (dE <= 0.0 || rng.uniform() < std::exp(-dE / std::max(t, 1e-12))) {
        pose = proposal;
        report = next;
      }
      traj.energies.push_back(report.total);
      continue;
    }

    double lambda = 1.0;
    bool moved = false;
    for (int bt = 0; bt <= (config.line_search ? config.max_backtracks : 0); ++bt) {
      const HandPose proposal = apply_tangent_step(pose, lambda * delta);
      const EnergyReport next = energy(proposal);
      if (!std::isfinite(next.total)) {
        if (!config.line_search) {
          throw DivergedError(step,
                              "optimization diverged at step " + std::to_string(step));
        }
        lambda *= 0.5;
        continue;
      }
      if (next.total <= report.total || !config.line_search) {
        pose = proposal;
        report = next;
        moved = true;
        break;
      }
      lambda *= 0.5;
    }
    stalled = moved ? 0 : stalled + 1;
    traj.energies.push_back(report.total);
  }
  traj.final_pose = pose;
  return traj;
}

}  // namespace

SynthesisResult synthesize(const Scene& scene, const HandModel& model,
                           const SynthesisWeights& weights,
                           const OptimizerConfig& config) {
  scene.validate();
  const HandPose start =
      config.initial_pose ? *config.initial_pose : init_grasp(scene, config.seed);
  const EnergyFn fn = [&](const HandPose& p) {
    return synthesis_energy(scene, model, p, weights);
  };
  SynthesisResult result;
  result.trajectory =
      descend(start, fn, config, {config.rot_step, config.trans_step, config.joint_step});
  result.pose = result.trajectory.final_pose;
  result.seed = config.seed;
  return result;
}

HandPose tta_refine(const Scene& scene, const HandModel& model, const HandPose& pose,
                    const ContactMap& target_map, const TtaWeights& weights,
                    const OptimizerConfig& config) {
  scene.validate();
  if (target_map.heat.size() != scene.points.size()) {
    throw InvalidInputError("tta_refine: target map length != scene point count");
  }
  // The hand cloud is sampled once and held fixed, like the target map.
  const auto hand_samples =
      model.material_surface_samples(kDefaultHandCloudSamples, 0x5EEDu);
  const EnergyFn fn = [&](const HandPose& p) {
    return tta_energy(scene, model, p, target_map, weights, hand_samples);
  };
  OptimizerConfig tta = config;
  const double s = weights.step_size > 0.0 ? weights.step_size : config.step_size;
  return descend(pose, fn, tta, {s, s, s}).final_pose;
}

ValidationResult validate(const Scene& scene, const HandModel& model,
                          const HandPose& pose, const QualityConfig& quality,
                          const FrictionModel& friction, double mass,
                          double max_penetration) {
  ValidationResult r;
  r.penetration_depth = penetration_depth(scene, model, pose);
  r.table_penetration = table_penetration(model, pose);
  r.penetration_ok = r.penetration_depth <= max_penetration;
  r.stable = gravity_resistance(scene, model, pose, friction, mass,
                                quality.contact_tolerance);
  r.passed = r.penetration_ok && r.stable;
  return r;
}

}  // namespace dexgrasp
