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

#include <cstdint>
#include <optional>

#include "dexgrasp/energies.hpp"

namespace dexgrasp {

struct OptimizerConfig {
  int steps = 6000;
  // Per-block step scales for synthesis (rotation rad, translation m,
  // joints rad per unit gradient).
  double rot_step = 0.05;
  double trans_step = 0.005;
  double joint_step = 0.02;
  // Per-iteration caps on the raw step (L2 per block); large early gradients
  // otherwise waste the whole backtracking budget.
  double max_rot_step = 0.2;
  double max_trans_step = 0.02;
  double max_joint_step = 0.15;
  // Uniform step for TTA refinement.
  double step_size = 0.001;
  // Backtracking line search keeps the trajectory non-increasing.
  bool line_search = true;
  int max_backtracks = 20;
  // Optional Metropolis-adjusted Langevin noise (temperature annealed to 0).
  bool langevin = false;
  double langevin_temperature = 1e-3;
  std::uint64_t seed = 0;
  std::optional<HandPose> initial_pose;

  static OptimizerConfig tta_defaults() {
    OptimizerConfig c;
    c.steps = 300;
    c.step_size = 0.001;
    return c;
  }

  void validate() const;
};

/// Energy totals per step (length steps + 1) plus the final pose.
struct GraspTrajectory {
  std::vector<double> energies;
  HandPose final_pose;
};

struct SynthesisResult {
  HandPose pose;
  GraspTrajectory trajectory;
  std::uint64_t seed = 0;
};

struct ValidationResult {
  bool passed = false;
  bool penetration_ok = false;
  bool stable = false;
  double penetration_depth = 0.0;
  double table_penetration = 0.0;
};

/// Random pre-grasp: root on the upper hemisphere shell 0.2-0.35 m around
/// the object's bounding-sphere center, above the object top, palm axis
/// facing the object center with random roll, joints at mid-limits with
/// small noise. Deterministic per seed.
HandPose init_grasp(const Scene& scene, std::uint64_t rng_seed);

/// Gradient descent on synthesis_energy over (rotation tangent, t, q) with
/// per-block step sizes. Throws DivergedError (with the step index) on a
/// non-finite energy.
SynthesisResult synthesize(const Scene& scene, const HandModel& model,
                           const SynthesisWeights& weights = {},
                           const OptimizerConfig& config = {});

/// 300-step descent on tta_energy from `pose` against a fixed target map.
HandPose tta_refine(const Scene& scene, const HandModel& model, const HandPose& pose,
                    const ContactMap& target_map, const TtaWeights& weights = {},
                    const OptimizerConfig& config = OptimizerConfig::tta_defaults());

/// Dataset filter: penetration <= max_penetration (1 mm) and quasi-static
/// gravity resistance in all six axis-aligned directions.
ValidationResult validate(const Scene& scene, const HandModel& model,
                          const HandPose& pose, const QualityConfig& quality = {},
                          const FrictionModel& friction = {}, double mass = 0.1,
                          double max_penetration = 0.001);

}  // namespace dexgrasp
