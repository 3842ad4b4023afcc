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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dexgrasp/policy_support.hpp"
#include "dexgrasp/synthesis.hpp"

namespace dexgrasp {

/// Scale factors used by the dataset records; other values are rejected in
/// strict mode.
inline const std::vector<double>& allowed_scales() {
  static const std::vector<double> scales = {0.06, 0.08, 0.10, 0.12, 0.15};
  return scales;
}

/// One dataset unit: object, scale, poses, optional metrics, provenance.
struct GraspRecord {
  std::string object_id;
  double scale = 0.10;
  RigidTransform object_pose;
  HandPose hand_pose;
  std::optional<nlohmann::json> metrics;
  std::uint64_t seed = 0;
  std::string config_hash;

  nlohmann::json to_json() const;
  static GraspRecord from_json(const nlohmann::json& j);
};

/// JSON-lines record I/O. Malformed lines raise ParseError naming the line;
/// an empty file reads as an empty list. Strict mode enforces the scale set.
std::vector<GraspRecord> read_records(const std::string& path, bool strict = true);
void write_records(const std::string& path, const std::vector<GraspRecord>& records,
                   bool strict = true);

/// Every module default in one versioned file. Unknown keys are rejected.
struct RunConfig {
  SynthesisWeights synthesis_weights;
  TtaWeights tta_weights;
  JointLossWeights joint_loss_weights;
  OptimizerConfig optimizer;                       // synthesis loop
  OptimizerConfig tta_optimizer = OptimizerConfig::tta_defaults();
  QualityConfig quality;
  FrictionModel friction;
  RewardWeights reward;
  double validation_max_penetration = 0.001;
  double validation_mass = 0.1;
  std::size_t hand_cloud_samples = 2048;
  bool strict_scales = true;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  /// FNV-1a hash of the canonical serialization, as 16 hex digits.
  std::string hash() const;
};

/// A scene plus its record bookkeeping (sidecar contents).
struct SceneBundle {
  Scene scene;
  std::string object_id;
  double scale = 0.10;
};

/// Loads either a builtin spec ("sphere:r=0.04,n=512,seed=1" or
/// "box:edge=0.08,n=512,seed=1") or an ASCII PLY path with an optional
/// "<path>.json" sidecar carrying object_id, scale, and object_pose.
SceneBundle load_scene(const std::string& spec);
void save_scene(const std::string& path, const SceneBundle& bundle);

/// Target contact-map file ({"v":1,"heat":[...]}).
ContactMap read_target_map(const std::string& path);
void write_target_map(const std::string& path, const ContactMap& map);

/// Parses one RolloutState from a JSON object. When fingertips/keypoints or
/// goal keypoints are absent they are filled from the model via FK.
RolloutState rollout_state_from_json(const nlohmann::json& j, const HandModel& model);

/// Runs fn(0..jobs-1) across a worker pool. DEXGRASP_WORKERS overrides the
/// worker count. Results ordering is the caller's responsibility (index the
/// output by job).
void run_parallel(std::size_t jobs, const std::function<void(std::size_t)>& fn);
std::size_t worker_count();

}  // namespace dexgrasp
