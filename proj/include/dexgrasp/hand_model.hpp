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

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dexgrasp/geom_so3.hpp"

namespace dexgrasp {

/// Collision primitive in a link's local frame. Boxes use half_extents;
/// capsules use radius/half_length with the segment along local z.
struct Primitive {
  enum class Kind { kBox, kCapsule };
  Kind kind = Kind::kCapsule;
  Vec3 half_extents = Vec3::Zero();  // box only
  double radius = 0.0;               // capsule only
  double half_length = 0.0;          // capsule only
  RigidTransform frame;              // primitive frame in the link frame

  double surface_area() const;
  /// Signed distance in the primitive's own frame, negative inside.
  double sdf_local(const Vec3& p) const;
  /// Unit spatial gradient of sdf_local at p.
  Vec3 sdf_gradient_local(const Vec3& p) const;
  /// Uniform surface point in the primitive frame.
  Vec3 sample_local(Rng& rng) const;
  /// Lowest z reached by the primitive surface under a world transform.
  double lowest_z(const RigidTransform& world) const;
};

struct Link {
  std::string name;
  int parent = -1;  // -1 for the root link
  // Joint attaching the link to its parent (unused on the root).
  RigidTransform origin;        // joint frame in the parent link frame
  Vec3 axis = Vec3::UnitZ();    // rotation axis in the joint frame
  double lower = 0.0, upper = 0.0;
  int joint_index = -1;         // index into q; -1 for the root
  std::vector<Primitive> primitives;
};

/// Point fixed to a link, expressed in the link frame.
struct MaterialPoint {
  int link = 0;
  Vec3 local = Vec3::Zero();
};

/// Grasp configuration g = (R, t, q).
struct HandPose {
  RigidTransform root;
  Eigen::VectorXd q;

  static HandPose zeros(int dof) {
    HandPose p;
    p.q = Eigen::VectorXd::Zero(dof);
    return p;
  }
};

struct SdfSample {
  double distance = 0.0;
  Vec3 gradient = Vec3::UnitZ();  // world spatial gradient, unit norm
  int link = -1;                  // link attaining the minimum
};

class HandModel;

/// Per-pose kinematic state: world link transforms plus joint axes/origins,
/// enough to evaluate point Jacobians without re-walking the tree.
struct FkCache {
  const HandModel* model = nullptr;
  Vec3 root_translation = Vec3::Zero();
  std::vector<RigidTransform> link_world;
  std::vector<Vec3> joint_axis_world;    // per link; unused for the root
  std::vector<Vec3> joint_origin_world;  // per link; unused for the root

  /// Adds J(p)^T * dE_dp into grad, where J is the Jacobian of the material
  /// point currently at world position p on `link`, with respect to the
  /// 6+K tangent coordinates (rotation tangent, translation, joints).
  void accumulate_point_gradient(int link, const Vec3& world_point,
                                 const Vec3& dE_dpoint,
                                 Eigen::Ref<Eigen::VectorXd> grad) const;
};

/// Cached world-frame primitives for batched SDF queries at a fixed pose.
struct SdfQuery {
  struct Entry {
    RigidTransform world_to_prim;
    Mat3 prim_to_world_rot;
    Vec3 bounding_center;
    double bounding_radius;
    int link;
    const Primitive* prim;
  };
  std::vector<Entry> entries;
  Vec3 global_center = Vec3::Zero();
  double global_radius = 0.0;

  SdfSample evaluate(const Vec3& p) const;
  /// True when p provably lies outside every primitive (sdf > 0).
  bool definitely_outside(const Vec3& p) const {
    return (p - global_center).squaredNorm() > global_radius * global_radius;
  }
};

/// Articulated hand: a kinematic tree of links with box/capsule collision
/// primitives, 15 keypoints, and fingertip contact candidates.
class HandModel {
 public:
  static HandModel parse(const std::string& descriptor_text);
  static HandModel load(const std::string& path);
  /// The bundled simplified five-finger hand (K = 22, 15 keypoints).
  static const HandModel& bundled();
  /// Descriptor text identical to the file shipped under assets/.
  static const char* bundled_descriptor_text();

  void save(std::ostream& out) const;
  std::string descriptor_text() const;

  const std::string& name() const { return name_; }
  int dof() const { return dof_; }
  int tangent_dim() const { return 6 + dof_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int i) const { return links_[i]; }
  int link_index(const std::string& name) const;
  const std::vector<MaterialPoint>& keypoint_defs() const { return keypoint_defs_; }
  const std::vector<MaterialPoint>& contact_candidate_defs() const {
    return contact_candidates_;
  }
  const Vec3& palm_axis() const { return palm_axis_; }
  Eigen::VectorXd joint_lower() const;
  Eigen::VectorXd joint_upper() const;
  Eigen::VectorXd mid_limit_q() const;

  std::vector<RigidTransform> forward_kinematics(const HandPose& pose) const;
  FkCache fk_cache(const HandPose& pose) const;

  /// The 15 keypoint world positions.
  std::vector<Vec3> keypoints(const HandPose& pose) const;
  std::vector<Vec3> keypoints(const FkCache& cache) const;
  /// Fingertip contact candidate world positions.
  std::vector<Vec3> contact_candidates(const FkCache& cache) const;

  /// Area-weighted material samples across all primitives, pose-independent.
  std::vector<MaterialPoint> material_surface_samples(std::size_t n,
                                                      std::uint64_t seed) const;
  /// n points on the union surface of the posed hand (interior candidates
  /// are rejected and redrawn). Deterministic per seed.
  std::vector<Vec3> sample_surface(const HandPose& pose, std::size_t n,
                                   std::uint64_t seed) const;

  SdfQuery sdf_query(const HandPose& pose) const;
  SdfQuery sdf_query(const FkCache& cache) const;
  /// Batched signed distances to the full hand, negative inside.
  std::vector<double> sdf(const HandPose& pose,
                          const std::vector<Vec3>& points) const;

  /// Lowest z reached by any primitive surface (table clearance).
  double lowest_surface_z(const FkCache& cache) const;

  /// Non-adjacent primitive pairs (parent-child link pairs excluded),
  /// used by the self-penetration energy.
  struct PrimitivePair {
    int link_a, prim_a, link_b, prim_b;
  };
  const std::vector<PrimitivePair>& non_adjacent_primitive_pairs() const {
    return spen_pairs_;
  }

 private:
  void validate_and_finish();

  std::string name_;
  std::vector<Link> links_;
  std::vector<MaterialPoint> keypoint_defs_;
  std::vector<MaterialPoint> contact_candidates_;
  Vec3 palm_axis_ = Vec3::UnitY();
  int dof_ = 0;
  std::vector<PrimitivePair> spen_pairs_;
};

/// Spec-level entry point; reads and validates a descriptor file.
HandModel load_hand(const std::string& descriptor_file);

/// Distance between two primitives under world transforms, with the witness
/// points realizing it. Negative values measure overlap depth along the
/// witness direction. Exact for capsule-capsule; convex 1-D minimization for
/// capsule-box; alternating projections for box-box.
struct PrimitiveDistance {
  double distance;
  Vec3 point_a;    // world witness for A's motion
  Vec3 point_b;    // world witness for B's motion
  Vec3 direction;  // unit direction such that d(dist) = n.(dB(pb) - dA(pa))
};
PrimitiveDistance primitive_distance(const Primitive& a, const RigidTransform& wa,
                                     const Primitive& b, const RigidTransform& wb);

}  // namespace dexgrasp
