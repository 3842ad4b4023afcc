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
#include <string>
#include <vector>

#include "dexgrasp/geom_so3.hpp"
#include "dexgrasp/hand_model.hpp"

namespace dexgrasp {

/// Table-top scene: an object point cloud with outward normals resting on
/// the z = 0 table plane (z >= 0 is free space).
struct Scene {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  RigidTransform object_pose;

  std::size_t size() const { return points.size(); }
  Vec3 centroid() const;
  /// Radius of the bounding sphere about the centroid.
  double bounding_radius() const;
  double max_z() const;

  /// Throws InvalidInputError on an empty cloud, a normal count mismatch, or
  /// non-unit normals.
  void validate() const;
};

/// Per-point contact heat in [0, 1].
struct ContactMap {
  std::vector<double> heat;
};

/// Contact points with object-outward unit normals, the input to wrench
/// analysis.
struct ContactSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // outward
  std::size_t size() const { return points.size(); }
};

/// Left-multiplies every point by R^{-1}.
std::vector<Vec3> canonicalize(const std::vector<Vec3>& points, const Rotation& r);

/// c_i = 2 - 2 sigmoid(beta * D_i) with D_i the distance from object point i
/// to the nearest hand point. Default beta = 60.
ContactMap contact_heat(const std::vector<Vec3>& object_points,
                        const std::vector<Vec3>& hand_points, double beta = 60.0);

/// Object points within `tolerance` of the hand surface (|sdf| <= tolerance),
/// deduplicated to the closest point per hand link. Default tolerance 0.01 m.
ContactSet extract_contacts(const Scene& scene, const HandModel& model,
                            const HandPose& pose, double tolerance = 0.01);

/// Pre-deduplication variant: every object point within tolerance.
ContactSet extract_contacts_all(const Scene& scene, const HandModel& model,
                                const HandPose& pose, double tolerance = 0.01);

/// Outward normals estimated from a local plane fit over the 16 nearest
/// neighbors, oriented away from the cloud centroid.
std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points);

/// ASCII PLY I/O (x y z nx ny nz as double properties).
void write_ply(std::ostream& out, const std::vector<Vec3>& points,
               const std::vector<Vec3>& normals);
void read_ply(std::istream& in, std::vector<Vec3>& points, std::vector<Vec3>& normals);

/// Synthetic scenes resting on the table, for demos and tests. Deterministic
/// per seed; normals are exact.
Scene make_sphere_scene(double radius, std::size_t n, std::uint64_t seed);
Scene make_box_scene(double edge, std::size_t n, std::uint64_t seed);

}  // namespace dexgrasp
