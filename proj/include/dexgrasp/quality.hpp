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
#include <vector>

#include "dexgrasp/scene_contact.hpp"

namespace dexgrasp {

using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Linearized Coulomb friction cone: coefficient mu, m edge vectors.
struct FrictionModel {
  double mu = 0.5;
  int cone_edges = 8;

  void validate() const;
};

/// Contact wrenches (unit-norm edge forces, torque about the object centroid
/// scaled by rho).
struct WrenchSet {
  std::vector<Vec6> wrenches;
};

struct QualityConfig {
  double contact_tolerance = 0.01;   // m
  double invalid_table_pen = 0.01;   // m; deeper table penetration zeroes Q1
  double invalid_obj_pen = 0.005;    // m; deeper object penetration zeroes Q1
  int q1_directions = 4096;
  double torque_scale = 0.0;         // <= 0 selects 1 / object bounding radius
  std::uint64_t direction_seed = 20240u;

  void validate() const;
};

/// m cone-edge wrenches per contact: unit forces around the inward normal,
/// torque rho * ((x - centroid) x f).
WrenchSet build_wrenches(const ContactSet& contacts, const FrictionModel& friction,
                         const Vec3& centroid, double torque_scale);

/// Support-sampled epsilon quality: the inscribed-ball radius of the wrench
/// hull at the origin, zero when the grasp is invalid (object penetration
/// > 5 mm, table penetration > 1 cm) or the origin is not enclosed.
double q1(const Scene& scene, const HandModel& model, const HandPose& pose,
          const QualityConfig& config = {}, const FrictionModel& friction = {});

/// Same computation on an explicit wrench set (used by tests and by q1).
double q1_from_wrenches(const WrenchSet& wrenches, int directions,
                        std::uint64_t direction_seed);

/// Quasi-static gravity resistance: for each of the six axis-aligned gravity
/// directions there must exist nonnegative cone-edge coefficients whose
/// wrench sum balances gravity (force m*g, zero torque about the centroid).
/// Solved exactly by the in-repo simplex; LP trouble raises
/// IndeterminateError rather than passing.
bool gravity_resistance(const Scene& scene, const HandModel& model,
                        const HandPose& pose, const FrictionModel& friction = {},
                        double mass = 0.1, double contact_tolerance = 0.01);

/// Same verdict on an explicit contact set.
bool gravity_resistance_contacts(const ContactSet& contacts, const Vec3& centroid,
                                 const FrictionModel& friction, double mass);

/// max(0, deepest object-point penetration into the hand).
double penetration_depth(const Scene& scene, const HandModel& model,
                         const HandPose& pose);

/// max(0, how far the hand surface dips below the z = 0 table).
double table_penetration(const HandModel& model, const HandPose& pose);

}  // namespace dexgrasp
