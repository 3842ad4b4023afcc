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

#include "dexgrasp/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/rng.hpp"
#include "dexgrasp/simplex.hpp"

namespace dexgrasp {

namespace {
constexpr double kGravity = 9.81;
}

void FrictionModel::validate() const {
  if (!(mu > 0.0)) throw InvalidInputError("FrictionModel: mu must be positive");
  if (cone_edges < 3) throw InvalidInputError("FrictionModel: need at least 3 cone edges");
}

void QualityConfig::validate() const {
  if (!(contact_tolerance > 0.0) || !(invalid_table_pen > 0.0) ||
      !(invalid_obj_pen > 0.0) || q1_directions < 1) {
    throw InvalidInputError("QualityConfig: all parameters must be positive");
  }
}

namespace {

void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
  Vec3 a = Vec3::UnitX();
  if (std::abs(n.x()) > 0.9) a = Vec3::UnitY();
  t1 = n.cross(a).normalized();
  t2 = n.cross(t1);
}

}  // namespace

WrenchSet build_wrenches(const ContactSet& contacts, const FrictionModel& friction,
                         const Vec3& centroid, double torque_scale) {
  friction.validate();
  if (contacts.size() == 0) {
    throw InvalidInputError("build_wrenches: need at least one contact");
  }
  WrenchSet set;
  set.wrenches.reserve(contacts.size() * friction.cone_edges);
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Vec3 inward = -contacts.normals[i];
    Vec3 t1, t2;
    tangent_basis(inward, t1, t2);
    const Vec3 arm = contacts.points[i] - centroid;
    for (int k = 0; k < friction.cone_edges; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / friction.cone_edges;
      const Vec3 f =
          (inward + friction.mu * (std::cos(theta) * t1 + std::sin(theta) * t2))
              .normalized();
      Vec6 w;
      w.head<3>() = f;
      w.tail<3>() = torque_scale * arm.cross(f);
      set.wrenches.push_back(w);
    }
  }
  return set;
}

namespace {

double support_value(const std::vector<Vec6>& wrenches, const Vec6& d) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec6& w : wrenches) best = std::max(best, d.dot(w));
  return best;
}

// Local minimization of the support function over the unit sphere by
// projected subgradient steps with backtracking. Every iterate's value is a
// valid upper bound on the inscribed radius, so polishing only tightens the
// sampled minimum.
double polish_direction(const std::vector<Vec6>& wrenches, Vec6 d) {
  double h = support_value(wrenches, d);
  for (int iter = 0; iter < 80; ++iter) {
    std::size_t jstar = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < wrenches.size(); ++j) {
      const double v = d.dot(wrenches[j]);
      if (v > best) {
        best = v;
        jstar = j;
      }
    }
    const Vec6 tangent = wrenches[jstar] - best * d;
    if (tangent.norm() < 1e-13) break;
    double step = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 30; ++bt) {
      Vec6 cand = d - step * tangent;
      const double n = cand.norm();
      if (n > 1e-14) {
        cand /= n;
        const double hc = support_value(wrenches, cand);
        if (hc < h - 1e-15) {
          d = cand;
          h = hc;
          improved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return h;
}

}  // namespace

double q1_from_wrenches(const WrenchSet& wrenches, int directions,
                        std::uint64_t direction_seed) {
  if (wrenches.wrenches.empty()) return 0.0;
  Rng rng(direction_seed);
  double radius_probe = std::numeric_limits<double>::infinity();
  {
    // Probe the singular directions of the wrench matrix first: a flat hull
    // (e.g. two contacts sharing an axis) has zero support along its normal,
    // which random directions approach only slowly.
    Eigen::MatrixXd w(6, static_cast<int>(wrenches.wrenches.size()));
    for (std::size_t j = 0; j < wrenches.wrenches.size(); ++j) {
      w.col(static_cast<int>(j)) = wrenches.wrenches[j];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeFullU);
    for (int k = 0; k < 6; ++k) {
      const Vec6 u = svd.matrixU().col(k);
      radius_probe = std::min(radius_probe, support_value(wrenches.wrenches, u));
      radius_probe = std::min(radius_probe, support_value(wrenches.wrenches, Vec6(-u)));
    }
    if (radius_probe <= 1e-12) return 0.0;
  }
  // Raw support sampling, keeping the most promising directions.
  const int keep = std::max(32, directions / 64);
  std::vector<std::pair<double, Vec6>> best_dirs;
  double radius = std::numeric_limits<double>::infinity();
  for (int i = 0; i < directions; ++i) {
    Vec6 d;
    for (int k = 0; k < 6; ++k) d[k] = rng.gaussian();
    const double n = d.norm();
    if (n < 1e-12) continue;
    d /= n;
    const double support = support_value(wrenches.wrenches, d);
    radius = std::min(radius, support);
    if (radius <= 0.0) return 0.0;  // origin outside the sampled hull
    best_dirs.push_back({support, d});
    std::push_heap(best_dirs.begin(), best_dirs.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
    if (static_cast<int>(best_dirs.size()) > keep) {
      std::pop_heap(best_dirs.begin(), best_dirs.end(),
                    [](const auto& a, const auto& b) { return a.first < b.first; });
      best_dirs.pop_back();
    }
  }
  for (const auto& [support, d] : best_dirs) {
    radius = std::min(radius, polish_direction(wrenches.wrenches, d));
    if (radius <= 0.0) return 0.0;
  }
  return std::max(0.0, std::min(radius, radius_probe));
}

double penetration_depth(const Scene& scene, const HandModel& model,
                         const HandPose& pose) {
  scene.validate();
  const SdfQuery q = model.sdf_query(pose);
  double deepest = 0.0;
  for (const Vec3& p : scene.points) {
    deepest = std::min(deepest, q.evaluate(p).distance);
  }
  return -deepest;
}

double table_penetration(const HandModel& model, const HandPose& pose) {
  return std::max(0.0, -model.lowest_surface_z(model.fk_cache(pose)));
}

double q1(const Scene& scene, const HandModel& model, const HandPose& pose,
          const QualityConfig& config, const FrictionModel& friction) {
  config.validate();
  friction.validate();
  if (penetration_depth(scene, model, pose) > config.invalid_obj_pen) return 0.0;
  if (table_penetration(model, pose) > config.invalid_table_pen) return 0.0;
  const ContactSet contacts =
      extract_contacts(scene, model, pose, config.contact_tolerance);
  if (contacts.size() == 0) return 0.0;
  const double rho = config.torque_scale > 0.0 ? config.torque_scale
                                               : 1.0 / scene.bounding_radius();
  const WrenchSet wrenches = build_wrenches(contacts, friction, scene.centroid(), rho);
  return q1_from_wrenches(wrenches, config.q1_directions, config.direction_seed);
}

bool gravity_resistance_contacts(const ContactSet& contacts, const Vec3& centroid,
                                 const FrictionModel& friction, double mass) {
  friction.validate();
  if (contacts.size() == 0) return false;
  // Torque scale 1 is fine here: it only rescales rows whose target is zero.
  const WrenchSet set = build_wrenches(contacts, friction, centroid, 1.0);
  Eigen::MatrixXd A(6, static_cast<int>(set.wrenches.size()));
  for (std::size_t j = 0; j < set.wrenches.size(); ++j) {
    A.col(static_cast<int>(j)) = set.wrenches[j];
  }
  const Vec3 axes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (const Vec3& axis : axes) {
    for (double sign : {1.0, -1.0}) {
      Vec6 b = Vec6::Zero();
      b.head<3>() = -sign * mass * kGravity * axis;  // contacts balance gravity
      if (!lp_equality_feasible(A, b)) return false;
    }
  }
  return true;
}

bool gravity_resistance(const Scene& scene, const HandModel& model,
                        const HandPose& pose, const FrictionModel& friction,
                        double mass, double contact_tolerance) {
  const ContactSet contacts = extract_contacts(scene, model, pose, contact_tolerance);
  return gravity_resistance_contacts(contacts, scene.centroid(), friction, mass);
}

}  // namespace dexgrasp
