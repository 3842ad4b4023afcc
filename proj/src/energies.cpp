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

#include "dexgrasp/energies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dexgrasp/errors.hpp"

namespace dexgrasp {

double EnergyReport::term(const std::string& name) const {
  for (const auto& [k, v] : terms) {
    if (k == name) return v;
  }
  throw InvalidInputError("EnergyReport: no term named '" + name + "'");
}

HandPose apply_tangent_step(const HandPose& pose, const Eigen::VectorXd& step) {
  HandPose out;
  out.root.rotation = Rotation::exp(step.segment<3>(0)) * pose.root.rotation;
  out.root.translation = pose.root.translation + step.segment<3>(3);
  out.q = pose.q + step.tail(step.size() - 6);
  return out;
}

FcEnergy e_fc(const ContactSet& contacts, const Vec3& centroid) {
  if (contacts.size() < 2) {
    throw UndefinedEnergyError("e_fc: needs at least two contacts");
  }
  const std::size_t m = contacts.size();
  // c_i = inward normal = -outward normal.
  Vec3 force = Vec3::Zero(), torque = Vec3::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 c = -contacts.normals[i];
    force += c;
    torque += (contacts.points[i] - centroid).cross(c);
  }
  FcEnergy out;
  out.value = force.squaredNorm() + torque.squaredNorm();
  out.d_points.resize(m);
  out.d_normals.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 c = -contacts.normals[i];
    const Vec3 arm = contacts.points[i] - centroid;
    // d/dx ||T||^2 with T = sum arm_i x c_i:  2 c_i x T.
    out.d_points[i] = 2.0 * c.cross(torque);
    // d/dc then flipped to the stored outward normal (c = -n).
    const Vec3 d_c = 2.0 * force - 2.0 * arm.cross(torque);
    out.d_normals[i] = -d_c;
  }
  return out;
}

ScalarGrad e_dis(const Scene& scene, const HandModel& model, const FkCache& cache) {
  scene.validate();
  ScalarGrad out;
  out.gradient = Eigen::VectorXd::Zero(model.tangent_dim());
  const auto& defs = model.contact_candidate_defs();
  for (const MaterialPoint& def : defs) {
    const Vec3 x = cache.link_world[def.link] * def.local;
    double best = std::numeric_limits<double>::infinity();
    Vec3 nearest = Vec3::Zero();
    for (const Vec3& p : scene.points) {
      const double d2 = (x - p).squaredNorm();
      if (d2 < best) {
        best = d2;
        nearest = p;
      }
    }
    const double d = std::sqrt(best);
    out.value += d;
    if (d > 1e-12) {
      cache.accumulate_point_gradient(def.link, x, (x - nearest) / d, out.gradient);
    }
  }
  return out;
}

ScalarGrad e_pen(const Scene& scene, const HandModel& model, const FkCache& cache) {
  scene.validate();
  ScalarGrad out;
  out.gradient = Eigen::VectorXd::Zero(model.tangent_dim());
  const SdfQuery query = model.sdf_query(cache);
  for (const Vec3& p : scene.points) {
    if (query.definitely_outside(p)) continue;
    const SdfSample s = query.evaluate(p);
    if (s.distance < 0.0) {
      out.value += s.distance * s.distance;
      // dE/d(pose) = 2 sdf * d(sdf)/d(pose); the sdf falls at the rate the
      // hand material point at p moves along the spatial gradient.
      cache.accumulate_point_gradient(s.link, p, -2.0 * s.distance * s.gradient,
                                      out.gradient);
    }
  }
  return out;
}

ScalarGrad e_tpen(const HandModel& model, const FkCache& cache) {
  ScalarGrad out;
  out.gradient = Eigen::VectorXd::Zero(model.tangent_dim());
  auto add_point = [&](const MaterialPoint& def) {
    const Vec3 x = cache.link_world[def.link] * def.local;
    if (x.z() < 0.0) {
      out.value += -x.z();
      cache.accumulate_point_gradient(def.link, x, Vec3(0, 0, -1), out.gradient);
    }
  };
  for (const MaterialPoint& k : model.keypoint_defs()) add_point(k);
  for (const MaterialPoint& c : model.contact_candidate_defs()) add_point(c);
  return out;
}

ScalarGrad e_joints(const HandModel& model, const Eigen::VectorXd& q) {
  if (q.size() != model.dof()) {
    throw InvalidInputError("e_joints: joint vector size mismatch");
  }
  ScalarGrad out;
  out.gradient = Eigen::VectorXd::Zero(model.tangent_dim());
  const Eigen::VectorXd lo = model.joint_lower(), hi = model.joint_upper();
  for (int j = 0; j < model.dof(); ++j) {
    if (q[j] > hi[j]) {
      out.value += q[j] - hi[j];
      out.gradient[6 + j] += 1.0;
    } else if (q[j] < lo[j]) {
      out.value += lo[j] - q[j];
      out.gradient[6 + j] -= 1.0;
    }
  }
  return out;
}

ScalarGrad e_spen(const HandModel& model, const FkCache& cache, double d_thresh) {
  ScalarGrad out;
  out.gradient = Eigen::VectorXd::Zero(model.tangent_dim());
  for (const auto& pair : model.non_adjacent_primitive_pairs()) {
    const Link& la = model.link(pair.link_a);
    const Link& lb = model.link(pair.link_b);
    const PrimitiveDistance pd =
        primitive_distance(la.primitives[pair.prim_a], cache.link_world[pair.link_a],
                           lb.primitives[pair.prim_b], cache.link_world[pair.link_b]);
    if (pd.distance < d_thresh) {
      const double gap = d_thresh - pd.distance;
      out.value += gap * gap;
      // Zero direction marks a saturated overlap plateau with no gradient.
      if (pd.direction.squaredNorm() > 0.25) {
        const double dE_dd = -2.0 * gap;
        // d(dist) = n . (motion of B at pb - motion of A at pa).
        cache.accumulate_point_gradient(pair.link_b, pd.point_b, dE_dd * pd.direction,
                                        out.gradient);
        cache.accumulate_point_gradient(pair.link_a, pd.point_a, -dE_dd * pd.direction,
                                        out.gradient);
      }
    }
  }
  return out;
}

CmapEnergy e_cmap(const ContactMap& current, const ContactMap& target) {
  if (current.heat.size() != target.heat.size()) {
    throw InvalidInputError("e_cmap: contact map length mismatch");
  }
  const std::size_t n = current.heat.size();
  if (n == 0) throw InvalidInputError("e_cmap: empty contact maps");
  CmapEnergy out;
  out.d_current.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = current.heat[i] - target.heat[i];
    out.value += diff * diff;
    out.d_current[i] = 2.0 * diff / static_cast<double>(n);
  }
  out.value /= static_cast<double>(n);
  return out;
}

std::vector<int> cmap_nearest_assignments(const Scene& scene, const FkCache& cache,
                                          const std::vector<MaterialPoint>& hand_samples) {
  std::vector<Vec3> hand_world(hand_samples.size());
  for (std::size_t j = 0; j < hand_samples.size(); ++j) {
    hand_world[j] = cache.link_world[hand_samples[j].link] * hand_samples[j].local;
  }
  std::vector<int> assignment(scene.points.size(), 0);
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < hand_world.size(); ++j) {
      const double d2 = (scene.points[i] - hand_world[j]).squaredNorm();
      if (d2 < best) {
        best = d2;
        assignment[i] = static_cast<int>(j);
      }
    }
  }
  return assignment;
}

ScalarGrad e_cmap_pose(const Scene& scene, const HandModel& model,
                       const FkCache& cache,
                       const std::vector<MaterialPoint>& hand_samples,
                       const ContactMap& target, double beta,
                       const std::vector<int>* frozen_assignment) {
  scene.validate();
  if (target.heat.size() != scene.points.size()) {
    throw InvalidInputError("e_cmap_pose: target map length != scene size");
  }
  if (hand_samples.empty()) throw InvalidInputError("e_cmap_pose: empty hand cloud");
  if (frozen_assignment && frozen_assignment->size() != scene.points.size()) {
    throw InvalidInputError("e_cmap_pose: frozen assignment length != scene size");
  }
  const std::size_t n = scene.points.size();
  std::vector<Vec3> hand_world(hand_samples.size());
  for (std::size_t j = 0; j < hand_samples.size(); ++j) {
    hand_world[j] = cache.link_world[hand_samples[j].link] * hand_samples[j].local;
  }
  ScalarGrad out;
  out.gradient = Eigen::VectorXd::Zero(model.tangent_dim());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = scene.points[i];
    std::size_t jstar = 0;
    if (frozen_assignment) {
      jstar = static_cast<std::size_t>((*frozen_assignment)[i]);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < hand_world.size(); ++j) {
        const double d2 = (p - hand_world[j]).squaredNorm();
        if (d2 < best) {
          best = d2;
          jstar = j;
        }
      }
    }
    const double d = (p - hand_world[jstar]).norm();
    const double sig = 1.0 / (1.0 + std::exp(-beta * d));
    const double heat = 2.0 - 2.0 * sig;
    const double diff = heat - target.heat[i];
    out.value += diff * diff / static_cast<double>(n);
    if (d > 1e-12) {
      const double dE_dheat = 2.0 * diff / static_cast<double>(n);
      const double dheat_dd = -2.0 * beta * sig * (1.0 - sig);
      const Vec3 dd_dh = (hand_world[jstar] - p) / d;
      cache.accumulate_point_gradient(hand_samples[jstar].link, hand_world[jstar],
                                      dE_dheat * dheat_dd * dd_dh, out.gradient);
    }
  }
  return out;
}

namespace {

/// Smoothly blended outward object normal at x: Gaussian-weighted average of
/// the cloud normals. Returns false when the blend cancels (deep interior
/// symmetry), in which case the caller treats the normal as frozen.
struct BlendedNormal {
  Vec3 normal = Vec3::UnitZ();
  Mat3 d_normal_dx = Mat3::Zero();
  bool smooth = false;
};

BlendedNormal blended_object_normal(const Scene& scene, const Vec3& x, double bandwidth) {
  double min_d2 = std::numeric_limits<double>::infinity();
  for (const Vec3& p : scene.points) min_d2 = std::min(min_d2, (x - p).squaredNorm());
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  // Weights below exp(-40) cannot move the blend at double precision.
  const double cutoff = min_d2 + 40.0 / inv_two_h2;
  Vec3 u = Vec3::Zero();
  Mat3 s = Mat3::Zero();  // sum a_j n_j (x - p_j)^T
  for (std::size_t j = 0; j < scene.points.size(); ++j) {
    const Vec3 d = x - scene.points[j];
    const double d2 = d.squaredNorm();
    if (d2 > cutoff) continue;
    const double a = std::exp(-(d2 - min_d2) * inv_two_h2);
    u += a * scene.normals[j];
    s += a * scene.normals[j] * d.transpose();
  }
  BlendedNormal out;
  const double norm = u.norm();
  if (norm < 1e-10) {
    // Degenerate cancellation: fall back to the nearest normal, no chain.
    std::size_t istar = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scene.points.size(); ++j) {
      const double d2 = (x - scene.points[j]).squaredNorm();
      if (d2 < best) {
        best = d2;
        istar = j;
      }
    }
    out.normal = scene.normals[istar];
    return out;
  }
  out.normal = u / norm;
  const Mat3 projector = Mat3::Identity() - out.normal * out.normal.transpose();
  out.d_normal_dx = -projector * s * (2.0 * inv_two_h2) / norm;
  out.smooth = true;
  return out;
}

}  // namespace

EnergyReport synthesis_energy(const Scene& scene, const HandModel& model,
                              const HandPose& pose, const SynthesisWeights& weights) {
  scene.validate();
  const FkCache cache = model.fk_cache(pose);
  const Vec3 centroid = scene.centroid();

  // Force-closure proxy contacts: fingertip candidates paired with smoothly
  // blended outward object normals.
  ContactSet proxies;
  const auto& defs = model.contact_candidate_defs();
  std::vector<BlendedNormal> blends;
  proxies.points.reserve(defs.size());
  proxies.normals.reserve(defs.size());
  blends.reserve(defs.size());
  for (const MaterialPoint& def : defs) {
    const Vec3 x = cache.link_world[def.link] * def.local;
    blends.push_back(blended_object_normal(scene, x, weights.fc_normal_bandwidth));
    proxies.points.push_back(x);
    proxies.normals.push_back(blends.back().normal);
  }
  const FcEnergy fc = e_fc(proxies, centroid);
  const ScalarGrad dis = e_dis(scene, model, cache);
  const ScalarGrad pen = e_pen(scene, model, cache);
  const ScalarGrad tpen = e_tpen(model, cache);
  const ScalarGrad joints = e_joints(model, pose.q);
  const ScalarGrad spen = e_spen(model, cache);

  EnergyReport report;
  report.gradient = Eigen::VectorXd::Zero(model.tangent_dim());
  for (std::size_t i = 0; i < defs.size(); ++i) {
    Vec3 d_point = fc.d_points[i];
    if (blends[i].smooth) {
      // Chain through the normal blend's dependence on the candidate position.
      d_point += blends[i].d_normal_dx.transpose() * fc.d_normals[i];
    }
    cache.accumulate_point_gradient(defs[i].link, proxies.points[i], d_point,
                                    report.gradient);
  }
  report.gradient += weights.w_dis * dis.gradient + weights.w_pen * pen.gradient +
                     weights.w_tpen * tpen.gradient + weights.w_joints * joints.gradient +
                     weights.w_spen * spen.gradient;
  report.terms = {{"fc", fc.value},     {"dis", dis.value},
                  {"pen", pen.value},   {"tpen", tpen.value},
                  {"joints", joints.value}, {"spen", spen.value}};
  report.total = fc.value + weights.w_dis * dis.value + weights.w_pen * pen.value +
                 weights.w_tpen * tpen.value + weights.w_joints * joints.value +
                 weights.w_spen * spen.value;
  return report;
}

EnergyReport tta_energy(const Scene& scene, const HandModel& model,
                        const HandPose& pose, const ContactMap& target_map,
                        const TtaWeights& weights,
                        const std::vector<MaterialPoint>& hand_samples,
                        const std::vector<int>* frozen_cmap_assignment) {
  const FkCache cache = model.fk_cache(pose);
  const ScalarGrad cmap = e_cmap_pose(scene, model, cache, hand_samples, target_map,
                                      60.0, frozen_cmap_assignment);
  const ScalarGrad pen = e_pen(scene, model, cache);
  const ScalarGrad tpen = e_tpen(model, cache);
  const ScalarGrad spen = e_spen(model, cache);

  EnergyReport report;
  report.terms = {{"cmap", cmap.value},
                  {"pen", pen.value},
                  {"tpen", tpen.value},
                  {"spen", spen.value}};
  report.total = weights.lambda_cmap * cmap.value + weights.lambda_pen * pen.value +
                 weights.lambda_tpen * tpen.value + weights.lambda_spen * spen.value;
  report.gradient = weights.lambda_cmap * cmap.gradient +
                    weights.lambda_pen * pen.gradient +
                    weights.lambda_tpen * tpen.gradient +
                    weights.lambda_spen * spen.gradient;
  return report;
}

EnergyReport tta_energy(const Scene& scene, const HandModel& model,
                        const HandPose& pose, const ContactMap& target_map,
                        const TtaWeights& weights) {
  const auto samples =
      model.material_surface_samples(kDefaultHandCloudSamples, 0x5EEDu);
  return tta_energy(scene, model, pose, target_map, weights, samples);
}

EnergyReport joint_additional_loss(const Scene& scene, const HandModel& model,
                                   const HandPose& pose, const ContactMap& target_map,
                                   const JointLossWeights& weights,
                                   std::size_t hand_cloud_samples,
                                   std::uint64_t hand_cloud_seed) {
  TtaWeights as_tta;
  as_tta.lambda_cmap = weights.lambda_cmap;
  as_tta.lambda_pen = weights.lambda_pen;
  as_tta.lambda_tpen = weights.lambda_tpen;
  as_tta.lambda_spen = weights.lambda_spen;
  const auto samples = model.material_surface_samples(hand_cloud_samples, hand_cloud_seed);
  return tta_energy(scene, model, pose, target_map, as_tta, samples);
}

ScalarGrad e_dis(const Scene& scene, const HandModel& model, const HandPose& pose) {
  return e_dis(scene, model, model.fk_cache(pose));
}
ScalarGrad e_pen(const Scene& scene, const HandModel& model, const HandPose& pose) {
  return e_pen(scene, model, model.fk_cache(pose));
}
ScalarGrad e_tpen(const HandModel& model, const HandPose& pose) {
  return e_tpen(model, model.fk_cache(pose));
}
ScalarGrad e_spen(const HandModel& model, const HandPose& pose, double d_thresh) {
  return e_spen(model, model.fk_cache(pose), d_thresh);
}

}  // namespace dexgrasp
