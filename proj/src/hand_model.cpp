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

#include "dexgrasp/hand_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/rng.hpp"

namespace dexgrasp {

namespace {
constexpr double kPi = std::numbers::pi;
}

double Primitive::surface_area() const {
  if (kind == Kind::kBox) {
    const Vec3& h = half_extents;
    return 8.0 * (h.x() * h.y() + h.y() * h.z() + h.z() * h.x());
  }
  return 4.0 * kPi * radius * half_length + 4.0 * kPi * radius * radius;
}

double Primitive::sdf_local(const Vec3& p) const {
  if (kind == Kind::kBox) {
    const Vec3 q = p.cwiseAbs() - half_extents;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
  }
  const double a = std::clamp(p.z(), -half_length, half_length);
  return (p - Vec3(0, 0, a)).norm() - radius;
}

Vec3 Primitive::sdf_gradient_local(const Vec3& p) const {
  if (kind == Kind::kBox) {
    const Vec3 q = p.cwiseAbs() - half_extents;
    const Vec3 qp = q.cwiseMax(0.0);
    const double outside = qp.norm();
    Vec3 g;
    if (outside > 1e-14) {
      g = qp / outside;
    } else {
      int c;
      q.maxCoeff(&c);
      g = Vec3::Zero();
      g[c] = 1.0;
    }
    for (int i = 0; i < 3; ++i) g[i] = std::copysign(g[i], p[i] == 0.0 ? 1.0 : p[i]);
    return g;
  }
  const double a = std::clamp(p.z(), -half_length, half_length);
  const Vec3 v = p - Vec3(0, 0, a);
  const double n = v.norm();
  if (n < 1e-14) return Vec3::UnitX();  // axis point, arbitrary direction
  return v / n;
}

Vec3 Primitive::sample_local(Rng& rng) const {
  if (kind == Kind::kBox) {
    const Vec3& h = half_extents;
    const double ax = 8.0 * h.y() * h.z();  // both x-faces
    const double ay = 8.0 * h.z() * h.x();
    const double u = rng.uniform() * surface_area();
    const double sgn = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
    if (u < ax) return {sgn * h.x(), a * h.y(), b * h.z()};
    if (u < ax + ay) return {a * h.x(), sgn * h.y(), b * h.z()};
    return {a * h.x(), b * h.y(), sgn * h.z()};
  }
  const double lateral = 4.0 * kPi * radius * half_length;
  if (rng.uniform() * surface_area() < lateral) {
    const double z = rng.uniform(-half_length, half_length);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    return {radius * std::cos(phi), radius * std::sin(phi), z};
  }
  const double zc = rng.uniform();  // cos(theta) uniform on the hemisphere
  const double st = std::sqrt(std::max(0.0, 1.0 - zc * zc));
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  const double sgn = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return Vec3(radius * st * std::cos(phi), radius * st * std::sin(phi),
              sgn * (half_length + radius * zc));
}

double Primitive::lowest_z(const RigidTransform& world) const {
  if (kind == Kind::kBox) {
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 8; ++i) {
      const Vec3 corner((i & 1 ? 1 : -1) * half_extents.x(),
                        (i & 2 ? 1 : -1) * half_extents.y(),
                        (i & 4 ? 1 : -1) * half_extents.z());
      lo = std::min(lo, (world * corner).z());
    }
    return lo;
  }
  const double za = (world * Vec3(0, 0, half_length)).z();
  const double zb = (world * Vec3(0, 0, -half_length)).z();
  return std::min(za, zb) - radius;
}

// ---------------------------------------------------------------------------
// Descriptor parsing

namespace {

std::vector<double> parse_numbers(std::istringstream& in, std::size_t n,
                                  const std::string& context) {
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(in >> vals[i])) {
      throw ParseError("hand descriptor: expected " + std::to_string(n) +
                       " numbers after '" + context + "'");
    }
  }
  return vals;
}

RigidTransform transform_from(const std::vector<double>& v, std::size_t at) {
  return RigidTransform(Rotation::from_euler(v[at + 3], v[at + 4], v[at + 5]),
                        Vec3(v[at], v[at + 1], v[at + 2]));
}

}  // namespace

HandModel HandModel::parse(const std::string& descriptor_text) {
  std::istringstream in(descriptor_text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("handdesc v1", 0) != 0) {
    throw ParseError("hand descriptor: missing 'handdesc v1' header");
  }

  HandModel model;
  Link* current = nullptr;
  int joint_count = 0;

  auto link_or_throw = [&](const std::string& name) {
    const int idx = model.link_index(name);
    if (idx < 0) throw ParseError("hand descriptor: unknown link '" + name + "'");
    return idx;
  };

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;

    if (key == "name") {
      ls >> model.name_;
    } else if (key == "palm_axis") {
      const auto v = parse_numbers(ls, 3, key);
      model.palm_axis_ = Vec3(v[0], v[1], v[2]).normalized();
    } else if (key == "link") {
      std::string name;
      if (!(ls >> name)) throw ParseError("hand descriptor: link without a name");
      if (model.link_index(name) >= 0) {
        throw ParseError("hand descriptor: duplicate link '" + name + "'");
      }
      model.links_.emplace_back();
      current = &model.links_.back();
      current->name = name;
    } else if (key == "parent") {
      if (!current) throw ParseError("hand descriptor: 'parent' outside a link");
      std::string pname;
      ls >> pname;
      if (pname != "none") {
        current->parent = link_or_throw(pname);
        current->joint_index = joint_count++;
      }
    } else if (key == "origin") {
      if (!current) throw ParseError("hand descriptor: 'origin' outside a link");
      current->origin = transform_from(parse_numbers(ls, 6, key), 0);
    } else if (key == "axis") {
      if (!current) throw ParseError("hand descriptor: 'axis' outside a link");
      const auto v = parse_numbers(ls, 3, key);
      const Vec3 a(v[0], v[1], v[2]);
      if (a.norm() < 1e-12) {
        throw ParseError("hand descriptor: zero joint axis on link '" + current->name + "'");
      }
      current->axis = a.normalized();
    } else if (key == "limits") {
      if (!current) throw ParseError("hand descriptor: 'limits' outside a link");
      const auto v = parse_numbers(ls, 2, key);
      current->lower = v[0];
      current->upper = v[1];
      if (!(current->lower <= current->upper)) {
        throw ParseError("hand descriptor: joint '" + current->name +
                         "' has upper limit below lower limit");
      }
    } else if (key == "box") {
      if (!current) throw ParseError("hand descriptor: 'box' outside a link");
      const auto v = parse_numbers(ls, 9, key);
      Primitive p;
      p.kind = Primitive::Kind::kBox;
      p.half_extents = Vec3(v[0], v[1], v[2]);
      p.frame = transform_from(v, 3);
      if (p.half_extents.minCoeff() <= 0.0) {
        throw ParseError("hand descriptor: non-positive box extents on link '" +
                         current->name + "'");
      }
      current->primitives.push_back(p);
    } else if (key == "capsule") {
      if (!current) throw ParseError("hand descriptor: 'capsule' outside a link");
      const auto v = parse_numbers(ls, 8, key);
      Primitive p;
      p.kind = Primitive::Kind::kCapsule;
      p.radius = v[0];
      p.half_length = v[1];
      p.frame = transform_from(v, 2);
      if (p.radius <= 0.0 || p.half_length <= 0.0) {
        throw ParseError("hand descriptor: non-positive capsule size on link '" +
                         current->name + "'");
      }
      current->primitives.push_back(p);
    } else if (key == "keypoint" || key == "contact") {
      std::string lname;
      ls >> lname;
      const int idx = link_or_throw(lname);
      const auto v = parse_numbers(ls, 3, key);
      auto& dst = key == "keypoint" ? model.keypoint_defs_ : model.contact_candidates_;
      dst.push_back({idx, Vec3(v[0], v[1], v[2])});
    } else {
      throw ParseError("hand descriptor: unknown directive '" + key + "'");
    }
  }

  model.validate_and_finish();
  return model;
}

void HandModel::validate_and_finish() {
  if (links_.empty()) throw ParseError("hand descriptor: no links");
  int roots = 0;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.parent < 0) {
      ++roots;
    } else if (l.parent >= static_cast<int>(i)) {
      // Parents precede children in the file, so the graph is a forest by
      // construction; a forward reference would be a cycle attempt.
      throw ParseError("hand descriptor: link '" + l.name +
                       "' references a later link as parent");
    }
  }
  if (roots != 1) {
    throw ParseError("hand descriptor: expected exactly one root link, found " +
                     std::to_string(roots));
  }
  if (links_[0].parent != -1) {
    throw ParseError("hand descriptor: the first link must be the root");
  }
  if (keypoint_defs_.size() != 15) {
    throw ParseError("hand descriptor: expected 15 keypoints, found " +
                     std::to_string(keypoint_defs_.size()));
  }
  dof_ = 0;
  for (const Link& l : links_) {
    if (l.parent >= 0) ++dof_;
  }

  spen_pairs_.clear();
  for (int a = 0; a < static_cast<int>(links_.size()); ++a) {
    for (int b = a + 1; b < static_cast<int>(links_.size()); ++b) {
      if (links_[a].parent == b || links_[b].parent == a) continue;
      for (int pa = 0; pa < static_cast<int>(links_[a].primitives.size()); ++pa) {
        for (int pb = 0; pb < static_cast<int>(links_[b].primitives.size()); ++pb) {
          spen_pairs_.push_back({a, pa, b, pb});
        }
      }
    }
  }
}

HandModel HandModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open hand descriptor: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

HandModel load_hand(const std::string& descriptor_file) {
  return HandModel::load(descriptor_file);
}

void HandModel::save(std::ostream& out) const {
  out << descriptor_text();
}

std::string HandModel::descriptor_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "handdesc v1\n";
  out << "name " << name_ << "\n";
  out << "palm_axis " << palm_axis_.x() << " " << palm_axis_.y() << " "
      << palm_axis_.z() << "\n";
  auto put_transform = [&out](const RigidTransform& t) {
    const Vec3 e = t.rotation.euler();
    out << t.translation.x() << " " << t.translation.y() << " " << t.translation.z()
        << "  " << e.x() << " " << e.y() << " " << e.z();
  };
  for (const Link& l : links_) {
    out << "link " << l.name << "\n";
    if (l.parent >= 0) {
      out << "  parent " << links_[l.parent].name << "\n";
      out << "  origin ";
      put_transform(l.origin);
      out << "\n";
      out << "  axis " << l.axis.x() << " " << l.axis.y() << " " << l.axis.z() << "\n";
      out << "  limits " << l.lower << " " << l.upper << "\n";
    } else {
      out << "  parent none\n";
    }
    for (const Primitive& p : l.primitives) {
      if (p.kind == Primitive::Kind::kBox) {
        out << "  box " << p.half_extents.x() << " " << p.half_extents.y() << " "
            << p.half_extents.z() << "  ";
      } else {
        out << "  capsule " << p.radius << " " << p.half_length << "  ";
      }
      put_transform(p.frame);
      out << "\n";
    }
  }
  for (const MaterialPoint& k : keypoint_defs_) {
    out << "keypoint " << links_[k.link].name << " " << k.local.x() << " "
        << k.local.y() << " " << k.local.z() << "\n";
  }
  for (const MaterialPoint& c : contact_candidates_) {
    out << "contact " << links_[c.link].name << " " << c.local.x() << " "
        << c.local.y() << " " << c.local.z() << "\n";
  }
  return out.str();
}

int HandModel::link_index(const std::string& name) const {
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (links_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Eigen::VectorXd HandModel::joint_lower() const {
  Eigen::VectorXd lo(dof_);
  for (const Link& l : links_) {
    if (l.joint_index >= 0) lo[l.joint_index] = l.lower;
  }
  return lo;
}

Eigen::VectorXd HandModel::joint_upper() const {
  Eigen::VectorXd hi(dof_);
  for (const Link& l : links_) {
    if (l.joint_index >= 0) hi[l.joint_index] = l.upper;
  }
  return hi;
}

Eigen::VectorXd HandModel::mid_limit_q() const {
  return 0.5 * (joint_lower() + joint_upper());
}

// ---------------------------------------------------------------------------
// Kinematics

std::vector<RigidTransform> HandModel::forward_kinematics(const HandPose& pose) const {
  return fk_cache(pose).link_world;
}

FkCache HandModel::fk_cache(const HandPose& pose) const {
  if (pose.q.size() != dof_) {
    throw InvalidInputError("forward_kinematics: expected " + std::to_string(dof_) +
                            " joint angles, got " + std::to_string(pose.q.size()));
  }
  FkCache cache;
  cache.model = this;
  cache.root_translation = pose.root.translation;
  cache.link_world.resize(links_.size());
  cache.joint_axis_world.resize(links_.size(), Vec3::Zero());
  cache.joint_origin_world.resize(links_.size(), Vec3::Zero());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.parent < 0) {
      cache.link_world[i] = pose.root;
      continue;
    }
    const RigidTransform joint_frame = cache.link_world[l.parent] * l.origin;
    cache.joint_axis_world[i] = joint_frame.rotation * l.axis;
    cache.joint_origin_world[i] = joint_frame.translation;
    const Rotation spin = Rotation::about_axis(l.axis, pose.q[l.joint_index]);
    cache.link_world[i] = joint_frame * RigidTransform(spin, Vec3::Zero());
  }
  return cache;
}

void FkCache::accumulate_point_gradient(int link, const Vec3& world_point,
                                        const Vec3& dE_dpoint,
                                        Eigen::Ref<Eigen::VectorXd> grad) const {
  grad.segment<3>(0) += (world_point - root_translation).cross(dE_dpoint);
  grad.segment<3>(3) += dE_dpoint;
  int l = link;
  while (l >= 0 && model->link(l).parent >= 0) {
    const int j = model->link(l).joint_index;
    grad[6 + j] +=
        joint_axis_world[l].cross(world_point - joint_origin_world[l]).dot(dE_dpoint);
    l = model->link(l).parent;
  }
}

std::vector<Vec3> HandModel::keypoints(const HandPose& pose) const {
  return keypoints(fk_cache(pose));
}

std::vector<Vec3> HandModel::keypoints(const FkCache& cache) const {
  std::vector<Vec3> out;
  out.reserve(keypoint_defs_.size());
  for (const MaterialPoint& k : keypoint_defs_) {
    out.push_back(cache.link_world[k.link] * k.local);
  }
  return out;
}

std::vector<Vec3> HandModel::contact_candidates(const FkCache& cache) const {
  std::vector<Vec3> out;
  out.reserve(contact_candidates_.size());
  for (const MaterialPoint& c : contact_candidates_) {
    out.push_back(cache.link_world[c.link] * c.local);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Surface sampling and SDF

std::vector<MaterialPoint> HandModel::material_surface_samples(
    std::size_t n, std::uint64_t seed) const {
  std::vector<std::pair<int, const Primitive*>> prims;
  std::vector<double> cum_area;
  double total = 0.0;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    for (const Primitive& p : links_[i].primitives) {
      prims.push_back({static_cast<int>(i), &p});
      total += p.surface_area();
      cum_area.push_back(total);
    }
  }
  if (prims.empty()) throw InvalidInputError("hand model has no primitives");
  Rng rng(seed);
  std::vector<MaterialPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    const std::size_t idx =
        std::min<std::size_t>(std::upper_bound(cum_area.begin(), cum_area.end(), u) -
                                  cum_area.begin(),
                              prims.size() - 1);
    const auto& [link, prim] = prims[idx];
    out.push_back({link, prim->frame * prim->sample_local(rng)});
  }
  return out;
}

std::vector<Vec3> HandModel::sample_surface(const HandPose& pose, std::size_t n,
                                            std::uint64_t seed) const {
  if (n == 0) throw InvalidInputError("sample_surface: n must be >= 1");
  const FkCache cache = fk_cache(pose);
  const SdfQuery query = sdf_query(cache);
  std::vector<Vec3> out;
  out.reserve(n);
  // Candidates interior to another primitive are rejected so the result lies
  // on the boundary of the union.
  std::uint64_t batch_seed = seed;
  while (out.size() < n) {
    const std::size_t want = n - out.size();
    const auto material = material_surface_samples(want + want / 4 + 8, batch_seed);
    for (const MaterialPoint& m : material) {
      if (out.size() >= n) break;
      const Vec3 world = cache.link_world[m.link] * m.local;
      if (query.evaluate(world).distance > -1e-9) out.push_back(world);
    }
    batch_seed = batch_seed * 6364136223846793005ULL + 1442695040888963407ULL;
  }
  return out;
}

SdfQuery HandModel::sdf_query(const HandPose& pose) const {
  return sdf_query(fk_cache(pose));
}

SdfQuery HandModel::sdf_query(const FkCache& cache) const {
  SdfQuery q;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    for (const Primitive& p : links_[i].primitives) {
      SdfQuery::Entry e;
      const RigidTransform world = cache.link_world[i] * p.frame;
      e.world_to_prim = world.inverse();
      e.prim_to_world_rot = world.rotation.matrix();
      e.bounding_center = world.translation;
      e.bounding_radius = p.kind == Primitive::Kind::kBox ? p.half_extents.norm()
                                                          : p.half_length + p.radius;
      e.link = static_cast<int>(i);
      e.prim = &p;
      q.entries.push_back(e);
    }
  }
  for (const auto& e : q.entries) q.global_center += e.bounding_center;
  q.global_center /= static_cast<double>(q.entries.size());
  for (const auto& e : q.entries) {
    q.global_radius = std::max(
        q.global_radius, (e.bounding_center - q.global_center).norm() + e.bounding_radius);
  }
  return q;
}

SdfSample SdfQuery::evaluate(const Vec3& p) const {
  SdfSample best;
  best.distance = std::numeric_limits<double>::infinity();
  const Entry* best_entry = nullptr;
  Vec3 best_local = Vec3::Zero();
  for (const Entry& e : entries) {
    // sdf >= |p - c| - r_bound, so the entry cannot win past this bound.
    const double lower = (p - e.bounding_center).norm() - e.bounding_radius;
    if (lower >= best.distance) continue;
    const Vec3 local = e.world_to_prim * p;
    const double d = e.prim->sdf_local(local);
    if (d < best.distance) {
      best.distance = d;
      best_entry = &e;
      best_local = local;
    }
  }
  if (best_entry) {
    best.gradient = best_entry->prim_to_world_rot *
                    best_entry->prim->sdf_gradient_local(best_local);
    best.link = best_entry->link;
  }
  return best;
}

std::vector<double> HandModel::sdf(const HandPose& pose,
                                   const std::vector<Vec3>& points) const {
  const SdfQuery q = sdf_query(pose);
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(q.evaluate(p).distance);
  return out;
}

double HandModel::lowest_surface_z(const FkCache& cache) const {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < links_.size(); ++i) {
    for (const Primitive& p : links_[i].primitives) {
      lo = std::min(lo, p.lowest_z(cache.link_world[i] * p.frame));
    }
  }
  return lo;
}

// ---------------------------------------------------------------------------
// Primitive-pair distances

namespace {

struct Segment {
  Vec3 a, b;
};

Segment world_segment(const Primitive& c, const RigidTransform& w) {
  const RigidTransform f = w * c.frame;
  return {f * Vec3(0, 0, -c.half_length), f * Vec3(0, 0, c.half_length)};
}

// Closest points between two segments (Ericson, Real-Time Collision
// Detection, 5.1.9).
void closest_segment_points(const Segment& s1, const Segment& s2, Vec3& c1, Vec3& c2) {
  const Vec3 d1 = s1.b - s1.a, d2 = s2.b - s2.a, r = s1.a - s2.a;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s, t;
  constexpr double kEps = 1e-16;
  if (a <= kEps && e <= kEps) {
    s = t = 0.0;
  } else if (a <= kEps) {
    s = 0.0;
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  c1 = s1.a + d1 * s;
  c2 = s2.a + d2 * t;
}

PrimitiveDistance capsule_capsule(const Primitive& a, const RigidTransform& wa,
                                  const Primitive& b, const RigidTransform& wb) {
  Vec3 ca, cb;
  closest_segment_points(world_segment(a, wa), world_segment(b, wb), ca, cb);
  const Vec3 diff = cb - ca;
  const double d = diff.norm();
  const Vec3 n = d > 1e-14 ? Vec3(diff / d) : Vec3::UnitX();
  return {d - a.radius - b.radius, ca, cb, n};
}

// Unsigned distance from the capsule axis to the solid box, minimized along
// the segment. Distance-to-a-convex-set is convex along an affine path, so
// ternary search is exact. An axis that enters the box saturates at -radius
// with no gradient (zero direction); the self-penetration energy treats that
// as a plateau.
PrimitiveDistance capsule_box(const Primitive& cap, const RigidTransform& wc,
                              const Primitive& box, const RigidTransform& wbx) {
  const Segment seg = world_segment(cap, wc);
  const RigidTransform box_world = wbx * box.frame;
  const RigidTransform to_box = box_world.inverse();
  const Vec3 la = to_box * seg.a, lb = to_box * seg.b;
  auto dist = [&](double t) {
    const Vec3 p = la + t * (lb - la);
    return (p.cwiseAbs() - box.half_extents).cwiseMax(0.0).norm();
  };

  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 44; ++i) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (dist(m1) <= dist(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double t = 0.5 * (lo + hi);
  const Vec3 local = la + t * (lb - la);
  const Vec3 excess = (local.cwiseAbs() - box.half_extents).cwiseMax(0.0);
  const double d = excess.norm();
  const Vec3 p = seg.a + t * (seg.b - seg.a);
  if (d < 1e-12) {
    return {-cap.radius, p, p, Vec3::Zero()};
  }
  Vec3 g = excess / d;
  for (int i = 0; i < 3; ++i) g[i] = std::copysign(g[i], local[i] == 0.0 ? 1.0 : local[i]);
  const Vec3 g_world = box_world.rotation.matrix() * g;
  // Witnesses coincide at the capsule axis point; the direction points from
  // the box toward the capsule.
  return {d - cap.radius, p, p, -g_world};
}

PrimitiveDistance box_box(const Primitive& a, const RigidTransform& wa,
                          const Primitive& b, const RigidTransform& wb) {
  const RigidTransform fa = wa * a.frame, fb = wb * b.frame;
  const RigidTransform ia = fa.inverse(), ib = fb.inverse();
  auto project = [](const Primitive& box, const RigidTransform& inv,
                    const RigidTransform& fwd, const Vec3& p) {
    Vec3 l = inv * p;
    l = l.cwiseMax(-box.half_extents).cwiseMin(box.half_extents);
    return fwd * l;
  };
  Vec3 pa = fa.translation, pb = fb.translation;
  for (int i = 0; i < 256; ++i) {
    pa = project(a, ia, fa, pb);
    pb = project(b, ib, fb, pa);
  }
  const Vec3 diff = pb - pa;
  const double d = diff.norm();
  if (d > 1e-10) return {d, pa, pb, diff / d};
  // Overlapping boxes saturate at zero distance with no gradient.
  return {0.0, pa, pb, Vec3::Zero()};
}

}  // namespace

PrimitiveDistance primitive_distance(const Primitive& a, const RigidTransform& wa,
                                     const Primitive& b, const RigidTransform& wb) {
  const bool abox = a.kind == Primitive::Kind::kBox;
  const bool bbox = b.kind == Primitive::Kind::kBox;
  if (!abox && !bbox) return capsule_capsule(a, wa, b, wb);
  if (abox && bbox) return box_box(a, wa, b, wb);
  if (!abox && bbox) return capsule_box(a, wa, b, wb);
  // Box-capsule: flip the capsule-box result.
  PrimitiveDistance r = capsule_box(b, wb, a, wa);
  return {r.distance, r.point_b, r.point_a, -r.direction};
}

}  // namespace dexgrasp
