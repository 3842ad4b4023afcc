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

#include "dexgrasp/scene_contact.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/rng.hpp"

namespace dexgrasp {

Vec3 Scene::centroid() const {
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : points) c += p;
  return c / static_cast<double>(points.size());
}

double Scene::bounding_radius() const {
  const Vec3 c = centroid();
  double r = 0.0;
  for (const Vec3& p : points) r = std::max(r, (p - c).norm());
  return r;
}

double Scene::max_z() const {
  double z = -std::numeric_limits<double>::infinity();
  for (const Vec3& p : points) z = std::max(z, p.z());
  return z;
}

void Scene::validate() const {
  if (points.empty()) throw InvalidInputError("Scene: empty point cloud");
  if (normals.size() != points.size()) {
    throw InvalidInputError("Scene: normal count does not match point count");
  }
  for (const Vec3& n : normals) {
    if (std::abs(n.norm() - 1.0) > 1e-6) {
      throw InvalidInputError("Scene: normals must be unit length");
    }
  }
}

std::vector<Vec3> canonicalize(const std::vector<Vec3>& points, const Rotation& r) {
  const Mat3 rt = r.matrix().transpose();
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(rt * p);
  return out;
}

ContactMap contact_heat(const std::vector<Vec3>& object_points,
                        const std::vector<Vec3>& hand_points, double beta) {
  if (object_points.empty() || hand_points.empty()) {
    throw InvalidInputError("contact_heat: empty point cloud");
  }
  if (!(beta > 0.0)) throw InvalidInputError("contact_heat: beta must be positive");
  ContactMap map;
  map.heat.reserve(object_points.size());
  for (const Vec3& p : object_points) {
    double d2 = std::numeric_limits<double>::infinity();
    for (const Vec3& h : hand_points) d2 = std::min(d2, (p - h).squaredNorm());
    const double d = std::sqrt(d2);
    map.heat.push_back(2.0 - 2.0 / (1.0 + std::exp(-beta * d)));
  }
  return map;
}

ContactSet extract_contacts_all(const Scene& scene, const HandModel& model,
                                const HandPose& pose, double tolerance) {
  scene.validate();
  if (!(tolerance > 0.0)) {
    throw InvalidInputError("extract_contacts: tolerance must be positive");
  }
  const SdfQuery query = model.sdf_query(pose);
  ContactSet set;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const SdfSample s = query.evaluate(scene.points[i]);
    if (std::abs(s.distance) <= tolerance) {
      set.points.push_back(scene.points[i]);
      set.normals.push_back(scene.normals[i]);
    }
  }
  return set;
}

ContactSet extract_contacts(const Scene& scene, const HandModel& model,
                            const HandPose& pose, double tolerance) {
  scene.validate();
  if (!(tolerance > 0.0)) {
    throw InvalidInputError("extract_contacts: tolerance must be positive");
  }
  const SdfQuery query = model.sdf_query(pose);
  // Closest qualifying object point per hand link.
  std::map<int, std::pair<double, std::size_t>> best;
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const SdfSample s = query.evaluate(scene.points[i]);
    const double a = std::abs(s.distance);
    if (a > tolerance) continue;
    const auto it = best.find(s.link);
    if (it == best.end() || a < it->second.first) best[s.link] = {a, i};
  }
  ContactSet set;
  for (const auto& [link, entry] : best) {
    set.points.push_back(scene.points[entry.second]);
    set.normals.push_back(scene.normals[entry.second]);
  }
  return set;
}

std::vector<Vec3> estimate_normals(const std::vector<Vec3>& points) {
  if (points.empty()) throw InvalidInputError("estimate_normals: empty cloud");
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  const std::size_t k = std::min<std::size_t>(16, points.size());
  std::vector<Vec3> normals;
  normals.reserve(points.size());
  std::vector<std::pair<double, std::size_t>> dist(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      dist[j] = {(points[j] - points[i]).squaredNorm(), j};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    Vec3 mean = Vec3::Zero();
    for (std::size_t j = 0; j < k; ++j) mean += points[dist[j].second];
    mean /= static_cast<double>(k);
    Mat3 cov = Mat3::Zero();
    for (std::size_t j = 0; j < k; ++j) {
      const Vec3 d = points[dist[j].second] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    Vec3 n = eig.eigenvectors().col(0);  // smallest eigenvalue
    if (n.dot(points[i] - centroid) < 0) n = -n;
    normals.push_back(n.normalized());
  }
  return normals;
}

void write_ply(std::ostream& out, const std::vector<Vec3>& points,
               const std::vector<Vec3>& normals) {
  if (normals.size() != points.size()) {
    throw InvalidInputError("write_ply: normal count does not match point count");
  }
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size() << "\n";
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz"}) {
    out << "property double " << p << "\n";
  }
  out << "end_header\n";
  out.precision(17);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << points[i].x() << " " << points[i].y() << " " << points[i].z() << " "
        << normals[i].x() << " " << normals[i].y() << " " << normals[i].z() << "\n";
  }
}

void read_ply(std::istream& in, std::vector<Vec3>& points, std::vector<Vec3>& normals) {
  std::string line;
  std::size_t count = 0;
  bool ascii = false;
  std::vector<std::string> props;
  if (!std::getline(in, line) || line != "ply") throw ParseError("read_ply: not a PLY file");
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (key == "element") {
      std::string what;
      ls >> what >> count;
      if (what != "vertex") throw ParseError("read_ply: only vertex elements supported");
    } else if (key == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (key == "end_header") {
      break;
    }
  }
  if (!ascii) throw ParseError("read_ply: only ascii format supported");
  int ix = -1, inx = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i] == "x") ix = static_cast<int>(i);
    if (props[i] == "nx") inx = static_cast<int>(i);
  }
  if (ix < 0) throw ParseError("read_ply: no x/y/z properties");
  points.clear();
  normals.clear();
  std::vector<double> vals(props.size());
  for (std::size_t r = 0; r < count; ++r) {
    if (!std::getline(in, line)) throw ParseError("read_ply: truncated vertex list");
    std::istringstream ls(line);
    for (double& v : vals) {
      if (!(ls >> v)) throw ParseError("read_ply: bad vertex row " + std::to_string(r));
    }
    points.emplace_back(vals[ix], vals[ix + 1], vals[ix + 2]);
    if (inx >= 0) normals.emplace_back(vals[inx], vals[inx + 1], vals[inx + 2]);
  }
  if (normals.empty()) normals = estimate_normals(points);
}

Scene make_sphere_scene(double radius, std::size_t n, std::uint64_t seed) {
  if (!(radius > 0.0) || n == 0) throw InvalidInputError("make_sphere_scene: bad inputs");
  Rng rng(seed);
  Scene scene;
  const Vec3 center(0, 0, radius);  // resting on the table
  scene.points.reserve(n);
  scene.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);
    scene.points.push_back(center + radius * dir);
    scene.normals.push_back(dir);
  }
  scene.object_pose = RigidTransform(Rotation::identity(), center);
  return scene;
}

Scene make_box_scene(double edge, std::size_t n, std::uint64_t seed) {
  if (!(edge > 0.0) || n == 0) throw InvalidInputError("make_box_scene: bad inputs");
  Rng rng(seed);
  Scene scene;
  const double h = edge / 2.0;
  const Vec3 center(0, 0, h);
  Primitive box;
  box.kind = Primitive::Kind::kBox;
  box.half_extents = Vec3(h, h, h);
  scene.points.reserve(n);
  scene.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 local = box.sample_local(rng);
    scene.points.push_back(center + local);
    scene.normals.push_back(box.sdf_gradient_local(local));
  }
  scene.object_pose = RigidTransform(Rotation::identity(), center);
  return scene;
}

}  // namespace dexgrasp
