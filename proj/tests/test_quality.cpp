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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/quality.hpp"
#include "dexgrasp/rng.hpp"
#include "dexgrasp/simplex.hpp"
#include "support/oracles.hpp"

using namespace dexgrasp;

TEST_CASE("simplex feasibility on hand-checkable systems") {
  // x1 + x2 = 2, x1 - x2 = 0 has x = (1,1) >= 0.
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, -1;
  CHECK(lp_equality_feasible(a, Eigen::Vector2d(2, 0)));
  // x1 + x2 = -1 has no nonnegative solution.
  Eigen::MatrixXd b(1, 2);
  b << 1, 1;
  Eigen::VectorXd rhs(1);
  rhs << -1;
  CHECK_FALSE(lp_equality_feasible(b, rhs));
  // Degenerate-but-feasible: 0 = 0 row.
  Eigen::MatrixXd c(2, 1);
  c << 1, 0;
  CHECK(lp_equality_feasible(c, Eigen::Vector2d(3, 0)));
  CHECK_FALSE(lp_equality_feasible(c, Eigen::Vector2d(3, 1)));
}

TEST_CASE("simplex matches the enumeration oracle on random cones") {
  Rng rng(17);
  int agreements = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform_index(8));
    Eigen::MatrixXd a(6, n);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = rng.gaussian();
    }
    Eigen::VectorXd b(6);
    for (int i = 0; i < 6; ++i) b[i] = rng.gaussian();
    if (trial % 2 == 0) {
      // Force feasibility by building b from a nonnegative combination.
      b.setZero();
      for (int j = 0; j < n; ++j) b += rng.uniform() * a.col(j);
    }
    const bool lp = lp_equality_feasible(a, b);
    const bool oracle = testoracle::cone_contains_oracle(a, b);
    CHECK(lp == oracle);
    agreements += (lp == oracle);
  }
  CHECK(agreements == 60);
}

TEST_CASE("build_wrenches: counts, unit forces, cone collapse") {
  Rng rng(19);
  const ContactSet contacts = testoracle::random_sphere_contacts(5, rng);
  FrictionModel friction;  // mu 0.5, 8 edges
  const Vec3 centroid(0, 0, 0.04);
  const WrenchSet set = build_wrenches(contacts, friction, centroid, 10.0);
  CHECK(set.wrenches.size() == 5 * 8);
  for (const Vec6& w : set.wrenches) {
    CHECK(w.head<3>().norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  FrictionModel tiny;
  tiny.mu = 1e-12;
  tiny.cone_edges = 8;
  const WrenchSet collapsed = build_wrenches(contacts, tiny, centroid, 10.0);
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const Vec3 inward = -contacts.normals[i];
    for (int k = 0; k < 8; ++k) {
      CHECK((collapsed.wrenches[i * 8 + k].head<3>() - inward).norm() < 1e-6);
    }
  }

  FrictionModel bad;
  bad.mu = 0.0;
  CHECK_THROWS_AS(build_wrenches(contacts, bad, centroid, 1.0), InvalidInputError);
  bad.mu = 0.5;
  bad.cone_edges = 2;
  CHECK_THROWS_AS(build_wrenches(contacts, bad, centroid, 1.0), InvalidInputError);
}

TEST_CASE("q1 support sampling: synthetic grasps vs dense oracle") {
  const Vec3 center(0, 0, 0.04);

  SUBCASE("two antipodal point contacts leave a flat hull: q1 = 0 exactly") {
    // No wrench in the set can torque about the contact axis.
    const ContactSet contacts =
        testoracle::sphere_contacts({Vec3(1, 0, 0), Vec3(-1, 0, 0)}, center, 0.04);
    const WrenchSet set = build_wrenches(contacts, {}, center, 1.0 / 0.04);
    CHECK(q1_from_wrenches(set, 4096, 99) == 0.0);
    CHECK(q1_from_wrenches(set, 100000, 99) == 0.0);
  }

  // Three fingers spread around the equator plus a top contact: full-rank
  // wrench hull with the origin inside.
  const ContactSet tri = testoracle::sphere_contacts(
      {Vec3(1, 0, 0.1), Vec3(-0.5, 0.866, 0.1), Vec3(-0.5, -0.866, 0.1),
       Vec3(0, 0, -1)},
      center, 0.04);
  const WrenchSet set = build_wrenches(tri, {}, center, 1.0 / 0.04);
  const double coarse = q1_from_wrenches(set, 4096, 99);
  const double dense = q1_from_wrenches(set, 100000, 99);
  CHECK(coarse > 0.01);
  CHECK(coarse >= dense - 1e-12);
  CHECK(coarse <= dense * 1.05);

  SUBCASE("monotone non-increasing in the direction count") {
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {256, 1024, 4096, 16384}) {
      const double v = q1_from_wrenches(set, n, 99);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
  SUBCASE("adding a contact never decreases q1") {
    ContactSet more = tri;
    more.points.push_back(center + 0.04 * Vec3(0, 0.707, 0.707));
    more.normals.push_back(Vec3(0, 0.707, 0.707).normalized());
    const WrenchSet bigger = build_wrenches(more, {}, center, 1.0 / 0.04);
    CHECK(q1_from_wrenches(bigger, 4096, 99) >= coarse - 1e-12);
  }
}

TEST_CASE("q1 invalidation thresholds and empty contacts") {
  const Scene scene = make_sphere_scene(0.04, 300, 31);
  const HandModel& model = HandModel::bundled();
  QualityConfig config;
  config.q1_directions = 512;

  SUBCASE("hand far away: no contacts, q1 = 0") {
    HandPose pose = HandPose::zeros(model.dof());
    pose.root.translation = Vec3(1, 1, 1);
    CHECK(q1(scene, model, pose, config) == 0.0);
  }
  SUBCASE("object penetration beyond 5 mm zeroes q1") {
    // Palm box jammed through the sphere center: deep penetration.
    HandPose pose = HandPose::zeros(model.dof());
    pose.root.translation = Vec3(0, 0, 0.0);
    CHECK(penetration_depth(scene, model, pose) > 0.005);
    CHECK(q1(scene, model, pose, config) == 0.0);
  }
  SUBCASE("table penetration beyond 1 cm zeroes q1") {
    HandPose pose = HandPose::zeros(model.dof());
    pose.root.translation = Vec3(0.3, 0, -0.02);  // below the table, off object
    CHECK(table_penetration(model, pose) > 0.01);
    CHECK(q1(scene, model, pose, config) == 0.0);
  }
}

TEST_CASE("penetration depth: separated, known depth, brute scan") {
  const HandModel& model = HandModel::bundled();
  HandPose rest = HandPose::zeros(model.dof());

  Scene one;
  one.points = {Vec3(0, 0, 1.0)};
  one.normals = {Vec3(0, 0, 1)};
  CHECK(penetration_depth(one, model, rest) == 0.0);

  // Palm box spans y in [-0.011, 0.011]; a point 1 cm inside the +y face.
  Scene inside;
  inside.points = {Vec3(0, 0.001, 0.045)};
  inside.normals = {Vec3(0, 1, 0)};
  CHECK(penetration_depth(inside, model, rest) == doctest::Approx(0.01).epsilon(1e-9));

  const Scene scene = make_sphere_scene(0.04, 200, 37);
  HandPose near = HandPose::zeros(model.dof());
  near.root.translation = Vec3(0, -0.05, 0.01);
  const SdfQuery q = model.sdf_query(near);
  double brute = 0.0;
  for (const Vec3& p : scene.points) brute = std::max(brute, -q.evaluate(p).distance);
  CHECK(penetration_depth(scene, model, near) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("table penetration from the lowest primitive point") {
  const HandModel& model = HandModel::bundled();
  HandPose pose = HandPose::zeros(model.dof());
  pose.root.translation = Vec3(0, 0, 0.5);
  CHECK(table_penetration(model, pose) == 0.0);
  pose.root.translation = Vec3(0, 0, -0.02);
  // Palm box bottom sits at z = -0.02 under this root.
  CHECK(table_penetration(model, pose) == doctest::Approx(0.02).epsilon(1e-9));
}

TEST_CASE("gravity resistance: single contact fails, envelopes pass") {
  Rng rng(41);
  const Vec3 center(0, 0, 0.04);

  SUBCASE("one contact cannot oppose all six directions") {
    const ContactSet one = testoracle::sphere_contacts({Vec3(1, 0, 0)}, center, 0.04);
    CHECK_FALSE(gravity_resistance_contacts(one, center, {}, 0.1));
    FrictionModel slippery;
    slippery.mu = 1e-9;
    CHECK_FALSE(gravity_resistance_contacts(one, center, slippery, 0.1));
  }
  SUBCASE("symmetric 4-contact envelope resists gravity") {
    const ContactSet four = testoracle::sphere_contacts(
        {Vec3(1, 0, 0.2), Vec3(-1, 0, 0.2), Vec3(0, 1, 0.2), Vec3(0, -1, 0.2)},
        center, 0.04);
    CHECK(gravity_resistance_contacts(four, center, {}, 0.1));
  }
  SUBCASE("adding a contact never flips pass to fail") {
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 2 + rng.uniform_index(4);
      ContactSet contacts = testoracle::random_sphere_contacts(n, rng);
      const bool before = gravity_resistance_contacts(contacts, center, {}, 0.1);
      contacts.points.push_back(center + 0.04 * Vec3(0, 0, 1));
      contacts.normals.push_back(Vec3(0, 0, 1));
      const bool after = gravity_resistance_contacts(contacts, center, {}, 0.1);
      if (before) CHECK(after);
    }
  }
  SUBCASE("verdicts match the enumeration oracle") {
    FrictionModel friction;
    friction.cone_edges = 4;  // keeps the oracle subset count small
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t n = 1 + rng.uniform_index(5);
      const ContactSet contacts = testoracle::random_sphere_contacts(n, rng);
      const bool lp = gravity_resistance_contacts(contacts, center, friction, 0.1);
      const bool oracle =
          testoracle::gravity_resistance_oracle(contacts, center, friction, 0.1);
      CHECK(lp == oracle);
    }
  }
}

TEST_CASE("gravity resistance is invariant under a yaw of the whole system") {
  Rng rng(47);
  const Vec3 center(0, 0, 0.04);
  for (int trial = 0; trial < 20; ++trial) {
    const ContactSet contacts = testoracle::random_sphere_contacts(4, rng);
    const bool base = gravity_resistance_contacts(contacts, center, {}, 0.1);
    const Rotation yaw = Rotation::about_axis(Vec3::UnitZ(), rng.uniform(0, 6.28));
    ContactSet rotated;
    for (std::size_t i = 0; i < contacts.size(); ++i) {
      rotated.points.push_back(yaw * (contacts.points[i] - center) + center);
      rotated.normals.push_back(yaw * contacts.normals[i]);
    }
    CHECK(gravity_resistance_contacts(rotated, center, {}, 0.1) == base);
  }
}
