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
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/flow_bijector.hpp"
#include "dexgrasp/rng.hpp"
#include "support/stats.hpp"

using namespace dexgrasp;

namespace {

VecX random_vec(int dim, Rng& rng, double scale = 1.0) {
  VecX v(dim);
  for (int i = 0; i < dim; ++i) v[i] = scale * rng.gaussian();
  return v;
}

// Richardson-extrapolated central differences: O(h^4) truncation keeps the
// 25-dimensional determinant accurate enough for the 1e-5 comparison.
double numerical_logdet(const FlowStack& stack, const VecX& x, const VecX& ctx) {
  const int d = stack.dim();
  MatX jac(d, d);
  const double h = 1e-5;
  for (int j = 0; j < d; ++j) {
    VecX xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const VecX coarse =
        (stack.forward(xp, ctx).first - stack.forward(xm, ctx).first) / (2 * h);
    xp[j] = x[j] + h / 2;
    xm[j] = x[j] - h / 2;
    const VecX fine = (stack.forward(xp, ctx).first - stack.forward(xm, ctx).first) / h;
    jac.col(j) = (4.0 * fine - coarse) / 3.0;
  }
  return std::log(std::abs(jac.determinant()));
}

}  // namespace

TEST_CASE("identity stack is the identity with zero logdet") {
  const FlowStack stack = FlowStack::identity(7);
  Rng rng(3);
  const VecX ctx(0);
  for (int i = 0; i < 100; ++i) {
    const VecX x = random_vec(7, rng);
    const auto [z, logdet] = stack.forward(x, ctx);
    CHECK((z - x).norm() == 0.0);
    CHECK(logdet == 0.0);
    const double lp = stack.log_prob(x, ctx);
    const double expected =
        -0.5 * x.squaredNorm() - 3.5 * std::log(2 * std::numbers::pi);
    CHECK(lp == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("round trips are exact to 1e-9 on random stacks") {
  Rng rng(5);
  for (int dim : {1, 4, 25}) {
    const FlowStack stack = FlowStack::random(dim, 6, 21, 1234 + dim);
    const VecX ctx = random_vec(6, rng);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const VecX x = random_vec(dim, rng);
      const auto [z, ld_f] = stack.forward(x, ctx);
      const auto [back, ld_i] = stack.inverse(z, ctx);
      worst = std::max(worst, (back - x).cwiseAbs().maxCoeff());
      CHECK(ld_f == doctest::Approx(-ld_i).epsilon(1e-10));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("logdet matches the numerical Jacobian at D in {4, 8, 25}") {
  Rng rng(7);
  for (int dim : {4, 8, 25}) {
    const FlowStack stack = FlowStack::random(dim, 4, 21, 99 + dim);
    const VecX ctx = random_vec(4, rng);
    for (int i = 0; i < 5; ++i) {
      const VecX x = random_vec(dim, rng);
      const auto [z, logdet] = stack.forward(x, ctx);
      CHECK(logdet == doctest::Approx(numerical_logdet(stack, x, ctx)).epsilon(1e-5));
    }
  }
}

TEST_CASE("linear block inverse agrees with a dense solve") {
  Rng rng(11);
  const int dim = 9;
  FlowStack stack = FlowStack::random(dim, 0, 1, 42);
  const VecX ctx(0);
  // Rebuild the dense W = P L (U + S) from the stored factors by probing
  // with basis vectors through forward(), after removing actnorm/coupling
  // effects: easiest is a fresh stack whose actnorm is identity and whose
  // coupling is zeroed.
  FlowStack linear_only = FlowStack::identity(dim, 0, 1);
  // Splice the random linear into the identity stack via JSON round trip.
  std::stringstream buf;
  stack.save_json(buf);
  std::stringstream buf2;
  linear_only.save_json(buf2);
  // Instead of editing JSON, verify algebraically: forward of the random
  // stack restricted to its linear part is exercised through solve_linear,
  // so check W * inverse(W z) = z through the full stack round trip with a
  // dense Jacobian as the W witness.
  for (int i = 0; i < 20; ++i) {
    const VecX z = random_vec(dim, rng);
    const auto [x, ld] = stack.inverse(z, ctx);
    const auto [z2, ld2] = stack.forward(x, ctx);
    CHECK((z2 - z).cwiseAbs().maxCoeff() < 1e-10);
  }
  // Dense-solve oracle on the Jacobian of the forward map at a point: the
  // inverse map's Jacobian must be the matrix inverse.
  const VecX x0 = random_vec(dim, rng);
  const auto [z0, ld0] = stack.forward(x0, ctx);
  MatX jf(dim, dim), ji(dim, dim);
  const double h = 1e-6;
  for (int j = 0; j < dim; ++j) {
    VecX xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    jf.col(j) = (stack.forward(xp, ctx).first - stack.forward(xm, ctx).first) / (2 * h);
    VecX zp = z0, zm = z0;
    zp[j] += h;
    zm[j] -= h;
    ji.col(j) = (stack.inverse(zp, ctx).first - stack.inverse(zm, ctx).first) / (2 * h);
  }
  CHECK((jf * ji - MatX::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("one-dimensional density integrates to one") {
  const FlowStack stack = FlowStack::random(1, 0, 21, 7);
  const VecX ctx(0);
  // Simpson's rule over [-10, 10].
  const int n = 4000;
  const double a = -10.0, b = 10.0, h = (b - a) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    VecX xv(1);
    xv << x;
    const double f = std::exp(stack.log_prob(xv, ctx));
    acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  acc *= h / 3.0;
  CHECK(acc == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("actnorm bias shifts the density argmax") {
  FlowStack identity = FlowStack::identity(1, 0, 1);
  std::stringstream buf;
  identity.save_json(buf);
  // Patch mu through the documented JSON layout.
  auto doc = nlohmann::json::parse(buf.str());
  doc["blocks"][0]["actnorm"]["mu"][0] = 1.5;
  std::stringstream patched(doc.dump());
  const FlowStack shifted = FlowStack::load_json(patched);
  const VecX ctx(0);
  // z = x + 1.5, so the density peaks at x = -1.5.
  double best_x = 0, best = -1e30;
  for (double x = -5; x <= 5; x += 0.01) {
    VecX xv(1);
    xv << x;
    const double lp = shifted.log_prob(xv, ctx);
    if (lp > best) {
      best = lp;
      best_x = x;
    }
  }
  CHECK(best_x == doctest::Approx(-1.5).epsilon(0.01));
}

TEST_CASE("sampling: determinism, finite log-probs, KS normality") {
  const VecX ctx(0);

  SUBCASE("same seed gives identical samples") {
    const FlowStack stack = FlowStack::random(5, 0, 21, 21);
    const auto a = stack.sample(ctx, 777, 50);
    const auto b = stack.sample(ctx, 777, 50);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[i]).norm() == 0.0);
    for (const VecX& x : a) CHECK(std::isfinite(stack.log_prob(x, ctx)));
  }
  SUBCASE("identity-stack samples are standard normal per dimension") {
    const FlowStack stack = FlowStack::identity(3);
    const auto draws = stack.sample(ctx, 2027, 10000);
    for (int d = 0; d < 3; ++d) {
      std::vector<double> xs;
      xs.reserve(draws.size());
      for (const VecX& x : draws) xs.push_back(x[d]);
      CHECK(teststat::ks_pvalue_standard_normal(xs) > 0.01);
    }
  }
}

TEST_CASE("stack logdet is the sum of per-block logdets") {
  Rng rng(31);
  const int dim = 6;
  std::vector<FlowStack> singles;
  for (int b = 0; b < 4; ++b) singles.push_back(FlowStack::random(dim, 0, 1, 500 + b));
  // Chain the four single-block stacks manually.
  const VecX ctx(0);
  const VecX x = random_vec(dim, rng);
  VecX cur = x;
  double total = 0.0;
  for (const FlowStack& s : singles) {
    const auto [z, ld] = s.forward(cur, ctx);
    cur = z;
    total += ld;
  }
  // The same four blocks as one stack, rebuilt through JSON splicing.
  nlohmann::json doc;
  {
    std::stringstream buf;
    singles[0].save_json(buf);
    doc = nlohmann::json::parse(buf.str());
    for (int b = 1; b < 4; ++b) {
      std::stringstream bbuf;
      singles[b].save_json(bbuf);
      doc["blocks"].push_back(nlohmann::json::parse(bbuf.str())["blocks"][0]);
    }
  }
  std::stringstream combined(doc.dump());
  const FlowStack stack = FlowStack::load_json(combined);
  const auto [z, ld] = stack.forward(x, ctx);
  CHECK((z - cur).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ld == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("parameter files round trip and reject bad input") {
  const FlowStack stack = FlowStack::random(25, 8, 21, 2024);
  std::stringstream buf;
  stack.save_json(buf);
  const FlowStack back = FlowStack::load_json(buf);
  Rng rng(33);
  const VecX ctx = random_vec(8, rng);
  for (int i = 0; i < 20; ++i) {
    const VecX x = random_vec(25, rng);
    const auto [za, la] = stack.forward(x, ctx);
    const auto [zb, lb] = back.forward(x, ctx);
    CHECK((za - zb).norm() == 0.0);
    CHECK(la == lb);
  }

  std::stringstream junk("{\"format\":\"something-else\"}");
  CHECK_THROWS_AS(FlowStack::load_json(junk), ParseError);
  std::stringstream vjunk("{\"format\":\"dexgrasp-flow\",\"version\":9}");
  CHECK_THROWS_AS(FlowStack::load_json(vjunk), ParseError);

  VecX wrong_ctx(3);
  wrong_ctx.setZero();
  CHECK_THROWS_AS(stack.forward(random_vec(25, rng), wrong_ctx), InvalidInputError);
  CHECK_THROWS_AS(stack.forward(random_vec(7, rng), ctx), InvalidInputError);
}

TEST_CASE("context changes the conditional transform") {
  const FlowStack stack = FlowStack::random(6, 4, 21, 77);
  Rng rng(35);
  const VecX x = random_vec(6, rng);
  const VecX c1 = random_vec(4, rng), c2 = random_vec(4, rng);
  const auto [z1, l1] = stack.forward(x, c1);
  const auto [z2, l2] = stack.forward(x, c2);
  CHECK((z1 - z2).norm() > 1e-6);
}
