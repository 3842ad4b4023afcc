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

#include "dexgrasp/flow_bijector.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/rng.hpp"

namespace dexgrasp {

using nlohmann::json;

void CouplingConditioner::evaluate(const VecX& x_pass, const VecX& context,
                                   VecX& log_s, VecX& b) const {
  VecX in(x_pass.size() + context.size());
  in << x_pass, context;
  const VecX hidden = (w1 * in + b1).array().tanh();
  const VecX out = w2 * hidden + b2;
  const int half = static_cast<int>(out.size()) / 2;
  log_s = out.head(half);
  b = out.tail(half);
}

CouplingConditioner CouplingConditioner::zeros(int pass_dim, int context_dim,
                                               int out_half, int hidden) {
  CouplingConditioner c;
  c.w1 = MatX::Zero(hidden, pass_dim + context_dim);
  c.b1 = VecX::Zero(hidden);
  c.w2 = MatX::Zero(2 * out_half, hidden);
  c.b2 = VecX::Zero(2 * out_half);
  return c;
}

CouplingConditioner CouplingConditioner::random(int pass_dim, int context_dim,
                                                int out_half, int hidden,
                                                std::uint64_t seed) {
  Rng rng(seed);
  CouplingConditioner c = zeros(pass_dim, context_dim, out_half, hidden);
  const double s1 = 1.0 / std::sqrt(std::max(1, pass_dim + context_dim));
  const double s2 = 0.5 / std::sqrt(std::max(1, hidden));
  for (int i = 0; i < c.w1.rows(); ++i) {
    for (int j = 0; j < c.w1.cols(); ++j) c.w1(i, j) = s1 * rng.gaussian();
  }
  for (int i = 0; i < c.b1.size(); ++i) c.b1[i] = 0.1 * rng.gaussian();
  for (int i = 0; i < c.w2.rows(); ++i) {
    for (int j = 0; j < c.w2.cols(); ++j) c.w2(i, j) = s2 * rng.gaussian();
  }
  for (int i = 0; i < c.b2.size(); ++i) c.b2[i] = 0.05 * rng.gaussian();
  return c;
}

FlowStack::FlowStack(int dim, int context_dim, std::vector<FlowBlock> blocks)
    : dim_(dim), context_dim_(context_dim), blocks_(std::move(blocks)) {
  if (dim_ < 1) throw InvalidInputError("FlowStack: dimension must be >= 1");
  for (const FlowBlock& blk : blocks_) {
    if (blk.actnorm.mu.size() != dim_ || blk.actnorm.sigma.size() != dim_ ||
        blk.linear.l.rows() != dim_ || static_cast<int>(blk.linear.perm.size()) != dim_) {
      throw InvalidInputError("FlowStack: block parameter dimensions do not match");
    }
    if (blk.actnorm.sigma.minCoeff() <= 0.0) {
      throw InvalidInputError("FlowStack: actnorm sigma must be positive");
    }
  }
}

void FlowStack::check_context(const VecX& context) const {
  if (context.size() != context_dim_) {
    throw InvalidInputError("FlowStack: context dimension mismatch");
  }
}

namespace {

int pass_dim_of(int dim) { return (dim + 1) / 2; }  // first ceil(D/2) pass through

double clamp_log_s(double v) {
  return std::clamp(v, -FlowStack::kLogScaleClamp, FlowStack::kLogScaleClamp);
}

VecX apply_linear(const InvertibleLinear& lin, const VecX& x) {
  const int d = static_cast<int>(x.size());
  VecX v = lin.u * x;
  for (int i = 0; i < d; ++i) v[i] += std::exp(lin.log_s[i]) * x[i];
  const VecX u = lin.l * v + v;  // l is stored strictly lower; unit diagonal added here
  VecX z(d);
  for (int i = 0; i < d; ++i) z[i] = u[lin.perm[i]];
  return z;
}

VecX solve_linear(const InvertibleLinear& lin, const VecX& z) {
  const int d = static_cast<int>(z.size());
  VecX u(d);
  for (int i = 0; i < d; ++i) u[lin.perm[i]] = z[i];
  // Forward substitution for (I + L_strict) v = u.
  VecX v(d);
  for (int i = 0; i < d; ++i) {
    double acc = u[i];
    for (int j = 0; j < i; ++j) acc -= lin.l(i, j) * v[j];
    v[i] = acc;
  }
  // Back substitution for (U_strict + S) x = v.
  VecX x(d);
  for (int i = d - 1; i >= 0; --i) {
    double acc = v[i];
    for (int j = i + 1; j < d; ++j) acc -= lin.u(i, j) * x[j];
    x[i] = acc / std::exp(lin.log_s[i]);
  }
  return x;
}

}  // namespace

std::pair<VecX, double> FlowStack::forward(const VecX& x, const VecX& context) const {
  if (x.size() != dim_) throw InvalidInputError("FlowStack::forward: dimension mismatch");
  check_context(context);
  VecX cur = x;
  double logdet = 0.0;
  const int pass = pass_dim_of(dim_);
  for (const FlowBlock& blk : blocks_) {
    // ActNorm: z = x / sigma + mu.
    cur = (cur.array() / blk.actnorm.sigma.array()).matrix() + blk.actnorm.mu;
    logdet -= blk.actnorm.sigma.array().log().sum();
    // Invertible linear.
    cur = apply_linear(blk.linear, cur);
    logdet += blk.linear.log_s.sum();
    // Affine coupling on the trailing half.
    if (dim_ - pass > 0) {
      VecX log_s, b;
      blk.coupling.evaluate(cur.head(pass), context, log_s, b);
      for (int i = 0; i < dim_ - pass; ++i) {
        const double ls = clamp_log_s(log_s[i]);
        cur[pass + i] = std::exp(ls) * cur[pass + i] + b[i];
        logdet += ls;
      }
    }
  }
  return {cur, logdet};
}

std::pair<VecX, double> FlowStack::inverse(const VecX& z, const VecX& context) const {
  if (z.size() != dim_) throw InvalidInputError("FlowStack::inverse: dimension mismatch");
  check_context(context);
  VecX cur = z;
  double logdet = 0.0;
  const int pass = pass_dim_of(dim_);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) {
    const FlowBlock& blk = *it;
    if (dim_ - pass > 0) {
      VecX log_s, b;
      blk.coupling.evaluate(cur.head(pass), context, log_s, b);
      for (int i = 0; i < dim_ - pass; ++i) {
        const double ls = clamp_log_s(log_s[i]);
        cur[pass + i] = (cur[pass + i] - b[i]) * std::exp(-ls);
        logdet -= ls;
      }
    }
    cur = solve_linear(blk.linear, cur);
    logdet -= blk.linear.log_s.sum();
    cur = ((cur - blk.actnorm.mu).array() * blk.actnorm.sigma.array()).matrix();
    logdet += blk.actnorm.sigma.array().log().sum();
  }
  return {cur, logdet};
}

double FlowStack::log_prob(const VecX& x, const VecX& context) const {
  const auto [z, logdet] = forward(x, context);
  const double log_base = -0.5 * z.squaredNorm() -
                          0.5 * dim_ * std::log(2.0 * std::numbers::pi);
  return log_base + logdet;
}

std::vector<VecX> FlowStack::sample(const VecX& context, std::uint64_t rng_seed,
                                    std::size_t n) const {
  check_context(context);
  Rng rng(rng_seed);
  std::vector<VecX> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    VecX z(dim_);
    for (int j = 0; j < dim_; ++j) z[j] = rng.gaussian();
    out.push_back(inverse(z, context).first);
  }
  return out;
}

FlowStack FlowStack::identity(int dim, int context_dim, int n_blocks) {
  std::vector<FlowBlock> blocks;
  const int pass = pass_dim_of(dim);
  for (int b = 0; b < n_blocks; ++b) {
    FlowBlock blk;
    blk.actnorm.mu = VecX::Zero(dim);
    blk.actnorm.sigma = VecX::Ones(dim);
    blk.linear.perm.resize(dim);
    std::iota(blk.linear.perm.begin(), blk.linear.perm.end(), 0);
    blk.linear.l = MatX::Zero(dim, dim);
    blk.linear.u = MatX::Zero(dim, dim);
    blk.linear.log_s = VecX::Zero(dim);
    blk.coupling = CouplingConditioner::zeros(pass, context_dim, dim - pass, 8);
    blocks.push_back(std::move(blk));
  }
  return FlowStack(dim, context_dim, std::move(blocks));
}

FlowStack FlowStack::random(int dim, int context_dim, int n_blocks,
                            std::uint64_t seed, int hidden) {
  Rng rng(seed);
  std::vector<FlowBlock> blocks;
  const int pass = pass_dim_of(dim);
  for (int b = 0; b < n_blocks; ++b) {
    FlowBlock blk;
    blk.actnorm.mu = VecX::Zero(dim);
    blk.actnorm.sigma = VecX::Ones(dim);
    for (int i = 0; i < dim; ++i) {
      blk.actnorm.mu[i] = 0.2 * rng.gaussian();
      blk.actnorm.sigma[i] = std::exp(0.2 * rng.gaussian());
    }
    blk.linear.perm.resize(dim);
    std::iota(blk.linear.perm.begin(), blk.linear.perm.end(), 0);
    for (int i = dim - 1; i > 0; --i) {
      std::swap(blk.linear.perm[i], blk.linear.perm[rng.uniform_index(i + 1)]);
    }
    blk.linear.l = MatX::Zero(dim, dim);
    blk.linear.u = MatX::Zero(dim, dim);
    const double scale = 0.3 / std::sqrt(static_cast<double>(dim));
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < i; ++j) blk.linear.l(i, j) = scale * rng.gaussian();
      for (int j = i + 1; j < dim; ++j) blk.linear.u(i, j) = scale * rng.gaussian();
    }
    blk.linear.log_s = VecX::Zero(dim);
    for (int i = 0; i < dim; ++i) blk.linear.log_s[i] = 0.1 * rng.gaussian();
    blk.coupling = CouplingConditioner::random(pass, context_dim, dim - pass, hidden,
                                               rng.next_u64());
    blocks.push_back(std::move(blk));
  }
  return FlowStack(dim, context_dim, std::move(blocks));
}

// ---------------------------------------------------------------------------
// Parameter file

namespace {

json matrix_to_json(const MatX& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatX matrix_from_json(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  MatX m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

json vector_to_json(const VecX& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

VecX vector_from_json(const json& j) {
  VecX v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

}  // namespace

void FlowStack::save_json(std::ostream& out) const {
  json doc;
  doc["format"] = "dexgrasp-flow";
  doc["version"] = 1;
  doc["dim"] = dim_;
  doc["context_dim"] = context_dim_;
  json blocks = json::array();
  for (const FlowBlock& blk : blocks_) {
    json b;
    b["actnorm"] = {{"mu", vector_to_json(blk.actnorm.mu)},
                    {"sigma", vector_to_json(blk.actnorm.sigma)}};
    b["linear"] = {{"perm", blk.linear.perm},
                   {"l", matrix_to_json(blk.linear.l)},
                   {"u", matrix_to_json(blk.linear.u)},
                   {"log_s", vector_to_json(blk.linear.log_s)}};
    b["coupling"] = {{"w1", matrix_to_json(blk.coupling.w1)},
                     {"b1", vector_to_json(blk.coupling.b1)},
                     {"w2", matrix_to_json(blk.coupling.w2)},
                     {"b2", vector_to_json(blk.coupling.b2)}};
    blocks.push_back(std::move(b));
  }
  doc["blocks"] = std::move(blocks);
  out << doc.dump(2) << "\n";
}

FlowStack FlowStack::load_json(std::istream& in) {
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError(std::string("flow parameter file: ") + e.what());
  }
  if (doc.value("format", "") != "dexgrasp-flow") {
    throw ParseError("flow parameter file: wrong format tag");
  }
  if (doc.value("version", 0) != 1) {
    throw ParseError("flow parameter file: unsupported version");
  }
  const int dim = doc.at("dim").get<int>();
  const int context_dim = doc.at("context_dim").get<int>();
  std::vector<FlowBlock> blocks;
  for (const json& b : doc.at("blocks")) {
    FlowBlock blk;
    blk.actnorm.mu = vector_from_json(b.at("actnorm").at("mu"));
    blk.actnorm.sigma = vector_from_json(b.at("actnorm").at("sigma"));
    blk.linear.perm = b.at("linear").at("perm").get<std::vector<int>>();
    blk.linear.l = matrix_from_json(b.at("linear").at("l"));
    blk.linear.u = matrix_from_json(b.at("linear").at("u"));
    blk.linear.log_s = vector_from_json(b.at("linear").at("log_s"));
    blk.coupling.w1 = matrix_from_json(b.at("coupling").at("w1"));
    blk.coupling.b1 = vector_from_json(b.at("coupling").at("b1"));
    blk.coupling.w2 = matrix_from_json(b.at("coupling").at("w2"));
    blk.coupling.b2 = vector_from_json(b.at("coupling").at("b2"));
    blocks.push_back(std::move(blk));
  }
  return FlowStack(dim, context_dim, std::move(blocks));
}

}  // namespace dexgrasp
