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
#include <vector>

namespace dexgrasp {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Conditioner of the affine coupling layer: a fixed two-layer tanh MLP
/// mapping (pass-through half, context) to (log s, b). Deterministic; each
/// output half has floor(D/2) entries.
struct CouplingConditioner {
  MatX w1;
  VecX b1;
  MatX w2;
  VecX b2;

  void evaluate(const VecX& x_pass, const VecX& context, VecX& log_s, VecX& b) const;
  static CouplingConditioner zeros(int pass_dim, int context_dim, int out_half,
                                   int hidden);
  static CouplingConditioner random(int pass_dim, int context_dim, int out_half,
                                    int hidden, std::uint64_t seed);
};

/// Per-dimension affine normalization f(x) = x / sigma + mu.
struct ActNorm {
  VecX mu;
  VecX sigma;  // > 0 elementwise
};

/// Invertible linear map W = P L (U + S): P a permutation, L unit lower
/// triangular (stored as its strict part), U strictly upper triangular,
/// S = diag(exp(log_s)).
struct InvertibleLinear {
  std::vector<int> perm;  // z_i = u_{perm[i]}
  MatX l;                 // strictly lower part; the unit diagonal is implicit
  MatX u;                 // strictly upper triangular
  VecX log_s;
};

struct FlowBlock {
  ActNorm actnorm;
  InvertibleLinear linear;
  CouplingConditioner coupling;
};

/// Glow-style bijection stack on R^D conditioned on an external context
/// vector; exact log-determinants, no training. Forward is the normalizing
/// direction x -> z with a standard-normal base.
class FlowStack {
 public:
  FlowStack(int dim, int context_dim, std::vector<FlowBlock> blocks);

  static FlowStack identity(int dim, int context_dim = 0, int n_blocks = 21);
  static FlowStack random(int dim, int context_dim, int n_blocks, std::uint64_t seed,
                          int hidden = 64);

  int dim() const { return dim_; }
  int context_dim() const { return context_dim_; }
  std::size_t block_count() const { return blocks_.size(); }
  /// log-scale outputs of the coupling are clamped to this magnitude.
  static constexpr double kLogScaleClamp = 8.0;

  /// x -> z, returning log|det d z / d x|.
  std::pair<VecX, double> forward(const VecX& x, const VecX& context) const;
  /// z -> x, returning log|det d x / d z| (the negative of forward's).
  std::pair<VecX, double> inverse(const VecX& z, const VecX& context) const;
  /// log N(forward(x); 0, I) + forward logdet.
  double log_prob(const VecX& x, const VecX& context) const;
  /// x = inverse(z), z ~ N(0, I); deterministic per seed.
  std::vector<VecX> sample(const VecX& context, std::uint64_t rng_seed,
                           std::size_t n) const;

  void save_json(std::ostream& out) const;
  static FlowStack load_json(std::istream& in);

 private:
  void check_context(const VecX& context) const;

  int dim_;
  int context_dim_;
  std::vector<FlowBlock> blocks_;
};

}  // namespace dexgrasp
