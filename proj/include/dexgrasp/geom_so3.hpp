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

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A rotation in SO(3), stored as an orthonormal 3x3 matrix with det +1.
/// Construction validates the invariants (orthonormality and determinant
/// within 1e-9); factory methods build from quaternions, Euler angles,
/// axis-angle, or tangent vectors.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }
  /// Quaternion in (w, x, y, z) order; normalized internally.
  static Rotation from_quaternion(double w, double x, double y, double z);
  /// Roll-pitch-yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Rotation from_euler(double roll, double pitch, double yaw);
  static Rotation about_axis(const Vec3& axis, double angle);
  /// Exponential map of a tangent vector (axis * angle).
  static Rotation exp(const Vec3& omega);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(Mat3(m_.transpose())); }
  Rotation operator*(const Rotation& o) const { return Rotation(Mat3(m_ * o.m_)); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// (w, x, y, z), w >= 0.
  Eigen::Vector4d quaternion() const;
  /// (roll, pitch, yaw) inverse of from_euler; roll forced to 0 at the
  /// pitch = +-pi/2 singularity.
  Vec3 euler() const;
  /// Logarithm map: tangent vector with |omega| = rotation angle.
  Vec3 log() const;

  bool approx_equal(const Rotation& o, double tol = 1e-9) const {
    return (m_ - o.m_).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  Mat3 m_;
};

/// Rigid transform (rotation + translation in meters).
struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  RigidTransform() = default;
  RigidTransform(const Rotation& r, const Vec3& t);

  Vec3 operator*(const Vec3& p) const {
    return rotation * p + translation;
  }
  RigidTransform operator*(const RigidTransform& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }
  RigidTransform inverse() const {
    Rotation ri = rotation.inverse();
    return {ri, ri * Vec3(-translation)};
  }
  static RigidTransform identity() { return {}; }
};

/// Geodesic angle between two rotations, in [0, pi].
double geodesic_angle(const Rotation& a, const Rotation& b);

/// Equivolumetric partition of SO(3): M rotations, one per cell, each cell
/// of Haar volume pi^2 / M. Built by make_grid from the Hopf-fibration
/// product of a HEALPix sphere partition and a uniform circle partition.
class So3Grid {
 public:
  So3Grid(std::vector<Rotation> rotations, int level);

  std::size_t size() const { return rotations_.size(); }
  double cell_volume() const;
  int level() const { return level_; }
  const Rotation& rotation(std::size_t i) const { return rotations_[i]; }
  const std::vector<Rotation>& rotations() const { return rotations_; }

  /// Index of the cell whose rotation is geodesically nearest to r.
  std::size_t nearest_cell(const Rotation& r) const;

  /// CSV export: header line "M=<count> V=<volume>", then one w,x,y,z
  /// quaternion per row.
  void write_csv(std::ostream& out) const;
  static So3Grid read_csv(std::istream& in);

 private:
  std::vector<Rotation> rotations_;
  int level_;
};

/// Hopf-fibration grid with 72 * 8^level cells. Levels above 5 exceed the
/// supported size and raise CapacityError.
So3Grid make_grid(int resolution_level);

/// Normalized density over an So3Grid. Probabilities are per-volume values
/// (density = cell mass / V), so sum_i p_i * V = 1.
class So3GridDensity {
 public:
  So3GridDensity(const So3Grid* grid, std::vector<double> log_scores);

  const So3Grid& grid() const { return *grid_; }
  const std::vector<double>& log_scores() const { return log_scores_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  /// Cell mass  p_i * V  (softmax of the scores).
  double cell_mass(std::size_t i) const;

 private:
  const So3Grid* grid_;
  std::vector<double> log_scores_;
  std::vector<double> probabilities_;
};

/// p_i = softmax(log_scores)_i / V. Throws InvalidInputError on non-finite
/// scores or a length mismatch.
So3GridDensity normalize(const So3Grid& grid, const std::vector<double>& log_scores);

/// Negative log density of the cell nearest to r.
double nll(const So3GridDensity& density, const Rotation& r);

/// n i.i.d. draws from the categorical distribution over cells.
std::vector<Rotation> sample(const So3GridDensity& density, std::uint64_t rng_seed,
                             std::size_t n);

/// Chordal L2 mean: argmin_R sum ||R - R_i||_F^2, via the orthogonal polar
/// factor of the arithmetic mean with determinant correction. Throws
/// DegenerateInputError when the mean matrix has rank < 2.
Rotation chordal_mean(const std::vector<Rotation>& rotations);

/// Root-mean-square geodesic angle (degrees) from each sample to the
/// chordal mean.
double rotation_std(const std::vector<Rotation>& rotations);

/// Uniform Haar rotation drawn from the stream.
class Rng;
Rotation haar_rotation(Rng& rng);

}  // namespace dexgrasp
