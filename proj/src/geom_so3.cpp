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

#include "dexgrasp/geom_so3.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dexgrasp/errors.hpp"
#include "dexgrasp/rng.hpp"

namespace dexgrasp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSo3Volume = kPi * kPi;

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

}  // namespace

Rotation::Rotation(const Mat3& m) : m_(m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho <= 1e-9)) {
    throw InvalidInputError("Rotation: matrix is not orthonormal (deviation " +
                            std::to_string(ortho) + ")");
  }
  if (!(std::abs(m.determinant() - 1.0) <= 1e-9)) {
    throw InvalidInputError("Rotation: determinant is not +1");
  }
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw InvalidInputError("Rotation::from_quaternion: zero or non-finite quaternion");
  }
  Eigen::Quaterniond q(w / n, x / n, y / n, z / n);
  return Rotation(q.toRotationMatrix());
}

Rotation Rotation::from_euler(double roll, double pitch, double yaw) {
  Mat3 m = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
            Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(roll, Vec3::UnitX()))
               .toRotationMatrix();
  return Rotation(m);
}

Rotation Rotation::about_axis(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) throw InvalidInputError("Rotation::about_axis: zero axis");
  return Rotation(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix());
}

Rotation Rotation::exp(const Vec3& omega) {
  const double theta = omega.norm();
  if (theta < 1e-12) {
    // Second-order series; exact to double precision at this scale.
    Mat3 s = skew(omega);
    Mat3 m = Mat3::Identity() + s + 0.5 * s * s;
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    return Rotation(r);
  }
  return Rotation(Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix());
}

Eigen::Vector4d Rotation::quaternion() const {
  Eigen::Quaterniond q(m_);
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  return {q.w(), q.x(), q.y(), q.z()};
}

Vec3 Rotation::euler() const {
  // R = Rz(yaw) Ry(pitch) Rx(roll); m_(2,0) = -sin(pitch).
  const double sp = -m_(2, 0);
  if (std::abs(sp) > 1.0 - 1e-12) {
    const double pitch = std::copysign(kPi / 2.0, sp);
    // Gimbal lock: fold everything into yaw.
    const double yaw = std::atan2(-m_(0, 1), m_(1, 1));
    return {0.0, pitch, yaw};
  }
  const double pitch = std::asin(sp);
  const double roll = std::atan2(m_(2, 1), m_(2, 2));
  const double yaw = std::atan2(m_(1, 0), m_(0, 0));
  return {roll, pitch, yaw};
}

Vec3 Rotation::log() const {
  Eigen::AngleAxisd aa(m_);
  double angle = aa.angle();
  Vec3 axis = aa.axis();
  if (angle > kPi) {  // Eigen may return angle in [0, 2pi)
    angle = 2.0 * kPi - angle;
    axis = -axis;
  }
  return axis * angle;
}

RigidTransform::RigidTransform(const Rotation& r, const Vec3& t)
    : rotation(r), translation(t) {
  if (!translation.allFinite()) {
    throw InvalidInputError("RigidTransform: non-finite translation");
  }
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
  // acos(0.5 (trace(a b^T) - 1)) evaluated through the quaternion
  // half-angle, which stays conditioned near 0 and pi.
  const Eigen::Quaterniond qa(a.matrix()), qb(b.matrix());
  const Eigen::Quaterniond rel = qa * qb.conjugate();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

So3Grid::So3Grid(std::vector<Rotation> rotations, int level)
    : rotations_(std::move(rotations)), level_(level) {
  if (rotations_.empty()) throw InvalidInputError("So3Grid: empty rotation set");
}

double So3Grid::cell_volume() const {
  return kSo3Volume / static_cast<double>(rotations_.size());
}

std::size_t So3Grid::nearest_cell(const Rotation& r) const {
  // Geodesic distance is monotone in |<q, q_i>|, so compare quaternion dots.
  const Eigen::Vector4d q = r.quaternion();
  std::size_t best = 0;
  double best_dot = -1.0;
  for (std::size_t i = 0; i < rotations_.size(); ++i) {
    const double d = std::abs(q.dot(rotations_[i].quaternion()));
    if (d > best_dot) {
      best_dot = d;
      best = i;
    }
  }
  return best;
}

void So3Grid::write_csv(std::ostream& out) const {
  out << "M=" << rotations_.size() << " V=";
  out.precision(17);
  out << cell_volume() << "\n";
  for (const Rotation& r : rotations_) {
    const Eigen::Vector4d q = r.quaternion();
    out << q[0] << "," << q[1] << "," << q[2] << "," << q[3] << "\n";
  }
}

So3Grid So3Grid::read_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("M=", 0) != 0) {
    throw ParseError("So3Grid::read_csv: missing 'M=' header");
  }
  std::size_t count = std::stoull(header.substr(2));
  std::vector<Rotation> rotations;
  rotations.reserve(count);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double w, x, y, z;
    if (!(ls >> w >> x >> y >> z)) {
      throw ParseError("So3Grid::read_csv: bad quaternion row: " + line);
    }
    rotations.push_back(Rotation::from_quaternion(w, x, y, z));
  }
  if (rotations.size() != count) {
    throw ParseError("So3Grid::read_csv: row count does not match header");
  }
  // Level is not recoverable in general; -1 marks an imported grid.
  return So3Grid(std::move(rotations), -1);
}

namespace {

// HEALPix ring-scheme pixel centers for a given nside: 12 nside^2 equal-area
// cells on S^2 (Gorski et al. 2005).
std::vector<Eigen::Vector2d> healpix_centers(int nside) {
  std::vector<Eigen::Vector2d> cells;  // (z, phi)
  cells.reserve(static_cast<std::size_t>(12) * nside * nside);
  // North polar cap.
  for (int i = 1; i < nside; ++i) {
    const double z = 1.0 - static_cast<double>(i) * i / (3.0 * nside * nside);
    for (int j = 1; j <= 4 * i; ++j) {
      cells.push_back({z, kPi / (2.0 * i) * (j - 0.5)});
    }
  }
  // Equatorial belt (rings nside..3*nside).
  for (int i = nside; i <= 3 * nside; ++i) {
    const double z = 4.0 / 3.0 - 2.0 * i / (3.0 * nside);
    const int s = (i - nside + 1) % 2;
    for (int j = 1; j <= 4 * nside; ++j) {
      cells.push_back({z, kPi / (2.0 * nside) * (j - 0.5 * s)});
    }
  }
  // South polar cap mirrors the north.
  for (int i = nside - 1; i >= 1; --i) {
    const double z = 1.0 - static_cast<double>(i) * i / (3.0 * nside * nside);
    for (int j = 1; j <= 4 * i; ++j) {
      cells.push_back({-z, kPi / (2.0 * i) * (j - 0.5)});
    }
  }
  return cells;
}

// Hopf map: sphere cell (theta, phi) x circle angle psi -> unit quaternion.
Rotation hopf_rotation(double theta, double phi, double psi) {
  const double ct = std::cos(theta / 2.0), st = std::sin(theta / 2.0);
  return Rotation::from_quaternion(ct * std::cos(psi / 2.0), ct * std::sin(psi / 2.0),
                                   st * std::cos(phi + psi / 2.0),
                                   st * std::sin(phi + psi / 2.0));
}

}  // namespace

So3Grid make_grid(int resolution_level) {
  if (resolution_level < 0) throw InvalidInputError("make_grid: negative level");
  if (resolution_level > 5) {
    throw CapacityError("make_grid: level " + std::to_string(resolution_level) +
                        " exceeds the 72*8^5-cell capacity");
  }
  const int nside = 1 << resolution_level;
  const int circle = 6 * nside;
  std::vector<Rotation> rotations;
  rotations.reserve(static_cast<std::size_t>(12) * nside * nside * circle);
  for (const auto& cell : healpix_centers(nside)) {
    const double theta = std::acos(std::clamp(cell[0], -1.0, 1.0));
    for (int k = 0; k < circle; ++k) {
      const double psi = 2.0 * kPi * (k + 0.5) / circle;
      rotations.push_back(hopf_rotation(theta, cell[1], psi));
    }
  }
  return So3Grid(std::move(rotations), resolution_level);
}

So3GridDensity::So3GridDensity(const So3Grid* grid, std::vector<double> log_scores)
    : grid_(grid), log_scores_(std::move(log_scores)) {
  if (log_scores_.size() != grid_->size()) {
    throw InvalidInputError("So3GridDensity: score count != grid size");
  }
  double max_score = -std::numeric_limits<double>::infinity();
  for (double s : log_scores_) {
    if (!std::isfinite(s)) {
      throw InvalidInputError("So3GridDensity: non-finite log score");
    }
    max_score = std::max(max_score, s);
  }
  probabilities_.resize(log_scores_.size());
  // Kahan-compensated partition sum.
  double sum = 0.0, carry = 0.0;
  for (std::size_t i = 0; i < log_scores_.size(); ++i) {
    probabilities_[i] = std::exp(log_scores_[i] - max_score);
    const double y = probabilities_[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  const double inv_v = 1.0 / grid_->cell_volume();
  for (double& p : probabilities_) p = p / sum * inv_v;
}

double So3GridDensity::cell_mass(std::size_t i) const {
  return probabilities_[i] * grid_->cell_volume();
}

So3GridDensity normalize(const So3Grid& grid, const std::vector<double>& log_scores) {
  return So3GridDensity(&grid, log_scores);
}

double nll(const So3GridDensity& density, const Rotation& r) {
  const std::size_t cell = density.grid().nearest_cell(r);
  return -std::log(density.probabilities()[cell]);
}

std::vector<Rotation> sample(const So3GridDensity& density, std::uint64_t rng_seed,
                             std::size_t n) {
  if (n == 0) throw InvalidInputError("sample: n must be >= 1");
  const std::size_t m = density.grid().size();
  std::vector<double> cdf(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    acc += density.cell_mass(i);
    cdf[i] = acc;
  }
  cdf[m - 1] = 1.0;  // close the cdf against rounding
  Rng rng(rng_seed);
  std::vector<Rotation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t cell = std::min<std::size_t>(it - cdf.begin(), m - 1);
    out.push_back(density.grid().rotation(cell));
  }
  return out;
}

Rotation chordal_mean(const std::vector<Rotation>& rotations) {
  if (rotations.empty()) throw InvalidInputError("chordal_mean: empty sample");
  Mat3 mean = Mat3::Zero();
  for (const Rotation& r : rotations) mean += r.matrix();
  mean /= static_cast<double>(rotations.size());
  Eigen::JacobiSVD<Mat3> svd(mean, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv[1] < 1e-12) {
    throw DegenerateInputError("chordal_mean: mean matrix has rank < 2");
  }
  Mat3 uv = svd.matrixU() * svd.matrixV().transpose();
  Mat3 proj = svd.matrixU() *
              Eigen::DiagonalMatrix<double, 3>(1.0, 1.0, uv.determinant()) *
              svd.matrixV().transpose();
  return Rotation(proj);
}

double rotation_std(const std::vector<Rotation>& rotations) {
  if (rotations.empty()) throw InvalidInputError("rotation_std: empty sample");
  const Rotation mean = chordal_mean(rotations);
  double sq = 0.0;
  for (const Rotation& r : rotations) {
    const double a = geodesic_angle(r, mean);
    sq += a * a;
  }
  return std::sqrt(sq / rotations.size()) * 180.0 / kPi;
}

Rotation haar_rotation(Rng& rng) {
  // Shoemake's uniform quaternion construction.
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  return Rotation::from_quaternion(a * std::sin(2 * kPi * u2), a * std::cos(2 * kPi * u2),
                                   b * std::sin(2 * kPi * u3), b * std::cos(2 * kPi * u3));
}

}  // namespace dexgrasp
