//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/rot3.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "rigidflow/error.hpp"

namespace rigidflow {
namespace {
constexpr double kSmallAngle = 1e-4;
// Below this distance from pi the axis comes from the symmetric part.
constexpr double kNearPi = 1e-2;
}  // namespace

Rotation Rotation::from_matrix(const Eigen::Matrix3d &m) {
  Rotation r(m, Tag {});
  if (r.orthogonality_defect() > kDriftTolerance || m.determinant() < 0)
    r.m_ = orthonormalize(m);
  return r;
}

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0))
    fail(ErrorCode::kInvalidArgument, "zero quaternion");
  w /= n;
  x /= n;
  y /= n;
  z /= n;

  Eigen::Matrix3d m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return from_matrix(m);
}

Rotation Rotation::about_axis(const Eigen::Vector3d &axis, double angle) {
  return Rotation(exp_so3(axis.normalized() * angle), Tag {});
}

Rotation Rotation::operator*(const Rotation &other) const {
  Rotation r(m_ * other.m_, Tag {});
  if (r.orthogonality_defect() > kDriftTolerance)
    r.m_ = orthonormalize(r.m_);
  return r;
}

double Rotation::orthogonality_defect() const {
  return (m_.transpose() * m_ - Eigen::Matrix3d::Identity()).norm();
}

Points RigidFrame::apply(const Points &pose) const {
  Points out = pose * rot.matrix();
  out.rowwise() += trans.transpose();
  return out;
}

Eigen::Matrix3d hat(const Eigen::Vector3d &w) {
  Eigen::Matrix3d m;
  m << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return m;
}

Eigen::Vector3d vee(const Eigen::Matrix3d &m) {
  return { m(2, 1), m(0, 2), m(1, 0) };
}

Eigen::Matrix3d exp_so3(const Eigen::Vector3d &w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Eigen::Matrix3d k = hat(w);

  double a, b;
  if (theta < kSmallAngle) {
    a = 1 - theta2 / 6 + theta2 * theta2 / 120;
    b = 0.5 - theta2 / 24 + theta2 * theta2 / 720;
  } else {
    a = std::sin(theta) / theta;
    b = (1 - std::cos(theta)) / theta2;
  }
  return Eigen::Matrix3d::Identity() + a * k + b * k * k;
}

double rotation_angle(const Eigen::Matrix3d &r) {
  const double s = 0.5 * vee(r - r.transpose()).norm();
  const double c = 0.5 * (r.trace() - 1);
  return std::atan2(s, c);
}

Eigen::Vector3d log_so3(const Eigen::Matrix3d &r) {
  const Eigen::Vector3d s = 0.5 * vee(r - r.transpose());
  const double theta = rotation_angle(r);

  if (std::numbers::pi - theta < kCutLocusEpsilon)
    fail(ErrorCode::kAngleNearPi,
         "rotation angle within cut-locus tolerance of pi");

  if (theta < kSmallAngle) {
    // theta / sin(theta) to second order
    return (1 + theta * theta / 6) * s;
  }

  if (std::numbers::pi - theta < kNearPi) {
    const Eigen::Matrix3d sym = 0.5 * (r + r.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sym);
    // Eigenvalues ascend; the axis has eigenvalue 1, the others cos(theta).
    Eigen::Vector3d axis = eig.eigenvectors().col(2);
    if (axis.dot(s) < 0)
      axis = -axis;
    return theta * axis;
  }

  return (theta / std::sin(theta)) * s;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d &m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU
                                               | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0)
    u.col(2) = -u.col(2);
  return u * v.transpose();
}

Rotation exp_at(const Rotation &base, const Eigen::Vector3d &w) {
  return base * Rotation::from_matrix(exp_so3(w));
}

Rotation exp_at(const Rotation &base, const TangentVec &v) {
  return exp_at(base, v.w);
}

TangentVec log_at(const Rotation &base, const Rotation &target) {
  const Eigen::Matrix3d rel = base.matrix().transpose() * target.matrix();
  return { log_so3(rel), base };
}

Rotation geodesic(const Rotation &r0, const Rotation &r1, double t) {
  if (t == 0)
    return r0;
  if (t == 1)
    return r1;
  return exp_at(r0, t * log_at(r0, r1).w);
}

double geodesic_dist(const Rotation &a, const Rotation &b) {
  return rotation_angle(a.matrix().transpose() * b.matrix());
}

double so3_inner(const Eigen::Matrix3d &u, const Eigen::Matrix3d &v) {
  return 0.5 * (u.transpose() * v).trace();
}

double so3_norm(const Eigen::Matrix3d &u) {
  return std::sqrt(so3_inner(u, u));
}

Rotation sample_uniform_so3(Rng &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const double w = normal(rng), x = normal(rng), y = normal(rng),
                 z = normal(rng);
    if (w * w + x * x + y * y + z * z > 1e-300)
      return Rotation::from_quaternion(w, x, y, z);
  }
}

}  // namespace rigidflow
