//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_ROT3_HPP_
#define RIGIDFLOW_ROT3_HPP_

#include <vector>

#include <Eigen/Dense>

#include "rigidflow/rng.hpp"

namespace rigidflow {

// Row-major N x 3 point sets. Atom coordinates are row vectors and rotations
// act from the right: y = p * R + x.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/**
 * A proper rotation matrix.
 *
 * Every constructor path ends in a matrix with R^T R = I and det R = +1 up to
 * floating-point round-off. Compositions re-project onto SO(3) through the
 * polar decomposition as soon as the orthogonality defect exceeds
 * kDriftTolerance, so long operation chains do not drift.
 */
class Rotation {
public:
  static constexpr double kDriftTolerance = 1e-12;

  Rotation(): m_(Eigen::Matrix3d::Identity()) { }

  static Rotation identity() { return {}; }

  // Projects an approximately orthogonal matrix onto SO(3).
  static Rotation from_matrix(const Eigen::Matrix3d &m);

  // Unit quaternion (w, x, y, z) to matrix, Hamilton convention:
  // the column-vector rotation v -> q v q*. The input need not be normalised.
  static Rotation from_quaternion(double w, double x, double y, double z);

  // Rotation by `angle` radians about `axis` (Rodrigues form of exp(angle *
  // axis^)). The axis is normalised internally.
  static Rotation about_axis(const Eigen::Vector3d &axis, double angle);

  const Eigen::Matrix3d &matrix() const { return m_; }

  Rotation transpose() const { return Rotation(m_.transpose(), Tag {}); }
  Rotation inverse() const { return transpose(); }

  Rotation operator*(const Rotation &other) const;

  // Frobenius norm of R^T R - I.
  double orthogonality_defect() const;

private:
  struct Tag { };
  Rotation(const Eigen::Matrix3d &m, Tag): m_(m) { }

  Eigen::Matrix3d m_;
};

// Body-frame axis-angle coefficients of a tangent vector at `base`; the
// tangent matrix is base * hat(w).
struct TangentVec {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  Rotation base;
};

struct RigidFrame {
  Rotation rot;
  Eigen::Vector3d trans = Eigen::Vector3d::Zero();

  // P * R + 1 x^T
  Points apply(const Points &pose) const;
};

Eigen::Matrix3d hat(const Eigen::Vector3d &w);
Eigen::Vector3d vee(const Eigen::Matrix3d &m);

// Lie-group exponential and logarithm at the identity.
Eigen::Matrix3d exp_so3(const Eigen::Vector3d &w);
// Throws AngleNearPi when the rotation angle is within kCutLocusEpsilon of pi.
Eigen::Vector3d log_so3(const Eigen::Matrix3d &r);

constexpr double kCutLocusEpsilon = 1e-6;

// Polar projection onto SO(3) via SVD.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d &m);

// Rotation angle in [0, pi], computed as atan2(|vee(R - R^T)|/2, (tr R - 1)/2)
// which equals the clamped arccos of the trace formula but keeps full
// precision near 0 and pi.
double rotation_angle(const Eigen::Matrix3d &r);

Rotation exp_at(const Rotation &base, const TangentVec &v);
Rotation exp_at(const Rotation &base, const Eigen::Vector3d &w);
TangentVec log_at(const Rotation &base, const Rotation &target);
Rotation geodesic(const Rotation &r0, const Rotation &r1, double t);
double geodesic_dist(const Rotation &a, const Rotation &b);

// <U, V>_R = Tr(U^T V) / 2 on tangent matrices.
double so3_inner(const Eigen::Matrix3d &u, const Eigen::Matrix3d &v);
double so3_norm(const Eigen::Matrix3d &u);

// Haar-uniform rotation from a normalised 4D Gaussian quaternion.
Rotation sample_uniform_so3(Rng &rng);

}  // namespace rigidflow

#endif  // RIGIDFLOW_ROT3_HPP_
