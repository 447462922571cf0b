//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_FLOW_CONT_HPP_
#define RIGIDFLOW_FLOW_CONT_HPP_

#include <vector>

#include "rigidflow/rng.hpp"
#include "rigidflow/rot3.hpp"

namespace rigidflow {

using Frames = std::vector<RigidFrame>;
// Body-frame rotation velocities or translation velocities, one per frame.
using Velocities = std::vector<Eigen::Vector3d>;

// Training times are drawn from U(0, 1 - kTimeEpsilon).
inline constexpr double kTimeEpsilon = 1e-3;
// Size of the random kick applied to R0 when R0 and the target are antipodal.
inline constexpr double kAntipodalKick = 1e-3;

struct RotSchedule {
  enum class Kind { kConstant, kExponential };
  Kind kind = Kind::kConstant;
  double c = 10.0;

  // Multiplier on the rotation velocity; integrates to 1 over [0, 1].
  double g(double t) const;
  static RotSchedule constant() { return {}; }
  static RotSchedule exponential(double c = 10.0) {
    return { Kind::kExponential, c };
  }
};

struct FramePathSample {
  double t = 0;
  Frames frames0;
  // Targets after symmetry alignment.
  Frames frames1;
  Frames frames_t;
  Velocities target_rot_vel;
  Velocities target_trans_vel;

  int size() const { return static_cast<int>(frames_t.size()); }
};

// Standard normal translations, Haar rotations.
Frames sample_prior(int k, Rng &rng);

double sample_time(Rng &rng);

/**
 * Conditional field toward `frames1` at time t < 1: log_{R_t}(R_1) / (1 - t)
 * in body coefficients, and (x_1 - x_t) / (1 - t), which equals x_1 - x_0 on
 * the path. Throws AngleNearPi if a pair is antipodal.
 */
void conditional_velocity(const Frames &frames_t, const Frames &frames1, double t,
                          Velocities &rot_vel, Velocities &trans_vel);

// S* R1 with S* maximising Tr(R_t^T S R1); ties keep the earlier element.
Rotation align_target_rotation(const Rotation &rt, const Rotation &r1,
                               const std::vector<Rotation> &sym);

/**
 * Interpolants and velocity targets at time t. Each target rotation is
 * aligned to the prior rotation through its symmetry group. An antipodal pair
 * gets R0 kicked by a kAntipodalKick rotation drawn from `rng`.
 */
FramePathSample make_training_target(Frames frames0, const Frames &frames1,
                                     const std::vector<std::vector<Rotation>> &syms,
                                     double t, Rng &rng);

// Sum of squared translation and rotation-coefficient errors.
double se3_loss(const Velocities &pred_rot_vel, const Velocities &pred_trans_vel,
                const FramePathSample &sample);

// One Euler step: R <- R exp(h g(t) w^), x <- x + h v.
Frames integrate_step(const Frames &frames, const Velocities &rot_vel,
                      const Velocities &trans_vel, double t, double h,
                      const RotSchedule &sched);

}  // namespace rigidflow

#endif  // RIGIDFLOW_FLOW_CONT_HPP_
