//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/flow_cont.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rigidflow/error.hpp"

namespace rigidflow {

double RotSchedule::g(double t) const {
  if (kind == Kind::kConstant)
    return 1.0;
  return c * std::exp(-c * t) / -std::expm1(-c);
}

Frames sample_prior(int k, Rng &rng) {
  if (k < 1)
    fail(ErrorCode::kInvalidArgument, "sample_prior: K must be at least 1");
  std::normal_distribution<double> nd;
  Frames out(k);
  for (RigidFrame &f: out) {
    f.trans = Eigen::Vector3d(nd(rng), nd(rng), nd(rng));
    f.rot = sample_uniform_so3(rng);
  }
  return out;
}

double sample_time(Rng &rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0 - kTimeEpsilon)(rng);
}

void conditional_velocity(const Frames &frames_t, const Frames &frames1, double t,
                          Velocities &rot_vel, Velocities &trans_vel) {
  if (frames_t.size() != frames1.size())
    fail(ErrorCode::kShapeMismatch, "conditional_velocity: frame counts differ");
  if (!(t < 1))
    fail(ErrorCode::kInvalidArgument, "conditional_velocity: t must be below 1");
  const double inv = 1.0 / (1.0 - t);
  rot_vel.resize(frames_t.size());
  trans_vel.resize(frames_t.size());
  for (std::size_t k = 0; k < frames_t.size(); ++k) {
    // Relative rotation first, then the log at the identity.
    rot_vel[k] = inv * log_so3(frames_t[k].rot.matrix().transpose()
                               * frames1[k].rot.matrix());
    trans_vel[k] = inv * (frames1[k].trans - frames_t[k].trans);
  }
}

Rotation align_target_rotation(const Rotation &rt, const Rotation &r1,
                               const std::vector<Rotation> &sym) {
  if (sym.empty())
    return r1;
  int best = 0;
  double best_tr = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < static_cast<int>(sym.size()); ++s) {
    const double tr = (rt.matrix().transpose() * sym[s].matrix() * r1.matrix()).trace();
    if (tr > best_tr) {
      best_tr = tr;
      best = s;
    }
  }
  return sym[best] * r1;
}

FramePathSample make_training_target(Frames frames0, const Frames &frames1,
                                     const std::vector<std::vector<Rotation>> &syms,
                                     double t, Rng &rng) {
  const std::size_t k = frames0.size();
  if (frames1.size() != k || syms.size() != k)
    fail(ErrorCode::kShapeMismatch, "make_training_target: sizes differ");
  if (!(t >= 0 && t < 1))
    fail(ErrorCode::kInvalidArgument, "make_training_target: t must be in [0, 1)");
  FramePathSample s;
  s.t = t;
  s.frames1.resize(k);
  s.frames_t.resize(k);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < k; ++i) {
    Rotation r1 = align_target_rotation(frames0[i].rot, frames1[i].rot, syms[i]);
    while (std::numbers::pi - geodesic_dist(frames0[i].rot, r1) < kCutLocusEpsilon * 10) {
      const Eigen::Vector3d w(nd(rng), nd(rng), nd(rng));
      frames0[i].rot = exp_at(frames0[i].rot, Eigen::Vector3d(kAntipodalKick * w.normalized()));
      r1 = align_target_rotation(frames0[i].rot, frames1[i].rot, syms[i]);
    }
    s.frames1[i] = { r1, frames1[i].trans };
    s.frames_t[i].rot = geodesic(frames0[i].rot, r1, t);
    s.frames_t[i].trans = (1 - t) * frames0[i].trans + t * frames1[i].trans;
  }
  s.frames0 = std::move(frames0);
  conditional_velocity(s.frames_t, s.frames1, t, s.target_rot_vel, s.target_trans_vel);
  // The translation target is the exact constant field.
  for (std::size_t i = 0; i < k; ++i)
    s.target_trans_vel[i] = s.frames1[i].trans - s.frames0[i].trans;
  return s;
}

double se3_loss(const Velocities &pred_rot_vel, const Velocities &pred_trans_vel,
                const FramePathSample &sample) {
  const std::size_t k = sample.target_rot_vel.size();
  if (pred_rot_vel.size() != k || pred_trans_vel.size() != k)
    fail(ErrorCode::kShapeMismatch, "se3_loss: prediction count differs from K");
  double loss = 0;
  for (std::size_t i = 0; i < k; ++i)
    loss += (pred_trans_vel[i] - sample.target_trans_vel[i]).squaredNorm()
            + (pred_rot_vel[i] - sample.target_rot_vel[i]).squaredNorm();
  return loss;
}

Frames integrate_step(const Frames &frames, const Velocities &rot_vel,
                      const Velocities &trans_vel, double t, double h,
                      const RotSchedule &sched) {
  if (rot_vel.size() != frames.size() || trans_vel.size() != frames.size())
    fail(ErrorCode::kShapeMismatch, "integrate_step: velocity count differs");
  if (!(h > 0))
    fail(ErrorCode::kInvalidArgument, "integrate_step: h must be positive");
  const double scale = h * sched.g(t);
  Frames out(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out[i].rot = exp_at(frames[i].rot, Eigen::Vector3d(scale * rot_vel[i]));
    out[i].trans = frames[i].trans + h * trans_vel[i];
  }
  return out;
}

}  // namespace rigidflow
