//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "rigidflow/error.hpp"

namespace rigidflow {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Normalised weights from log-weights; throws ZeroSupport if all are -inf.
Eigen::VectorXd softmax_weights(const Eigen::VectorXd &logw) {
  const double hi = logw.maxCoeff();
  if (!std::isfinite(hi))
    fail(ErrorCode::kZeroSupport, "no datum is compatible with the state");
  Eigen::VectorXd w = (logw.array() - hi).exp();
  return w / w.sum();
}

double log_translation_factor(const Eigen::Vector3d &xt, const Eigen::Vector3d &x1,
                              double t, double bandwidth) {
  const double var = (1 - t) * (1 - t) + bandwidth * bandwidth;
  return -(xt - t * x1).squaredNorm() / (2 * var);
}

const std::vector<Rotation> &trivial_group() {
  static const std::vector<Rotation> g { Rotation() };
  return g;
}

// Log-weight of one datum's frames and its aligned targets.
double log_frame_weight(const Frames &state, const Frames &datum, double t,
                        double bandwidth,
                        const std::function<const std::vector<Rotation> &(int)> &sym_of,
                        Frames &aligned) {
  aligned.resize(datum.size());
  double lw = 0;
  for (std::size_t k = 0; k < datum.size(); ++k) {
    const Rotation r1 =
        align_target_rotation(state[k].rot, datum[k].rot, sym_of(static_cast<int>(k)));
    aligned[k] = { r1, datum[k].trans };
    lw += log_translation_factor(state[k].trans, datum[k].trans, t, bandwidth);
    const double kappa = rotation_path_density(geodesic_dist(state[k].rot, r1), t);
    lw += kappa > 0 ? std::log(kappa) : kNegInf;
  }
  return lw;
}

}  // namespace

Posterior oracle_bayes_discrete(const std::vector<Tokens> &dataset, int num_classes,
                                const Tokens &observed, double t, DiscretePrior prior,
                                bool fallback) {
  if (dataset.empty())
    fail(ErrorCode::kInvalidArgument, "oracle_bayes_discrete: empty dataset");
  const std::size_t k = observed.size();
  Eigen::VectorXd logw(static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t d = 0; d < dataset.size(); ++d) {
    if (dataset[d].size() != k)
      fail(ErrorCode::kShapeMismatch, "oracle_bayes_discrete: datum length differs");
    double lw = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const bool same = observed[i] == dataset[d][i];
      if (prior == DiscretePrior::kMask) {
        // Masked slots contribute (1 - t) for every datum and cancel.
        if (observed[i] != kMaskToken && !same)
          lw = kNegInf;
      } else {
        lw += std::log((same ? t : 0.0) + (1 - t) / num_classes);
      }
    }
    logw[static_cast<Eigen::Index>(d)] = lw;
  }
  if (fallback && !std::isfinite(logw.maxCoeff()))
    logw.setZero();
  const Eigen::VectorXd w = softmax_weights(logw);
  Posterior post = Posterior::Zero(static_cast<Eigen::Index>(k), num_classes);
  for (std::size_t d = 0; d < dataset.size(); ++d)
    for (std::size_t i = 0; i < k; ++i)
      post(static_cast<Eigen::Index>(i), dataset[d][i] - 1) += w[static_cast<Eigen::Index>(d)];
  return post;
}

double rotation_path_density(double omega, double t) {
  if (!(t < 1))
    fail(ErrorCode::kInvalidArgument, "rotation_path_density: t must be below 1");
  const double s = 1 - t;
  if (omega < 1e-8)
    return 1 / (s * s * s);
  // Past the support edge the density is continued at its boundary angle so
  // that off-path states keep finite weights.
  const double theta = std::min(omega / s, std::numbers::pi);
  const double num = std::sin(theta / 2), den = std::sin(omega / 2);
  return num * num / (s * den * den);
}

void oracle_kernel_continuous(const std::vector<Frames> &dataset, const Frames &frames,
                              double t, double bandwidth, Velocities &rot_vel,
                              Velocities &trans_vel,
                              const std::vector<std::vector<Rotation>> &syms) {
  if (dataset.empty())
    fail(ErrorCode::kInvalidArgument, "oracle_kernel_continuous: empty dataset");
  auto sym_of = [&](int k) -> const std::vector<Rotation> & {
    return syms.empty() ? trivial_group() : syms[k];
  };
  std::vector<Frames> aligned(dataset.size());
  Eigen::VectorXd logw(static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t d = 0; d < dataset.size(); ++d) {
    if (dataset[d].size() != frames.size())
      fail(ErrorCode::kShapeMismatch, "oracle_kernel_continuous: datum length differs");
    logw[static_cast<Eigen::Index>(d)] =
        log_frame_weight(frames, dataset[d], t, bandwidth, sym_of, aligned[d]);
  }
  const Eigen::VectorXd w = softmax_weights(logw);
  rot_vel.assign(frames.size(), Eigen::Vector3d::Zero());
  trans_vel.assign(frames.size(), Eigen::Vector3d::Zero());
  Velocities rv, tv;
  for (std::size_t d = 0; d < dataset.size(); ++d) {
    const double wd = w[static_cast<Eigen::Index>(d)];
    if (wd == 0)
      continue;
    conditional_velocity(frames, aligned[d], t, rv, tv);
    for (std::size_t k = 0; k < frames.size(); ++k) {
      rot_vel[k] += wd * rv[k];
      trans_vel[k] += wd * tv[k];
    }
  }
}

OracleDenoiser::OracleDenoiser(std::vector<JointDatum> data, int num_classes,
                               double bandwidth,
                               std::vector<std::vector<Rotation>> class_syms)
    : data_(std::move(data)), num_classes_(num_classes), bandwidth_(bandwidth),
      class_syms_(std::move(class_syms)) {
  if (data_.empty())
    fail(ErrorCode::kInvalidArgument, "OracleDenoiser: empty dataset");
}

DenoiserOutput OracleDenoiser::evaluate(const FlowState &state) const {
  const std::size_t k = state.frames.size();
  std::vector<Frames> aligned(data_.size());
  Eigen::VectorXd logw(static_cast<Eigen::Index>(data_.size()));
  Eigen::VectorXd frame_logw(logw.size());
  for (std::size_t d = 0; d < data_.size(); ++d) {
    const JointDatum &dat = data_[d];
    if (dat.frames.size() != k || dat.tokens.size() != k)
      fail(ErrorCode::kShapeMismatch, "OracleDenoiser: datum length differs");
    auto sym_of = [&](int i) -> const std::vector<Rotation> & {
      const int tok = dat.tokens[i];
      return tok < static_cast<int>(class_syms_.size()) && !class_syms_[tok].empty()
                 ? class_syms_[tok]
                 : trivial_group();
    };
    frame_logw[static_cast<Eigen::Index>(d)] = log_frame_weight(
        state.frames, dat.frames, state.t, bandwidth_, sym_of, aligned[d]);
    logw[static_cast<Eigen::Index>(d)] = frame_logw[static_cast<Eigen::Index>(d)];
    for (std::size_t i = 0; i < k; ++i)
      if (state.tokens[i] != kMaskToken && state.tokens[i] != dat.tokens[i])
        logw[static_cast<Eigen::Index>(d)] = kNegInf;
  }
  if (!std::isfinite(logw.maxCoeff()))
    logw = frame_logw;
  const Eigen::VectorXd w = softmax_weights(logw);
  DenoiserOutput out;
  out.rot_vel.assign(k, Eigen::Vector3d::Zero());
  out.trans_vel.assign(k, Eigen::Vector3d::Zero());
  out.post = Posterior::Zero(static_cast<Eigen::Index>(k), num_classes_);
  Velocities rv, tv;
  for (std::size_t d = 0; d < data_.size(); ++d) {
    const double wd = w[static_cast<Eigen::Index>(d)];
    if (wd == 0)
      continue;
    conditional_velocity(state.frames, aligned[d], state.t, rv, tv);
    for (std::size_t i = 0; i < k; ++i) {
      out.rot_vel[i] += wd * rv[i];
      out.trans_vel[i] += wd * tv[i];
      out.post(static_cast<Eigen::Index>(i), data_[d].tokens[i] - 1) += wd;
    }
  }
  return out;
}

JointSample sample_joint(const Denoiser &model, int k, const SamplerConfig &cfg,
                         Rng &rng, const SampleObserver &observer) {
  if (cfg.steps < 1)
    fail(ErrorCode::kInvalidArgument, "sample_joint: steps must be positive");
  cfg.knobs.validate();
  JointSample s;
  s.frames = sample_prior(k, rng);
  const int v = model.num_classes();
  s.tokens.assign(k, kMaskToken);
  if (cfg.knobs.prior == DiscretePrior::kUniform)
    for (int &tok: s.tokens)
      tok = 1 + std::uniform_int_distribution<int>(0, v - 1)(rng);
  const double h = 1.0 / cfg.steps;
  for (int step = 0; step < cfg.steps; ++step) {
    const double t = step * h;
    const DenoiserOutput out = model.evaluate({ s.frames, s.tokens, t });
    s.frames = integrate_step(s.frames, out.rot_vel, out.trans_vel, t, h, cfg.schedule);
    s.tokens = ctmc_step(s.tokens, generative_rates(s.tokens, t, out.post, cfg.knobs), h,
                         rng);
    if (step + 1 == cfg.steps)
      s.tokens = force_unmask(s.tokens, out.post, cfg.knobs.temperature(t), rng);
    if (observer)
      observer(step, s);
  }
  return s;
}

Frames centre_frames(const Frames &frames) {
  if (frames.empty())
    return frames;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto &f: frames)
    mean += f.trans;
  mean /= static_cast<double>(frames.size());
  Frames out = frames;
  for (auto &f: out)
    f.trans -= mean;
  return out;
}

ArrangementError arrangement_error(const Frames &a, const Tokens &ta, const Frames &b,
                                   const Tokens &tb) {
  const int k = static_cast<int>(a.size());
  if (static_cast<int>(b.size()) != k || static_cast<int>(ta.size()) != k
      || static_cast<int>(tb.size()) != k)
    fail(ErrorCode::kShapeMismatch, "arrangement_error: sizes differ");
  const Frames ca = centre_frames(a), cb = centre_frames(b);
  ArrangementError best;
  best.rot = best.trans = std::numeric_limits<double>::infinity();
  Permutation perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < k && ok; ++i)
      ok = ta[i] == tb[perm[i]];
    if (!ok)
      continue;
    for (int anchor = 0; anchor < k; ++anchor) {
      // a_i ~ b_perm(i) moved by G: R -> R G, x -> G^T x.
      const Eigen::Matrix3d g =
          cb[perm[anchor]].rot.matrix().transpose() * ca[anchor].rot.matrix();
      double rot = 0, trans = 0;
      for (int i = 0; i < k; ++i) {
        rot += rotation_angle(ca[i].rot.matrix().transpose()
                              * (cb[perm[i]].rot.matrix() * g));
        trans += (ca[i].trans - g.transpose() * cb[perm[i]].trans).norm();
      }
      rot /= k;
      trans /= k;
      if (rot + trans < best.rot + best.trans) {
        best.rot = rot;
        best.trans = trans;
        best.perm = perm;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (best.perm.empty())
    fail(ErrorCode::kInvalidArgument, "arrangement_error: token multisets differ");
  return best;
}

}  // namespace rigidflow
