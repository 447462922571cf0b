//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/flow_disc.hpp"

#include <cmath>
#include <limits>

#include "rigidflow/error.hpp"

namespace rigidflow {

void SamplingKnobs::validate() const {
  if (!(temp_lo > 0) || !(temp_hi >= temp_lo))
    fail(ErrorCode::kInvalidArgument, "temperature must satisfy 0 < lo <= hi");
  if (!(eta >= 0))
    fail(ErrorCode::kInvalidArgument, "eta must be nonnegative");
}

int conditional_path_sample(int m1, double t, Rng &rng) {
  if (m1 == kMaskToken)
    fail(ErrorCode::kMaskedToken, "data token cannot be [MASK]");
  return uniform01(rng) < t ? m1 : kMaskToken;
}

int conditional_path_sample_uniform(int m1, int num_classes, double t, Rng &rng) {
  if (m1 == kMaskToken)
    fail(ErrorCode::kMaskedToken, "data token cannot be [MASK]");
  if (uniform01(rng) < t)
    return m1;
  return 1 + static_cast<int>(std::uniform_int_distribution<int>(0, num_classes - 1)(rng));
}

double conditional_rate(int j, int l, int m1, double t) {
  return (j == kMaskToken && l == m1) ? 1.0 / (1.0 - t) : 0.0;
}

double conditional_rate_uniform(int j, int l, int m1, double t) {
  return (j != m1 && l == m1) ? 1.0 / (1.0 - t) : 0.0;
}

Posterior tempered(const Posterior &post, double temperature) {
  if (!(temperature > 0))
    fail(ErrorCode::kInvalidArgument, "temperature must be positive");
  Posterior out(post.rows(), post.cols());
  for (Eigen::Index k = 0; k < post.rows(); ++k) {
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < post.cols(); ++c)
      if (post(k, c) > 0)
        hi = std::max(hi, std::log(post(k, c)) / temperature);
    double sum = 0;
    for (Eigen::Index c = 0; c < post.cols(); ++c) {
      out(k, c) = post(k, c) > 0 ? std::exp(std::log(post(k, c)) / temperature - hi) : 0.0;
      sum += out(k, c);
    }
    if (!(sum > 0))
      fail(ErrorCode::kZeroSupport, "posterior row has no mass");
    out.row(k) /= sum;
  }
  return out;
}

RateMatrix generative_rates(const Tokens &tokens, double t, const Posterior &post,
                            const SamplingKnobs &knobs) {
  const Eigen::Index k = static_cast<Eigen::Index>(tokens.size());
  if (post.rows() != k)
    fail(ErrorCode::kShapeMismatch, "posterior rows differ from K");
  if (!(t < 1))
    fail(ErrorCode::kInvalidArgument, "generative_rates: t must be below 1");
  const Posterior p = tempered(post, knobs.temperature(t));
  const Eigen::Index v = post.cols();
  RateMatrix q = RateMatrix::Zero(k, v + 1);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int j = tokens[i];
    if (knobs.prior == DiscretePrior::kUniform) {
      for (Eigen::Index c = 0; c < v; ++c)
        if (c + 1 != j)
          q(i, c + 1) = p(i, c) / (1 - t);
    } else if (j == kMaskToken) {
      q.block(i, 1, 1, v) = p.row(i) * ((1 + knobs.eta * t) / (1 - t));
    } else {
      q(i, kMaskToken) = knobs.eta;
    }
  }
  return q;
}

int sample_categorical(const Eigen::VectorXd &w, Rng &rng) {
  const double total = w.sum();
  if (!(total > 0))
    fail(ErrorCode::kZeroSupport, "categorical weights have no mass");
  double u = uniform01(rng) * total;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u < 0)
      return static_cast<int>(i);
  }
  // Rounding: fall back to the last index with mass.
  for (Eigen::Index i = w.size() - 1; i >= 0; --i)
    if (w[i] > 0)
      return static_cast<int>(i);
  return 0;
}

Tokens ctmc_step(const Tokens &tokens, const RateMatrix &rates, double h, Rng &rng) {
  if (rates.rows() != static_cast<Eigen::Index>(tokens.size()))
    fail(ErrorCode::kShapeMismatch, "rate rows differ from K");
  Tokens out = tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    Eigen::VectorXd jump = h * rates.row(static_cast<Eigen::Index>(i)).transpose();
    jump[tokens[i]] = 0;
    const double total = jump.sum();
    if (!(total > 0))
      continue;
    const double u = uniform01(rng);
    if (total > 1)
      jump /= total;
    else if (u >= total)
      continue;
    // u < total here, so u also picks the destination.
    double acc = u;
    for (Eigen::Index l = 0; l < jump.size(); ++l) {
      if (jump[l] <= 0)
        continue;
      // Last candidate absorbs rounding in the normalised case.
      out[i] = static_cast<int>(l);
      acc -= jump[l];
      if (acc < 0)
        break;
    }
  }
  return out;
}

Tokens force_unmask(const Tokens &tokens, const Posterior &post, double temperature,
                    Rng &rng) {
  const Posterior p = tempered(post, temperature);
  Tokens out = tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (out[i] == kMaskToken)
      out[i] = 1 + sample_categorical(p.row(static_cast<Eigen::Index>(i)).transpose(), rng);
  return out;
}

double dfm_loss(const Posterior &post, const Tokens &m1, const std::vector<bool> &masked) {
  if (post.rows() != static_cast<Eigen::Index>(m1.size()) || masked.size() != m1.size())
    fail(ErrorCode::kShapeMismatch, "dfm_loss: sizes differ");
  double loss = 0;
  for (std::size_t i = 0; i < m1.size(); ++i) {
    if (!masked[i])
      continue;
    if (m1[i] < 1 || m1[i] > post.cols())
      fail(ErrorCode::kInvalidArgument, "dfm_loss: target token out of range");
    loss -= std::log(post(static_cast<Eigen::Index>(i), m1[i] - 1));
  }
  return loss;
}

double kolmogorov_residual(const std::function<Eigen::VectorXd(double)> &path,
                           const std::function<Eigen::MatrixXd(double)> &rates,
                           double t, double dt) {
  const double lo = std::max(0.0, t - dt);
  const Eigen::VectorXd dp = (path(t + dt) - path(lo)) / (t + dt - lo);
  const Eigen::VectorXd p = path(t);
  Eigen::MatrixXd q = rates(t);
  q.diagonal().setZero();
  // inflow_k = sum_j p_j Q(j, k); outflow_k = p_k sum_j Q(k, j).
  const Eigen::VectorXd rhs = q.transpose() * p - p.cwiseProduct(q.rowwise().sum());
  return (dp - rhs).cwiseAbs().maxCoeff();
}

Eigen::VectorXd masking_path(int m1, int num_classes, double t) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(num_classes + 1);
  p[kMaskToken] = 1 - t;
  p[m1] += t;
  return p;
}

Eigen::MatrixXd masking_rates(int m1, int num_classes, double t) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(num_classes + 1, num_classes + 1);
  for (int j = 0; j <= num_classes; ++j)
    for (int l = 0; l <= num_classes; ++l)
      if (j != l)
        q(j, l) = conditional_rate(j, l, m1, t);
  return q;
}

}  // namespace rigidflow
