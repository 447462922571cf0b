//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_FLOW_DISC_HPP_
#define RIGIDFLOW_FLOW_DISC_HPP_

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rigidflow/rng.hpp"
#include "rigidflow/vocab.hpp"

namespace rigidflow {

using Tokens = std::vector<int>;

// K x V; column c is the probability of token c + 1.
using Posterior = Eigen::MatrixXd;
// K x (V + 1); column l is the jump rate of each slot to token l.
using RateMatrix = Eigen::MatrixXd;

enum class DiscretePrior {
  kMask,
  // Ablation: uniform noise over the V classes, no [MASK].
  kUniform,
};

struct SamplingKnobs {
  // Linear schedule lo -> hi in t; lo == hi is a fixed temperature.
  double temp_lo = 1.0;
  double temp_hi = 1.0;
  double eta = 0.0;
  DiscretePrior prior = DiscretePrior::kMask;

  double temperature(double t) const { return temp_lo + t * (temp_hi - temp_lo); }
  void validate() const;
};

// m1 with probability t, else [MASK].
int conditional_path_sample(int m1, double t, Rng &rng);

// Uniform-prior ablation: m1 with probability t, else a uniform class.
int conditional_path_sample_uniform(int m1, int num_classes, double t, Rng &rng);

// I(j = MASK) I(l = m1) / (1 - t).
double conditional_rate(int j, int l, int m1, double t);

// Uniform-prior ablation: I(j != m1) I(l = m1) / (1 - t).
double conditional_rate_uniform(int j, int l, int m1, double t);

// exp(log p / T) renormalised, per row.
Posterior tempered(const Posterior &post, double temperature);

/**
 * Jump rates for every slot. Masked slot: p~(l) (1 + eta t) / (1 - t) to
 * class l. Unmasked slot: eta to [MASK]. Under the uniform prior every slot
 * moves to l != current at p~(l) / (1 - t).
 */
RateMatrix generative_rates(const Tokens &tokens, double t, const Posterior &post,
                            const SamplingKnobs &knobs);

/**
 * Euler jump: slot k moves to l with probability h * rate(k, l). When the
 * outflow exceeds 1 the jump probabilities are rescaled to sum to 1.
 */
Tokens ctmc_step(const Tokens &tokens, const RateMatrix &rates, double h, Rng &rng);

// Replace any remaining [MASK] by a draw from the tempered posterior.
Tokens force_unmask(const Tokens &tokens, const Posterior &post, double temperature,
                    Rng &rng);

// Sum over masked slots of -log post(k, m1_k).
double dfm_loss(const Posterior &post, const Tokens &m1, const std::vector<bool> &masked);

/**
 * Max over states of |(p_{t+dt} - p_{t-dt}) / 2dt - (inflow - outflow)|.
 * `rates(t)` is a square matrix over the same states as `path(t)`.
 */
double kolmogorov_residual(const std::function<Eigen::VectorXd(double)> &path,
                           const std::function<Eigen::MatrixXd(double)> &rates,
                           double t, double dt);

// Masking path over {MASK, 1..V}: (1 - t) delta_MASK + t delta_m1.
Eigen::VectorXd masking_path(int m1, int num_classes, double t);
Eigen::MatrixXd masking_rates(int m1, int num_classes, double t);

// Draw an index from nonnegative weights; weights need not be normalised.
int sample_categorical(const Eigen::VectorXd &w, Rng &rng);

}  // namespace rigidflow

#endif  // RIGIDFLOW_FLOW_DISC_HPP_
