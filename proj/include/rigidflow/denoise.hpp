//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_DENOISE_HPP_
#define RIGIDFLOW_DENOISE_HPP_

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rigidflow/flow_cont.hpp"
#include "rigidflow/flow_disc.hpp"

namespace rigidflow {

// Noisy joint state of one molecule.
struct FlowState {
  Frames frames;
  Tokens tokens;
  double t = 0;

  int size() const { return static_cast<int>(frames.size()); }
};

struct DenoiserOutput {
  // Flow convention: R <- R exp(h w^).
  Velocities rot_vel;
  Velocities trans_vel;
  Posterior post;
};

class Denoiser {
public:
  virtual ~Denoiser() = default;
  virtual int num_classes() const = 0;
  virtual DenoiserOutput evaluate(const FlowState &state) const = 0;
};

// One training or reference molecule in frame form.
struct JointDatum {
  Frames frames;
  Tokens tokens;
};

/**
 * Exact posterior over the finite token dataset given the observed tokens.
 * Under the masking prior an unmasked slot must match the datum. Throws
 * ZeroSupport when no datum is compatible, unless `fallback` is set, in which
 * case the unconditional per-slot data marginal is returned. Euler steps can
 * unmask two slots at once into a combination no datum has; samplers use the
 * fallback for that case.
 */
Posterior oracle_bayes_discrete(const std::vector<Tokens> &dataset, int num_classes,
                                const Tokens &observed, double t,
                                DiscretePrior prior = DiscretePrior::kMask,
                                bool fallback = false);

// Density of R_t relative to Haar, given the target is `omega` rad away.
double rotation_path_density(double omega, double t);

/**
 * Posterior-weighted conditional fields over a finite frame dataset.
 * Translation likelihood N(x_t; t x1, ((1 - t)^2 + bandwidth^2) I); rotation
 * factor rotation_path_density. `syms` (optional, per slot) aligns targets.
 */
void oracle_kernel_continuous(const std::vector<Frames> &dataset, const Frames &frames,
                              double t, double bandwidth, Velocities &rot_vel,
                              Velocities &trans_vel,
                              const std::vector<std::vector<Rotation>> &syms = {});

// Joint oracle: data are weighted by both modalities at once. Token states
// that no datum supports fall back to weighting by frames alone.
class OracleDenoiser: public Denoiser {
public:
  OracleDenoiser(std::vector<JointDatum> data, int num_classes, double bandwidth = 0.0,
                 std::vector<std::vector<Rotation>> class_syms = {});
  int num_classes() const override { return num_classes_; }
  DenoiserOutput evaluate(const FlowState &state) const override;

private:
  std::vector<JointDatum> data_;
  int num_classes_;
  double bandwidth_;
  // Indexed by token; empty means trivial groups.
  std::vector<std::vector<Rotation>> class_syms_;
};

struct SamplerConfig {
  int steps = 100;
  SamplingKnobs knobs;
  RotSchedule schedule;
};

struct JointSample {
  Frames frames;
  Tokens tokens;
};

// Called after every step with the step index and the new state.
using SampleObserver = std::function<void(int step, const JointSample &state)>;

/**
 * Integrate frames and simulate tokens together from the prior. Tokens start
 * all [MASK] (or uniform under the ablation prior); the last step unmasks.
 */
JointSample sample_joint(const Denoiser &model, int k, const SamplerConfig &cfg,
                         Rng &rng, const SampleObserver &observer = {});

// ---------------------------------------------------------------------------
// Toy model.

struct ToyModelConfig {
  int num_classes = 2;
  int width1 = 128;
  int width2 = 128;
  bool self_conditioning = false;
  // Velocity heads are divided by (1 - t); see ToyModel.
  int feature_dim() const;
  int output_dim() const { return 6 + num_classes; }
};

/**
 * Feed-forward denoiser on rotation-invariant per-slot features. Heads give
 * a displacement u (rotation) and c (translation) in the slot's local frame
 * and class logits; velocities are w = R^T u / (1 - t), v = R^T c / (1 - t).
 */
class ToyModel: public Denoiser {
public:
  ToyModelConfig cfg;
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  ToyModel() = default;
  explicit ToyModel(const ToyModelConfig &c);

  void init(Rng &rng);
  int num_parameters() const;
  std::vector<double *> parameters();
  std::vector<const double *> parameters() const;

  int num_classes() const override { return cfg.num_classes; }
  DenoiserOutput evaluate(const FlowState &state) const override;

  // `sc` is the self-conditioning posterior (K x V) or empty.
  Eigen::MatrixXd features(const FlowState &state, const Posterior &sc = {}) const;

  std::string to_json() const;
  static ToyModel from_json(const std::string &text);
  void save(const std::string &path) const;
  static ToyModel load(const std::string &path);
};

struct ToyForward {
  Eigen::MatrixXd feats, a1, h1, a2, h2, out;
  DenoiserOutput result;
};

ToyForward toy_forward(const ToyModel &model, const FlowState &state,
                       const Posterior &sc = {});

struct TrainingTargets {
  FramePathSample path;
  Tokens m1;
  std::vector<bool> masked;
  // Multiplies the squared velocity error; (1 - t)^2 gives displacement error.
  double se3_weight = 1.0;
};

struct ToyGradient {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;
  std::vector<double> flat() const;
};

// se3_weight * se3_loss + dfm_loss.
double toy_loss(const ToyForward &fwd, const TrainingTargets &targets);

// Exact reverse-mode gradient of toy_loss.
ToyGradient toy_backward(const ToyModel &model, const ToyForward &fwd,
                         const TrainingTargets &targets);

struct TrainSample {
  Frames frames;
  Tokens tokens;
  // Symmetry group of each slot's class.
  std::vector<std::vector<Rotation>> syms;
};

struct TrainConfig {
  int epochs = 100;
  int batch = 16;
  double lr = 1e-4;
  bool adam = true;
  // Random global rotation of each sample.
  bool augment = true;
  // Use (1 - t)^2 weighting on the velocity loss.
  bool time_weighting = true;
  double self_cond_prob = 0.5;
  DiscretePrior prior = DiscretePrior::kMask;
};

struct TrainResult {
  // Mean loss per epoch.
  std::vector<double> loss_curve;
};

// Targets for one sample at time t, with its own prior draw.
TrainingTargets make_targets(const TrainSample &s, double t, int num_classes,
                             DiscretePrior prior, Rng &rng, FlowState &state);

TrainResult train(ToyModel &model, const std::vector<TrainSample> &data,
                  const TrainConfig &cfg, Rng &rng);

// Centre a molecule: subtract the mean frame translation.
Frames centre_frames(const Frames &frames);

struct ArrangementError {
  // Mean geodesic and translation error per slot.
  double rot = 0;
  double trans = 0;
  Permutation perm;
};

/**
 * Distance between two frame sets modulo a global rotation and a slot
 * permutation that preserves tokens. Both sets are centred first; the global
 * rotation is anchored on each slot in turn and the best is kept. Slots with
 * equal tokens are tried in every order (K! worst case; meant for small K).
 */
ArrangementError arrangement_error(const Frames &a, const Tokens &ta, const Frames &b,
                                   const Tokens &tb);

}  // namespace rigidflow

#endif  // RIGIDFLOW_DENOISE_HPP_
