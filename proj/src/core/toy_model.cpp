//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "rigidflow/denoise.hpp"
#include "rigidflow/error.hpp"

namespace rigidflow {

using nlohmann::json;

// Per slot: own token one-hot (V + 1), time (3), local position (3) and its
// norm (1), mean over other slots of [relative position in the local frame
// (3), distance (1), relative rotation (9), token one-hot (V + 1)], and the
// self-conditioning posterior (V) when enabled.
int ToyModelConfig::feature_dim() const {
  const int v = num_classes;
  return (v + 1) + 3 + 4 + (14 + v) + (self_conditioning ? v : 0);
}

ToyModel::ToyModel(const ToyModelConfig &c): cfg(c) {
  if (c.num_classes < 1 || c.width1 < 1 || c.width2 < 1)
    fail(ErrorCode::kInvalidArgument, "toy model: bad dimensions");
  w1 = Eigen::MatrixXd::Zero(c.width1, c.feature_dim());
  w2 = Eigen::MatrixXd::Zero(c.width2, c.width1);
  w3 = Eigen::MatrixXd::Zero(c.output_dim(), c.width2);
  b1 = Eigen::VectorXd::Zero(c.width1);
  b2 = Eigen::VectorXd::Zero(c.width2);
  b3 = Eigen::VectorXd::Zero(c.output_dim());
}

void ToyModel::init(Rng &rng) {
  auto fill = [&](Eigen::MatrixXd &m, double scale) {
    std::normal_distribution<double> nd(0.0, scale / std::sqrt(static_cast<double>(m.cols())));
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = nd(rng);
  };
  fill(w1, 1.0);
  fill(w2, 1.0);
  fill(w3, 0.1);
  b1.setZero();
  b2.setZero();
  b3.setZero();
}

std::vector<double *> ToyModel::parameters() {
  std::vector<double *> p;
  for (Eigen::MatrixXd *m: { &w1, &w2, &w3 })
    for (Eigen::Index i = 0; i < m->size(); ++i)
      p.push_back(m->data() + i);
  for (Eigen::VectorXd *b: { &b1, &b2, &b3 })
    for (Eigen::Index i = 0; i < b->size(); ++i)
      p.push_back(b->data() + i);
  return p;
}

std::vector<const double *> ToyModel::parameters() const {
  std::vector<const double *> out;
  for (double *p: const_cast<ToyModel *>(this)->parameters())
    out.push_back(p);
  return out;
}

int ToyModel::num_parameters() const {
  return static_cast<int>(w1.size() + w2.size() + w3.size() + b1.size() + b2.size()
                          + b3.size());
}

std::vector<double> ToyGradient::flat() const {
  std::vector<double> out;
  for (const Eigen::MatrixXd *m: { &w1, &w2, &w3 })
    out.insert(out.end(), m->data(), m->data() + m->size());
  for (const Eigen::VectorXd *b: { &b1, &b2, &b3 })
    out.insert(out.end(), b->data(), b->data() + b->size());
  return out;
}

Eigen::MatrixXd ToyModel::features(const FlowState &state, const Posterior &sc) const {
  const int k = state.size();
  const int v = cfg.num_classes;
  if (static_cast<int>(state.tokens.size()) != k)
    fail(ErrorCode::kShapeMismatch, "toy model: token count differs from frame count");
  if (cfg.self_conditioning && sc.size() > 0 && (sc.rows() != k || sc.cols() != v))
    fail(ErrorCode::kShapeMismatch, "toy model: self-conditioning shape");
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(k, cfg.feature_dim());
  const double t = state.t;
  for (int i = 0; i < k; ++i) {
    const int tok = state.tokens[i];
    if (tok < 0 || tok > v)
      fail(ErrorCode::kInvalidArgument, "toy model: token out of range");
    const Eigen::Matrix3d &ri = state.frames[i].rot.matrix();
    const Eigen::Vector3d &xi = state.frames[i].trans;
    int c = 0;
    f(i, c + tok) = 1;
    c += v + 1;
    f(i, c++) = t;
    f(i, c++) = std::sin(std::numbers::pi * t);
    f(i, c++) = std::cos(std::numbers::pi * t);
    const Eigen::Vector3d local = ri * xi;
    f.block(i, c, 1, 3) = local.transpose();
    c += 3;
    f(i, c++) = xi.norm();
    if (k > 1) {
      const double inv = 1.0 / (k - 1);
      for (int j = 0; j < k; ++j) {
        if (j == i)
          continue;
        const Eigen::Vector3d d = state.frames[j].trans - xi;
        const Eigen::Matrix3d rel = ri * state.frames[j].rot.matrix().transpose();
        int cc = c;
        f.block(i, cc, 1, 3) += inv * (ri * d).transpose();
        cc += 3;
        f(i, cc++) += inv * d.norm();
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            f(i, cc++) += inv * rel(a, b);
        f(i, cc + state.tokens[j]) += inv;
      }
    }
    c += 14 + v;
    if (cfg.self_conditioning && sc.size() > 0)
      f.block(i, c, 1, v) = sc.row(i);
  }
  return f;
}

namespace {

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd &logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Eigen::RowVectorXd e = (logits.row(i).array() - logits.row(i).maxCoeff()).exp();
    p.row(i) = e / e.sum();
  }
  return p;
}

ToyForward forward_once(const ToyModel &model, const FlowState &state,
                        const Posterior &sc) {
  ToyForward fw;
  fw.feats = model.features(state, sc);
  fw.a1 = (fw.feats * model.w1.transpose()).rowwise() + model.b1.transpose();
  fw.h1 = fw.a1.array().tanh();
  fw.a2 = (fw.h1 * model.w2.transpose()).rowwise() + model.b2.transpose();
  fw.h2 = fw.a2.array().tanh();
  fw.out = (fw.h2 * model.w3.transpose()).rowwise() + model.b3.transpose();
  const int k = state.size();
  const double s = 1.0 / (1.0 - state.t);
  fw.result.rot_vel.resize(k);
  fw.result.trans_vel.resize(k);
  for (int i = 0; i < k; ++i) {
    const Eigen::Matrix3d rt = state.frames[i].rot.matrix().transpose();
    fw.result.rot_vel[i] = s * rt * fw.out.block(i, 0, 1, 3).transpose();
    fw.result.trans_vel[i] = s * rt * fw.out.block(i, 3, 1, 3).transpose();
  }
  fw.result.post = row_softmax(fw.out.rightCols(model.cfg.num_classes));
  return fw;
}

}  // namespace

ToyForward toy_forward(const ToyModel &model, const FlowState &state, const Posterior &sc) {
  if (!(state.t < 1))
    fail(ErrorCode::kInvalidArgument, "toy model: t must be below 1");
  return forward_once(model, state, sc);
}

DenoiserOutput ToyModel::evaluate(const FlowState &state) const {
  if (!cfg.self_conditioning)
    return toy_forward(*this, state).result;
  // Recycle the model's own estimate within the step.
  const ToyForward first = toy_forward(*this, state);
  return toy_forward(*this, state, first.result.post).result;
}

double toy_loss(const ToyForward &fwd, const TrainingTargets &tg) {
  return tg.se3_weight * se3_loss(fwd.result.rot_vel, fwd.result.trans_vel, tg.path)
         + dfm_loss(fwd.result.post, tg.m1, tg.masked);
}

ToyGradient toy_backward(const ToyModel &model, const ToyForward &fwd,
                         const TrainingTargets &tg) {
  const int k = static_cast<int>(fwd.out.rows());
  const int v = model.cfg.num_classes;
  const double s = 1.0 / (1.0 - tg.path.t);
  Eigen::MatrixXd g_out = Eigen::MatrixXd::Zero(k, fwd.out.cols());
  for (int i = 0; i < k; ++i) {
    // w = s R^T u, so dL/du = s R dL/dw.
    const Eigen::Matrix3d &r = tg.path.frames_t[i].rot.matrix();
    const Eigen::Vector3d gw =
        2 * tg.se3_weight * (fwd.result.rot_vel[i] - tg.path.target_rot_vel[i]);
    const Eigen::Vector3d gv =
        2 * tg.se3_weight * (fwd.result.trans_vel[i] - tg.path.target_trans_vel[i]);
    g_out.block(i, 0, 1, 3) = (s * r * gw).transpose();
    g_out.block(i, 3, 1, 3) = (s * r * gv).transpose();
    if (tg.masked[i]) {
      g_out.block(i, 6, 1, v) = fwd.result.post.row(i);
      g_out(i, 6 + tg.m1[i] - 1) -= 1;
    }
  }
  ToyGradient g;
  g.w3 = g_out.transpose() * fwd.h2;
  g.b3 = g_out.colwise().sum().transpose();
  const Eigen::MatrixXd g_a2 =
      (g_out * model.w3).array() * (1 - fwd.h2.array().square());
  g.w2 = g_a2.transpose() * fwd.h1;
  g.b2 = g_a2.colwise().sum().transpose();
  const Eigen::MatrixXd g_a1 = (g_a2 * model.w2).array() * (1 - fwd.h1.array().square());
  g.w1 = g_a1.transpose() * fwd.feats;
  g.b1 = g_a1.colwise().sum().transpose();
  return g;
}

TrainingTargets make_targets(const TrainSample &s, double t, int num_classes,
                             DiscretePrior prior, Rng &rng, FlowState &state) {
  TrainingTargets tg;
  const int k = static_cast<int>(s.frames.size());
  std::vector<std::vector<Rotation>> syms = s.syms;
  if (syms.empty())
    syms.assign(k, { Rotation() });
  tg.path = make_training_target(sample_prior(k, rng), s.frames, syms, t, rng);
  tg.m1 = s.tokens;
  tg.masked.assign(k, true);
  state.frames = tg.path.frames_t;
  state.t = t;
  state.tokens.resize(k);
  for (int i = 0; i < k; ++i) {
    if (prior == DiscretePrior::kUniform) {
      state.tokens[i] = conditional_path_sample_uniform(s.tokens[i], num_classes, t, rng);
    } else {
      state.tokens[i] = conditional_path_sample(s.tokens[i], t, rng);
      tg.masked[i] = state.tokens[i] == kMaskToken;
    }
  }
  return tg;
}

namespace {

struct Adam {
  std::vector<double> m, v;
  long step = 0;
};

}  // namespace

TrainResult train(ToyModel &model, const std::vector<TrainSample> &data,
                  const TrainConfig &cfg, Rng &rng) {
  if (data.empty())
    fail(ErrorCode::kInvalidArgument, "train: empty dataset");
  if (cfg.batch < 1 || cfg.epochs < 0 || !(cfg.lr > 0))
    fail(ErrorCode::kInvalidArgument, "train: bad configuration");
  TrainResult res;
  std::vector<double *> params = model.parameters();
  Adam adam;
  adam.m.assign(params.size(), 0.0);
  adam.v.assign(params.size(), 0.0);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const int v = model.cfg.num_classes;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch);
      std::vector<double> grad(params.size(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        TrainSample s = data[order[b]];
        s.frames = centre_frames(s.frames);
        if (cfg.augment) {
          const Rotation g = sample_uniform_so3(rng);
          const Eigen::Matrix3d gt = g.matrix().transpose();
          for (auto &f: s.frames)
            f = { f.rot * g, gt * f.trans };
        }
        const double t = sample_time(rng);
        FlowState state;
        TrainingTargets tg = make_targets(s, t, v, cfg.prior, rng, state);
        tg.se3_weight = cfg.time_weighting ? (1 - t) * (1 - t) : 1.0;
        Posterior sc;
        if (model.cfg.self_conditioning && uniform01(rng) < cfg.self_cond_prob)
          sc = toy_forward(model, state).result.post;
        const ToyForward fw = toy_forward(model, state, sc);
        epoch_loss += toy_loss(fw, tg);
        const std::vector<double> g = toy_backward(model, fw, tg).flat();
        for (std::size_t p = 0; p < grad.size(); ++p)
          grad[p] += g[p];
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      ++adam.step;
      const double c1 = 1 - std::pow(0.9, static_cast<double>(adam.step));
      const double c2 = 1 - std::pow(0.999, static_cast<double>(adam.step));
      for (std::size_t p = 0; p < params.size(); ++p) {
        const double gp = grad[p] * scale;
        if (!cfg.adam) {
          *params[p] -= cfg.lr * gp;
          continue;
        }
        adam.m[p] = 0.9 * adam.m[p] + 0.1 * gp;
        adam.v[p] = 0.999 * adam.v[p] + 0.001 * gp * gp;
        *params[p] -= cfg.lr * (adam.m[p] / c1) / (std::sqrt(adam.v[p] / c2) + 1e-8);
      }
    }
    res.loss_curve.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  return res;
}

std::string ToyModel::to_json() const {
  json j;
  j["format"] = "rigidflow-model";
  j["version"] = 1;
  j["kind"] = "toy-mlp";
  j["num_classes"] = cfg.num_classes;
  j["width1"] = cfg.width1;
  j["width2"] = cfg.width2;
  j["self_conditioning"] = cfg.self_conditioning;
  auto mat = [](const Eigen::MatrixXd &m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        a.push_back(m(r, c));
    return a;
  };
  j["w1"] = mat(w1);
  j["w2"] = mat(w2);
  j["w3"] = mat(w3);
  j["b1"] = mat(b1);
  j["b2"] = mat(b2);
  j["b3"] = mat(b3);
  return j.dump() + "\n";
}

ToyModel ToyModel::from_json(const std::string &text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "rigidflow-model" || j.value("version", 0) != 1)
      fail(ErrorCode::kFormatError, "not a version-1 rigidflow model");
    ToyModelConfig c;
    c.num_classes = j.at("num_classes").get<int>();
    c.width1 = j.at("width1").get<int>();
    c.width2 = j.at("width2").get<int>();
    c.self_conditioning = j.at("self_conditioning").get<bool>();
    ToyModel m(c);
    auto load = [&](const char *key, auto &dst) {
      const json &a = j.at(key);
      if (static_cast<Eigen::Index>(a.size()) != dst.size())
        fail(ErrorCode::kFormatError, std::string("model: wrong size for ") + key);
      Eigen::Index n = 0;
      for (Eigen::Index r = 0; r < dst.rows(); ++r)
        for (Eigen::Index cc = 0; cc < dst.cols(); ++cc)
          dst(r, cc) = a.at(n++).template get<double>();
    };
    load("w1", m.w1);
    load("w2", m.w2);
    load("w3", m.w3);
    load("b1", m.b1);
    load("b2", m.b2);
    load("b3", m.b3);
    return m;
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string("model: ") + e.what());
  }
}

void ToyModel::save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::kIoError, "cannot write " + path);
  out << to_json();
}

ToyModel ToyModel::load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

}  // namespace rigidflow
