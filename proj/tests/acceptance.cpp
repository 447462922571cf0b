//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]... [--expect-red N]...
//
// The exit status is non-zero when a criterion fails that is not listed with
// --expect-red. Set RIGIDFLOW_QMUGS_SDF to a QMugs subset to run the optional
// part of criterion 12.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mol_builders.hpp"
#include "rigidflow/assemble_eval.hpp"
#include "rigidflow/canon.hpp"
#include "rigidflow/denoise.hpp"
#include "rigidflow/error.hpp"
#include "rigidflow/flow_cont.hpp"
#include "rigidflow/flow_disc.hpp"
#include "rigidflow/fragment.hpp"
#include "rigidflow/rot3.hpp"
#include "rigidflow/sdf.hpp"
#include "rigidflow/vocab.hpp"
#include "test_util.hpp"

namespace rigidflow {
namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Eigen::Vector3d random_unit(Rng &rng) {
  std::normal_distribution<double> nd;
  return Eigen::Vector3d(nd(rng), nd(rng), nd(rng)).normalized();
}

// --- 1 ----------------------------------------------------------------------

Outcome so3_roundtrip() {
  Timer timer;
  Rng rng(1);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Rotation base = sample_uniform_so3(rng);
    const Eigen::Vector3d w = random_unit(rng) * ((kPi - 0.1) * uniform01(rng));
    worst = std::max(worst, (log_at(base, exp_at(base, w)).w - w).norm());
  }
  const double s = timer.seconds();
  return { worst < 1e-9 && s < 5.0,
           "max error " + fmt("%.2e", worst) + ", " + fmt("%.3f", s) + " s" };
}

// --- 2 ----------------------------------------------------------------------

Outcome haar_sampling() {
  Rng rng(2);
  std::vector<double> angles;
  for (int i = 0; i < 100000; ++i)
    angles.push_back(testing::trace_angle(sample_uniform_so3(rng).matrix()));
  const double ks = testing::ks_statistic(angles, testing::haar_angle_cdf);
  return { ks < 0.01, "KS " + fmt("%.4f", ks) + " at n=1e5" };
}

// --- 3 ----------------------------------------------------------------------

Outcome kolmogorov() {
  Rng rng(3);
  const int v = 5;
  double worst = 0;
  for (int s = 0; s < 20; ++s) {
    const double t = 0.01 + 0.98 * uniform01(rng);
    const int m1 = 1 + static_cast<int>(rng() % v);
    auto path = [&](double u) { return masking_path(m1, v, u); };
    auto rates = [&](double u) {
      // Rates rebuilt from the indicator formula, not the library matrix.
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(v + 1, v + 1);
      for (int j = 0; j <= v; ++j)
        for (int l = 0; l <= v; ++l)
          if (j != l)
            q(j, l) = conditional_rate(j, l, m1, u);
      return q;
    };
    worst = std::max(worst, kolmogorov_residual(path, rates, t, 1e-5));
  }
  return { worst < 1e-6, "max residual " + fmt("%.2e", worst) + " over 20 t" };
}

// --- 4 ----------------------------------------------------------------------

class TokensOnly: public Denoiser {
public:
  TokensOnly(std::vector<Tokens> data, int v): data_(std::move(data)), v_(v) { }
  int num_classes() const override { return v_; }
  DenoiserOutput evaluate(const FlowState &s) const override {
    DenoiserOutput out;
    out.rot_vel.assign(s.size(), Eigen::Vector3d::Zero());
    out.trans_vel.assign(s.size(), Eigen::Vector3d::Zero());
    out.post = oracle_bayes_discrete(data_, v_, s.tokens, s.t, DiscretePrior::kMask, true);
    return out;
  }

private:
  std::vector<Tokens> data_;
  int v_;
};

Eigen::VectorXd slot_marginal(const std::vector<Tokens> &xs, int slot, int v) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(v + 1);
  for (const auto &x: xs)
    m[x[slot]] += 1.0 / static_cast<double>(xs.size());
  return m;
}

Outcome ctmc_marginals() {
  Timer timer;
  const int v = 5;
  std::vector<Tokens> data;
  const std::vector<std::pair<Tokens, int>> pattern {
    { { 1, 2, 3 }, 4 }, { { 1, 1, 5 }, 3 }, { { 4, 2, 3 }, 2 }, { { 5, 5, 5 }, 1 },
  };
  for (const auto &[tuple, n]: pattern)
    data.insert(data.end(), n, tuple);
  const TokensOnly oracle(data, v);
  SamplerConfig cfg;
  cfg.steps = 100;
  std::vector<Tokens> finals;
  const int n = 100000;
  finals.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng r(derive_seed(4, i));
    finals.push_back(sample_joint(oracle, 3, cfg, r).tokens);
  }
  double worst = 0;
  for (int slot = 0; slot < 3; ++slot) {
    const Eigen::VectorXd d = slot_marginal(finals, slot, v) - slot_marginal(data, slot, v);
    worst = std::max(worst, 0.5 * d.cwiseAbs().sum());
  }
  const double s = timer.seconds();
  return { worst < 0.02 && s < 120,
           "max slot TV " + fmt("%.4f", worst) + ", " + fmt("%.1f", s) + " s" };
}

// --- 5 ----------------------------------------------------------------------

Outcome dirac_flow() {
  Rng rng(5);
  const RigidFrame datum { sample_uniform_so3(rng), { 0.5, -1.0, 2.0 } };
  int hits = 0;
  const int trajectories = 1000, steps = 100;
  for (int n = 0; n < trajectories; ++n) {
    Frames f = sample_prior(1, rng);
    for (int s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      Velocities rv, tv;
      conditional_velocity(f, { datum }, t, rv, tv);
      f = integrate_step(f, rv, tv, t, 1.0 / steps, RotSchedule::constant());
    }
    // Trace-formula angle, independent of the library's geodesic distance.
    hits += testing::trace_angle(f[0].rot.matrix().transpose() * datum.rot.matrix()) < 1e-2
            && (f[0].trans - datum.trans).norm() < 1e-2;
  }
  return { hits >= 990, std::to_string(hits) + "/1000 within 1e-2" };
}

// --- 6 ----------------------------------------------------------------------

std::vector<Rotation> random_group(Rng &rng) {
  const int n = 1 + static_cast<int>(rng() % 6);
  const Eigen::Vector3d axis = random_unit(rng);
  std::vector<Rotation> g;
  for (int k = 0; k < n; ++k)
    g.push_back(Rotation::about_axis(axis, 2 * kPi * k / n));
  if (rng() % 2) {
    const Eigen::Vector3d perp = axis.unitOrthogonal();
    const std::size_t m = g.size();
    for (std::size_t k = 0; k < m; ++k)
      g.push_back(g[k] * Rotation::about_axis(perp, kPi));
  }
  return g;
}

Outcome symmetry_alignment() {
  Rng rng(6);
  int agree = 0, counted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Rotation rt = sample_uniform_so3(rng), r1 = sample_uniform_so3(rng);
    const auto sym = random_group(rng);
    std::vector<double> d;
    for (const auto &s: sym)
      d.push_back(testing::trace_angle(rt.matrix().transpose() * (s * r1).matrix()));
    const auto best = std::min_element(d.begin(), d.end()) - d.begin();
    double second = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d.size(); ++i)
      if (static_cast<long>(i) != best)
        second = std::min(second, d[i]);
    if (second - d[best] < 1e-9)
      continue;
    ++counted;
    const Rotation have = align_target_rotation(rt, r1, sym);
    agree += ((sym[best] * r1).matrix() - have.matrix()).norm() < 1e-9;
  }
  return { agree == counted && counted > 900,
           std::to_string(agree) + "/" + std::to_string(counted) + " untied triples agree" };
}

// --- 7 ----------------------------------------------------------------------

// Brute force: rotations taking a labelled reference pair onto any pair that
// map the labelled cloud onto itself.
int brute_symmetry_count(const MolecularGraph &g) {
  const Points p = centred(g.positions());
  const int n = g.num_atoms();
  int i = -1, j = -1;
  for (int a = 0; a < n && i < 0; ++a)
    for (int b = 0; b < n; ++b)
      if (p.row(a).norm() > 1e-3 && p.row(a).cross(p.row(b)).norm() > 1e-3 * p.row(a).norm()) {
        i = a;
        j = b;
        break;
      }
  auto frame = [](const Eigen::Vector3d &x, const Eigen::Vector3d &y) {
    Eigen::Matrix3d f;
    const Eigen::Vector3d e1 = x.normalized();
    const Eigen::Vector3d e2 = (y - y.dot(e1) * e1).normalized();
    f.row(0) = e1;
    f.row(1) = e2;
    f.row(2) = e1.cross(e2);
    return f;
  };
  std::vector<Eigen::Matrix3d> found;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      if (g.atoms[k].element != g.atoms[i].element || g.atoms[l].element != g.atoms[j].element)
        continue;
      if (std::abs(p.row(k).norm() - p.row(i).norm()) > 1e-6
          || std::abs(p.row(l).norm() - p.row(j).norm()) > 1e-6
          || std::abs(p.row(k).dot(p.row(l)) - p.row(i).dot(p.row(j))) > 1e-6)
        continue;
      const Eigen::Matrix3d r = frame(p.row(i), p.row(j)).transpose() * frame(p.row(k), p.row(l));
      bool ok = true;
      for (int a = 0; a < n && ok; ++a) {
        const Eigen::RowVector3d y = p.row(a) * r;
        bool hit = false;
        for (int b = 0; b < n && !hit; ++b)
          hit = g.atoms[b].element == g.atoms[a].element && (p.row(b) - y).norm() < 1e-6;
        ok = hit;
      }
      bool dup = false;
      for (const auto &f: found)
        dup = dup || (f - r).norm() < 1e-6;
      if (ok && !dup)
        found.push_back(r);
    }
  return static_cast<int>(found.size());
}

std::vector<Rotation> group_of(const MolecularGraph &g) {
  return symmetry_group(centred(g.positions()),
                        enumerate_automorphisms(LabelledGraph::from_molecule(g)),
                        kDefaultRmsdTol);
}

bool closed(const std::vector<Rotation> &s) {
  for (const auto &a: s)
    for (const auto &b: s) {
      bool hit = false;
      for (const auto &c: s)
        hit = hit || geodesic_dist(a * b, c) < 1e-6;
      if (!hit)
        return false;
    }
  return true;
}

Outcome kabsch_and_groups() {
  Rng rng(7);
  std::normal_distribution<double> nd;
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Points q(3 + trial % 8, 3);
    for (int r = 0; r < q.rows(); ++r)
      q.row(r) = Eigen::RowVector3d(nd(rng), nd(rng), nd(rng));
    q = centred(q);
    const Rotation r = sample_uniform_so3(rng);
    worst = std::max(worst, (kabsch(q, q * r.matrix()).matrix() - r.matrix()).norm());
  }
  const MolecularGraph cp = testing::cyclopropane();
  MolecularGraph bz = testing::benzene();
  for (Bond &b: bz.bonds)
    if (bz.atoms[b.i].element == "C" && bz.atoms[b.j].element == "C")
      b.order = BondOrder::kAromatic;
  const auto scp = group_of(cp), sbz = group_of(bz);
  const bool groups = scp.size() == 6 && brute_symmetry_count(cp) == 6 && sbz.size() == 12
                      && brute_symmetry_count(bz) == 12 && closed(scp) && closed(sbz);
  int max_sym = 0;
  for (const char *f: { "toy10.sdf", "corpus50.sdf", "conformers.sdf" }) {
    const auto mols = read_sdf_file(std::string(RIGIDFLOW_TEST_DATA_DIR) + "/" + f);
    const auto build = build_vocabulary(fragment_dataset(mols, {}).molecules);
    max_sym = std::max(max_sym, build.stats.max_sym);
  }
  std::ostringstream d;
  d << "kabsch max error " << fmt("%.1e", worst) << ", |S| cyclopropane " << scp.size()
    << " benzene " << sbz.size() << ", fixture max |S| " << max_sym;
  return { worst < 1e-9 && groups && max_sym <= 12, d.str() };
}

// --- 8 ----------------------------------------------------------------------

Outcome fragmentation_roundtrip() {
  const auto mols = read_sdf_file(RIGIDFLOW_TEST_DATA_DIR "/corpus50.sdf");
  const FragmentationConfig cfg;
  const auto data = fragment_dataset(mols, cfg).molecules;

  bool partition = data.size() == mols.size();
  for (const auto &fm: data) {
    std::vector<int> seen(fm.source.num_atoms(), 0);
    for (const auto &m: fm.motifs)
      for (int a: m.atom_indices)
        ++seen[a];
    partition = partition && std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
  }

  // Every motif instance is matched against its class exemplar.
  const auto build = build_vocabulary(data);
  int motifs = 0, good = 0;
  std::set<std::string> failed;
  for (const auto &fm: data)
    for (const auto &inst: fm.motifs) {
      ++motifs;
      const MolecularGraph g = motif_graph(fm.source, inst);
      const int token = build.vocab.token_of(inst.key);
      bool ok = false;
      if (token > 0) {
        try {
          const MotifDescriptor &d = build.vocab.descriptor(token);
          const FrameAssignment fa = assign_frame(d, g, kDefaultRmsdTol);
          ok = rmsd(fa.frame.apply(d.pose), permute_rows(g.positions(), fa.perm))
               <= kDefaultRmsdTol;
        } catch (const Error &) {
        }
      }
      good += ok;
      if (!ok)
        failed.insert(fm.source.name);
    }

  auto mean_fragments = [&](Strategy s, double alpha) {
    FragmentationConfig c;
    c.strategy = s;
    c.alpha = alpha;
    return fragment_stats(fragment_dataset(mols, c).molecules, "", 0).mean_fragments;
  };
  const std::vector<double> means { mean_fragments(Strategy::kNoRings, 0.5),
                                    mean_fragments(Strategy::kPlanarRings, 0.5),
                                    mean_fragments(Strategy::kPlanarRings, 0.1),
                                    mean_fragments(Strategy::kPlanarRings, 0.01) };
  bool monotone = means[1] < means[0];
  for (std::size_t i = 1; i < means.size(); ++i)
    monotone = monotone && means[i] <= means[i - 1] + 1e-12;

  std::ostringstream d;
  d << "partition " << (partition ? "ok" : "broken") << ", " << good << "/" << motifs
    << " motifs within 0.25 A";
  for (const auto &name: failed)
    d << " (fails: " << name << ")";
  d << ", fragments/molecule " << fmt("%.2f", means[0]) << " >= " << fmt("%.2f", means[1])
    << " >= " << fmt("%.2f", means[2]) << " >= " << fmt("%.2f", means[3]);
  return { partition && good == motifs && monotone, d.str() };
}

// --- 9 ----------------------------------------------------------------------

Outcome gradient_check() {
  Rng rng(9);
  double worst = 0;
  for (bool sc: { false, true }) {
    ToyModelConfig c;
    c.num_classes = 4;
    c.width1 = 16;
    c.width2 = 12;
    c.self_conditioning = sc;
    ToyModel m(c);
    m.init(rng);
    TrainSample s;
    s.frames = sample_prior(3, rng);
    for (int i = 0; i < 3; ++i)
      s.tokens.push_back(1 + static_cast<int>(rng() % 4));
    s.syms.assign(3, { Rotation() });
    FlowState st;
    TrainingTargets tg = make_targets(s, 0.55, 4, DiscretePrior::kMask, rng, st);
    tg.masked = { true, false, true };
    const Posterior scp = sc ? Posterior::Constant(3, 4, 0.25) : Posterior();
    const std::vector<double> g = toy_backward(m, toy_forward(m, st, scp), tg).flat();
    auto params = m.parameters();
    const double eps = 1e-5;
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t p = rng() % params.size();
      const double keep = *params[p];
      *params[p] = keep + eps;
      const double up = toy_loss(toy_forward(m, st, scp), tg);
      *params[p] = keep - eps;
      const double down = toy_loss(toy_forward(m, st, scp), tg);
      *params[p] = keep;
      const double num = (up - down) / (2 * eps);
      worst = std::max(worst,
                       std::abs(g[p] - num) / std::max({ std::abs(g[p]), std::abs(num), 1e-6 }));
    }
  }
  return { worst < 1e-4, "max relative error " + fmt("%.2e", worst) + " over 1000 coordinates" };
}

// --- 10 ---------------------------------------------------------------------

// Two motif classes, both slots of the same class, placed in one of two rigid
// arrangements: four equally likely joint outcomes, each repeated `copies`
// times so an epoch averages over more noise draws.
std::vector<TrainSample> two_by_two(int copies) {
  const Rotation quarter = Rotation::about_axis({ 0, 0, 1 }, kPi / 2);
  const std::vector<Frames> arrangements {
    { { Rotation(), { -1.5, 0, 0 } }, { Rotation(), { 1.5, 0, 0 } } },
    { { Rotation(), { -1.0, 0, 0 } }, { quarter, { 1.0, 0, 0 } } },
  };
  std::vector<TrainSample> out;
  for (int c = 0; c < copies; ++c)
    for (int cls: { 1, 2 })
      for (const auto &f: arrangements) {
        TrainSample s;
        s.frames = centre_frames(f);
        s.tokens = { cls, cls };
        s.syms.assign(2, { Rotation() });
        out.push_back(s);
      }
  return out;
}

Outcome toy_generation() {
  Timer timer;
  const auto data = two_by_two(16);
  Rng rng(10);
  ToyModelConfig c;
  c.num_classes = 2;
  ToyModel m(c);
  m.init(rng);
  TrainConfig tc;
  tc.epochs = 2000;
  tc.batch = 16;
  tc.lr = 1e-3;
  const auto curve = train(m, data, tc, rng).loss_curve;

  std::map<Tokens, double> freq;
  double geo = 0;
  const int n = 1000;
  SamplerConfig sc;
  for (int i = 0; i < n; ++i) {
    Rng r(derive_seed(10, i));
    const JointSample out = sample_joint(m, 2, sc, r);
    freq[out.tokens] += 1.0 / n;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 2; ++a)
      best = std::min(best, arrangement_error(out.frames, out.tokens, data[a].frames, out.tokens).rot);
    geo += best / n;
  }
  double tv = 0.5 * (std::abs(freq[{ 1, 1 }] - 0.5) + std::abs(freq[{ 2, 2 }] - 0.5)
                     + freq[{ 1, 2 }] + freq[{ 2, 1 }]);
  const double s = timer.seconds();
  std::ostringstream d;
  d << "joint TV " << fmt("%.3f", tv) << ", mean geodesic error " << fmt("%.3f", geo)
    << " rad, final loss " << fmt("%.3f", curve.back()) << ", " << fmt("%.0f", s) << " s";
  return { tv < 0.1 && geo < 0.3 && s < 600 && std::isfinite(curve.back()), d.str() };
}

// --- 11 ---------------------------------------------------------------------

Outcome metrics_self_consistency() {
  const BondTable bonds = BondTable::load(RIGIDFLOW_DATA_DIR "/bond_table.json");
  const ValencyTable valency = ValencyTable::load(RIGIDFLOW_DATA_DIR "/valency_table.json");
  const auto mols = read_sdf_file(RIGIDFLOW_TEST_DATA_DIR "/corpus50.sdf");
  const FragmentationConfig cfg;
  const auto data = fragment_dataset(mols, cfg).molecules;
  const auto build = build_vocabulary(data);
  std::vector<MolecularGraph> train;
  for (int i: build.kept)
    train.push_back(data[i].source);

  EvalInputs in;
  in.bonds = &bonds;
  in.valency = &valency;
  in.vocab = &build.vocab;
  in.frag = cfg;
  in.cutoff = pruning_cutoff(cfg.alpha, static_cast<long>(train.size()));
  const MetricsReport rep = evaluate_metrics(train, train, in);

  // Own stability, counted atom by atom against the valence table.
  long atoms = 0, stable_atoms = 0;
  int stable_mols = 0;
  for (const auto &g0: train) {
    const MolecularGraph g = with_inferred_bonds(g0, bonds);
    std::vector<double> val(g.num_atoms(), 0.0);
    for (const Bond &b: g.bonds) {
      const double o = b.order == BondOrder::kAromatic ? 1.5 : static_cast<double>(b.order);
      val[b.i] += o;
      val[b.j] += o;
    }
    int ok = 0;
    for (int a = 0; a < g.num_atoms(); ++a) {
      const auto &allowed = valency.allowed(g.atoms[a].element);
      ok += std::any_of(allowed.begin(), allowed.end(),
                        [&](int v) { return std::abs(val[a] - v) < 1e-9; });
    }
    atoms += g.num_atoms();
    stable_atoms += ok;
    stable_mols += ok == g.num_atoms();
  }
  const double want_atom = 100.0 * stable_atoms / atoms;
  const double want_mol = 100.0 * stable_mols / train.size();
  const bool pass = rep.tv.atoms == 0 && rep.tv.bonds == 0
                    && std::abs(rep.atom_stability - want_atom) < 1e-9
                    && std::abs(rep.molecule_stability - want_mol) < 1e-9 && rep.has_ratios
                    && rep.ratios.common == 1.0
                    && rep.ratios.uncommon == 1.0;
  std::ostringstream d;
  d << "TV " << rep.tv.atoms << "/" << rep.tv.bonds << ", atom stability "
    << fmt("%.2f", rep.atom_stability) << "% (own " << fmt("%.2f", want_atom)
    << "%), common/uncommon ratios " << rep.ratios.common << "/"
    << rep.ratios.uncommon;
  return { pass, d.str() };
}

// --- 12 ---------------------------------------------------------------------

Outcome compression() {
  const auto mols = read_sdf_file(RIGIDFLOW_TEST_DATA_DIR "/conformers.sdf");
  FragmentationConfig cfg;
  cfg.alpha = 0.1;
  const auto build = build_vocabulary(fragment_dataset(mols, cfg).molecules);
  const CompressionStats &s = build.stats;
  const bool reported = s.molecules > 0 && std::isfinite(s.all_atom_ratio)
                        && s.all_atom_ratio > 1.0 && std::isfinite(s.heavy_atom_ratio);
  std::ostringstream d;
  d << "conformer corpus: all-atom ratio " << fmt("%.3f", s.all_atom_ratio) << ", heavy-atom "
    << fmt("%.3f", s.heavy_atom_ratio);
  bool optional = true;
  if (const char *q = std::getenv("RIGIDFLOW_QMUGS_SDF")) {
    const auto qm = build_vocabulary(fragment_dataset(read_sdf_file(q), cfg).molecules);
    optional = qm.stats.all_atom_ratio >= 3.0 && qm.stats.all_atom_ratio <= 3.8;
    d << "; QMugs all-atom ratio " << fmt("%.3f", qm.stats.all_atom_ratio);
  } else {
    d << "; QMugs subset not supplied, optional range not checked";
  }
  return { reported && optional, d.str() };
}

}  // namespace
}  // namespace rigidflow

int main(int argc, char **argv) {
  using namespace rigidflow;
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria {
    { "SO(3) log/exp roundtrip", so3_roundtrip },
    { "Haar sampling", haar_sampling },
    { "conditional path Kolmogorov residual", kolmogorov },
    { "CTMC marginal recovery", ctmc_marginals },
    { "Dirac-data continuous flow", dirac_flow },
    { "symmetry alignment oracle", symmetry_alignment },
    { "Kabsch and symmetry groups", kabsch_and_groups },
    { "fragmentation roundtrip", fragmentation_roundtrip },
    { "toy model gradient check", gradient_check },
    { "end-to-end toy generation", toy_generation },
    { "metrics self-consistency", metrics_self_consistency },
    { "compression statistic", compression },
  };
  std::set<int> only, expect_red;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const int n = std::atoi(argv[i + 1]);
    if (flag == "--only")
      only.insert(n);
    else if (flag == "--expect-red")
      expect_red.insert(n);
    else {
      std::fprintf(stderr, "usage: acceptance [--only N]... [--expect-red N]...\n");
      return 2;
    }
  }
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n))
      continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = { false, std::string("threw: ") + e.what() };
    }
    std::printf("ACCEPTANCE %2d %s: %s (%s)\n", n, o.pass ? "PASS" : "FAIL",
                criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !expect_red.count(n))
      ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
