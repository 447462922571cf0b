//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"

#include "mol_builders.hpp"
#include "rigidflow/error.hpp"
#include "rigidflow/rng.hpp"
#include "rigidflow/sdf.hpp"
#include "rigidflow/vocab.hpp"

namespace rigidflow {
namespace {

using testing::benzene;
using testing::build_graph;
using testing::cyclopropane;
using testing::ethane;

Points random_cloud(Rng &rng, int n) {
  std::normal_distribution<double> nd;
  Points p(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c)
      p(i, c) = nd(rng);
  return centred(p);
}

double loss(const Points &p, const Points &q, const Eigen::Matrix3d &r) {
  return (p * r - q).squaredNorm();
}

// Rotation taking the orthonormal frame built on (a, b) to the one on (c, d).
Eigen::Matrix3d frame_rotation(const Eigen::Vector3d &a, const Eigen::Vector3d &b,
                               const Eigen::Vector3d &c, const Eigen::Vector3d &d) {
  auto frame = [](const Eigen::Vector3d &x, const Eigen::Vector3d &y) {
    Eigen::Matrix3d f;
    const Eigen::Vector3d e1 = x.normalized();
    const Eigen::Vector3d e2 = (y - y.dot(e1) * e1).normalized();
    f.row(0) = e1;
    f.row(1) = e2;
    f.row(2) = e1.cross(e2);
    return f;
  };
  return frame(a, b).transpose() * frame(c, d);
}

// Brute-force symmetry oracle: every rotation sending one labelled reference
// pair of points onto any labelled pair, kept if it maps the labelled cloud
// onto itself.
int brute_symmetry_count(const MolecularGraph &g) {
  const Points p = centred(g.positions());
  const int n = g.num_atoms();
  int i = -1, j = -1;
  for (int a = 0; a < n && i < 0; ++a)
    for (int b = 0; b < n; ++b)
      if (p.row(a).norm() > 1e-3
          && p.row(a).cross(p.row(b)).norm() > 1e-3 * p.row(a).norm()) {
        i = a;
        j = b;
        break;
      }
  REQUIRE(i >= 0);
  std::vector<Eigen::Matrix3d> found;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      if (g.atoms[k].element != g.atoms[i].element
          || g.atoms[l].element != g.atoms[j].element)
        continue;
      if (std::abs(p.row(k).norm() - p.row(i).norm()) > 1e-6
          || std::abs(p.row(l).norm() - p.row(j).norm()) > 1e-6
          || std::abs(p.row(k).dot(p.row(l)) - p.row(i).dot(p.row(j))) > 1e-6)
        continue;
      const Eigen::Matrix3d r = frame_rotation(p.row(i), p.row(j), p.row(k), p.row(l));
      bool ok = true;
      for (int a = 0; a < n && ok; ++a) {
        const Eigen::RowVector3d y = p.row(a) * r;
        bool hit = false;
        for (int b = 0; b < n && !hit; ++b)
          hit = g.atoms[b].element == g.atoms[a].element
                && (p.row(b) - y).norm() < 1e-6;
        ok = hit;
      }
      if (!ok)
        continue;
      bool dup = false;
      for (const auto &f: found)
        dup = dup || (f - r).norm() < 1e-6;
      if (!dup)
        found.push_back(r);
    }
  return static_cast<int>(found.size());
}

MolecularGraph aromatic_benzene() {
  MolecularGraph g = benzene();
  for (Bond &b: g.bonds)
    if (g.atoms[b.i].element == "C" && g.atoms[b.j].element == "C")
      b.order = BondOrder::kAromatic;
  return g;
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

std::vector<FragmentedMolecule> fragmented(const std::vector<MolecularGraph> &mols,
                                           double alpha = 0.1) {
  FragmentationConfig cfg;
  cfg.alpha = alpha;
  return fragment_dataset(mols, cfg).molecules;
}

TEST_CASE("kabsch recovers a known rotation") {
  Rng rng(11);
  const Points p = random_cloud(rng, 7);
  CHECK(geodesic_dist(kabsch(p, p), Rotation()) < 1e-12);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Points q = random_cloud(rng, 3 + trial % 8);
    const Rotation r = sample_uniform_so3(rng);
    const Rotation got = kabsch(q, q * r.matrix());
    worst = std::max(worst, (got.matrix() - r.matrix()).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("kabsch is a local minimum of the squared error") {
  Rng rng(12);
  std::normal_distribution<double> nd(0, 0.3);
  for (int trial = 0; trial < 50; ++trial) {
    const Points p = random_cloud(rng, 6);
    Points q = p * sample_uniform_so3(rng).matrix();
    for (int i = 0; i < q.rows(); ++i)
      for (int c = 0; c < 3; ++c)
        q(i, c) += nd(rng);
    const Rotation r = kabsch(p, q);
    CHECK(r.matrix().determinant() == doctest::Approx(1.0));
    const double base = loss(p, q, r.matrix());
    for (int probe = 0; probe < 20; ++probe) {
      Eigen::Vector3d w(nd(rng), nd(rng), nd(rng));
      w *= 1e-3 / w.norm();
      CHECK(loss(p, q, exp_at(r, w).matrix()) >= base - 1e-12);
    }
  }
}

TEST_CASE("kabsch rejects collinear references and shape mismatch") {
  Points line(3, 3);
  line << -1, 0, 0, 0, 0, 0, 1, 0, 0;
  CHECK_THROWS_AS(kabsch(line, line), Error);
  try {
    kabsch(line, line);
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kDegenerate);
  }
  Points two(2, 3);
  two.setZero();
  try {
    kabsch(line, two);
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kShapeMismatch);
  }
}

TEST_CASE("symmetry groups match the brute-force oracle") {
  const auto cp = cyclopropane();
  const auto s_cp = group_of(cp);
  CHECK(s_cp.size() == 6);
  CHECK(brute_symmetry_count(cp) == 6);

  const auto bz = aromatic_benzene();
  CHECK(group_of(bz).size() == 12);
  CHECK(brute_symmetry_count(bz) == 12);

  // Kekule bond orders break the six-fold axis.
  CHECK(group_of(benzene()).size() == 6);

  // CH3 with one heavy neighbour stub: C3v proper part.
  MolecularGraph methyl = build_graph({ "C" }, {}, { { 0, 0, 0 } });
  testing::add_methyl_hydrogens(methyl, 0, { 1, 0, 0 });
  CHECK(group_of(methyl).size() == 3);
  CHECK(brute_symmetry_count(methyl) == 3);

  for (const auto *g: { &cp, &bz })
    CHECK(closed(group_of(*g)));
}

TEST_CASE("asymmetric motif has only the identity") {
  const MolecularGraph star =
      build_graph({ "C", "N", "O", "F" }, { { 0, 1, 1 }, { 0, 2, 1 }, { 0, 3, 1 } },
                  { { 0, 0, 0 }, { 1.4, 0, 0 }, { -0.5, 1.3, 0 }, { -0.4, -0.6, 1.2 } });
  const auto s = group_of(star);
  REQUIRE(s.size() == 1);
  CHECK(geodesic_dist(s[0], Rotation()) < 1e-12);
}

TEST_CASE("assign_frame recovers the frame up to symmetry") {
  Vocabulary v;
  const int tok = v.add(aromatic_benzene(), kDefaultRmsdTol);
  const MotifDescriptor &d = v.descriptor(tok);
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const Rotation r = sample_uniform_so3(rng);
    const Eigen::Vector3d x(uniform01(rng) * 10, -3, uniform01(rng));
    // Relabel the instance so the identity is not the answer.
    Permutation shuffle(d.num_points());
    std::iota(shuffle.begin(), shuffle.end(), 0);
    std::shuffle(shuffle.begin(), shuffle.end(), rng);
    const RigidFrame f { r, x };
    const Points world = f.apply(d.pose);
    MolecularGraph inst;
    std::vector<int> where(d.num_points());
    for (int k = 0; k < d.num_points(); ++k) {
      Atom a = d.graph.atoms[shuffle[k]];
      a.pos = world.row(shuffle[k]).transpose();
      where[shuffle[k]] = inst.add_atom(a);
    }
    for (const Bond &b: d.graph.bonds)
      inst.add_bond(where[b.i], where[b.j], b.order);
    const FrameAssignment fa = assign_frame(d, inst, kDefaultRmsdTol);
    CHECK(fa.residual < 1e-9);
    CHECK((fa.frame.trans - x).norm() < 1e-9);
    // R = S R* for some S in the group.
    double best = 1e9;
    for (const Rotation &s: d.sym)
      best = std::min(best, geodesic_dist(fa.frame.rot, s * r));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("assign_frame fails when geometry disagrees") {
  Vocabulary v;
  const int tok = v.add(cyclopropane(), kDefaultRmsdTol);
  MolecularGraph bent = cyclopropane();
  for (int a = 3; a < bent.num_atoms(); ++a)
    bent.atoms[a].pos.z() *= 3;
  try {
    assign_frame(v.descriptor(tok), bent, kDefaultRmsdTol);
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNoValidAutomorphism);
  }
  try {
    assign_frame(v.descriptor(tok), ethane(), kDefaultRmsdTol);
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNoValidAutomorphism);
  }
}

TEST_CASE("two methyl motifs share one class") {
  const auto build = build_vocabulary(fragmented({ ethane() }, 0));
  REQUIRE(build.vocab.size() == 1);
  CHECK(build.vocab.descriptor(1).count == 2);
  CHECK(build.vocab.num_tokens() == 2);
  CHECK(build.vocab.sym(kMaskToken).size() == 1);
  CHECK(build.assignments.size() == 1);
  CHECK(build.assignments[0].size() == 2);
}

TEST_CASE("corpus vocabulary reconstructs every motif") {
  const auto mols = read_sdf_file(RIGIDFLOW_TEST_DATA_DIR "/corpus50.sdf");
  const auto data = fragmented(mols);
  const auto build = build_vocabulary(data);
  // Nitro O- is cut off as a lone O with two dummies; its dummy angle differs
  // from the first lone-O exemplar, so that molecule is skipped.
  REQUIRE(build.skipped.size() == 1);
  CHECK(data[build.skipped[0].index].source.name == "nitrobenzene");
  CHECK(build.kept.size() + build.skipped.size() == data.size());
  long total = 0, expected = 0;
  for (const auto &d: build.vocab.entries()) {
    total += d.count;
    CHECK(d.sym.size() <= 12);
    CHECK(closed(d.sym));
    CHECK(std::abs(d.pose.colwise().mean().norm()) < 1e-9);
  }
  for (std::size_t m = 0; m < build.kept.size(); ++m) {
    const FragmentedMolecule &fm = data[build.kept[m]];
    expected += static_cast<long>(fm.motifs.size());
    for (std::size_t k = 0; k < fm.motifs.size(); ++k) {
      const MotifAssignment &ma = build.assignments[m][k];
      const MotifDescriptor &d = build.vocab.descriptor(ma.token);
      const Points placed = ma.assignment.frame.apply(d.pose);
      const Points truth =
          permute_rows(motif_graph(fm.source, fm.motifs[k]).positions(),
                       ma.assignment.perm);
      CHECK(rmsd(placed, truth) <= kDefaultRmsdTol);
    }
  }
  CHECK(total == expected);
  CHECK(build.stats.max_sym <= 12);
  CHECK(build.stats.all_atom_ratio > 1.0);
  CHECK(build.stats.heavy_atom_ratio > 0.0);
  CHECK(build.stats.all_atom_ratio
        == doctest::Approx(build.stats.mean_atoms / build.stats.mean_motifs));

  // assign_molecule agrees with the build.
  const auto again = assign_molecule(build.vocab, data[0]);
  REQUIRE(again.size() == build.assignments[0].size());
  for (std::size_t k = 0; k < again.size(); ++k)
    CHECK(again[k].token == build.assignments[0][k].token);
}

TEST_CASE("symmetry group does not depend on the exemplar instance") {
  const auto mols = read_sdf_file(RIGIDFLOW_TEST_DATA_DIR "/conformers.sdf");
  auto data = fragmented(mols);
  const auto fwd = build_vocabulary(data);
  std::reverse(data.begin(), data.end());
  const auto rev = build_vocabulary(data);
  REQUIRE(fwd.vocab.size() == rev.vocab.size());
  for (const auto &d: fwd.vocab.entries()) {
    const int t = rev.vocab.token_of(d.key);
    REQUIRE(t > 0);
    CHECK(rev.vocab.descriptor(t).sym.size() == d.sym.size());
    CHECK(rev.vocab.descriptor(t).count == d.count);
  }
}

TEST_CASE("vocabulary json roundtrip is exact") {
  const auto mols = read_sdf_file(RIGIDFLOW_TEST_DATA_DIR "/corpus50.sdf");
  const auto build = build_vocabulary(fragmented(mols));
  const std::string text = build.vocab.to_json();
  const Vocabulary back = Vocabulary::from_json(text);
  CHECK(back.to_json() == text);
  REQUIRE(back.size() == build.vocab.size());
  for (int t = 1; t <= back.size(); ++t) {
    const auto &a = build.vocab.descriptor(t);
    const auto &b = back.descriptor(t);
    CHECK(a.key == b.key);
    CHECK(a.base_key == b.base_key);
    CHECK((a.pose - b.pose).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.sym.size() == b.sym.size());
    for (std::size_t s = 0; s < a.sym.size(); ++s)
      CHECK((a.sym[s].matrix() - b.sym[s].matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.automorphisms == b.automorphisms);
  }
  const auto path = std::filesystem::temp_directory_path() / "rf_vocab_test.json";
  build.vocab.save(path.string());
  CHECK(Vocabulary::load(path.string()).to_json() == text);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(Vocabulary::from_json("{}"), Error);
  CHECK_THROWS_AS(Vocabulary::from_json("not json"), Error);
  CHECK_THROWS_AS(Vocabulary::load("/nonexistent/v.json"), Error);
}

}  // namespace
}  // namespace rigidflow
