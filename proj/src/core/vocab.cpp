//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/vocab.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "json.hpp"
#include "rigidflow/error.hpp"

namespace rigidflow {

using nlohmann::json;

Points centred(const Points &pts) {
  if (pts.rows() == 0)
    return pts;
  return pts.rowwise() - pts.colwise().mean();
}

Points permute_rows(const Points &pts, const Permutation &perm) {
  Points out(static_cast<Eigen::Index>(perm.size()), 3);
  for (std::size_t v = 0; v < perm.size(); ++v)
    out.row(static_cast<Eigen::Index>(v)) = pts.row(perm[v]);
  return out;
}

double rmsd(const Points &a, const Points &b) {
  if (a.rows() != b.rows())
    fail(ErrorCode::kShapeMismatch, "rmsd: point counts differ");
  if (a.rows() == 0)
    return 0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.rows()));
}

Rotation kabsch(const Points &p, const Points &q) {
  if (p.rows() != q.rows())
    fail(ErrorCode::kShapeMismatch, "kabsch: point counts differ");
  if (!is_non_collinear(p))
    fail(ErrorCode::kDegenerate, "kabsch: reference points are collinear");
  const Eigen::Matrix3d h = p.transpose() * q;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU
                                               | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU(), v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return Rotation::from_matrix(u * d * v.transpose());
}

std::vector<Rotation> symmetry_group(const Points &pose,
                                     const std::vector<Permutation> &autos,
                                     double rmsd_tol) {
  std::vector<Rotation> group { Rotation() };
  auto contains = [&](const Rotation &r) {
    for (const Rotation &s: group)
      if (geodesic_dist(s, r) < kSymmetryDedupTol)
        return true;
    return false;
  };
  for (const Permutation &pi: autos) {
    const Points moved = permute_rows(pose, pi);
    const Rotation s = kabsch(moved, pose);
    if (rmsd(moved * s.matrix(), pose) > rmsd_tol)
      continue;
    if (!contains(s))
      group.push_back(s);
  }
  for (const Rotation &a: group)
    for (const Rotation &b: group)
      if (!contains(a * b))
        fail(ErrorCode::kNotAGroup,
             "symmetry rotations are not closed under composition; "
             "rmsd tolerance is inconsistent with the pose");
  return group;
}

int MotifDescriptor::num_real_atoms() const {
  int n = 0;
  for (const Atom &a: graph.atoms)
    n += !a.is_dummy;
  return n;
}

const MotifDescriptor &Vocabulary::descriptor(int token) const {
  if (token <= 0 || token > size())
    fail(ErrorCode::kInvalidArgument,
         "token " + std::to_string(token) + " is not a motif class");
  return entries_[token - 1];
}

MotifDescriptor &Vocabulary::descriptor(int token) {
  return const_cast<MotifDescriptor &>(
      static_cast<const Vocabulary &>(*this).descriptor(token));
}

const std::vector<Rotation> &Vocabulary::sym(int token) const {
  if (token == kMaskToken)
    return mask_sym_;
  return descriptor(token).sym;
}

int Vocabulary::token_of(const CanonicalKey &key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

int Vocabulary::token_of_base(const CanonicalKey &base_key) const {
  for (int i = 0; i < size(); ++i)
    if (entries_[i].base_key == base_key)
      return i + 1;
  return -1;
}

namespace {

MolecularGraph without_dummies(const MolecularGraph &g) {
  std::vector<int> real;
  for (int a = 0; a < g.num_atoms(); ++a)
    if (!g.atoms[a].is_dummy)
      real.push_back(a);
  return induced_subgraph(g, real);
}

MotifDescriptor describe(MolecularGraph graph, double rmsd_tol) {
  MotifDescriptor d;
  const Points pose = centred(graph.positions());
  for (int a = 0; a < graph.num_atoms(); ++a)
    graph.atoms[a].pos = pose.row(a).transpose();
  d.key = canonical_key(graph);
  d.base_key = canonical_key(without_dummies(graph));
  d.pose = pose;
  d.automorphisms = enumerate_automorphisms(LabelledGraph::from_molecule(graph));
  d.sym = symmetry_group(pose, d.automorphisms, rmsd_tol);
  d.graph = std::move(graph);
  return d;
}

}  // namespace

int Vocabulary::add(const MolecularGraph &graph, double tol) {
  MotifDescriptor d = describe(graph, tol);
  if (index_.count(d.key))
    fail(ErrorCode::kInvalidArgument, "duplicate motif class");
  entries_.push_back(std::move(d));
  const int token = size();
  index_[entries_.back().key] = token;
  return token;
}

std::string Vocabulary::to_json() const {
  json j;
  j["format"] = "rigidflow-vocabulary";
  j["version"] = 1;
  j["rmsd_tol"] = rmsd_tol;
  j["mask_token"] = kMaskToken;
  json entries = json::array();
  for (const MotifDescriptor &d: entries_) {
    json e;
    e["key"] = d.key.bytes();
    e["digest"] = d.key.digest();
    e["count"] = d.count;
    json atoms = json::array(), bonds = json::array(), sym = json::array();
    for (const Atom &a: d.graph.atoms)
      atoms.push_back({ { "element", a.element },
                        { "dummy", a.is_dummy },
                        { "charge", a.charge },
                        { "pos", { a.pos.x(), a.pos.y(), a.pos.z() } } });
    for (const Bond &b: d.graph.bonds)
      bonds.push_back({ b.i, b.j, static_cast<int>(b.order) });
    for (const Rotation &s: d.sym) {
      json m = json::array();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          m.push_back(s.matrix()(r, c));
      sym.push_back(std::move(m));
    }
    e["atoms"] = std::move(atoms);
    e["bonds"] = std::move(bonds);
    e["sym"] = std::move(sym);
    entries.push_back(std::move(e));
  }
  j["entries"] = std::move(entries);
  return j.dump(1) + "\n";
}

Vocabulary Vocabulary::from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string("vocabulary: ") + e.what());
  }
  if (j.value("format", "") != "rigidflow-vocabulary" || j.value("version", 0) != 1)
    fail(ErrorCode::kFormatError, "not a version-1 rigidflow vocabulary");
  Vocabulary v;
  try {
    v.rmsd_tol = j.at("rmsd_tol").get<double>();
    for (const json &e: j.at("entries")) {
      MolecularGraph g;
      for (const json &a: e.at("atoms")) {
        Atom atom;
        atom.element = a.at("element").get<std::string>();
        atom.is_dummy = a.at("dummy").get<bool>();
        atom.charge = a.at("charge").get<int>();
        const auto &p = a.at("pos");
        atom.pos = Eigen::Vector3d(p.at(0).get<double>(), p.at(1).get<double>(),
                                   p.at(2).get<double>());
        g.add_atom(atom);
      }
      for (const json &b: e.at("bonds"))
        g.add_bond(b.at(0).get<int>(), b.at(1).get<int>(),
                   static_cast<BondOrder>(b.at(2).get<int>()));
      MotifDescriptor d;
      d.pose = g.positions();
      d.key = canonical_key(g);
      if (d.key.bytes() != e.at("key").get<std::string>())
        fail(ErrorCode::kFormatError, "vocabulary entry key does not match graph");
      d.base_key = canonical_key(without_dummies(g));
      d.count = e.at("count").get<long>();
      d.automorphisms = enumerate_automorphisms(LabelledGraph::from_molecule(g));
      for (const json &m: e.at("sym")) {
        Eigen::Matrix3d r;
        for (int k = 0; k < 9; ++k)
          r(k / 3, k % 3) = m.at(k).get<double>();
        d.sym.push_back(Rotation::from_matrix(r));
      }
      d.graph = std::move(g);
      v.entries_.push_back(std::move(d));
      v.index_[v.entries_.back().key] = v.size();
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string("vocabulary: ") + e.what());
  }
  return v;
}

void Vocabulary::save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::kIoError, "cannot write " + path);
  out << to_json();
}

Vocabulary Vocabulary::load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

FrameAssignment assign_frame(const MotifDescriptor &desc,
                             const MolecularGraph &instance, double rmsd_tol) {
  const Points pts = instance.positions();
  const Eigen::RowVector3d centre = pts.colwise().mean();
  const Points local = pts.rowwise() - centre;
  const auto isos =
      enumerate_isomorphisms(LabelledGraph::from_molecule(desc.graph),
                             LabelledGraph::from_molecule(instance));
  double best = std::numeric_limits<double>::infinity();
  for (const Permutation &f: isos) {
    const Points target = permute_rows(local, f);
    const Rotation r = kabsch(desc.pose, target);
    const double res = rmsd(desc.pose * r.matrix(), target);
    best = std::min(best, res);
    if (res <= rmsd_tol)
      return { { r, centre.transpose() }, f, res };
  }
  fail(ErrorCode::kNoValidAutomorphism,
       isos.empty() ? std::string("instance is not isomorphic to the exemplar")
                    : "no correspondence fits within rmsd tolerance (best "
                          + std::to_string(best) + ")");
}

std::vector<MotifAssignment> assign_molecule(const Vocabulary &vocab,
                                             const FragmentedMolecule &fm) {
  std::vector<MotifAssignment> out;
  for (const MotifInstance &inst: fm.motifs) {
    MotifAssignment ma;
    ma.token = vocab.token_of(inst.key);
    if (ma.token > 0)
      ma.assignment = assign_frame(vocab.descriptor(ma.token),
                                   motif_graph(fm.source, inst),
                                   vocab.rmsd_tol);
    else
      ma.token = -1;
    out.push_back(std::move(ma));
  }
  return out;
}

CompressionStats compression_stats(const std::vector<FragmentedMolecule> &dataset,
                                   const Vocabulary &vocab) {
  CompressionStats st;
  st.molecules = static_cast<int>(dataset.size());
  for (const MotifDescriptor &d: vocab.entries())
    st.max_sym = std::max(st.max_sym, static_cast<int>(d.sym.size()));
  if (dataset.empty())
    return st;
  double atoms = 0, heavy = 0, motifs = 0;
  for (const auto &fm: dataset) {
    atoms += fm.source.num_atoms();
    heavy += fm.source.num_heavy_atoms();
    motifs += static_cast<double>(fm.motifs.size());
  }
  const double n = static_cast<double>(dataset.size());
  st.mean_atoms = atoms / n;
  st.mean_heavy_atoms = heavy / n;
  st.mean_motifs = motifs / n;
  st.atoms_per_motif = atoms / motifs;
  st.all_atom_ratio = st.mean_atoms / st.mean_motifs;
  st.heavy_atom_ratio = st.mean_heavy_atoms / st.mean_motifs;
  return st;
}

VocabularyBuild build_vocabulary(const std::vector<FragmentedMolecule> &dataset,
                                 double rmsd_tol) {
  VocabularyBuild out;
  out.vocab.rmsd_tol = rmsd_tol;
  std::vector<FragmentedMolecule> kept;
  for (int i = 0; i < static_cast<int>(dataset.size()); ++i) {
    const FragmentedMolecule &fm = dataset[i];
    std::vector<MotifAssignment> row;
    try {
      for (const MotifInstance &inst: fm.motifs) {
        const MolecularGraph g = motif_graph(fm.source, inst);
        int token = out.vocab.token_of(inst.key);
        if (token < 0)
          token = out.vocab.add(g, rmsd_tol);
        row.push_back({ token, assign_frame(out.vocab.descriptor(token), g,
                                            rmsd_tol) });
      }
    } catch (const Error &e) {
      out.skipped.push_back({ i, fm.source.name, e.what() });
      continue;
    }
    for (const MotifAssignment &ma: row)
      ++out.vocab.descriptor(ma.token).count;
    out.assignments.push_back(std::move(row));
    out.kept.push_back(i);
    kept.push_back(fm);
  }
  out.stats = compression_stats(kept, out.vocab);
  return out;
}

}  // namespace rigidflow
