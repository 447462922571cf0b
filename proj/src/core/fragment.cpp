//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/fragment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SVD>

#include "rigidflow/error.hpp"

namespace rigidflow {
namespace {

struct RingContext {
  RingInfo info;
  // Rings containing each bond.
  std::vector<std::vector<int>> bond_rings;
};

RingContext ring_context(const MolecularGraph &g, int max_size) {
  RingContext ctx { perceive_rings(g, max_size), {} };
  ctx.bond_rings.resize(g.bonds.size());
  for (int r = 0; r < static_cast<int>(ctx.info.rings.size()); ++r)
    for (int b: ctx.info.rings[r].bonds)
      ctx.bond_rings[b].push_back(r);
  return ctx;
}

bool planar_cached(const MolecularGraph &g, const std::vector<int> &atoms,
                   double tol, PlanarityCache &cache) {
  const CanonicalKey key = canonical_key(induced_subgraph(g, atoms));
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, is_planar_ring_system(g, atoms, tol)).first;
  return it->second;
}

bool preserved(const MolecularGraph &g, const RingContext &rc, int b,
               RelaxLevel level, const FragmentationConfig &cfg,
               PlanarityCache &cache) {
  const Bond &bond = g.bonds[b];
  if (!g.atoms[bond.i].is_heavy() || !g.atoms[bond.j].is_heavy())
    return true;
  if (level == RelaxLevel::kIsolateHeavy)
    return false;
  if (bond.order != BondOrder::kSingle)
    return true;
  if (level == RelaxLevel::kNoRings || cfg.strategy == Strategy::kNoRings)
    return false;
  if (level == RelaxLevel::kBase) {
    const int s = rc.info.bond_system[b];
    return s >= 0
           && planar_cached(g, rc.info.systems[s].atoms, cfg.planarity_tol,
                            cache);
  }
  for (int r: rc.bond_rings[b]) {
    std::vector<int> atoms = rc.info.rings[r].atoms;
    std::sort(atoms.begin(), atoms.end());
    if (planar_cached(g, atoms, cfg.planarity_tol, cache))
      return true;
  }
  return false;
}

// Split `atoms` under `level`; appends the bonds it cuts to `cut`.
std::vector<std::vector<int>>
split(const MolecularGraph &g, const RingContext &rc,
      const std::vector<int> &atoms, RelaxLevel level,
      const FragmentationConfig &cfg, PlanarityCache &cache,
      std::vector<int> &cut) {
  std::vector<bool> inside(g.atoms.size(), false);
  for (int a: atoms)
    inside[a] = true;
  std::vector<int> parent(g.atoms.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  // Bonds in (min, max) order.
  std::vector<int> order(g.bonds.size());
  std::iota(order.begin(), order.end(), 0);
  auto ends = [&](int b) {
    return std::minmax(g.bonds[b].i, g.bonds[b].j);
  };
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ends(a) < ends(b); });
  std::vector<int> dropped;
  for (int b: order) {
    const Bond &bond = g.bonds[b];
    if (!inside[bond.i] || !inside[bond.j])
      continue;
    if (preserved(g, rc, b, level, cfg, cache)) {
      const int x = find(bond.i), y = find(bond.j);
      if (x != y)
        parent[std::max(x, y)] = std::min(x, y);
    } else {
      dropped.push_back(b);
    }
  }
  // A dropped bond whose ends stay connected another way is not a cut.
  for (int b: dropped)
    if (find(g.bonds[b].i) != find(g.bonds[b].j))
      cut.push_back(b);
  std::map<int, std::vector<int>> groups;
  for (int a: atoms)
    groups[find(a)].push_back(a);
  std::vector<std::vector<int>> out;
  for (auto &[root, members]: groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

MotifInstance make_instance(const MolecularGraph &g, std::vector<int> atoms,
                            RelaxLevel level) {
  MotifInstance inst;
  inst.atom_indices = std::move(atoms);
  inst.level = level;
  inst.base_key = canonical_key(induced_subgraph(g, inst.atom_indices));
  inst.key = inst.base_key;
  return inst;
}

void sort_outputs(FragmentedMolecule &fm) {
  std::sort(fm.motifs.begin(), fm.motifs.end(),
            [](const MotifInstance &a, const MotifInstance &b) {
              return a.atom_indices < b.atom_indices;
            });
  std::sort(fm.cut_bonds.begin(), fm.cut_bonds.end(),
            [](const Bond &a, const Bond &b) {
              return std::minmax(a.i, a.j) < std::minmax(b.i, b.j);
            });
}

RelaxLevel next_level(RelaxLevel l) {
  return static_cast<RelaxLevel>(std::min(3, static_cast<int>(l) + 1));
}

// 0: coincident points, 1: collinear, 2: spans a plane.
int spread_rank(const Points &pts) {
  if (pts.rows() < 2)
    return 0;
  const Points centred = pts.rowwise() - pts.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred);
  const auto s = svd.singularValues();
  if (s(0) < 1e-9)
    return 0;
  if (s.size() < 2 || s(1) <= 1e-6 * s(0))
    return 1;
  return 2;
}

// Re-cut one motif at `level`, replacing it in place by its pieces.
void relax_motif(FragmentedMolecule &fm, std::size_t m, RelaxLevel level,
                 const RingContext &rc, const FragmentationConfig &cfg,
                 PlanarityCache &cache) {
  std::vector<int> cut;
  auto pieces = split(fm.source, rc, fm.motifs[m].atom_indices, level, cfg,
                      cache, cut);
  for (int b: cut)
    fm.cut_bonds.push_back(fm.source.bonds[b]);
  if (pieces.size() == 1) {
    fm.motifs[m].level = level;
    return;
  }
  fm.motifs.erase(fm.motifs.begin() + static_cast<std::ptrdiff_t>(m));
  for (auto &p: pieces)
    fm.motifs.push_back(make_instance(fm.source, std::move(p), level));
}

}  // namespace

const char *strategy_name(Strategy s) {
  return s == Strategy::kNoRings ? "no_rings" : "planar_rings";
}

Strategy parse_strategy(const std::string &name) {
  if (name == "no_rings")
    return Strategy::kNoRings;
  if (name == "planar_rings")
    return Strategy::kPlanarRings;
  fail(ErrorCode::kInvalidArgument, "unknown strategy '" + name + "'");
}

void FragmentationConfig::validate() const {
  if (!(alpha >= 0))
    fail(ErrorCode::kInvalidArgument, "alpha must be >= 0");
  if (!(dummy_bond_len > 0))
    fail(ErrorCode::kInvalidArgument, "dummy bond length must be > 0");
  if (!(planarity_tol >= 0))
    fail(ErrorCode::kInvalidArgument, "planarity tolerance must be >= 0");
  if (max_ring_size < 3)
    fail(ErrorCode::kInvalidArgument, "max ring size must be >= 3");
}

FragmentedMolecule cut_bonds(const MolecularGraph &g,
                             const FragmentationConfig &cfg,
                             PlanarityCache &cache, RelaxLevel level) {
  cfg.validate();
  if (!is_connected(g))
    fail(ErrorCode::kDisconnected,
         "molecule '" + g.name + "' has more than one component");
  const RingContext rc = ring_context(g, cfg.max_ring_size);
  FragmentedMolecule fm;
  fm.source = g;
  std::vector<int> all(g.atoms.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<int> cut;
  for (auto &p: split(g, rc, all, level, cfg, cache, cut))
    fm.motifs.push_back(make_instance(g, std::move(p), level));
  for (int b: cut)
    fm.cut_bonds.push_back(g.bonds[b]);
  sort_outputs(fm);
  return fm;
}

FragmentedMolecule cut_bonds(const MolecularGraph &g,
                             const FragmentationConfig &cfg) {
  PlanarityCache cache;
  return cut_bonds(g, cfg, cache);
}

long pruning_cutoff(double alpha, long n) {
  // The small epsilon absorbs representation error, e.g. 0.1 / 100 * 1000.
  return static_cast<long>(std::floor(alpha / 100.0 * static_cast<double>(n)
                                      + 1e-9));
}

long dataset_size(const std::vector<FragmentedMolecule> &dataset,
                  const FragmentationConfig &cfg) {
  if (!cfg.count_by_molecule)
    return static_cast<long>(dataset.size());
  std::set<std::string> names;
  for (const auto &fm: dataset)
    names.insert(fm.source.name);
  return static_cast<long>(names.size());
}

std::vector<FragmentedMolecule>
prune_vocabulary(std::vector<FragmentedMolecule> dataset,
                 const FragmentationConfig &cfg, PlanarityCache &cache) {
  cfg.validate();
  const long cutoff = pruning_cutoff(cfg.alpha, dataset_size(dataset, cfg));
  if (cutoff <= 0)
    return dataset;

  std::vector<RingContext> rings;
  rings.reserve(dataset.size());
  for (const auto &fm: dataset)
    rings.push_back(ring_context(fm.source, cfg.max_ring_size));

  for (;;) {
    std::map<CanonicalKey, long> counts;
    std::map<CanonicalKey, RelaxLevel> class_level;
    for (const auto &fm: dataset) {
      for (const auto &inst: fm.motifs) {
        ++counts[inst.base_key];
        auto [it, fresh] = class_level.emplace(inst.base_key, inst.level);
        if (!fresh && inst.level > it->second)
          it->second = inst.level;
      }
    }
    bool changed = false;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      FragmentedMolecule &fm = dataset[i];
      // Iterate over a snapshot; relax_motif reorders the list.
      std::vector<std::vector<int>> rare;
      for (const auto &inst: fm.motifs) {
        const RelaxLevel cls = class_level.at(inst.base_key);
        if (counts.at(inst.base_key) < cutoff
            && cls != RelaxLevel::kIsolateHeavy)
          rare.push_back(inst.atom_indices);
      }
      for (const auto &atoms: rare) {
        const auto it = std::find_if(
            fm.motifs.begin(), fm.motifs.end(),
            [&](const MotifInstance &m) { return m.atom_indices == atoms; });
        const RelaxLevel target = next_level(class_level.at(it->base_key));
        relax_motif(fm, static_cast<std::size_t>(it - fm.motifs.begin()),
                    target, rings[i], cfg, cache);
        changed = true;
      }
      sort_outputs(fm);
    }
    if (!changed)
      break;
  }
  return dataset;
}

std::vector<FragmentedMolecule>
prune_vocabulary(std::vector<FragmentedMolecule> dataset,
                 const FragmentationConfig &cfg) {
  PlanarityCache cache;
  return prune_vocabulary(std::move(dataset), cfg, cache);
}

bool is_non_collinear(const Points &pts) {
  return pts.rows() >= 3 && spread_rank(pts) >= 2;
}

MolecularGraph motif_base_graph(const MolecularGraph &mol,
                                const MotifInstance &inst) {
  return induced_subgraph(mol, inst.atom_indices);
}

MolecularGraph motif_graph(const MolecularGraph &mol,
                           const MotifInstance &inst) {
  MolecularGraph g = induced_subgraph(mol, inst.atom_indices);
  for (std::size_t d = 0; d < inst.dummy_positions.size(); ++d) {
    Atom du;
    du.element = std::string(kDummyElement);
    du.is_dummy = true;
    du.pos = inst.dummy_positions[d];
    const int idx = g.add_atom(du);
    const auto it = std::lower_bound(inst.atom_indices.begin(),
                                     inst.atom_indices.end(),
                                     inst.dummy_anchors[d]);
    g.add_bond(static_cast<int>(it - inst.atom_indices.begin()), idx,
               BondOrder::kSingle);
  }
  return g;
}

MotifInstance add_dummy_atoms(const MolecularGraph &mol, MotifInstance inst,
                              const FragmentationConfig &cfg) {
  std::vector<Eigen::RowVector3d> pts;
  for (int a: inst.atom_indices)
    pts.push_back(mol.atoms[a].pos.transpose());
  for (const auto &d: inst.dummy_positions)
    pts.push_back(d.transpose());
  auto as_points = [](const std::vector<Eigen::RowVector3d> &v) {
    Points p(static_cast<Eigen::Index>(v.size()), 3);
    for (std::size_t k = 0; k < v.size(); ++k)
      p.row(static_cast<Eigen::Index>(k)) = v[k];
    return p;
  };

  int rank = spread_rank(as_points(pts));
  if (rank < 2) {
    std::vector<bool> inside(mol.atoms.size(), false);
    for (int a: inst.atom_indices)
      inside[a] = true;
    // Outside atoms by distance to the motif, then index.
    struct Candidate {
      double dist;
      int atom;
      int anchor;
    };
    std::vector<Candidate> cands;
    for (int c = 0; c < mol.num_atoms(); ++c) {
      if (inside[c] || mol.atoms[c].is_dummy)
        continue;
      Candidate best { std::numeric_limits<double>::infinity(), c, -1 };
      for (int a: inst.atom_indices) {
        const double d = (mol.atoms[c].pos - mol.atoms[a].pos).norm();
        if (d < best.dist) {
          best.dist = d;
          best.anchor = a;
        }
      }
      cands.push_back(best);
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate &x, const Candidate &y) {
                return std::tie(x.dist, x.atom) < std::tie(y.dist, y.atom);
              });
    for (const Candidate &c: cands) {
      if (rank >= 2)
        break;
      if (c.dist <= 0)
        continue;
      const Eigen::Vector3d from = mol.atoms[c.anchor].pos;
      const Eigen::Vector3d q =
          from + cfg.dummy_bond_len * (mol.atoms[c.atom].pos - from).normalized();
      pts.push_back(q.transpose());
      const int next = spread_rank(as_points(pts));
      if (next <= rank) {
        pts.pop_back();
        continue;
      }
      rank = next;
      inst.dummy_positions.push_back(q);
      inst.dummy_anchors.push_back(c.anchor);
    }
    if (rank < 2)
      fail(ErrorCode::kFrameUnlockable,
           "motif in '" + mol.name + "' stays collinear: no usable neighbours");
  }
  inst.base_key = canonical_key(motif_base_graph(mol, inst));
  inst.key = canonical_key(motif_graph(mol, inst));
  return inst;
}

FragmentationResult fragment_dataset(const std::vector<MolecularGraph> &mols,
                                     const FragmentationConfig &cfg) {
  cfg.validate();
  FragmentationResult res;
  PlanarityCache cache;
  std::vector<FragmentedMolecule> cut;
  std::vector<int> index;
  for (int i = 0; i < static_cast<int>(mols.size()); ++i) {
    try {
      mols[i].validate();
      cut.push_back(cut_bonds(mols[i], cfg, cache));
      index.push_back(i);
    } catch (const Error &e) {
      res.skipped.push_back({ i, mols[i].name, e.what() });
    }
  }
  res.cutoff = pruning_cutoff(cfg.alpha, dataset_size(cut, cfg));
  cut = prune_vocabulary(std::move(cut), cfg, cache);
  for (std::size_t k = 0; k < cut.size(); ++k) {
    try {
      for (auto &inst: cut[k].motifs)
        inst = add_dummy_atoms(cut[k].source, std::move(inst), cfg);
      res.molecules.push_back(std::move(cut[k]));
      res.source_index.push_back(index[k]);
    } catch (const Error &e) {
      res.skipped.push_back({ index[k], cut[k].source.name, e.what() });
    }
  }
  std::sort(res.skipped.begin(), res.skipped.end(),
            [](const SkippedMolecule &a, const SkippedMolecule &b) {
              return a.index < b.index;
            });
  return res;
}

FragmentedMolecule
fragment_with_vocabulary(const MolecularGraph &g, const FragmentationConfig &cfg,
                         const std::set<CanonicalKey> &known,
                         PlanarityCache &cache) {
  FragmentedMolecule fm = cut_bonds(g, cfg, cache);
  const RingContext rc = ring_context(g, cfg.max_ring_size);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t m = 0; m < fm.motifs.size(); ++m) {
      const MotifInstance &inst = fm.motifs[m];
      if (known.count(inst.base_key) || inst.level == RelaxLevel::kIsolateHeavy)
        continue;
      relax_motif(fm, m, next_level(inst.level), rc, cfg, cache);
      changed = true;
      break;
    }
  }
  sort_outputs(fm);
  for (auto &inst: fm.motifs)
    inst = add_dummy_atoms(g, std::move(inst), cfg);
  return fm;
}

FragmentStats fragment_stats(const std::vector<FragmentedMolecule> &dataset,
                             const std::string &label, long cutoff) {
  FragmentStats st;
  st.label = label;
  st.cutoff = cutoff;
  st.molecules = static_cast<int>(dataset.size());
  if (dataset.empty())
    return st;
  std::vector<int> counts;
  std::set<CanonicalKey> classes;
  for (const auto &fm: dataset) {
    counts.push_back(static_cast<int>(fm.motifs.size()));
    for (const auto &inst: fm.motifs) {
      st.max_motif_size = std::max(st.max_motif_size, inst.size());
      classes.insert(inst.key);
    }
  }
  st.classes = static_cast<int>(classes.size());
  st.mean_fragments = std::accumulate(counts.begin(), counts.end(), 0.0)
                      / static_cast<double>(counts.size());
  std::sort(counts.begin(), counts.end());
  const std::size_t n = counts.size();
  st.median_fragments = n % 2 ? counts[n / 2]
                              : 0.5 * (counts[n / 2 - 1] + counts[n / 2]);
  st.max_fragments = counts.back();
  return st;
}

std::vector<RigidityViolation>
rigidity_violations(const std::vector<FragmentedMolecule> &dataset, double tol,
                    double *max_spread) {
  std::vector<RigidityViolation> out;
  double worst = 0;
  std::map<std::string, std::vector<const FragmentedMolecule *>> groups;
  std::vector<std::string> order;
  for (const auto &fm: dataset) {
    auto &grp = groups[fm.source.name];
    if (grp.empty())
      order.push_back(fm.source.name);
    grp.push_back(&fm);
  }
  for (const auto &name: order) {
    const auto &grp = groups[name];
    const FragmentedMolecule &ref = *grp.front();
    for (std::size_t m = 0; m < ref.motifs.size(); ++m) {
      const auto &atoms = ref.motifs[m].atom_indices;
      double spread = 0;
      for (std::size_t x = 0; x < atoms.size(); ++x) {
        for (std::size_t y = x + 1; y < atoms.size(); ++y) {
          double lo = std::numeric_limits<double>::infinity(), hi = -lo;
          for (const FragmentedMolecule *fm: grp) {
            if (fm->source.num_atoms() != ref.source.num_atoms())
              continue;
            const double d = (fm->source.atoms[atoms[x]].pos
                              - fm->source.atoms[atoms[y]].pos)
                                 .norm();
            lo = std::min(lo, d);
            hi = std::max(hi, d);
          }
          spread = std::max(spread, hi - lo);
        }
      }
      worst = std::max(worst, spread);
      if (spread > tol)
        out.push_back({ name, static_cast<int>(m), spread });
    }
  }
  if (max_spread)
    *max_spread = worst;
  return out;
}

}  // namespace rigidflow
