//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/rings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>

#include <Eigen/SVD>

namespace rigidflow {
namespace {

class BitRow {
public:
  explicit BitRow(int nbits): words_((nbits + 63) / 64, 0) { }

  void set(int bit) { words_[bit / 64] |= std::uint64_t { 1 } << (bit % 64); }

  bool test(int bit) const {
    return (words_[bit / 64] >> (bit % 64)) & 1;
  }

  void xor_with(const BitRow &other) {
    for (std::size_t w = 0; w < words_.size(); ++w)
      words_[w] ^= other.words_[w];
  }

  int lowest() const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (words_[w] != 0)
        return static_cast<int>(w * 64) + std::countr_zero(words_[w]);
    return -1;
  }

private:
  std::vector<std::uint64_t> words_;
};

// Bonds that lie on at least one cycle (i.e. are not bridges).
std::vector<bool> cyclic_bonds(const MolecularGraph &g,
                               const std::vector<std::vector<Neighbor>> &adj) {
  const int n = g.num_atoms();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> cyclic(g.bonds.size(), true);
  int timer = 0;

  std::function<void(int, int)> dfs = [&](int v, int parent_bond) {
    disc[v] = low[v] = timer++;
    for (const Neighbor &nb: adj[v]) {
      if (nb.bond == parent_bond)
        continue;
      if (disc[nb.atom] < 0) {
        dfs(nb.atom, nb.bond);
        low[v] = std::min(low[v], low[nb.atom]);
        if (low[nb.atom] > disc[v])
          cyclic[nb.bond] = false;
      } else {
        low[v] = std::min(low[v], disc[nb.atom]);
      }
    }
  };
  for (int v = 0; v < n; ++v)
    if (disc[v] < 0)
      dfs(v, -1);
  return cyclic;
}

}  // namespace

RingInfo perceive_rings(const MolecularGraph &g, int max_size) {
  RingInfo info;
  info.bond_system.assign(g.bonds.size(), -1);

  const auto adj = g.adjacency();
  const auto cyclic = cyclic_bonds(g, adj);

  // Rank of the cycle space restricted to cyclic bonds.
  std::vector<bool> cyc_atom(g.atoms.size(), false);
  int ncyc_bonds = 0;
  for (int b = 0; b < g.num_bonds(); ++b) {
    if (!cyclic[b])
      continue;
    ++ncyc_bonds;
    cyc_atom[g.bonds[b].i] = cyc_atom[g.bonds[b].j] = true;
  }
  if (ncyc_bonds == 0)
    return info;
  int ncyc_atoms = static_cast<int>(
      std::count(cyc_atom.begin(), cyc_atom.end(), true));
  int ncomp = 0;
  for (const auto &comp: connected_components(g, cyclic))
    if (cyc_atom[comp.front()])
      ++ncomp;
  const int rank_target = ncyc_bonds - ncyc_atoms + ncomp;

  // Enumerate simple cycles through cyclic bonds, each once: the start is the
  // smallest atom and the second atom is smaller than the last.
  std::vector<Ring> candidates;
  std::vector<int> path, path_bonds;
  std::vector<bool> on_path(g.atoms.size(), false);
  std::function<void(int)> extend = [&](int v) {
    const int start = path.front();
    for (const Neighbor &nb: adj[v]) {
      if (!cyclic[nb.bond])
        continue;
      if (nb.atom == start && path.size() >= 3 && path[1] < path.back()) {
        Ring ring;
        ring.atoms = path;
        ring.bonds = path_bonds;
        ring.bonds.push_back(nb.bond);
        std::sort(ring.bonds.begin(), ring.bonds.end());
        candidates.push_back(std::move(ring));
        continue;
      }
      if (nb.atom <= start || on_path[nb.atom]
          || static_cast<int>(path.size()) >= max_size)
        continue;
      on_path[nb.atom] = true;
      path.push_back(nb.atom);
      path_bonds.push_back(nb.bond);
      extend(nb.atom);
      path.pop_back();
      path_bonds.pop_back();
      on_path[nb.atom] = false;
    }
  };
  for (int s = 0; s < g.num_atoms(); ++s) {
    if (!cyc_atom[s])
      continue;
    path = { s };
    on_path[s] = true;
    extend(s);
    on_path[s] = false;
  }

  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Ring &a, const Ring &b) {
                     if (a.atoms.size() != b.atoms.size())
                       return a.atoms.size() < b.atoms.size();
                     return a.bonds < b.bonds;
                   });

  // Greedy GF(2) elimination; basis rows are indexed by pivot bit.
  std::vector<std::optional<BitRow>> basis(g.bonds.size());
  int rank = 0;
  for (Ring &cand: candidates) {
    if (rank == rank_target)
      break;
    BitRow row(g.num_bonds());
    for (int b: cand.bonds)
      row.set(b);
    for (int p = row.lowest(); p >= 0; p = row.lowest()) {
      if (!basis[p]) {
        basis[p] = row;
        break;
      }
      row.xor_with(*basis[p]);
    }
    if (row.lowest() >= 0) {
      ++rank;
      info.rings.push_back(std::move(cand));
    }
  }

  // Ring systems: rings sharing a bond.
  const int nr = static_cast<int>(info.rings.size());
  std::vector<int> parent(nr);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<int> bond_ring(g.bonds.size(), -1);
  for (int r = 0; r < nr; ++r) {
    for (int b: info.rings[r].bonds) {
      if (bond_ring[b] < 0) {
        bond_ring[b] = r;
      } else {
        const int ra = find(bond_ring[b]), rb = find(r);
        if (ra != rb)
          parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }

  std::vector<int> slot(nr, -1);
  for (int r = 0; r < nr; ++r) {
    const int root = find(r);
    if (slot[root] < 0) {
      slot[root] = static_cast<int>(info.systems.size());
      info.systems.emplace_back();
    }
    RingSystem &sys = info.systems[slot[root]];
    sys.rings.push_back(r);
    sys.atoms.insert(sys.atoms.end(), info.rings[r].atoms.begin(),
                     info.rings[r].atoms.end());
    sys.bonds.insert(sys.bonds.end(), info.rings[r].bonds.begin(),
                     info.rings[r].bonds.end());
  }
  for (int s = 0; s < static_cast<int>(info.systems.size()); ++s) {
    RingSystem &sys = info.systems[s];
    std::sort(sys.atoms.begin(), sys.atoms.end());
    sys.atoms.erase(std::unique(sys.atoms.begin(), sys.atoms.end()),
                    sys.atoms.end());
    std::sort(sys.bonds.begin(), sys.bonds.end());
    sys.bonds.erase(std::unique(sys.bonds.begin(), sys.bonds.end()),
                    sys.bonds.end());
    for (int b: sys.bonds)
      info.bond_system[b] = s;
  }
  return info;
}

double plane_rms(const Points &pts) {
  if (pts.rows() <= 3)
    return 0;
  Points centred = pts.rowwise() - pts.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centred);
  const double smallest = svd.singularValues()(2);
  return smallest / std::sqrt(static_cast<double>(pts.rows()));
}

bool is_planar_ring_system(const MolecularGraph &g,
                           const std::vector<int> &atoms, double tol) {
  return plane_rms(g.positions(atoms)) <= tol;
}

}  // namespace rigidflow
