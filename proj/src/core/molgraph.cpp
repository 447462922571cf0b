//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/molgraph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rigidflow/error.hpp"

namespace rigidflow {

double valence_contribution(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return 1;
  case BondOrder::kDouble:
    return 2;
  case BondOrder::kTriple:
    return 3;
  case BondOrder::kAromatic:
    return 1.5;
  }
  return 0;
}

int MolecularGraph::add_atom(Atom atom) {
  atoms.push_back(std::move(atom));
  return num_atoms() - 1;
}

int MolecularGraph::add_bond(int i, int j, BondOrder order) {
  if (i < 0 || j < 0 || i >= num_atoms() || j >= num_atoms())
    fail(ErrorCode::kInvalidArgument, "bond index out of range");
  if (i == j)
    fail(ErrorCode::kInvalidArgument, "self bond");
  if (find_bond(i, j) >= 0)
    fail(ErrorCode::kInvalidArgument, "duplicate bond");
  bonds.push_back({ i, j, order });
  return num_bonds() - 1;
}

int MolecularGraph::find_bond(int i, int j) const {
  for (int b = 0; b < num_bonds(); ++b) {
    const Bond &bond = bonds[b];
    if ((bond.i == i && bond.j == j) || (bond.i == j && bond.j == i))
      return b;
  }
  return -1;
}

std::vector<std::vector<Neighbor>> MolecularGraph::adjacency() const {
  std::vector<std::vector<Neighbor>> adj(atoms.size());
  for (int b = 0; b < num_bonds(); ++b) {
    adj[bonds[b].i].push_back({ bonds[b].j, b });
    adj[bonds[b].j].push_back({ bonds[b].i, b });
  }
  return adj;
}

void MolecularGraph::validate() const {
  std::set<std::pair<int, int>> seen;
  for (const Bond &b: bonds) {
    if (b.i < 0 || b.j < 0 || b.i >= num_atoms() || b.j >= num_atoms())
      fail(ErrorCode::kInvalidArgument, "bond index out of range");
    if (b.i == b.j)
      fail(ErrorCode::kInvalidArgument, "self bond");
    if (!seen.insert(std::minmax(b.i, b.j)).second)
      fail(ErrorCode::kInvalidArgument, "duplicate bond");
  }
}

Points MolecularGraph::positions() const {
  Points p(atoms.size(), 3);
  for (int a = 0; a < num_atoms(); ++a)
    p.row(a) = atoms[a].pos.transpose();
  return p;
}

Points MolecularGraph::positions(const std::vector<int> &indices) const {
  Points p(indices.size(), 3);
  for (std::size_t a = 0; a < indices.size(); ++a)
    p.row(a) = atoms[indices[a]].pos.transpose();
  return p;
}

int MolecularGraph::num_heavy_atoms() const {
  return static_cast<int>(
      std::count_if(atoms.begin(), atoms.end(),
                    [](const Atom &a) { return a.is_heavy(); }));
}

std::vector<std::vector<int>>
connected_components(const MolecularGraph &g, const std::vector<bool> &keep) {
  std::vector<int> parent(g.atoms.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };

  for (int b = 0; b < g.num_bonds(); ++b) {
    if (!keep.empty() && !keep[b])
      continue;
    const int ri = find(g.bonds[b].i), rj = find(g.bonds[b].j);
    if (ri != rj)
      parent[std::max(ri, rj)] = std::min(ri, rj);
  }

  std::vector<std::vector<int>> comps;
  std::vector<int> slot(g.atoms.size(), -1);
  for (int a = 0; a < g.num_atoms(); ++a) {
    const int r = find(a);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[slot[r]].push_back(a);
  }
  return comps;
}

bool is_connected(const MolecularGraph &g) {
  return connected_components(g).size() <= 1;
}

MolecularGraph induced_subgraph(const MolecularGraph &g,
                                const std::vector<int> &atoms) {
  MolecularGraph sub;
  std::vector<int> remap(g.atoms.size(), -1);
  for (int idx: atoms) {
    remap[idx] = sub.num_atoms();
    sub.atoms.push_back(g.atoms[idx]);
  }
  for (const Bond &b: g.bonds) {
    if (remap[b.i] >= 0 && remap[b.j] >= 0)
      sub.bonds.push_back({ remap[b.i], remap[b.j], b.order });
  }
  return sub;
}

const std::vector<std::string> &periodic_table() {
  static const std::vector<std::string> kSymbols = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
    "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
    "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
  };
  return kSymbols;
}

ElementVocabulary::ElementVocabulary()
    : symbols_(periodic_table().begin(), periodic_table().end()) { }

ElementVocabulary ElementVocabulary::parse(std::string_view text) {
  std::set<std::string> symbols;
  std::istringstream in { std::string(text) };
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    std::string sym;
    if (fields >> sym)
      symbols.insert(sym);
  }
  return ElementVocabulary(std::move(symbols));
}

ElementVocabulary ElementVocabulary::from_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::kIoError, "cannot open element vocabulary " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool ElementVocabulary::contains(std::string_view symbol) const {
  return symbols_.find(std::string(symbol)) != symbols_.end();
}

}  // namespace rigidflow
