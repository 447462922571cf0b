//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_MOLGRAPH_HPP_
#define RIGIDFLOW_MOLGRAPH_HPP_

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rigidflow/rot3.hpp"

namespace rigidflow {

inline constexpr std::string_view kDummyElement = "DU";

enum class BondOrder {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Contribution of a bond to the valence sum; aromatic counts 1.5.
double valence_contribution(BondOrder order);

struct Atom {
  std::string element;
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  bool is_dummy = false;
  int charge = 0;

  bool is_hydrogen() const { return element == "H"; }
  bool is_heavy() const { return !is_dummy && !is_hydrogen(); }
};

struct Bond {
  int i = 0;
  int j = 0;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == i ? j : i; }
};

struct Neighbor {
  int atom;
  int bond;
};

/**
 * Atoms with coordinates plus a simple bond graph.
 *
 * add_bond() enforces the graph invariants (in-range endpoints, no self
 * loops, no multi-edges); direct edits of `bonds` must keep them.
 */
class MolecularGraph {
public:
  std::string name;
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  // SDF data items, passed through untouched.
  std::vector<std::pair<std::string, std::string>> props;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }

  int add_atom(Atom atom);
  int add_bond(int i, int j, BondOrder order);

  // Index of the bond joining i and j, or -1.
  int find_bond(int i, int j) const;

  std::vector<std::vector<Neighbor>> adjacency() const;

  // Throws InvalidArgument on any violated invariant.
  void validate() const;

  Points positions() const;
  Points positions(const std::vector<int> &indices) const;

  int num_heavy_atoms() const;
};

// Connected components (atom index lists, each sorted, ordered by smallest
// member) of the graph restricted to bonds with keep[bond] == true. An empty
// `keep` keeps every bond.
std::vector<std::vector<int>>
connected_components(const MolecularGraph &g,
                     const std::vector<bool> &keep = {});

bool is_connected(const MolecularGraph &g);

// Induced subgraph on `atoms` (in the given order). Bond indices refer to the
// new numbering.
MolecularGraph induced_subgraph(const MolecularGraph &g,
                                const std::vector<int> &atoms);

// Element symbols of the periodic table (H..Og).
const std::vector<std::string> &periodic_table();

class ElementVocabulary {
public:
  // The full periodic table.
  ElementVocabulary();
  explicit ElementVocabulary(std::set<std::string> symbols)
      : symbols_(std::move(symbols)) { }

  // One symbol per line; blank lines and '#' comments are ignored.
  static ElementVocabulary from_file(const std::string &path);
  static ElementVocabulary parse(std::string_view text);

  bool contains(std::string_view symbol) const;
  const std::set<std::string> &symbols() const { return symbols_; }

private:
  std::set<std::string> symbols_;
};

}  // namespace rigidflow

#endif  // RIGIDFLOW_MOLGRAPH_HPP_
