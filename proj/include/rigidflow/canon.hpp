//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_CANON_HPP_
#define RIGIDFLOW_CANON_HPP_

#include <compare>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rigidflow/molgraph.hpp"

namespace rigidflow {

// Vertex- and edge-labelled simple graph: the view of a molecule that graph
// identity cares about (element, dummy flag, bond order).
struct LabelledGraph {
  std::vector<std::string> labels;
  // (neighbour, edge label)
  std::vector<std::vector<std::pair<int, int>>> adj;

  int size() const { return static_cast<int>(labels.size()); }

  static LabelledGraph from_molecule(const MolecularGraph &g);
};

// A permutation p maps vertex v to p[v].
using Permutation = std::vector<int>;

/**
 * Canonical serialisation of a labelled graph. Two keys compare equal exactly
 * when the graphs are isomorphic.
 */
class CanonicalKey {
public:
  CanonicalKey() = default;
  explicit CanonicalKey(std::string bytes): bytes_(std::move(bytes)) { }

  const std::string &bytes() const { return bytes_; }
  // Hex SHA-256 of bytes(); used in reports and file formats.
  std::string digest() const;

  bool empty() const { return bytes_.empty(); }

  friend auto operator<=>(const CanonicalKey &,
                          const CanonicalKey &) = default;

private:
  std::string bytes_;
};

struct CanonicalForm {
  CanonicalKey key;
  // labelling[v] is the canonical position of vertex v.
  std::vector<int> labelling;
  // Automorphisms met during the search (not necessarily a full group).
  std::vector<Permutation> generators;
};

// Works on any graph, connected or not.
CanonicalForm canonical_form(const LabelledGraph &g);

// Throws Disconnected for graphs with more than one component.
CanonicalKey canonical_key(const MolecularGraph &g);

// Every automorphism, sorted lexicographically; the identity comes first.
std::vector<Permutation> enumerate_automorphisms(const LabelledGraph &g);

// Label- and edge-preserving bijections f with f[v] in `to` for v in `from`,
// sorted lexicographically, at most `limit` of them.
std::vector<Permutation>
enumerate_isomorphisms(const LabelledGraph &from, const LabelledGraph &to,
                       std::size_t limit = std::numeric_limits<std::size_t>::max());

bool is_automorphism(const LabelledGraph &g, const Permutation &p);

}  // namespace rigidflow

#endif  // RIGIDFLOW_CANON_HPP_
