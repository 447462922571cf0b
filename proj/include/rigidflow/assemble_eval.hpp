//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_ASSEMBLE_EVAL_HPP_
#define RIGIDFLOW_ASSEMBLE_EVAL_HPP_

#include <array>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rigidflow/flow_cont.hpp"
#include "rigidflow/flow_disc.hpp"
#include "rigidflow/fragment.hpp"
#include "rigidflow/molgraph.hpp"
#include "rigidflow/vocab.hpp"

namespace rigidflow {

/**
 * Distance lookup for bond orders. Each listed pair has reference lengths
 * (pm) for up to three orders; a distance below reference + margin admits
 * that order and the highest admitted order wins. Listed elements without an
 * entry for a pair never bond; unlisted elements are an error.
 */
class BondTable {
public:
  // Margins in pm for single, double, triple.
  std::array<double, 3> margins { 10, 5, 3 };

  static BondTable parse(const std::string &json_text);
  static BondTable load(const std::string &path);

  void set(const std::string &a, const std::string &b, int order, double length_pm);
  void add_element(const std::string &e) { elements_.insert(e); }
  bool covers(const std::string &e) const { return elements_.count(e) > 0; }

  // 0 for no bond. Distance in Angstrom. Throws MissingTableEntry.
  int order(const std::string &a, const std::string &b, double distance) const;

  // Largest distance (Angstrom) at which any pair can bond.
  double max_range() const;

private:
  std::set<std::string> elements_;
  std::map<std::pair<std::string, std::string>, std::array<double, 3>> lengths_;
};

class ValencyTable {
public:
  static ValencyTable parse(const std::string &json_text);
  static ValencyTable load(const std::string &path);

  void set(const std::string &element, std::vector<int> valences);
  // Empty if the element is unknown.
  const std::vector<int> &allowed(const std::string &element) const;

private:
  std::map<std::string, std::vector<int>> allowed_;
};

/**
 * Atoms of the generated molecule: each motif's exemplar pose placed by its
 * frame, dummies dropped, intra-motif bonds copied. Throws MaskedToken.
 */
MolecularGraph reconstruct(const Vocabulary &vocab, const Frames &frames,
                           const Tokens &tokens);

// Bonds from interatomic distances only; existing bonds are ignored.
std::vector<Bond> infer_bonds(const MolecularGraph &mol, const BondTable &table);

// Copy of `mol` whose bonds are replaced by inferred ones.
MolecularGraph with_inferred_bonds(const MolecularGraph &mol, const BondTable &table);

struct Stability {
  int stable_atoms = 0;
  int atoms = 0;
  bool molecule = false;
};

// Atom stable iff its bond-order sum is an allowed valence.
Stability stability(const MolecularGraph &mol, const ValencyTable &valency);

struct Validity {
  bool valid = false;
  bool connected = false;
};

// valid: nonempty and every atom stable (a proxy for toolkit sanitisation).
Validity connectivity_validity(const MolecularGraph &mol, const ValencyTable &valency);

using Histogram = std::map<std::string, double>;

// Half the L1 distance between two normalised histograms.
double tv_distance(const Histogram &p, const Histogram &q);

Histogram atom_type_histogram(const std::vector<MolecularGraph> &mols);
Histogram bond_type_histogram(const std::vector<MolecularGraph> &mols);

struct TotalVariation {
  double atoms = 0;
  double bonds = 0;
};

// Marginals over element symbols and bond orders of the bonds present.
TotalVariation total_variation(const std::vector<MolecularGraph> &sampled,
                               const std::vector<MolecularGraph> &reference);

// SDF data item listing a generated molecule's motif tokens.
inline constexpr const char *kTokensProperty = "rigidflow_tokens";

/**
 * Motif classes of one molecule. A `kTokensProperty` data item is used when
 * present; otherwise each connected component is fragmented against the
 * vocabulary. Motifs outside the vocabulary give -1.
 */
std::vector<int> motif_tokens(const MolecularGraph &mol, const Vocabulary &vocab,
                              const FragmentationConfig &cfg);

struct MotifRatios {
  double common = 1.0;
  double uncommon = 1.0;
};

/**
 * Per group, (sampled count / sampled molecules) / (reference count /
 * reference molecules). A class is common when its vocabulary count reaches
 * `cutoff`; unknown motifs are uncommon. 0/0 gives 1.
 */
MotifRatios motif_frequency_ratios(const std::vector<std::vector<int>> &sampled,
                                   const std::vector<std::vector<int>> &reference,
                                   const Vocabulary &vocab, long cutoff);

struct MetricsReport {
  int molecules = 0;
  double atom_stability = 0;
  double molecule_stability = 0;
  double validity = 0;
  double connectivity = 0;
  double valid_connected = 0;
  double uniqueness = 0;
  double valid_unique = 0;
  TotalVariation tv;
  double mean_atoms = 0;
  double mean_motifs = 0;
  double all_atom_ratio = 0;
  MotifRatios ratios;
  bool has_ratios = false;

  // Two-column "metric,value" CSV. TV rows are also given as x10^2 / x10^3.
  std::string to_csv() const;
};

struct EvalInputs {
  const BondTable *bonds = nullptr;
  const ValencyTable *valency = nullptr;
  // Optional; enables motif statistics.
  const Vocabulary *vocab = nullptr;
  FragmentationConfig frag;
  long cutoff = 0;
};

/**
 * All metrics of `sampled` against `reference`. Bonds of both sets are
 * re-inferred from coordinates so the two are treated alike.
 */
MetricsReport evaluate_metrics(const std::vector<MolecularGraph> &sampled,
                               const std::vector<MolecularGraph> &reference,
                               const EvalInputs &in);

}  // namespace rigidflow

#endif  // RIGIDFLOW_ASSEMBLE_EVAL_HPP_
