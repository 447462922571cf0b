//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_FRAGMENT_HPP_
#define RIGIDFLOW_FRAGMENT_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rigidflow/canon.hpp"
#include "rigidflow/molgraph.hpp"
#include "rigidflow/rings.hpp"

namespace rigidflow {

enum class Strategy {
  kNoRings,
  kPlanarRings,
};

const char *strategy_name(Strategy s);
Strategy parse_strategy(const std::string &name);

struct FragmentationConfig {
  // Percent of the dataset size.
  double alpha = 0.1;
  Strategy strategy = Strategy::kPlanarRings;
  // RMS distance from the best-fit plane, in Angstrom.
  double planarity_tol = 0.1;
  double dummy_bond_len = 1.0;
  int max_ring_size = kMaxRingSize;
  // Count the dataset size in distinct molecule names instead of records.
  bool count_by_molecule = false;

  void validate() const;
};

/**
 * Bond-preservation strictness. Rare motifs are re-cut one level further
 * until they become common or reach kIsolateHeavy.
 */
enum class RelaxLevel {
  kBase = 0,           // configured strategy
  kRingByRing = 1,     // planarity judged per ring, not per fused system
  kNoRings = 2,        // every single heavy-heavy bond cut
  kIsolateHeavy = 3,   // every heavy-heavy bond cut
};

struct MotifInstance {
  std::vector<int> atom_indices;  // sorted, into the parent molecule
  std::vector<Eigen::Vector3d> dummy_positions;
  // Parent atom each dummy is bonded to.
  std::vector<int> dummy_anchors;
  // Identity of the motif graph including dummies.
  CanonicalKey key;
  // Identity of the real atoms only; pruning counts use this one.
  CanonicalKey base_key;
  RelaxLevel level = RelaxLevel::kBase;

  int size() const {
    return static_cast<int>(atom_indices.size() + dummy_positions.size());
  }
};

struct FragmentedMolecule {
  MolecularGraph source;
  std::vector<MotifInstance> motifs;
  std::vector<Bond> cut_bonds;
};

// Planarity verdicts keyed by the ring (system) graph, filled on first sight.
using PlanarityCache = std::map<CanonicalKey, bool>;

/**
 * Cut a connected molecule into motifs under `level` rules. Dummy atoms are
 * not added. Throws Disconnected.
 */
FragmentedMolecule cut_bonds(const MolecularGraph &g,
                             const FragmentationConfig &cfg,
                             PlanarityCache &cache,
                             RelaxLevel level = RelaxLevel::kBase);
FragmentedMolecule cut_bonds(const MolecularGraph &g,
                             const FragmentationConfig &cfg);

// floor(alpha / 100 * dataset_size).
long pruning_cutoff(double alpha, long dataset_size);

long dataset_size(const std::vector<FragmentedMolecule> &dataset,
                  const FragmentationConfig &cfg);

/**
 * Re-cut every motif class whose occurrence count is below the cutoff,
 * relaxing one level at a time, until no rare class can be split further.
 */
std::vector<FragmentedMolecule>
prune_vocabulary(std::vector<FragmentedMolecule> dataset,
                 const FragmentationConfig &cfg, PlanarityCache &cache);
std::vector<FragmentedMolecule>
prune_vocabulary(std::vector<FragmentedMolecule> dataset,
                 const FragmentationConfig &cfg);

// True if the centred point set spans at least a plane.
bool is_non_collinear(const Points &pts);

/**
 * Place dummies toward the nearest outside atoms until the motif's frame is
 * determined; recomputes the keys. Throws FrameUnlockable.
 */
MotifInstance add_dummy_atoms(const MolecularGraph &mol, MotifInstance inst,
                              const FragmentationConfig &cfg);

// Motif atoms (ascending parent index) followed by its dummies.
MolecularGraph motif_graph(const MolecularGraph &mol, const MotifInstance &inst);

// Motif graph without dummies.
MolecularGraph motif_base_graph(const MolecularGraph &mol,
                                const MotifInstance &inst);

struct SkippedMolecule {
  int index;
  std::string name;
  std::string reason;
};

struct FragmentationResult {
  std::vector<FragmentedMolecule> molecules;
  // Input index of each entry of `molecules`.
  std::vector<int> source_index;
  std::vector<SkippedMolecule> skipped;
  long cutoff = 0;
};

// Full pipeline: cut, prune, add dummies. Bad molecules are skipped.
FragmentationResult fragment_dataset(const std::vector<MolecularGraph> &mols,
                                     const FragmentationConfig &cfg);

/**
 * Fragment `g` so that its motifs fall into `known` base keys where possible:
 * relax each unknown motif until it is known or fully split.
 */
FragmentedMolecule
fragment_with_vocabulary(const MolecularGraph &g, const FragmentationConfig &cfg,
                         const std::set<CanonicalKey> &known,
                         PlanarityCache &cache);

struct FragmentStats {
  std::string label;
  long cutoff = 0;
  int molecules = 0;
  double mean_fragments = 0;
  double median_fragments = 0;
  int max_fragments = 0;
  // Largest motif including dummies.
  int max_motif_size = 0;
  int classes = 0;
};

FragmentStats fragment_stats(const std::vector<FragmentedMolecule> &dataset,
                             const std::string &label, long cutoff);

struct RigidityViolation {
  std::string molecule;
  int motif;
  // Largest change of an intra-motif atom distance across conformers.
  double spread;
};

/**
 * Records sharing a name are conformers of one molecule; every motif's
 * internal distances should agree across them within `tol`.
 */
std::vector<RigidityViolation>
rigidity_violations(const std::vector<FragmentedMolecule> &dataset, double tol,
                    double *max_spread = nullptr);

}  // namespace rigidflow

#endif  // RIGIDFLOW_FRAGMENT_HPP_
