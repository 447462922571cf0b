//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_VOCAB_HPP_
#define RIGIDFLOW_VOCAB_HPP_

#include <map>
#include <string>
#include <vector>

#include "rigidflow/canon.hpp"
#include "rigidflow/fragment.hpp"
#include "rigidflow/rot3.hpp"

namespace rigidflow {

inline constexpr int kMaskToken = 0;
inline constexpr double kDefaultRmsdTol = 0.25;
// Two rotations closer than this (radians) are the same symmetry element.
inline constexpr double kSymmetryDedupTol = 1e-3;

/**
 * Proper rotation R minimising sum |p_a R - q_a|^2 for centred p, q.
 * Throws Degenerate if p is collinear, ShapeMismatch on size mismatch.
 */
Rotation kabsch(const Points &p, const Points &q);

double rmsd(const Points &a, const Points &b);

// Row v of the result is row perm[v] of `pts`.
Points permute_rows(const Points &pts, const Permutation &perm);

Points centred(const Points &pts);

/**
 * Rotations S with pi(P) S = P (within rmsd_tol) for automorphisms pi,
 * deduplicated. Throws NotAGroup if the set is not closed.
 */
std::vector<Rotation> symmetry_group(const Points &pose,
                                     const std::vector<Permutation> &autos,
                                     double rmsd_tol);

struct MotifDescriptor {
  CanonicalKey key;
  CanonicalKey base_key;
  // Exemplar graph; its coordinates are the centred pose, dummies last.
  MolecularGraph graph;
  Points pose;
  std::vector<Rotation> sym;
  std::vector<Permutation> automorphisms;
  long count = 0;

  int num_points() const { return graph.num_atoms(); }
  int num_real_atoms() const;
};

/**
 * Motif classes; token 0 is [MASK] and class i has token i + 1.
 */
class Vocabulary {
public:
  double rmsd_tol = kDefaultRmsdTol;

  int size() const { return static_cast<int>(entries_.size()); }
  // Tokens including [MASK].
  int num_tokens() const { return size() + 1; }

  const MotifDescriptor &descriptor(int token) const;
  MotifDescriptor &descriptor(int token);
  // [MASK] has the trivial group.
  const std::vector<Rotation> &sym(int token) const;

  // Token for `key`, or -1.
  int token_of(const CanonicalKey &key) const;
  // Token of the class whose real-atom key is `base_key`, or -1 (first match).
  int token_of_base(const CanonicalKey &base_key) const;

  // Appends a class; `graph` coordinates are centred here. Returns the token.
  int add(const MolecularGraph &graph, double rmsd_tol);

  const std::vector<MotifDescriptor> &entries() const { return entries_; }

  std::string to_json() const;
  static Vocabulary from_json(const std::string &text);
  void save(const std::string &path) const;
  static Vocabulary load(const std::string &path);

private:
  std::vector<MotifDescriptor> entries_;
  std::map<CanonicalKey, int> index_;
  std::vector<Rotation> mask_sym_ { Rotation() };
};

struct FrameAssignment {
  RigidFrame frame;
  // Exemplar point v corresponds to instance point perm[v].
  Permutation perm;
  double residual = 0;
};

/**
 * Frame placing the exemplar onto an instance. `instance` is the motif graph
 * (dummies included) in world coordinates. Throws NoValidAutomorphism.
 */
FrameAssignment assign_frame(const MotifDescriptor &desc,
                             const MolecularGraph &instance, double rmsd_tol);

struct MotifAssignment {
  int token = 0;
  FrameAssignment assignment;
};

struct CompressionStats {
  int molecules = 0;
  double mean_atoms = 0;
  double mean_heavy_atoms = 0;
  double mean_motifs = 0;
  double atoms_per_motif = 0;
  // Mean atoms / mean motifs.
  double all_atom_ratio = 0;
  double heavy_atom_ratio = 0;
  int max_sym = 0;
};

struct VocabularyBuild {
  Vocabulary vocab;
  // Per kept molecule, per motif.
  std::vector<std::vector<MotifAssignment>> assignments;
  // Index into the input dataset of each kept molecule.
  std::vector<int> kept;
  std::vector<SkippedMolecule> skipped;
  CompressionStats stats;
};

/**
 * Exemplars are first occurrences in input order. Molecules with a motif
 * that no automorphism fits are skipped.
 */
VocabularyBuild build_vocabulary(const std::vector<FragmentedMolecule> &dataset,
                                 double rmsd_tol = kDefaultRmsdTol);

/**
 * Assign frames against an existing vocabulary. Motifs of unknown classes
 * get token -1.
 */
std::vector<MotifAssignment> assign_molecule(const Vocabulary &vocab,
                                             const FragmentedMolecule &fm);

CompressionStats compression_stats(const std::vector<FragmentedMolecule> &dataset,
                                   const Vocabulary &vocab);

}  // namespace rigidflow

#endif  // RIGIDFLOW_VOCAB_HPP_
