//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef RIGIDFLOW_PIPELINE_HPP_
#define RIGIDFLOW_PIPELINE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rigidflow/assemble_eval.hpp"
#include "rigidflow/denoise.hpp"
#include "rigidflow/fragment.hpp"
#include "rigidflow/vocab.hpp"

// Dataset-level plumbing shared by the C API and the command-line tool.

namespace rigidflow {

// Digest of the SDF text; inputs are identified by it in caches and manifests.
std::string dataset_digest(const std::string &sdf_text);

// --- fragmentation store ---------------------------------------------------

struct FragmentStore {
  std::string input_digest;
  FragmentationConfig cfg;
  FragmentationResult result;
};

std::string fragment_store_to_json(const FragmentStore &store);

/**
 * Rebuilds the store against the molecules it was made from; keys are
 * recomputed. Throws FormatError if `input_digest` does not match.
 */
FragmentStore fragment_store_from_json(const std::string &text,
                                       const std::vector<MolecularGraph> &mols,
                                       const std::string &input_digest);

// Human-readable fragmentation report; deterministic.
std::string fragment_report(const FragmentStore &store);

// --- frame sets ------------------------------------------------------------

// Molecules in frame form: what the flow models are trained on.
struct FrameSet {
  std::vector<std::string> names;
  std::vector<Frames> frames;
  std::vector<Tokens> tokens;

  int size() const { return static_cast<int>(frames.size()); }
};

FrameSet frame_set(const VocabularyBuild &build,
                   const std::vector<FragmentedMolecule> &data);

std::string frame_set_to_json(const FrameSet &fs);
FrameSet frame_set_from_json(const std::string &text);

// Motif-count histogram: count[k] = molecules with k motifs.
std::map<int, long> motif_count_histogram(const FrameSet &fs);

// Draw K from the histogram.
int draw_motif_count(const std::map<int, long> &hist, Rng &rng);

// Centred training samples with per-class symmetry groups.
std::vector<TrainSample> training_samples(const FrameSet &fs, const Vocabulary &vocab);

// Per-class symmetry groups indexed by token ([MASK] trivial).
std::vector<std::vector<Rotation>> class_symmetries(const Vocabulary &vocab);

// One oracle per motif count present in the frame set.
class OracleBank {
public:
  OracleBank(const FrameSet &fs, const Vocabulary &vocab, double bandwidth);
  const Denoiser &at(int k) const;

private:
  std::map<int, std::unique_ptr<OracleDenoiser>> by_k_;
};

// --- vocabulary report -----------------------------------------------------

std::string vocab_report(const VocabularyBuild &build);

// --- sampling --------------------------------------------------------------

struct SampleJob {
  int count = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  SamplerConfig sampler;
  std::map<int, long> k_hist;
};

struct SampleOutput {
  std::vector<MolecularGraph> mols;
  // One JSON object per line, per molecule.
  std::string trajectory_log;
};

/**
 * Generate `count` molecules. Item i uses its own stream derive_seed(seed, i),
 * so the output does not depend on the thread count. `denoiser_for(k)`
 * supplies the model for a molecule with k motifs.
 */
SampleOutput sample_molecules(const Vocabulary &vocab, const BondTable &bonds,
                              const std::function<const Denoiser &(int)> &denoiser_for,
                              const SampleJob &job);

// --- statistics ------------------------------------------------------------

struct StatsRow {
  FragmentStats frag;
  int vocabulary = 0;
  int max_sym = 0;
  double all_atom_ratio = 0;
  double heavy_atom_ratio = 0;
  int skipped = 0;
};

// Fragment and build a vocabulary under each configuration.
std::vector<StatsRow> fragmentation_sweep(const std::vector<MolecularGraph> &mols,
                                          const std::vector<FragmentationConfig> &cfgs);

std::string stats_table(const std::vector<StatsRow> &rows);

}  // namespace rigidflow

#endif  // RIGIDFLOW_PIPELINE_HPP_
