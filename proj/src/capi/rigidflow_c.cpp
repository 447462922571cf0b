//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/rigidflow.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "rigidflow/assemble_eval.hpp"
#include "rigidflow/digest.hpp"
#include "rigidflow/error.hpp"
#include "rigidflow/pipeline.hpp"
#include "rigidflow/sdf.hpp"

#ifndef RIGIDFLOW_VERSION_STRING
#define RIGIDFLOW_VERSION_STRING "0.0.0"
#endif

using namespace rigidflow;

struct rf_dataset {
  std::vector<MolecularGraph> mols;
  std::string digest;
};

struct rf_fragments {
  FragmentStore store;
};

struct rf_vocab_build {
  VocabularyBuild build;
  FrameSet frames;
};

struct rf_vocab {
  Vocabulary vocab;
};

struct rf_frames {
  FrameSet fs;
};

struct rf_model {
  ToyModel model;
};

struct rf_tables {
  BondTable bonds;
  ValencyTable valency;
};

namespace {

thread_local std::string g_last_error;

rf_status set_error(rf_status s, const std::string &msg) {
  g_last_error = msg;
  return s;
}

// Runs `body`, mapping exceptions onto status codes.
template <class F>
rf_status guard(F &&body) {
  try {
    body();
    return RF_OK;
  } catch (const ParseError &e) {
    return set_error(RF_PARSE_ERROR, e.what());
  } catch (const Error &e) {
    return set_error(static_cast<rf_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc &) {
    return set_error(RF_OUT_OF_MEMORY, "out of memory");
  } catch (const std::exception &e) {
    return set_error(RF_INTERNAL, e.what());
  } catch (...) {
    return set_error(RF_INTERNAL, "unknown error");
  }
}

template <class... P>
void require(P... ptrs) {
  if (((ptrs == nullptr) || ...))
    fail(ErrorCode::kInvalidArgument, "null argument");
}

char *dup(const std::string &s) {
  char *p = static_cast<char *>(std::malloc(s.size() + 1));
  if (!p)
    throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

std::string read_text(const char *path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::kIoError, std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const char *path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::kIoError, std::string("cannot write ") + path);
  out << text;
  if (!out)
    fail(ErrorCode::kIoError, std::string("write failed: ") + path);
}

FragmentationConfig to_cpp(const rf_frag_config &c) {
  FragmentationConfig f;
  f.alpha = c.alpha;
  f.strategy = c.strategy == RF_NO_RINGS ? Strategy::kNoRings : Strategy::kPlanarRings;
  if (c.strategy != RF_NO_RINGS && c.strategy != RF_PLANAR_RINGS)
    fail(ErrorCode::kInvalidArgument, "unknown strategy");
  f.planarity_tol = c.planarity_tol;
  f.dummy_bond_len = c.dummy_bond_len;
  f.max_ring_size = c.max_ring_size;
  f.count_by_molecule = c.count_by_molecule != 0;
  f.validate();
  return f;
}

template <class T, class... A>
T *make(A &&...args) {
  return new T { std::forward<A>(args)... };
}

}  // namespace

extern "C" {

const char *rf_version(void) { return RIGIDFLOW_VERSION_STRING; }

const char *rf_status_name(rf_status status) {
  switch (status) {
  case RF_OK: return "ok";
  case RF_OUT_OF_MEMORY: return "out of memory";
  case RF_INTERNAL: return "internal error";
  default:
    if (status >= RF_INVALID_ARGUMENT && status <= RF_FORMAT_ERROR)
      return error_code_name(static_cast<ErrorCode>(status));
    return "unknown status";
  }
}

const char *rf_last_error_message(void) { return g_last_error.c_str(); }

void rf_string_free(char *s) { std::free(s); }

rf_status rf_sha256_file(const char *path, char **hex_out) {
  return guard([&] {
    require(path, hex_out);
    *hex_out = dup(sha256_file(path));
  });
}

// --- datasets ---------------------------------------------------------------

rf_status rf_dataset_read_sdf(const char *path, const char *elements_path, rf_dataset **out) {
  return guard([&] {
    require(path, out);
    *out = nullptr;
    const std::string text = read_text(path);
    const ElementVocabulary el =
        elements_path ? ElementVocabulary::from_file(elements_path) : ElementVocabulary();
    auto ds = std::make_unique<rf_dataset>();
    ds->mols = parse_sdf(text, el);
    ds->digest = dataset_digest(text);
    *out = ds.release();
  });
}

rf_status rf_dataset_size(const rf_dataset *ds, int *out) {
  return guard([&] {
    require(ds, out);
    *out = static_cast<int>(ds->mols.size());
  });
}

rf_status rf_dataset_digest(const rf_dataset *ds, char **hex_out) {
  return guard([&] {
    require(ds, hex_out);
    *hex_out = dup(ds->digest);
  });
}

rf_status rf_dataset_write_sdf(const rf_dataset *ds, const char *path) {
  return guard([&] {
    require(ds, path);
    write_text(path, write_sdf(ds->mols));
  });
}

void rf_dataset_free(rf_dataset *ds) { delete ds; }

// --- fragmentation ----------------------------------------------------------

void rf_frag_config_init(rf_frag_config *cfg) {
  if (!cfg)
    return;
  const FragmentationConfig d;
  cfg->alpha = d.alpha;
  cfg->strategy = RF_PLANAR_RINGS;
  cfg->planarity_tol = d.planarity_tol;
  cfg->dummy_bond_len = d.dummy_bond_len;
  cfg->max_ring_size = d.max_ring_size;
  cfg->count_by_molecule = d.count_by_molecule;
}

rf_status rf_fragment(const rf_dataset *ds, const rf_frag_config *cfg, rf_fragments **out) {
  return guard([&] {
    require(ds, cfg, out);
    *out = nullptr;
    if (ds->mols.empty())
      fail(ErrorCode::kInvalidArgument, "no records");
    auto fr = std::make_unique<rf_fragments>();
    fr->store.cfg = to_cpp(*cfg);
    fr->store.input_digest = ds->digest;
    fr->store.result = fragment_dataset(ds->mols, fr->store.cfg);
    *out = fr.release();
  });
}

rf_status rf_fragments_load(const char *path, const rf_dataset *ds, rf_fragments **out) {
  return guard([&] {
    require(path, ds, out);
    *out = nullptr;
    auto fr = std::make_unique<rf_fragments>();
    fr->store = fragment_store_from_json(read_text(path), ds->mols, ds->digest);
    *out = fr.release();
  });
}

rf_status rf_fragments_save(const rf_fragments *fr, const char *path) {
  return guard([&] {
    require(fr, path);
    write_text(path, fragment_store_to_json(fr->store));
  });
}

rf_status rf_fragments_config(const rf_fragments *fr, rf_frag_config *out) {
  return guard([&] {
    require(fr, out);
    const FragmentationConfig &c = fr->store.cfg;
    out->alpha = c.alpha;
    out->strategy = c.strategy == Strategy::kNoRings ? RF_NO_RINGS : RF_PLANAR_RINGS;
    out->planarity_tol = c.planarity_tol;
    out->dummy_bond_len = c.dummy_bond_len;
    out->max_ring_size = c.max_ring_size;
    out->count_by_molecule = c.count_by_molecule;
  });
}

rf_status rf_fragments_report(const rf_fragments *fr, char **text_out) {
  return guard([&] {
    require(fr, text_out);
    *text_out = dup(fragment_report(fr->store));
  });
}

void rf_fragments_free(rf_fragments *fr) { delete fr; }

// --- vocabulary -------------------------------------------------------------

rf_status rf_build_vocabulary(const rf_fragments *fr, double rmsd_tol, rf_vocab_build **out) {
  return guard([&] {
    require(fr, out);
    *out = nullptr;
    if (!(rmsd_tol > 0))
      fail(ErrorCode::kInvalidArgument, "rmsd_tol must be positive");
    auto b = std::make_unique<rf_vocab_build>();
    b->build = build_vocabulary(fr->store.result.molecules, rmsd_tol);
    b->frames = frame_set(b->build, fr->store.result.molecules);
    *out = b.release();
  });
}

rf_status rf_vocab_build_report(const rf_vocab_build *b, char **text_out) {
  return guard([&] {
    require(b, text_out);
    *text_out = dup(vocab_report(b->build));
  });
}

rf_status rf_vocab_build_vocab(const rf_vocab_build *b, rf_vocab **out) {
  return guard([&] {
    require(b, out);
    *out = make<rf_vocab>(b->build.vocab);
  });
}

rf_status rf_vocab_build_frames(const rf_vocab_build *b, rf_frames **out) {
  return guard([&] {
    require(b, out);
    *out = make<rf_frames>(b->frames);
  });
}

void rf_vocab_build_free(rf_vocab_build *b) { delete b; }

rf_status rf_vocab_load(const char *path, rf_vocab **out) {
  return guard([&] {
    require(path, out);
    *out = nullptr;
    *out = make<rf_vocab>(Vocabulary::load(path));
  });
}

rf_status rf_vocab_save(const rf_vocab *v, const char *path) {
  return guard([&] {
    require(v, path);
    v->vocab.save(path);
  });
}

rf_status rf_vocab_size(const rf_vocab *v, int *out) {
  return guard([&] {
    require(v, out);
    *out = v->vocab.size();
  });
}

rf_status rf_vocab_max_sym(const rf_vocab *v, int *out) {
  return guard([&] {
    require(v, out);
    int m = 0;
    for (const auto &d: v->vocab.entries())
      m = std::max(m, static_cast<int>(d.sym.size()));
    *out = m;
  });
}

void rf_vocab_free(rf_vocab *v) { delete v; }

rf_status rf_frames_load(const char *path, rf_frames **out) {
  return guard([&] {
    require(path, out);
    *out = nullptr;
    *out = make<rf_frames>(frame_set_from_json(read_text(path)));
  });
}

rf_status rf_frames_save(const rf_frames *f, const char *path) {
  return guard([&] {
    require(f, path);
    write_text(path, frame_set_to_json(f->fs));
  });
}

rf_status rf_frames_size(const rf_frames *f, int *out) {
  return guard([&] {
    require(f, out);
    *out = f->fs.size();
  });
}

void rf_frames_free(rf_frames *f) { delete f; }

// --- toy denoiser -------------------------------------------------------------

void rf_train_config_init(rf_train_config *cfg) {
  if (!cfg)
    return;
  const TrainConfig t;
  const ToyModelConfig m;
  cfg->epochs = t.epochs;
  cfg->batch = t.batch;
  cfg->lr = t.lr;
  cfg->adam = t.adam;
  cfg->augment = t.augment;
  cfg->time_weighting = t.time_weighting;
  cfg->self_conditioning = m.self_conditioning;
  cfg->self_cond_prob = t.self_cond_prob;
  cfg->width1 = m.width1;
  cfg->width2 = m.width2;
  cfg->uniform_prior = t.prior == DiscretePrior::kUniform;
}

rf_status rf_train(const rf_frames *data, const rf_vocab *v, const rf_train_config *cfg,
                   uint64_t seed, rf_model **out, char **loss_csv_out) {
  return guard([&] {
    require(data, v, cfg, out);
    *out = nullptr;
    if (data->fs.size() == 0)
      fail(ErrorCode::kInvalidArgument, "no training molecules");
    for (const auto &toks: data->fs.tokens)
      for (int t: toks)
        if (t < 1 || t > v->vocab.size())
          fail(ErrorCode::kInvalidArgument, "frame set does not match the vocabulary");
    ToyModelConfig mc;
    mc.num_classes = v->vocab.size();
    mc.width1 = cfg->width1;
    mc.width2 = cfg->width2;
    mc.self_conditioning = cfg->self_conditioning != 0;
    TrainConfig tc;
    tc.epochs = cfg->epochs;
    tc.batch = cfg->batch;
    tc.lr = cfg->lr;
    tc.adam = cfg->adam != 0;
    tc.augment = cfg->augment != 0;
    tc.time_weighting = cfg->time_weighting != 0;
    tc.self_cond_prob = cfg->self_cond_prob;
    tc.prior = cfg->uniform_prior ? DiscretePrior::kUniform : DiscretePrior::kMask;
    Rng rng(seed);
    auto m = std::make_unique<rf_model>();
    m->model = ToyModel(mc);
    m->model.init(rng);
    const TrainResult r = train(m->model, training_samples(data->fs, v->vocab), tc, rng);
    if (loss_csv_out) {
      std::ostringstream o;
      o.precision(10);
      o << "epoch,loss\n";
      for (std::size_t e = 0; e < r.loss_curve.size(); ++e)
        o << e + 1 << "," << r.loss_curve[e] << "\n";
      *loss_csv_out = dup(o.str());
    }
    *out = m.release();
  });
}

rf_status rf_model_load(const char *path, rf_model **out) {
  return guard([&] {
    require(path, out);
    *out = nullptr;
    auto m = std::make_unique<rf_model>();
    m->model = ToyModel::load(path);
    *out = m.release();
  });
}

rf_status rf_model_save(const rf_model *m, const char *path) {
  return guard([&] {
    require(m, path);
    m->model.save(path);
  });
}

void rf_model_free(rf_model *m) { delete m; }

// --- sampling -----------------------------------------------------------------

void rf_sample_config_init(rf_sample_config *cfg) {
  if (!cfg)
    return;
  const SamplerConfig s;
  cfg->count = 100;
  cfg->steps = s.steps;
  cfg->temp_lo = s.knobs.temp_lo;
  cfg->temp_hi = s.knobs.temp_hi;
  cfg->eta = s.knobs.eta;
  cfg->uniform_prior = 0;
  cfg->exp_schedule = 0;
  cfg->schedule_c = 10.0;
  cfg->seed = 0;
  cfg->threads = 1;
  cfg->bandwidth = 0.0;
}

rf_status rf_tables_load(const char *bond_table_path, const char *valency_path,
                         rf_tables **out) {
  return guard([&] {
    require(bond_table_path, valency_path, out);
    *out = nullptr;
    auto t = std::make_unique<rf_tables>();
    t->bonds = BondTable::load(bond_table_path);
    t->valency = ValencyTable::load(valency_path);
    *out = t.release();
  });
}

void rf_tables_free(rf_tables *t) { delete t; }

rf_status rf_sample(const rf_vocab *v, const rf_frames *training, const rf_model *model,
                    const rf_tables *tables, const rf_sample_config *cfg, rf_dataset **out,
                    char **log_out) {
  return guard([&] {
    require(v, training, tables, cfg, out);
    *out = nullptr;
    SampleJob job;
    job.count = cfg->count;
    job.seed = cfg->seed;
    job.threads = cfg->threads;
    job.sampler.steps = cfg->steps;
    job.sampler.knobs.temp_lo = cfg->temp_lo;
    job.sampler.knobs.temp_hi = cfg->temp_hi;
    job.sampler.knobs.eta = cfg->eta;
    job.sampler.knobs.prior = cfg->uniform_prior ? DiscretePrior::kUniform : DiscretePrior::kMask;
    job.sampler.knobs.validate();
    job.sampler.schedule = cfg->exp_schedule ? RotSchedule::exponential(cfg->schedule_c)
                                             : RotSchedule::constant();
    job.k_hist = motif_count_histogram(training->fs);
    std::optional<OracleBank> bank;
    if (model) {
      if (model->model.num_classes() != v->vocab.size())
        fail(ErrorCode::kInvalidArgument, "model and vocabulary sizes differ");
    } else {
      if (cfg->bandwidth < 0)
        fail(ErrorCode::kInvalidArgument, "bandwidth must be non-negative");
      bank.emplace(training->fs, v->vocab, cfg->bandwidth);
    }
    auto denoiser = [&](int k) -> const Denoiser & {
      return model ? static_cast<const Denoiser &>(model->model) : bank->at(k);
    };
    SampleOutput s = sample_molecules(v->vocab, tables->bonds, denoiser, job);
    auto ds = std::make_unique<rf_dataset>();
    ds->mols = std::move(s.mols);
    ds->digest = dataset_digest(write_sdf(ds->mols));
    if (log_out)
      *log_out = dup(s.trajectory_log);
    *out = ds.release();
  });
}

// --- evaluation ---------------------------------------------------------------

rf_status rf_evaluate(const rf_dataset *sampled, const rf_dataset *reference,
                      const rf_tables *tables, const rf_vocab *v, const rf_frag_config *frag,
                      char **csv_out) {
  return guard([&] {
    require(sampled, reference, tables, csv_out);
    EvalInputs in;
    in.bonds = &tables->bonds;
    in.valency = &tables->valency;
    in.vocab = v ? &v->vocab : nullptr;
    if (frag)
      in.frag = to_cpp(*frag);
    in.cutoff = pruning_cutoff(in.frag.alpha, static_cast<long>(reference->mols.size()));
    *csv_out = dup(evaluate_metrics(sampled->mols, reference->mols, in).to_csv());
  });
}

rf_status rf_stats(const rf_dataset *ds, const rf_frag_config *cfgs, int count, char **csv_out) {
  return guard([&] {
    require(ds, cfgs, csv_out);
    if (count < 1)
      fail(ErrorCode::kInvalidArgument, "no configurations");
    std::vector<FragmentationConfig> c;
    for (int i = 0; i < count; ++i)
      c.push_back(to_cpp(cfgs[i]));
    *csv_out = dup(stats_table(fragmentation_sweep(ds->mols, c)));
  });
}

}  // extern "C"
