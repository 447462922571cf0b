//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

// Command-line front end. Talks to the library only through the C interface.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rigidflow/rigidflow.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Library failure; carries the status for the exit code.
struct Failure : std::runtime_error {
  rf_status status;
  Failure(rf_status s, const std::string &what) : std::runtime_error(what), status(s) {}
};

void check(rf_status s, const std::string &context) {
  if (s != RF_OK)
    throw Failure(s, context + ": " + rf_status_name(s) + ": " + rf_last_error_message());
}

template <class T, void (*Free)(T *)>
struct Deleter {
  void operator()(T *p) const { Free(p); }
};
template <class T, void (*Free)(T *)>
using Handle = std::unique_ptr<T, Deleter<T, Free>>;

using Dataset = Handle<rf_dataset, rf_dataset_free>;
using Fragments = Handle<rf_fragments, rf_fragments_free>;
using VocabBuild = Handle<rf_vocab_build, rf_vocab_build_free>;
using Vocab = Handle<rf_vocab, rf_vocab_free>;
using FrameSet = Handle<rf_frames, rf_frames_free>;
using Model = Handle<rf_model, rf_model_free>;
using Tables = Handle<rf_tables, rf_tables_free>;

// Takes ownership of a library string.
std::string take(char *s) {
  std::string out = s ? s : "";
  rf_string_free(s);
  return out;
}

std::string sha256_file(const std::string &path) {
  char *hex = nullptr;
  check(rf_sha256_file(path.c_str(), &hex), path);
  return take(hex);
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f)
    throw Failure(RF_IO_ERROR, "cannot write " + path.string());
}

// --- shared options ---------------------------------------------------------

struct Common {
  std::string out_dir = ".";
  std::string elements;
  unsigned long long seed = 0;
  int threads = 1;
};

struct FragOpts {
  double alpha = 0;
  std::string strategy = "planar_rings";
  double planarity_tol = 0;
  double dummy_bond_len = 0;
  int max_ring_size = 0;
  bool count_by_molecule = false;

  FragOpts() {
    rf_frag_config c;
    rf_frag_config_init(&c);
    alpha = c.alpha;
    planarity_tol = c.planarity_tol;
    dummy_bond_len = c.dummy_bond_len;
    max_ring_size = c.max_ring_size;
    count_by_molecule = c.count_by_molecule != 0;
  }

  rf_frag_config to_c() const {
    rf_frag_config c;
    rf_frag_config_init(&c);
    c.alpha = alpha;
    c.strategy = strategy == "no_rings" ? RF_NO_RINGS : RF_PLANAR_RINGS;
    c.planarity_tol = planarity_tol;
    c.dummy_bond_len = dummy_bond_len;
    c.max_ring_size = max_ring_size;
    c.count_by_molecule = count_by_molecule ? 1 : 0;
    return c;
  }
};

void add_frag_options(CLI::App *app, FragOpts &o) {
  app->add_option("--alpha", o.alpha, "Pruning threshold, percent of the dataset size")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 100.0));
  app->add_option("--strategy", o.strategy, "Ring handling")
      ->capture_default_str()
      ->check(CLI::IsMember({"no_rings", "planar_rings"}));
  app->add_option("--planarity-tol", o.planarity_tol, "Max ring atom distance from plane (A)")
      ->capture_default_str();
  app->add_option("--dummy-bond-len", o.dummy_bond_len, "Dummy atom bond length (A)")
      ->capture_default_str();
  app->add_option("--max-ring-size", o.max_ring_size, "Largest ring kept whole")
      ->capture_default_str();
  app->add_flag("--count-by-molecule", o.count_by_molecule,
                "Count a motif once per molecule when pruning");
}

void add_common(CLI::App *app, Common &c, bool seeded) {
  app->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  app->add_option("--elements", c.elements, "Element whitelist file")
      ->check(CLI::ExistingFile);
  app->add_option("--threads", c.threads, "Worker cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  if (seeded)
    app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
}

Dataset read_sdf(const std::string &path, const Common &c) {
  rf_dataset *ds = nullptr;
  check(rf_dataset_read_sdf(path.c_str(), c.elements.empty() ? nullptr : c.elements.c_str(),
                            &ds),
        "reading " + path);
  return Dataset(ds);
}

// Echo of every option on the subcommand as it was resolved.
ordered_json config_echo(const CLI::App *app) {
  ordered_json cfg = ordered_json::object();
  for (const CLI::Option *opt : app->get_options()) {
    if (opt->get_lnames().empty())
      continue;
    const std::string &name = opt->get_lnames().front();
    if (name == "help" || name == "config")
      continue;
    if (opt->count() > 0) {
      const auto &r = opt->results();
      cfg[name] = r.size() == 1 ? ordered_json(r.front()) : ordered_json(r);
    } else if (opt->get_expected_max() == 0) {
      cfg[name] = "false";
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

struct Manifest {
  ordered_json inputs = ordered_json::object();
  ordered_json outputs = ordered_json::object();

  void input(const std::string &role, const std::string &path) {
    inputs[role] = {{"path", path}, {"sha256", sha256_file(path)}};
  }
  void output(const fs::path &dir, const std::string &name) {
    outputs[name] = sha256_file((dir / name).string());
  }
  void write(const fs::path &dir, const CLI::App *cmd) const {
    ordered_json m;
    m["tool"] = "rigidflow";
    m["version"] = rf_version();
    m["command"] = cmd->get_name();
    m["config"] = config_echo(cmd);
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
  }
};

fs::path prepare_out(const Common &c) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Failure(RF_IO_ERROR, "cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

bool same_config(const rf_frag_config &a, const rf_frag_config &b) {
  return a.alpha == b.alpha && a.strategy == b.strategy && a.planarity_tol == b.planarity_tol &&
         a.dummy_bond_len == b.dummy_bond_len && a.max_ring_size == b.max_ring_size &&
         a.count_by_molecule == b.count_by_molecule;
}

// --- commands ---------------------------------------------------------------

struct FragmentCmd {
  Common common;
  FragOpts frag;
  std::string input;

  void run(const CLI::App *cmd) {
    const fs::path dir = prepare_out(common);
    Dataset ds = read_sdf(input, common);
    const rf_frag_config cfg = frag.to_c();
    const fs::path cache = dir / "fragments.json";

    // The store is keyed by the input digest and the configuration.
    Fragments fr;
    if (fs::exists(cache)) {
      rf_fragments *old = nullptr;
      rf_frag_config old_cfg;
      if (rf_fragments_load(cache.string().c_str(), ds.get(), &old) == RF_OK &&
          rf_fragments_config(old, &old_cfg) == RF_OK && same_config(old_cfg, cfg)) {
        fr.reset(old);
        std::cerr << "reusing " << cache.string() << "\n";
      } else {
        rf_fragments_free(old);
      }
    }
    if (!fr) {
      rf_fragments *p = nullptr;
      check(rf_fragment(ds.get(), &cfg, &p), "fragmenting " + input);
      fr.reset(p);
      check(rf_fragments_save(fr.get(), cache.string().c_str()), "saving fragments");
    }
    char *report = nullptr;
    check(rf_fragments_report(fr.get(), &report), "report");
    const std::string text = take(report);
    write_text(dir / "fragment_report.txt", text);
    std::cout << text;

    Manifest m;
    m.input("input", input);
    if (!common.elements.empty())
      m.input("elements", common.elements);
    m.output(dir, "fragments.json");
    m.output(dir, "fragment_report.txt");
    m.write(dir, cmd);
  }
};

struct VocabCmd {
  Common common;
  std::string input;
  std::string fragments;
  double rmsd_tol = 0.25;

  void run(const CLI::App *cmd) {
    const fs::path dir = prepare_out(common);
    Dataset ds = read_sdf(input, common);
    rf_fragments *fp = nullptr;
    check(rf_fragments_load(fragments.c_str(), ds.get(), &fp), "loading " + fragments);
    Fragments fr(fp);

    rf_vocab_build *bp = nullptr;
    check(rf_build_vocabulary(fr.get(), rmsd_tol, &bp), "building vocabulary");
    VocabBuild build(bp);
    rf_vocab *vp = nullptr;
    rf_frames *fsp = nullptr;
    check(rf_vocab_build_vocab(build.get(), &vp), "vocabulary");
    Vocab v(vp);
    check(rf_vocab_build_frames(build.get(), &fsp), "frames");
    FrameSet frames(fsp);

    check(rf_vocab_save(v.get(), (dir / "vocab.json").string().c_str()), "saving vocabulary");
    check(rf_frames_save(frames.get(), (dir / "frames.json").string().c_str()),
          "saving frames");
    char *report = nullptr;
    check(rf_vocab_build_report(build.get(), &report), "report");
    const std::string text = take(report);
    write_text(dir / "vocab_report.txt", text);
    std::cout << text;

    Manifest m;
    m.input("input", input);
    m.input("fragments", fragments);
    if (!common.elements.empty())
      m.input("elements", common.elements);
    for (const char *name : {"vocab.json", "frames.json", "vocab_report.txt"})
      m.output(dir, name);
    m.write(dir, cmd);
  }
};

Vocab load_vocab(const std::string &path) {
  rf_vocab *v = nullptr;
  check(rf_vocab_load(path.c_str(), &v), "loading " + path);
  return Vocab(v);
}

FrameSet load_frames(const std::string &path) {
  rf_frames *f = nullptr;
  check(rf_frames_load(path.c_str(), &f), "loading " + path);
  return FrameSet(f);
}

struct TrainCmd {
  Common common;
  std::string vocab;
  std::string frames;
  rf_train_config cfg{};
  bool sgd = false;
  bool no_augment = false;
  bool no_time_weighting = false;
  bool self_conditioning = false;
  bool uniform_prior = false;

  TrainCmd() { rf_train_config_init(&cfg); }

  void run(const CLI::App *cmd) {
    const fs::path dir = prepare_out(common);
    Vocab v = load_vocab(vocab);
    FrameSet data = load_frames(frames);
    rf_train_config c = cfg;
    c.adam = sgd ? 0 : 1;
    c.augment = no_augment ? 0 : 1;
    c.time_weighting = no_time_weighting ? 0 : 1;
    c.self_conditioning = self_conditioning ? 1 : 0;
    c.uniform_prior = uniform_prior ? 1 : 0;

    rf_model *mp = nullptr;
    char *loss = nullptr;
    check(rf_train(data.get(), v.get(), &c, common.seed, &mp, &loss), "training");
    Model model(mp);
    write_text(dir / "loss.csv", take(loss));
    check(rf_model_save(model.get(), (dir / "model.json").string().c_str()), "saving model");

    Manifest m;
    m.input("vocab", vocab);
    m.input("frames", frames);
    m.output(dir, "model.json");
    m.output(dir, "loss.csv");
    m.write(dir, cmd);
  }
};

Tables load_tables(const std::string &bonds, const std::string &valency) {
  rf_tables *t = nullptr;
  check(rf_tables_load(bonds.c_str(), valency.c_str(), &t), "loading tables");
  return Tables(t);
}

struct TableOpts {
  std::string bonds = std::string(RIGIDFLOW_DATA_DIR) + "/bond_table.json";
  std::string valency = std::string(RIGIDFLOW_DATA_DIR) + "/valency_table.json";
};

void add_table_options(CLI::App *app, TableOpts &t) {
  app->add_option("--bond-table", t.bonds, "Bond length table")
      ->capture_default_str()
      ->check(CLI::ExistingFile);
  app->add_option("--valency-table", t.valency, "Allowed valences")
      ->capture_default_str()
      ->check(CLI::ExistingFile);
}

// "lo" or "lo:hi".
std::pair<double, double> parse_temperature(const std::string &s) {
  const auto colon = s.find(':');
  try {
    std::size_t used = 0;
    const double lo = std::stod(s.substr(0, colon), &used);
    if (used != (colon == std::string::npos ? s.size() : colon))
      throw std::invalid_argument(s);
    double hi = lo;
    if (colon != std::string::npos) {
      const std::string rest = s.substr(colon + 1);
      hi = std::stod(rest, &used);
      if (used != rest.size())
        throw std::invalid_argument(s);
    }
    if (!(lo > 0) || !(hi > 0))
      throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error &) {
    throw CLI::ValidationError("--temperature", "expected positive lo or lo:hi, got " + s);
  }
}

struct SampleCmd {
  Common common;
  TableOpts tables;
  std::string vocab;
  std::string frames;
  std::string model;
  rf_sample_config cfg{};
  std::string temperature;
  std::string schedule = "linear";
  bool uniform_prior = false;

  SampleCmd() {
    rf_sample_config_init(&cfg);
    std::ostringstream t;
    t << cfg.temp_lo << ":" << cfg.temp_hi;
    temperature = t.str();
  }

  void run(const CLI::App *cmd) {
    const fs::path dir = prepare_out(common);
    Vocab v = load_vocab(vocab);
    FrameSet data = load_frames(frames);
    Model m;
    if (!model.empty()) {
      rf_model *mp = nullptr;
      check(rf_model_load(model.c_str(), &mp), "loading " + model);
      m.reset(mp);
    }
    Tables t = load_tables(tables.bonds, tables.valency);

    rf_sample_config c = cfg;
    std::tie(c.temp_lo, c.temp_hi) = parse_temperature(temperature);
    c.exp_schedule = schedule == "exp" ? 1 : 0;
    c.uniform_prior = uniform_prior ? 1 : 0;
    c.seed = common.seed;
    c.threads = common.threads;

    rf_dataset *out = nullptr;
    char *log = nullptr;
    check(rf_sample(v.get(), data.get(), m.get(), t.get(), &c, &out, &log), "sampling");
    Dataset samples(out);
    write_text(dir / "trajectories.jsonl", take(log));
    check(rf_dataset_write_sdf(samples.get(), (dir / "samples.sdf").string().c_str()),
          "writing samples");

    Manifest man;
    man.input("vocab", vocab);
    man.input("frames", frames);
    if (!model.empty())
      man.input("model", model);
    man.input("bond_table", tables.bonds);
    man.input("valency_table", tables.valency);
    man.output(dir, "samples.sdf");
    man.output(dir, "trajectories.jsonl");
    man.write(dir, cmd);
  }
};

struct EvalCmd {
  Common common;
  TableOpts tables;
  FragOpts frag;
  std::string samples;
  std::string reference;
  std::string vocab;

  void run(const CLI::App *cmd) {
    const fs::path dir = prepare_out(common);
    Dataset s = read_sdf(samples, common);
    Dataset r = read_sdf(reference, common);
    Tables t = load_tables(tables.bonds, tables.valency);
    Vocab v;
    if (!vocab.empty())
      v = load_vocab(vocab);
    const rf_frag_config fc = frag.to_c();
    char *csv = nullptr;
    check(rf_evaluate(s.get(), r.get(), t.get(), v.get(), &fc, &csv), "evaluating");
    const std::string text = take(csv);
    write_text(dir / "metrics.csv", text);
    std::cout << text;

    Manifest m;
    m.input("samples", samples);
    m.input("reference", reference);
    if (!vocab.empty())
      m.input("vocab", vocab);
    m.input("bond_table", tables.bonds);
    m.input("valency_table", tables.valency);
    m.output(dir, "metrics.csv");
    m.write(dir, cmd);
  }
};

struct StatsCmd {
  Common common;
  FragOpts frag;
  std::string input;
  std::vector<double> alphas{0.5, 0.1, 0.01};

  void run(const CLI::App *cmd) {
    const fs::path dir = prepare_out(common);
    Dataset ds = read_sdf(input, common);
    // One ring-free row, then planar rings at each alpha.
    std::vector<rf_frag_config> cfgs;
    FragOpts o = frag;
    o.strategy = "no_rings";
    cfgs.push_back(o.to_c());
    for (double a : alphas) {
      o.strategy = "planar_rings";
      o.alpha = a;
      cfgs.push_back(o.to_c());
    }
    char *csv = nullptr;
    check(rf_stats(ds.get(), cfgs.data(), static_cast<int>(cfgs.size()), &csv), "stats");
    const std::string text = take(csv);
    write_text(dir / "stats.csv", text);
    std::cout << text;

    Manifest m;
    m.input("input", input);
    if (!common.elements.empty())
      m.input("elements", common.elements);
    m.output(dir, "stats.csv");
    m.write(dir, cmd);
  }
};

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Rigid-motif molecule generation toolkit"};
  app.set_version_flag("--version", std::string(rf_version()));
  app.set_config("--config", "", "TOML config file; flags override it");
  app.require_subcommand(1);

  FragmentCmd frag_cmd;
  auto *frag = app.add_subcommand("fragment", "Fragment an SDF dataset into motifs");
  frag->add_option("--input", frag_cmd.input, "Input SDF")->required()->check(CLI::ExistingFile);
  add_common(frag, frag_cmd.common, false);
  add_frag_options(frag, frag_cmd.frag);

  VocabCmd vocab_cmd;
  auto *voc = app.add_subcommand("vocab", "Build the motif vocabulary and frames");
  voc->add_option("--input", vocab_cmd.input, "Input SDF")->required()->check(CLI::ExistingFile);
  voc->add_option("--fragments", vocab_cmd.fragments, "Store written by `fragment`")
      ->required()
      ->check(CLI::ExistingFile);
  voc->add_option("--rmsd-tol", vocab_cmd.rmsd_tol, "Pose agreement tolerance (A)")
      ->capture_default_str();
  add_common(voc, vocab_cmd.common, false);

  TrainCmd train_cmd;
  auto *train = app.add_subcommand("train", "Train the toy denoiser");
  train->add_option("--vocab", train_cmd.vocab)->required()->check(CLI::ExistingFile);
  train->add_option("--frames", train_cmd.frames)->required()->check(CLI::ExistingFile);
  train->add_option("--epochs", train_cmd.cfg.epochs)->capture_default_str();
  train->add_option("--batch", train_cmd.cfg.batch)->capture_default_str();
  train->add_option("--lr", train_cmd.cfg.lr)->capture_default_str();
  train->add_option("--width1", train_cmd.cfg.width1)->capture_default_str();
  train->add_option("--width2", train_cmd.cfg.width2)->capture_default_str();
  train->add_option("--self-cond-prob", train_cmd.cfg.self_cond_prob)->capture_default_str();
  train->add_flag("--sgd", train_cmd.sgd, "Plain SGD instead of Adam");
  train->add_flag("--no-augment", train_cmd.no_augment, "Disable random rotations");
  train->add_flag("--no-time-weighting", train_cmd.no_time_weighting);
  train->add_flag("--self-conditioning", train_cmd.self_conditioning);
  train->add_flag("--uniform-prior", train_cmd.uniform_prior);
  add_common(train, train_cmd.common, true);

  SampleCmd sample_cmd;
  auto *sample = app.add_subcommand("sample", "Generate molecules");
  sample->add_option("--vocab", sample_cmd.vocab)->required()->check(CLI::ExistingFile);
  sample->add_option("--frames", sample_cmd.frames, "Training frames (oracle data, K histogram)")
      ->required()
      ->check(CLI::ExistingFile);
  sample->add_option("--model", sample_cmd.model, "Checkpoint; the exact oracle if omitted")
      ->check(CLI::ExistingFile);
  sample->add_option("--count", sample_cmd.cfg.count)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sample->add_option("--steps", sample_cmd.cfg.steps)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sample->add_option("--temperature", sample_cmd.temperature, "lo or lo:hi")
      ->capture_default_str();
  sample->add_option("--eta", sample_cmd.cfg.eta, "Remasking rate")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sample->add_option("--schedule", sample_cmd.schedule, "Rotation time schedule")
      ->capture_default_str()
      ->check(CLI::IsMember({"linear", "exp"}));
  sample->add_option("--schedule-c", sample_cmd.cfg.schedule_c)->capture_default_str();
  sample->add_option("--bandwidth", sample_cmd.cfg.bandwidth, "Oracle kernel width (A)")
      ->capture_default_str();
  sample->add_flag("--uniform-prior", sample_cmd.uniform_prior);
  add_table_options(sample, sample_cmd.tables);
  add_common(sample, sample_cmd.common, true);

  EvalCmd eval_cmd;
  auto *eval = app.add_subcommand("eval", "Score samples against a reference set");
  eval->add_option("--samples", eval_cmd.samples)->required()->check(CLI::ExistingFile);
  eval->add_option("--reference", eval_cmd.reference)->required()->check(CLI::ExistingFile);
  eval->add_option("--vocab", eval_cmd.vocab, "Enables the motif frequency ratios")
      ->check(CLI::ExistingFile);
  add_table_options(eval, eval_cmd.tables);
  add_frag_options(eval, eval_cmd.frag);
  add_common(eval, eval_cmd.common, false);

  StatsCmd stats_cmd;
  auto *stats = app.add_subcommand("stats", "Fragmentation statistics across thresholds");
  stats->add_option("--input", stats_cmd.input)->required()->check(CLI::ExistingFile);
  stats->add_option("--alphas", stats_cmd.alphas, "Planar-ring thresholds (percent)")
      ->capture_default_str()
      ->delimiter(',');
  add_frag_options(stats, stats_cmd.frag);
  add_common(stats, stats_cmd.common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*frag)
      frag_cmd.run(frag);
    else if (*voc)
      vocab_cmd.run(voc);
    else if (*train)
      train_cmd.run(train);
    else if (*sample)
      sample_cmd.run(sample);
    else if (*eval)
      eval_cmd.run(eval);
    else if (*stats)
      stats_cmd.run(stats);
  } catch (const CLI::ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Failure &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
