//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "rigidflow/canon.hpp"
#include "rigidflow/digest.hpp"
#include "rigidflow/error.hpp"

namespace rigidflow {

using nlohmann::json;

namespace {

json parse_doc(const std::string &text, const char *format) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string(format) + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != format || j.value("version", 0) != 1)
    fail(ErrorCode::kFormatError, std::string("expected ") + format + " version 1");
  return j;
}

json vec3(const Eigen::Vector3d &v) { return json::array({ v.x(), v.y(), v.z() }); }

Eigen::Vector3d vec3(const json &j) {
  return { j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>() };
}

json config_json(const FragmentationConfig &c) {
  return { { "alpha", c.alpha },
           { "strategy", strategy_name(c.strategy) },
           { "planarity_tol", c.planarity_tol },
           { "dummy_bond_len", c.dummy_bond_len },
           { "max_ring_size", c.max_ring_size },
           { "count_by_molecule", c.count_by_molecule } };
}

FragmentationConfig config_from(const json &j) {
  FragmentationConfig c;
  c.alpha = j.at("alpha").get<double>();
  c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.planarity_tol = j.at("planarity_tol").get<double>();
  c.dummy_bond_len = j.at("dummy_bond_len").get<double>();
  c.max_ring_size = j.at("max_ring_size").get<int>();
  c.count_by_molecule = j.at("count_by_molecule").get<bool>();
  c.validate();
  return c;
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(prec) << x;
  return o.str();
}

}  // namespace

std::string dataset_digest(const std::string &sdf_text) { return sha256_hex(sdf_text); }

// ---------------------------------------------------------------------------

std::string fragment_store_to_json(const FragmentStore &store) {
  json j;
  j["format"] = "rigidflow-fragments";
  j["version"] = 1;
  j["input_digest"] = store.input_digest;
  j["config"] = config_json(store.cfg);
  j["cutoff"] = store.result.cutoff;
  json skipped = json::array();
  for (const auto &s: store.result.skipped)
    skipped.push_back({ { "index", s.index }, { "name", s.name }, { "reason", s.reason } });
  j["skipped"] = skipped;
  json mols = json::array();
  for (std::size_t m = 0; m < store.result.molecules.size(); ++m) {
    const FragmentedMolecule &fm = store.result.molecules[m];
    json motifs = json::array();
    for (const auto &inst: fm.motifs) {
      json dummies = json::array();
      for (const auto &p: inst.dummy_positions)
        dummies.push_back(vec3(p));
      motifs.push_back({ { "atoms", inst.atom_indices },
                         { "dummies", dummies },
                         { "anchors", inst.dummy_anchors },
                         { "level", static_cast<int>(inst.level) } });
    }
    json cuts = json::array();
    for (const auto &b: fm.cut_bonds)
      cuts.push_back({ b.i, b.j, static_cast<int>(b.order) });
    mols.push_back({ { "source", store.result.source_index[m] },
                     { "motifs", motifs },
                     { "cut_bonds", cuts } });
  }
  j["molecules"] = mols;
  return j.dump(1) + "\n";
}

FragmentStore fragment_store_from_json(const std::string &text,
                                       const std::vector<MolecularGraph> &mols,
                                       const std::string &input_digest) {
  const json j = parse_doc(text, "rigidflow-fragments");
  FragmentStore st;
  try {
    st.input_digest = j.at("input_digest").get<std::string>();
    if (st.input_digest != input_digest)
      fail(ErrorCode::kFormatError, "fragment store was made from a different input");
    st.cfg = config_from(j.at("config"));
    st.result.cutoff = j.at("cutoff").get<long>();
    for (const auto &s: j.at("skipped"))
      st.result.skipped.push_back({ s.at("index").get<int>(), s.at("name").get<std::string>(),
                                    s.at("reason").get<std::string>() });
    for (const auto &m: j.at("molecules")) {
      const int src = m.at("source").get<int>();
      if (src < 0 || src >= static_cast<int>(mols.size()))
        fail(ErrorCode::kFormatError, "fragment store: source index out of range");
      FragmentedMolecule fm;
      fm.source = mols[src];
      for (const auto &mj: m.at("motifs")) {
        MotifInstance inst;
        inst.atom_indices = mj.at("atoms").get<std::vector<int>>();
        for (const auto &d: mj.at("dummies"))
          inst.dummy_positions.push_back(vec3(d));
        inst.dummy_anchors = mj.at("anchors").get<std::vector<int>>();
        inst.level = static_cast<RelaxLevel>(mj.at("level").get<int>());
        for (int a: inst.atom_indices)
          if (a < 0 || a >= fm.source.num_atoms())
            fail(ErrorCode::kFormatError, "fragment store: atom index out of range");
        inst.base_key = canonical_key(motif_base_graph(fm.source, inst));
        inst.key = canonical_key(motif_graph(fm.source, inst));
        fm.motifs.push_back(std::move(inst));
      }
      for (const auto &b: m.at("cut_bonds"))
        fm.cut_bonds.push_back({ b.at(0).get<int>(), b.at(1).get<int>(),
                                 static_cast<BondOrder>(b.at(2).get<int>()) });
      st.result.molecules.push_back(std::move(fm));
      st.result.source_index.push_back(src);
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string("fragment store: ") + e.what());
  }
  return st;
}

std::string fragment_report(const FragmentStore &store) {
  const auto &r = store.result;
  const FragmentStats fs = fragment_stats(r.molecules, strategy_name(store.cfg.strategy),
                                          r.cutoff);
  std::ostringstream o;
  o << "input_digest: " << store.input_digest << "\n";
  o << "strategy: " << strategy_name(store.cfg.strategy) << "\n";
  o << "alpha_pct: " << store.cfg.alpha << "\n";
  o << "cutoff: " << r.cutoff << "\n";
  o << "molecules: " << r.molecules.size() << "\n";
  o << "skipped: " << r.skipped.size() << "\n";
  o << "classes: " << fs.classes << "\n";
  o << "mean_fragments: " << fmt(fs.mean_fragments) << "\n";
  o << "median_fragments: " << fmt(fs.median_fragments, 1) << "\n";
  o << "max_fragments: " << fs.max_fragments << "\n";
  o << "max_motif_size: " << fs.max_motif_size << "\n";
  for (const auto &s: r.skipped)
    o << "skip " << s.index << " " << s.name << ": " << s.reason << "\n";
  o << "per_molecule:\n";
  for (std::size_t m = 0; m < r.molecules.size(); ++m)
    o << "  " << r.source_index[m] << " " << r.molecules[m].source.name << " "
      << r.molecules[m].motifs.size() << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------

FrameSet frame_set(const VocabularyBuild &build, const std::vector<FragmentedMolecule> &data) {
  FrameSet fs;
  for (std::size_t m = 0; m < build.kept.size(); ++m) {
    fs.names.push_back(data[build.kept[m]].source.name);
    Frames f;
    Tokens t;
    for (const auto &ma: build.assignments[m]) {
      f.push_back(ma.assignment.frame);
      t.push_back(ma.token);
    }
    fs.frames.push_back(std::move(f));
    fs.tokens.push_back(std::move(t));
  }
  return fs;
}

std::string frame_set_to_json(const FrameSet &fs) {
  json j;
  j["format"] = "rigidflow-frames";
  j["version"] = 1;
  json mols = json::array();
  for (int m = 0; m < fs.size(); ++m) {
    json frames = json::array();
    for (const auto &f: fs.frames[m]) {
      json r = json::array();
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          r.push_back(f.rot.matrix()(a, b));
      frames.push_back({ { "rot", r }, { "trans", vec3(f.trans) } });
    }
    mols.push_back({ { "name", fs.names[m] }, { "tokens", fs.tokens[m] }, { "frames", frames } });
  }
  j["molecules"] = mols;
  return j.dump(1) + "\n";
}

FrameSet frame_set_from_json(const std::string &text) {
  const json j = parse_doc(text, "rigidflow-frames");
  FrameSet fs;
  try {
    for (const auto &m: j.at("molecules")) {
      fs.names.push_back(m.at("name").get<std::string>());
      fs.tokens.push_back(m.at("tokens").get<Tokens>());
      Frames f;
      for (const auto &fj: m.at("frames")) {
        Eigen::Matrix3d r;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            r(a, b) = fj.at("rot").at(3 * a + b).get<double>();
        f.push_back({ Rotation::from_matrix(r), vec3(fj.at("trans")) });
      }
      if (f.size() != fs.tokens.back().size())
        fail(ErrorCode::kFormatError, "frame set: token and frame counts differ");
      fs.frames.push_back(std::move(f));
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string("frame set: ") + e.what());
  }
  return fs;
}

std::map<int, long> motif_count_histogram(const FrameSet &fs) {
  std::map<int, long> h;
  for (const auto &t: fs.tokens)
    ++h[static_cast<int>(t.size())];
  return h;
}

int draw_motif_count(const std::map<int, long> &hist, Rng &rng) {
  long total = 0;
  for (const auto &[k, n]: hist)
    total += n;
  if (total <= 0)
    fail(ErrorCode::kInvalidArgument, "motif count histogram is empty");
  long r = std::uniform_int_distribution<long>(0, total - 1)(rng);
  for (const auto &[k, n]: hist) {
    if (r < n)
      return k;
    r -= n;
  }
  return hist.rbegin()->first;
}

std::vector<std::vector<Rotation>> class_symmetries(const Vocabulary &vocab) {
  std::vector<std::vector<Rotation>> syms;
  for (int t = 0; t <= vocab.size(); ++t)
    syms.push_back(vocab.sym(t));
  return syms;
}

std::vector<TrainSample> training_samples(const FrameSet &fs, const Vocabulary &vocab) {
  std::vector<TrainSample> out;
  for (int m = 0; m < fs.size(); ++m) {
    TrainSample s;
    s.frames = centre_frames(fs.frames[m]);
    s.tokens = fs.tokens[m];
    for (int t: s.tokens)
      s.syms.push_back(vocab.sym(t));
    out.push_back(std::move(s));
  }
  return out;
}

OracleBank::OracleBank(const FrameSet &fs, const Vocabulary &vocab, double bandwidth) {
  std::map<int, std::vector<JointDatum>> groups;
  for (int m = 0; m < fs.size(); ++m)
    groups[static_cast<int>(fs.tokens[m].size())].push_back(
        { centre_frames(fs.frames[m]), fs.tokens[m] });
  const auto syms = class_symmetries(vocab);
  for (auto &[k, data]: groups)
    by_k_[k] = std::make_unique<OracleDenoiser>(std::move(data), vocab.size(), bandwidth, syms);
}

const Denoiser &OracleBank::at(int k) const {
  const auto it = by_k_.find(k);
  if (it == by_k_.end())
    fail(ErrorCode::kInvalidArgument,
         "no training molecule has " + std::to_string(k) + " motifs");
  return *it->second;
}

// ---------------------------------------------------------------------------

std::string vocab_report(const VocabularyBuild &build) {
  const Vocabulary &v = build.vocab;
  const CompressionStats &s = build.stats;
  std::ostringstream o;
  o << "vocabulary_size: " << v.size() << "\n";
  o << "molecules: " << s.molecules << "\n";
  o << "skipped: " << build.skipped.size() << "\n";
  o << "mean_atoms: " << fmt(s.mean_atoms) << "\n";
  o << "mean_heavy_atoms: " << fmt(s.mean_heavy_atoms) << "\n";
  o << "mean_motifs: " << fmt(s.mean_motifs) << "\n";
  o << "atoms_per_motif: " << fmt(s.atoms_per_motif) << "\n";
  o << "all_atom_ratio: " << fmt(s.all_atom_ratio) << "\n";
  o << "heavy_atom_ratio: " << fmt(s.heavy_atom_ratio) << "\n";
  o << "max_sym: " << s.max_sym << "\n";
  for (const auto &sk: build.skipped)
    o << "skip " << sk.index << " " << sk.name << ": " << sk.reason << "\n";
  o << "classes:\n";
  o << "  token count points real_atoms sym digest\n";
  for (int t = 1; t <= v.size(); ++t) {
    const MotifDescriptor &d = v.descriptor(t);
    o << "  " << t << " " << d.count << " " << d.num_points() << " " << d.num_real_atoms() << " "
      << d.sym.size() << " " << d.key.digest().substr(0, 12) << "\n";
  }
  return o.str();
}

// ---------------------------------------------------------------------------

SampleOutput sample_molecules(const Vocabulary &vocab, const BondTable &bonds,
                              const std::function<const Denoiser &(int)> &denoiser_for,
                              const SampleJob &job) {
  if (job.count < 0)
    fail(ErrorCode::kInvalidArgument, "sample count must be non-negative");
  const int n = job.count;
  std::vector<MolecularGraph> mols(n);
  std::vector<std::string> logs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next { 0 };
  auto worker = [&] {
    for (int i; (i = next.fetch_add(1)) < n;) {
      try {
        const std::uint64_t seed = derive_seed(job.seed, static_cast<std::uint64_t>(i));
        Rng rng(seed);
        const int k = draw_motif_count(job.k_hist, rng);
        std::vector<int> masked;
        const JointSample s = sample_joint(
            denoiser_for(k), k, job.sampler, rng, [&](int, const JointSample &st) {
              masked.push_back(static_cast<int>(
                  std::count(st.tokens.begin(), st.tokens.end(), kMaskToken)));
            });
        MolecularGraph g = with_inferred_bonds(reconstruct(vocab, s.frames, s.tokens), bonds);
        char name[32];
        std::snprintf(name, sizeof name, "sample_%06d", i);
        g.name = name;
        std::string toks;
        for (int t: s.tokens)
          toks += (toks.empty() ? "" : " ") + std::to_string(t);
        g.props.push_back({ kTokensProperty, toks });
        g.props.push_back({ "rigidflow_seed", std::to_string(seed) });
        mols[i] = std::move(g);
        json line = { { "index", i }, { "seed", seed }, { "k", k },
                      { "tokens", s.tokens }, { "masked_per_step", masked } };
        logs[i] = line.dump() + "\n";
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(job.threads, std::max(n, 1)));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &th: pool)
    th.join();
  for (const auto &e: errors)
    if (e)
      std::rethrow_exception(e);
  SampleOutput out;
  out.mols = std::move(mols);
  for (const auto &l: logs)
    out.trajectory_log += l;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<StatsRow> fragmentation_sweep(const std::vector<MolecularGraph> &mols,
                                          const std::vector<FragmentationConfig> &cfgs) {
  std::vector<StatsRow> rows;
  for (const auto &cfg: cfgs) {
    const FragmentationResult r = fragment_dataset(mols, cfg);
    std::ostringstream label;
    label << strategy_name(cfg.strategy);
    if (cfg.strategy == Strategy::kPlanarRings)
      label << " " << cfg.alpha << "%";
    StatsRow row;
    row.frag = fragment_stats(r.molecules, label.str(), r.cutoff);
    const VocabularyBuild b = build_vocabulary(r.molecules);
    row.vocabulary = b.vocab.size();
    row.max_sym = b.stats.max_sym;
    row.all_atom_ratio = b.stats.all_atom_ratio;
    row.heavy_atom_ratio = b.stats.heavy_atom_ratio;
    row.skipped = static_cast<int>(r.skipped.size() + b.skipped.size());
    rows.push_back(row);
  }
  return rows;
}

std::string stats_table(const std::vector<StatsRow> &rows) {
  std::ostringstream o;
  o << "strategy,cutoff,molecules,mean_fragments,median_fragments,max_fragments,"
       "max_motif_size,classes,vocabulary,max_sym,all_atom_ratio,heavy_atom_ratio,skipped\n";
  for (const auto &r: rows)
    o << r.frag.label << "," << r.frag.cutoff << "," << r.frag.molecules << ","
      << fmt(r.frag.mean_fragments) << "," << fmt(r.frag.median_fragments, 1) << ","
      << r.frag.max_fragments << "," << r.frag.max_motif_size << "," << r.frag.classes << ","
      << r.vocabulary << "," << r.max_sym << "," << fmt(r.all_atom_ratio) << ","
      << fmt(r.heavy_atom_ratio) << "," << r.skipped << "\n";
  return o.str();
}

}  // namespace rigidflow
