//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/assemble_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "rigidflow/canon.hpp"
#include "rigidflow/error.hpp"

namespace rigidflow {

using nlohmann::json;

namespace {

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_table(const std::string &text, const char *format) {
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

std::pair<std::string, std::string> pair_key(const std::string &a, const std::string &b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

const char *order_label(BondOrder o) {
  switch (o) {
  case BondOrder::kSingle: return "single";
  case BondOrder::kDouble: return "double";
  case BondOrder::kTriple: return "triple";
  case BondOrder::kAromatic: return "aromatic";
  }
  return "?";
}

}  // namespace

// ---------------------------------------------------------------------------

BondTable BondTable::parse(const std::string &json_text) {
  const json j = parse_table(json_text, "rigidflow-bond-table");
  BondTable t;
  try {
    if (j.value("units", "pm") != "pm")
      fail(ErrorCode::kFormatError, "bond table: lengths must be in pm");
    const auto m = j.at("margins").get<std::vector<double>>();
    if (m.size() != 3)
      fail(ErrorCode::kFormatError, "bond table: three margins expected");
    std::copy(m.begin(), m.end(), t.margins.begin());
    for (const auto &e: j.at("elements"))
      t.add_element(e.get<std::string>());
    static const char *names[3] = { "single", "double", "triple" };
    for (const auto &p: j.at("pairs")) {
      const auto a = p.at("a").get<std::string>(), b = p.at("b").get<std::string>();
      for (int o = 0; o < 3; ++o)
        if (p.contains(names[o]))
          t.set(a, b, o + 1, p.at(names[o]).get<double>());
    }
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string("bond table: ") + e.what());
  }
  return t;
}

BondTable BondTable::load(const std::string &path) { return parse(read_text(path)); }

void BondTable::set(const std::string &a, const std::string &b, int order,
                    double length_pm) {
  if (order < 1 || order > 3 || !(length_pm > 0))
    fail(ErrorCode::kInvalidArgument, "bond table: bad entry for " + a + "-" + b);
  add_element(a);
  add_element(b);
  auto &row = lengths_[pair_key(a, b)];
  row[static_cast<std::size_t>(order - 1)] = length_pm;
  // Higher orders must be shorter.
  for (int o = 1; o < 3; ++o)
    if (row[o] > 0 && row[o - 1] > 0 && !(row[o] < row[o - 1]))
      fail(ErrorCode::kInvalidArgument, "bond table: lengths not ordered for " + a + "-" + b);
}

double BondTable::max_range() const {
  double r = 0;
  for (const auto &[k, row]: lengths_)
    for (int o = 0; o < 3; ++o)
      if (row[o] > 0)
        r = std::max(r, (row[o] + margins[o]) / 100.0);
  return r;
}

int BondTable::order(const std::string &a, const std::string &b, double distance) const {
  if (!covers(a) || !covers(b))
    fail(ErrorCode::kMissingTableEntry,
         "bond table has no entry for element " + (covers(a) ? b : a));
  const auto it = lengths_.find(pair_key(a, b));
  if (it == lengths_.end())
    return 0;
  const double pm = distance * 100.0;
  int best = 0;
  for (int o = 0; o < 3; ++o)
    if (it->second[o] > 0 && pm < it->second[o] + margins[o])
      best = o + 1;
  return best;
}

ValencyTable ValencyTable::parse(const std::string &json_text) {
  const json j = parse_table(json_text, "rigidflow-valency-table");
  ValencyTable t;
  try {
    for (const auto &[el, v]: j.at("valences").items())
      t.set(el, v.get<std::vector<int>>());
  } catch (const json::exception &e) {
    fail(ErrorCode::kFormatError, std::string("valency table: ") + e.what());
  }
  return t;
}

ValencyTable ValencyTable::load(const std::string &path) { return parse(read_text(path)); }

void ValencyTable::set(const std::string &element, std::vector<int> valences) {
  if (valences.empty())
    fail(ErrorCode::kInvalidArgument, "valency table: no valences for " + element);
  allowed_[element] = std::move(valences);
}

const std::vector<int> &ValencyTable::allowed(const std::string &element) const {
  static const std::vector<int> none;
  const auto it = allowed_.find(element);
  return it == allowed_.end() ? none : it->second;
}

// ---------------------------------------------------------------------------

MolecularGraph reconstruct(const Vocabulary &vocab, const Frames &frames,
                           const Tokens &tokens) {
  if (frames.size() != tokens.size())
    fail(ErrorCode::kShapeMismatch, "reconstruct: frames and tokens differ in length");
  MolecularGraph mol;
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k] == kMaskToken)
      fail(ErrorCode::kMaskedToken, "reconstruct: slot " + std::to_string(k) + " is masked");
    const MotifDescriptor &d = vocab.descriptor(tokens[k]);
    const int n = d.num_real_atoms();
    const Points y = frames[k].apply(d.pose.topRows(n));
    const int offset = mol.num_atoms();
    for (int a = 0; a < n; ++a) {
      Atom atom = d.graph.atoms[a];
      atom.pos = y.row(a).transpose();
      mol.add_atom(atom);
    }
    for (const Bond &b: d.graph.bonds)
      if (b.i < n && b.j < n)
        mol.add_bond(offset + b.i, offset + b.j, b.order);
  }
  return mol;
}

std::vector<Bond> infer_bonds(const MolecularGraph &mol, const BondTable &table) {
  std::vector<Bond> out;
  const int n = mol.num_atoms();
  for (const Atom &a: mol.atoms)
    if (!table.covers(a.element))
      fail(ErrorCode::kMissingTableEntry, "bond table has no entry for element " + a.element);
  const double range = table.max_range();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = (mol.atoms[i].pos - mol.atoms[j].pos).norm();
      if (d >= range)
        continue;
      const int o = table.order(mol.atoms[i].element, mol.atoms[j].element, d);
      if (o > 0)
        out.push_back({ i, j, static_cast<BondOrder>(o) });
    }
  return out;
}

MolecularGraph with_inferred_bonds(const MolecularGraph &mol, const BondTable &table) {
  MolecularGraph out = mol;
  out.bonds = infer_bonds(mol, table);
  return out;
}

Stability stability(const MolecularGraph &mol, const ValencyTable &valency) {
  std::vector<double> sum(mol.atoms.size(), 0.0);
  for (const Bond &b: mol.bonds) {
    sum[b.i] += valence_contribution(b.order);
    sum[b.j] += valence_contribution(b.order);
  }
  Stability s;
  s.atoms = mol.num_atoms();
  for (int i = 0; i < s.atoms; ++i) {
    const auto &ok = valency.allowed(mol.atoms[i].element);
    s.stable_atoms += std::any_of(ok.begin(), ok.end(),
                                  [&](int v) { return std::abs(sum[i] - v) < 1e-9; });
  }
  s.molecule = s.stable_atoms == s.atoms;
  return s;
}

Validity connectivity_validity(const MolecularGraph &mol, const ValencyTable &valency) {
  Validity v;
  if (mol.num_atoms() == 0)
    return v;
  v.valid = stability(mol, valency).molecule;
  v.connected = is_connected(mol);
  return v;
}

double tv_distance(const Histogram &p, const Histogram &q) {
  double sp = 0, sq = 0;
  for (const auto &[k, v]: p)
    sp += v;
  for (const auto &[k, v]: q)
    sq += v;
  if (!(sp > 0) || !(sq > 0))
    fail(ErrorCode::kInvalidArgument, "tv_distance: empty histogram");
  double tv = 0;
  for (const auto &[k, v]: p) {
    const auto it = q.find(k);
    tv += std::abs(v / sp - (it == q.end() ? 0.0 : it->second / sq));
  }
  for (const auto &[k, v]: q)
    if (!p.count(k))
      tv += v / sq;
  return 0.5 * tv;
}

Histogram atom_type_histogram(const std::vector<MolecularGraph> &mols) {
  Histogram h;
  for (const auto &m: mols)
    for (const auto &a: m.atoms)
      if (!a.is_dummy)
        h[a.element] += 1;
  return h;
}

Histogram bond_type_histogram(const std::vector<MolecularGraph> &mols) {
  Histogram h;
  for (const auto &m: mols)
    for (const auto &b: m.bonds)
      h[order_label(b.order)] += 1;
  return h;
}

TotalVariation total_variation(const std::vector<MolecularGraph> &sampled,
                               const std::vector<MolecularGraph> &reference) {
  if (sampled.empty() || reference.empty())
    fail(ErrorCode::kInvalidArgument, "total_variation: empty set");
  TotalVariation tv;
  tv.atoms = tv_distance(atom_type_histogram(sampled), atom_type_histogram(reference));
  const Histogram bs = bond_type_histogram(sampled), br = bond_type_histogram(reference);
  // Two bondless sets agree; one bondless set is maximally far.
  if (bs.empty() || br.empty())
    tv.bonds = bs.empty() == br.empty() ? 0.0 : 1.0;
  else
    tv.bonds = tv_distance(bs, br);
  return tv;
}

// ---------------------------------------------------------------------------

std::vector<int> motif_tokens(const MolecularGraph &mol, const Vocabulary &vocab,
                              const FragmentationConfig &cfg) {
  for (const auto &[k, v]: mol.props)
    if (k == kTokensProperty) {
      std::istringstream in(v);
      std::vector<int> out;
      for (int t; in >> t;)
        out.push_back(t >= 1 && t <= vocab.size() ? t : -1);
      return out;
    }
  std::set<CanonicalKey> known;
  for (const auto &d: vocab.entries())
    known.insert(d.base_key);
  std::vector<int> out;
  PlanarityCache cache;
  for (const auto &comp: connected_components(mol)) {
    const MolecularGraph sub = induced_subgraph(mol, comp);
    FragmentedMolecule fm;
    try {
      fm = fragment_with_vocabulary(sub, cfg, known, cache);
    } catch (const Error &) {
      out.push_back(-1);
      continue;
    }
    for (const auto &inst: fm.motifs) {
      int t = vocab.token_of(inst.key);
      if (t < 0)
        t = vocab.token_of_base(inst.base_key);
      out.push_back(t);
    }
  }
  return out;
}

MotifRatios motif_frequency_ratios(const std::vector<std::vector<int>> &sampled,
                                   const std::vector<std::vector<int>> &reference,
                                   const Vocabulary &vocab, long cutoff) {
  auto is_common = [&](int t) { return t >= 1 && vocab.descriptor(t).count >= cutoff; };
  auto rates = [&](const std::vector<std::vector<int>> &set) {
    std::array<double, 2> c { 0, 0 };
    for (const auto &toks: set)
      for (int t: toks)
        c[is_common(t) ? 0 : 1] += 1;
    for (double &x: c)
      x = set.empty() ? 0.0 : x / static_cast<double>(set.size());
    return c;
  };
  const auto s = rates(sampled), r = rates(reference);
  auto ratio = [](double a, double b) {
    if (b == 0)
      return a == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    return a / b;
  };
  return { ratio(s[0], r[0]), ratio(s[1], r[1]) };
}

// ---------------------------------------------------------------------------

std::string MetricsReport::to_csv() const {
  std::ostringstream o;
  o << std::setprecision(10);
  o << "metric,value\n";
  o << "molecules," << molecules << "\n";
  o << "atom_stability_pct," << atom_stability << "\n";
  o << "molecule_stability_pct," << molecule_stability << "\n";
  o << "validity_pct," << validity << "\n";
  o << "connectivity_pct," << connectivity << "\n";
  o << "valid_connected_pct," << valid_connected << "\n";
  o << "uniqueness_pct," << uniqueness << "\n";
  o << "valid_unique_pct," << valid_unique << "\n";
  o << "tv_atoms," << tv.atoms << "\n";
  o << "tv_bonds," << tv.bonds << "\n";
  o << "tv_atoms_x1e2," << tv.atoms * 1e2 << "\n";
  o << "tv_bonds_x1e3," << tv.bonds * 1e3 << "\n";
  o << "mean_atoms," << mean_atoms << "\n";
  if (has_ratios) {
    o << "mean_motifs," << mean_motifs << "\n";
    o << "all_atom_ratio," << all_atom_ratio << "\n";
    o << "common_motif_ratio," << ratios.common << "\n";
    o << "uncommon_motif_ratio," << ratios.uncommon << "\n";
  }
  return o.str();
}

MetricsReport evaluate_metrics(const std::vector<MolecularGraph> &sampled,
                               const std::vector<MolecularGraph> &reference,
                               const EvalInputs &in) {
  if (!in.bonds || !in.valency)
    fail(ErrorCode::kInvalidArgument, "evaluate_metrics: tables missing");
  if (sampled.empty() || reference.empty())
    fail(ErrorCode::kInvalidArgument, "evaluate_metrics: empty set");
  std::vector<MolecularGraph> s, r;
  for (const auto &m: sampled)
    s.push_back(with_inferred_bonds(m, *in.bonds));
  for (const auto &m: reference)
    r.push_back(with_inferred_bonds(m, *in.bonds));

  MetricsReport rep;
  rep.molecules = static_cast<int>(s.size());
  long atoms = 0, stable_atoms = 0;
  int stable = 0, valid = 0, connected = 0, vc = 0;
  std::set<CanonicalKey> seen;
  for (const auto &m: s) {
    const Stability st = stability(m, *in.valency);
    atoms += st.atoms;
    stable_atoms += st.stable_atoms;
    stable += st.molecule;
    const Validity v = connectivity_validity(m, *in.valency);
    valid += v.valid;
    connected += v.connected;
    vc += v.valid && v.connected;
    if (v.valid)
      seen.insert(canonical_key(m));
  }
  const double n = rep.molecules;
  rep.atom_stability = atoms ? 100.0 * stable_atoms / atoms : 0.0;
  rep.molecule_stability = 100.0 * stable / n;
  rep.validity = 100.0 * valid / n;
  rep.connectivity = 100.0 * connected / n;
  rep.valid_connected = 100.0 * vc / n;
  rep.uniqueness = valid ? 100.0 * seen.size() / valid : 0.0;
  rep.valid_unique = 100.0 * seen.size() / n;
  rep.tv = total_variation(s, r);
  rep.mean_atoms = static_cast<double>(atoms) / n;
  if (in.vocab) {
    // Motifs come from the molecules' own bond graphs, not the inferred ones.
    std::vector<std::vector<int>> ts, tr;
    double motifs = 0;
    for (const auto &m: sampled) {
      ts.push_back(motif_tokens(m, *in.vocab, in.frag));
      motifs += static_cast<double>(ts.back().size());
    }
    for (const auto &m: reference)
      tr.push_back(motif_tokens(m, *in.vocab, in.frag));
    rep.mean_motifs = motifs / n;
    rep.all_atom_ratio = motifs > 0 ? rep.mean_atoms / rep.mean_motifs : 0.0;
    rep.ratios = motif_frequency_ratios(ts, tr, *in.vocab, in.cutoff);
    rep.has_ratios = true;
  }
  return rep;
}

}  // namespace rigidflow
