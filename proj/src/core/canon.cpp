//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/canon.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include "rigidflow/digest.hpp"
#include "rigidflow/error.hpp"

namespace rigidflow {
namespace {

using Colouring = std::vector<int>;

// Re-rank keys densely (0..k-1) in key order.
template <class Key>
Colouring dense_ranks(const std::vector<Key> &keys, int *ncolours = nullptr) {
  std::vector<int> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return keys[a] < keys[b]; });
  Colouring out(keys.size());
  int rank = -1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || keys[order[k - 1]] < keys[order[k]])
      ++rank;
    out[order[k]] = rank;
  }
  if (ncolours)
    *ncolours = rank + 1;
  return out;
}

int count_colours(const Colouring &c) {
  return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1;
}

// Equitable refinement: a vertex's new colour is the rank of (old colour,
// sorted multiset of (edge label, neighbour colour)). Old colour order is
// preserved, so the result depends only on the coloured graph's structure.
Colouring refine(const LabelledGraph &g, Colouring colours) {
  int ncol = count_colours(colours);
  std::vector<std::vector<long long>> sig(g.size());
  for (;;) {
    const long long base = static_cast<long long>(g.size()) + 1;
    for (int v = 0; v < g.size(); ++v) {
      auto &s = sig[v];
      s.clear();
      s.push_back(colours[v]);
      for (auto [u, e]: g.adj[v])
        s.push_back(static_cast<long long>(e) * base + colours[u]);
      std::sort(s.begin() + 1, s.end());
    }
    int next_ncol;
    Colouring next = dense_ranks(sig, &next_ncol);
    if (next_ncol == ncol)
      return next;
    colours = std::move(next);
    ncol = next_ncol;
  }
}

Colouring individualize(const Colouring &colours, int v) {
  std::vector<int> keys(colours.size());
  for (std::size_t u = 0; u < colours.size(); ++u)
    keys[u] = 2 * colours[u] + (static_cast<int>(u) == v ? 0 : 1);
  return dense_ranks(keys);
}

// First (lowest colour) non-singleton cell, or -1 if discrete.
int target_cell(const Colouring &colours) {
  std::vector<int> size(colours.size(), 0);
  for (int c: colours)
    ++size[c];
  for (std::size_t c = 0; c < size.size(); ++c)
    if (size[c] > 1)
      return static_cast<int>(c);
  return -1;
}

Colouring initial_colours(const LabelledGraph &g,
                          const std::vector<std::string> &label_order) {
  std::vector<int> keys(g.size());
  for (int v = 0; v < g.size(); ++v)
    keys[v] = static_cast<int>(
        std::lower_bound(label_order.begin(), label_order.end(),
                         g.labels[v])
        - label_order.begin());
  return dense_ranks(keys);
}

std::vector<std::string> sorted_labels(const LabelledGraph &g) {
  std::vector<std::string> labels = g.labels;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

using Certificate = std::vector<std::tuple<int, int, int>>;

Certificate certificate(const LabelledGraph &g, const Colouring &lab) {
  Certificate cert;
  for (int v = 0; v < g.size(); ++v)
    for (auto [u, e]: g.adj[v])
      if (lab[v] < lab[u])
        cert.emplace_back(lab[v], lab[u], e);
  std::sort(cert.begin(), cert.end());
  return cert;
}

class CanonicalSearch {
public:
  explicit CanonicalSearch(const LabelledGraph &g): g_(g) { }

  CanonicalForm run() {
    const auto labels = sorted_labels(g_);
    std::vector<int> path;
    search(initial_colours(g_, labels), path);

    CanonicalForm form;
    form.labelling = best_lab_;
    form.generators = autos_;

    std::vector<int> inv(g_.size());
    for (int v = 0; v < g_.size(); ++v)
      inv[best_lab_[v]] = v;
    std::string bytes = std::to_string(g_.size()) + "|";
    for (int pos = 0; pos < g_.size(); ++pos) {
      bytes += g_.labels[inv[pos]];
      bytes += ',';
    }
    bytes += '|';
    for (auto [a, b, e]: *best_cert_) {
      bytes += std::to_string(a) + '-' + std::to_string(b) + ':'
               + std::to_string(e) + ',';
    }
    form.key = CanonicalKey(std::move(bytes));
    return form;
  }

private:
  void search(Colouring colours, std::vector<int> &path) {
    colours = refine(g_, std::move(colours));
    const int cell = target_cell(colours);
    if (cell < 0) {
      leaf(colours);
      return;
    }

    std::vector<int> explored;
    for (int v = 0; v < g_.size(); ++v) {
      if (colours[v] != cell)
        continue;
      if (!explored.empty() && in_explored_orbit(v, explored, path))
        continue;
      explored.push_back(v);
      path.push_back(v);
      search(individualize(colours, v), path);
      path.pop_back();
    }
  }

  // Orbit test under the automorphisms found so far that fix `path`.
  bool in_explored_orbit(int v, const std::vector<int> &explored,
                         const std::vector<int> &path) const {
    std::vector<int> parent(g_.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
      return x;
    };
    bool any = false;
    for (const Permutation &p: autos_) {
      if (!std::all_of(path.begin(), path.end(),
                       [&](int x) { return p[x] == x; }))
        continue;
      any = true;
      for (int x = 0; x < g_.size(); ++x) {
        const int a = find(x), b = find(p[x]);
        if (a != b)
          parent[std::max(a, b)] = std::min(a, b);
      }
    }
    if (!any)
      return false;
    const int rv = find(v);
    return std::any_of(explored.begin(), explored.end(),
                       [&](int w) { return find(w) == rv; });
  }

  void leaf(const Colouring &lab) {
    Certificate cert = certificate(g_, lab);
    if (!best_cert_ || cert < *best_cert_) {
      best_cert_ = std::move(cert);
      best_lab_ = lab;
      return;
    }
    if (cert == *best_cert_) {
      // v and the best-leaf vertex at the same position correspond.
      std::vector<int> inv(g_.size());
      for (int v = 0; v < g_.size(); ++v)
        inv[best_lab_[v]] = v;
      Permutation p(g_.size());
      for (int v = 0; v < g_.size(); ++v)
        p[v] = inv[lab[v]];
      if (std::find(autos_.begin(), autos_.end(), p) == autos_.end())
        autos_.push_back(std::move(p));
    }
  }

  const LabelledGraph &g_;
  std::optional<Certificate> best_cert_;
  Colouring best_lab_;
  std::vector<Permutation> autos_;
};

class IsomorphismSearch {
public:
  IsomorphismSearch(const LabelledGraph &a, const LabelledGraph &b,
                    std::size_t limit)
      : a_(a), b_(b), limit_(limit) { }

  std::vector<Permutation> run() {
    if (a_.size() != b_.size())
      return {};
    const auto la = sorted_labels(a_), lb = sorted_labels(b_);
    if (la != lb)
      return {};
    // Labels multiset and edge counts must agree before any search.
    auto ca = a_.labels, cb = b_.labels;
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    if (ca != cb)
      return {};
    search(initial_colours(a_, la), initial_colours(b_, la));
    std::sort(found_.begin(), found_.end());
    return found_;
  }

private:
  void search(Colouring ca, Colouring cb) {
    if (found_.size() >= limit_)
      return;
    ca = refine(a_, std::move(ca));
    cb = refine(b_, std::move(cb));
    {
      auto sa = ca, sb = cb;
      std::sort(sa.begin(), sa.end());
      std::sort(sb.begin(), sb.end());
      if (sa != sb)
        return;
    }

    const int cell = target_cell(ca);
    if (cell < 0) {
      std::vector<int> inv_b(b_.size());
      for (int w = 0; w < b_.size(); ++w)
        inv_b[cb[w]] = w;
      Permutation f(a_.size());
      for (int v = 0; v < a_.size(); ++v)
        f[v] = inv_b[ca[v]];
      if (preserves(f))
        found_.push_back(std::move(f));
      return;
    }

    int v = 0;
    while (ca[v] != cell)
      ++v;
    const Colouring next_a = individualize(ca, v);
    for (int w = 0; w < b_.size(); ++w) {
      if (cb[w] != cell)
        continue;
      search(next_a, individualize(cb, w));
      if (found_.size() >= limit_)
        return;
    }
  }

  bool preserves(const Permutation &f) const {
    for (int v = 0; v < a_.size(); ++v) {
      if (a_.labels[v] != b_.labels[f[v]])
        return false;
      if (a_.adj[v].size() != b_.adj[f[v]].size())
        return false;
      for (auto [u, e]: a_.adj[v]) {
        const auto &nb = b_.adj[f[v]];
        if (std::find(nb.begin(), nb.end(), std::make_pair(f[u], e))
            == nb.end())
          return false;
      }
    }
    return true;
  }

  const LabelledGraph &a_;
  const LabelledGraph &b_;
  std::size_t limit_;
  std::vector<Permutation> found_;
};

}  // namespace

LabelledGraph LabelledGraph::from_molecule(const MolecularGraph &g) {
  LabelledGraph lg;
  lg.labels.reserve(g.atoms.size());
  for (const Atom &a: g.atoms)
    lg.labels.push_back(a.is_dummy ? std::string(kDummyElement) : a.element);
  lg.adj.resize(g.atoms.size());
  for (const Bond &b: g.bonds) {
    const int e = static_cast<int>(b.order);
    lg.adj[b.i].emplace_back(b.j, e);
    lg.adj[b.j].emplace_back(b.i, e);
  }
  return lg;
}

std::string CanonicalKey::digest() const {
  return sha256_hex(bytes_);
}

CanonicalForm canonical_form(const LabelledGraph &g) {
  if (g.size() == 0)
    return { CanonicalKey("0||"), {}, {} };
  return CanonicalSearch(g).run();
}

CanonicalKey canonical_key(const MolecularGraph &g) {
  if (!is_connected(g))
    fail(ErrorCode::kDisconnected, "canonical_key requires a connected graph");
  return canonical_form(LabelledGraph::from_molecule(g)).key;
}

std::vector<Permutation> enumerate_automorphisms(const LabelledGraph &g) {
  auto autos = enumerate_isomorphisms(g, g);
  if (autos.empty()) {
    // The identity always qualifies; an empty result means a search bug.
    fail(ErrorCode::kNotAGroup, "automorphism search lost the identity");
  }
  return autos;
}

std::vector<Permutation> enumerate_isomorphisms(const LabelledGraph &from,
                                                const LabelledGraph &to,
                                                std::size_t limit) {
  return IsomorphismSearch(from, to, limit).run();
}

bool is_automorphism(const LabelledGraph &g, const Permutation &p) {
  if (static_cast<int>(p.size()) != g.size())
    return false;
  std::vector<bool> seen(p.size(), false);
  for (int x: p) {
    if (x < 0 || x >= g.size() || seen[x])
      return false;
    seen[x] = true;
  }
  for (int v = 0; v < g.size(); ++v) {
    if (g.labels[v] != g.labels[p[v]])
      return false;
    for (auto [u, e]: g.adj[v]) {
      const auto &nb = g.adj[p[v]];
      if (std::find(nb.begin(), nb.end(), std::make_pair(p[u], e))
          == nb.end())
        return false;
    }
  }
  return true;
}

}  // namespace rigidflow
