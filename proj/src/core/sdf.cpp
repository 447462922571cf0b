//
// Project RigidFlow - Copyright 2026 RigidFlow authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "rigidflow/sdf.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "rigidflow/error.hpp"

namespace rigidflow {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty()
         && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string_view field(std::string_view line, std::size_t pos,
                       std::size_t len) {
  if (pos >= line.size())
    return {};
  return line.substr(pos, len);
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty())
    return std::nullopt;
  if (s.front() == '+')
    s.remove_prefix(1);
  T value {};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    return std::nullopt;
  return value;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t')
      ++j;
    if (j > i)
      out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

int charge_from_code(int code) {
  switch (code) {
  case 1:
    return 3;
  case 2:
    return 2;
  case 3:
    return 1;
  case 5:
    return -1;
  case 6:
    return -2;
  case 7:
    return -3;
  default:
    return 0;
  }
}

class RecordParser {
public:
  RecordParser(const std::vector<std::string_view> &lines, std::size_t &pos,
               const ElementVocabulary &elements)
      : lines_(lines), pos_(pos), elements_(elements) { }

  MolecularGraph parse() {
    MolecularGraph mol;
    const std::size_t header = pos_;
    if (lines_.size() - header < 4)
      throw ParseError(line_no(lines_.size()), "header block is truncated");

    mol.name = std::string(trim(lines_[header]));
    pos_ = header + 3;

    const std::string_view counts = lines_[pos_];
    if (counts.find("V3000") != std::string_view::npos)
      throw ParseError(line_no(pos_), "V3000 records are not supported");
    auto natoms = parse_number<int>(field(counts, 0, 3));
    auto nbonds = parse_number<int>(field(counts, 3, 3));
    if (!natoms || !nbonds) {
      auto tok = tokens(counts);
      if (tok.size() >= 2) {
        natoms = parse_number<int>(tok[0]);
        nbonds = parse_number<int>(tok[1]);
      }
    }
    if (!natoms || !nbonds || *natoms < 0 || *nbonds < 0)
      throw ParseError(line_no(pos_), "malformed counts line");
    ++pos_;

    for (int a = 0; a < *natoms; ++a, ++pos_) {
      if (pos_ >= lines_.size() || is_terminator(lines_[pos_]))
        throw ParseError(line_no(pos_), "atom block is truncated");
      mol.atoms.push_back(parse_atom(lines_[pos_]));
    }

    for (int b = 0; b < *nbonds; ++b, ++pos_) {
      if (pos_ >= lines_.size() || is_terminator(lines_[pos_]))
        throw ParseError(line_no(pos_), "bond block is truncated");
      parse_bond(mol, lines_[pos_]);
    }

    parse_properties(mol);
    parse_data_items(mol);
    return mol;
  }

private:
  int line_no(std::size_t idx) const { return static_cast<int>(idx) + 1; }

  static bool is_terminator(std::string_view line) {
    return trim(line) == "$$$$";
  }

  Atom parse_atom(std::string_view line) {
    Atom atom;
    std::optional<double> x, y, z;
    std::string_view sym;
    std::optional<int> code;

    if (line.size() >= 34) {
      x = parse_number<double>(field(line, 0, 10));
      y = parse_number<double>(field(line, 10, 10));
      z = parse_number<double>(field(line, 20, 10));
      sym = trim(field(line, 31, 3));
      code = parse_number<int>(field(line, 36, 3));
    }
    if (!x || !y || !z || sym.empty()) {
      // Tolerate writers that do not honour the fixed columns.
      auto tok = tokens(line);
      if (tok.size() < 4)
        throw ParseError(line_no(pos_), "atom line is truncated");
      x = parse_number<double>(tok[0]);
      y = parse_number<double>(tok[1]);
      z = parse_number<double>(tok[2]);
      sym = tok[3];
      code = tok.size() > 5 ? parse_number<int>(tok[5]) : std::nullopt;
      if (!x || !y || !z)
        throw ParseError(line_no(pos_), "malformed atom coordinates");
    }

    if (!elements_.contains(sym))
      throw ParseError(line_no(pos_),
                       "unknown element '" + std::string(sym) + "'");
    atom.element = std::string(sym);
    atom.pos = { *x, *y, *z };
    atom.charge = code ? charge_from_code(*code) : 0;
    return atom;
  }

  void parse_bond(MolecularGraph &mol, std::string_view line) {
    auto i = parse_number<int>(field(line, 0, 3));
    auto j = parse_number<int>(field(line, 3, 3));
    auto type = parse_number<int>(field(line, 6, 3));
    if (!i || !j || !type) {
      auto tok = tokens(line);
      if (tok.size() < 3)
        throw ParseError(line_no(pos_), "bond line is truncated");
      i = parse_number<int>(tok[0]);
      j = parse_number<int>(tok[1]);
      type = parse_number<int>(tok[2]);
      if (!i || !j || !type)
        throw ParseError(line_no(pos_), "malformed bond line");
    }
    if (*i < 1 || *j < 1 || *i > mol.num_atoms() || *j > mol.num_atoms())
      throw ParseError(line_no(pos_), "bond atom index out of range");
    if (*i == *j)
      throw ParseError(line_no(pos_), "bond joins an atom to itself");
    if (*type < 1 || *type > 4)
      throw ParseError(line_no(pos_),
                       "unsupported bond type " + std::to_string(*type));
    if (mol.find_bond(*i - 1, *j - 1) >= 0)
      throw ParseError(line_no(pos_), "duplicate bond");
    mol.bonds.push_back({ *i - 1, *j - 1, static_cast<BondOrder>(*type) });
  }

  void parse_properties(MolecularGraph &mol) {
    bool charge_reset = false;
    for (; pos_ < lines_.size(); ++pos_) {
      const std::string_view line = lines_[pos_];
      if (is_terminator(line) || line.substr(0, 1) == ">")
        return;
      if (line.substr(0, 6) == "M  END") {
        ++pos_;
        return;
      }
      if (line.substr(0, 6) == "M  CHG") {
        // Any CHG line supersedes atom-block charges for the whole record.
        if (!charge_reset) {
          for (Atom &a: mol.atoms)
            a.charge = 0;
          charge_reset = true;
        }
        auto tok = tokens(line.substr(6));
        auto n = tok.empty() ? std::nullopt : parse_number<int>(tok[0]);
        if (!n || tok.size() < 1 + 2 * static_cast<std::size_t>(*n))
          throw ParseError(line_no(pos_), "malformed M  CHG line");
        for (int k = 0; k < *n; ++k) {
          auto idx = parse_number<int>(tok[1 + 2 * k]);
          auto chg = parse_number<int>(tok[2 + 2 * k]);
          if (!idx || !chg || *idx < 1 || *idx > mol.num_atoms())
            throw ParseError(line_no(pos_), "malformed M  CHG entry");
          mol.atoms[*idx - 1].charge = *chg;
        }
      }
    }
  }

  void parse_data_items(MolecularGraph &mol) {
    while (pos_ < lines_.size()) {
      const std::string_view line = lines_[pos_];
      if (is_terminator(line)) {
        ++pos_;
        return;
      }
      if (line.substr(0, 1) == ">") {
        std::string key;
        auto lt = line.find('<'), gt = line.rfind('>');
        if (lt != std::string_view::npos && gt != std::string_view::npos
            && gt > lt)
          key = std::string(line.substr(lt + 1, gt - lt - 1));
        std::string value;
        ++pos_;
        for (; pos_ < lines_.size() && !trim(lines_[pos_]).empty()
               && !is_terminator(lines_[pos_]);
             ++pos_) {
          if (!value.empty())
            value += '\n';
          value += lines_[pos_];
        }
        mol.props.emplace_back(std::move(key), std::move(value));
        continue;
      }
      ++pos_;
    }
  }

  const std::vector<std::string_view> &lines_;
  std::size_t &pos_;
  const ElementVocabulary &elements_;
};

}  // namespace

std::vector<MolecularGraph> parse_sdf(std::string_view text,
                                      const ElementVocabulary &elements) {
  const auto lines = split_lines(text);
  std::vector<MolecularGraph> mols;
  std::size_t pos = 0;
  for (;;) {
    std::size_t probe = pos;
    while (probe < lines.size() && trim(lines[probe]).empty())
      ++probe;
    if (probe >= lines.size())
      break;
    RecordParser parser(lines, pos, elements);
    mols.push_back(parser.parse());
  }
  return mols;
}

std::vector<MolecularGraph> read_sdf_file(const std::string &path,
                                          const ElementVocabulary &elements) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_sdf(ss.str(), elements);
  } catch (const ParseError &e) {
    throw ParseError(e.line(), path + ": " + e.reason());
  }
}

std::string write_sdf(const std::vector<MolecularGraph> &mols) {
  std::string out;
  char buf[128];
  for (const MolecularGraph &mol: mols) {
    std::vector<int> remap(mol.atoms.size(), -1);
    int natoms = 0;
    for (int a = 0; a < mol.num_atoms(); ++a)
      if (!mol.atoms[a].is_dummy)
        remap[a] = natoms++;
    std::vector<const Bond *> bonds;
    for (const Bond &b: mol.bonds)
      if (remap[b.i] >= 0 && remap[b.j] >= 0)
        bonds.push_back(&b);

    out += mol.name;
    out += "\n  rigidflow\n\n";
    std::snprintf(buf, sizeof buf,
                  "%3d%3d  0  0  0  0  0  0  0  0999 V2000\n", natoms,
                  static_cast<int>(bonds.size()));
    out += buf;

    std::vector<std::pair<int, int>> charges;
    for (int a = 0; a < mol.num_atoms(); ++a) {
      const Atom &atom = mol.atoms[a];
      if (atom.is_dummy)
        continue;
      std::snprintf(buf, sizeof buf,
                    "%10.4f%10.4f%10.4f %-3s 0  0  0  0  0  0  0  0  0  0  0"
                    "  0\n",
                    atom.pos.x(), atom.pos.y(), atom.pos.z(),
                    atom.element.c_str());
      out += buf;
      if (atom.charge != 0)
        charges.emplace_back(remap[a] + 1, atom.charge);
    }
    for (const Bond *b: bonds) {
      std::snprintf(buf, sizeof buf, "%3d%3d%3d  0\n", remap[b->i] + 1,
                    remap[b->j] + 1, static_cast<int>(b->order));
      out += buf;
    }
    for (std::size_t k = 0; k < charges.size(); k += 8) {
      const std::size_t n = std::min<std::size_t>(8, charges.size() - k);
      std::snprintf(buf, sizeof buf, "M  CHG%3d", static_cast<int>(n));
      out += buf;
      for (std::size_t c = k; c < k + n; ++c) {
        std::snprintf(buf, sizeof buf, " %3d %3d", charges[c].first,
                      charges[c].second);
        out += buf;
      }
      out += '\n';
    }
    out += "M  END\n";
    for (const auto &[key, value]: mol.props) {
      out += ">  <" + key + ">\n" + value + "\n\n";
    }
    out += "$$$$\n";
  }
  return out;
}

void write_sdf_file(const std::string &path,
                    const std::vector<MolecularGraph> &mols) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    fail(ErrorCode::kIoError, "cannot write " + path);
  out << write_sdf(mols);
}

}  // namespace rigidflow
