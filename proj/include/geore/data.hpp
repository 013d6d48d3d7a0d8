#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "geore/numerics.hpp"
#include "geore/poincare.hpp"

// Parsers and writers for the five input formats, plus vocabulary building
// and reciprocal/negative augmentation. All files are UTF-8, tab separated,
// with '#'-prefixed comment lines skipped. Line numbers are preserved for
// error reporting.

namespace geore {
namespace data {

class ParseError : public Error {
 public:
  ParseError(const std::string& path, int line, const std::string& reason)
      : Error(path + ":" + std::to_string(line) + ": " + reason), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Triple {
  std::string h, r, t;
  int line = 0;
  bool operator==(const Triple& o) const { return h == o.h && r == o.r && t == o.t; }
};

struct Qualifier {
  std::string k, v;
  bool operator==(const Qualifier& o) const { return k == o.k && v == o.v; }
};

struct HyperFact {
  Triple primal;
  std::vector<Qualifier> qualifiers;
  int line = 0;
};

struct NestedTriple {
  Triple head;
  std::string rel;
  Triple tail;
  int line = 0;
};

enum class ElForm { NF1, NF2, NF3, NF4, NF1Bot, NF2Bot, ConceptAssertion, RoleAssertion };

// Field usage per form:
//   NF1   c <= d            NF1Bot  c <= bottom
//   NF2   c ^ c2 <= d       NF2Bot  c ^ c2 <= bottom
//   NF3   c <= exists r.d   NF4     exists r.c <= d
//   ConceptAssertion  c(a)  RoleAssertion  r(a, b)
struct ElAxiom {
  ElForm form = ElForm::NF1;
  std::string c, c2, r, d, a, b;
  int line = 0;
};

struct HexEdge {
  char kind = 'h';  // 'h' hierarchy (child, parent) or 'e' exclusion
  std::string a, b;
  int line = 0;
};

using FactRecord = std::variant<Triple, HyperFact, NestedTriple, ElAxiom, HexEdge>;

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline bool skippable(const std::string& line) {
  if (line.empty()) return true;
  return line[0] == '#';
}

template <class Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    fn(line, no);
  }
}

}  // namespace detail

inline std::vector<Triple> parse_triples(const std::string& path) {
  std::vector<Triple> out;
  detail::for_each_line(path, [&](const std::string& line, int no) {
    const auto f = detail::split(line, '\t');
    if (f.size() != 3) throw ParseError(path, no, "expected 3 tab-separated fields");
    if (f[0].empty() || f[1].empty() || f[2].empty())
      throw ParseError(path, no, "empty field in triple");
    out.push_back(Triple{f[0], f[1], f[2], no});
  });
  return out;
}

inline std::vector<HyperFact> parse_hyper(const std::string& path) {
  std::vector<HyperFact> out;
  detail::for_each_line(path, [&](const std::string& line, int no) {
    const auto f = detail::split(line, '\t');
    if (f.size() < 3) throw ParseError(path, no, "expected at least 3 fields");
    if ((f.size() - 3) % 2 != 0) throw ParseError(path, no, "odd qualifier token count");
    for (const auto& s : f)
      if (s.empty()) throw ParseError(path, no, "empty field");
    HyperFact h;
    h.primal = Triple{f[0], f[1], f[2], no};
    for (std::size_t i = 3; i + 1 < f.size(); i += 2) h.qualifiers.push_back({f[i], f[i + 1]});
    h.line = no;
    out.push_back(std::move(h));
  });
  return out;
}

namespace detail {
inline Triple parse_inner_triple(const std::string& s, const std::string& path, int no) {
  const auto f = split(s, ',');
  if (f.size() != 3) throw ParseError(path, no, "inner triple must have 3 comma-joined parts");
  for (const auto& p : f)
    if (p.empty()) throw ParseError(path, no, "empty inner triple field");
  return Triple{f[0], f[1], f[2], no};
}
}  // namespace detail

inline std::vector<NestedTriple> parse_nested(const std::string& path) {
  std::vector<NestedTriple> out;
  detail::for_each_line(path, [&](const std::string& line, int no) {
    const auto f = detail::split(line, '\t');
    if (f.size() != 3) throw ParseError(path, no, "expected 3 tab-separated fields");
    if (f[1].empty()) throw ParseError(path, no, "empty nested relation");
    if (f[1].find(',') != std::string::npos)
      throw ParseError(path, no, "comma not allowed in names");
    NestedTriple n;
    n.head = detail::parse_inner_triple(f[0], path, no);
    n.rel = f[1];
    n.tail = detail::parse_inner_triple(f[2], path, no);
    n.line = no;
    out.push_back(std::move(n));
  });
  return out;
}

inline std::vector<ElAxiom> parse_el_jsonl(const std::string& path) {
  std::vector<ElAxiom> out;
  detail::for_each_line(path, [&](const std::string& line, int no) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw ParseError(path, no, std::string("bad json: ") + e.what());
    }
    auto need = [&](const char* key) -> std::string {
      if (!j.contains(key) || !j[key].is_string())
        throw ParseError(path, no, std::string("missing field '") + key + "'");
      return j[key].get<std::string>();
    };
    const std::string form = j.value("form", "");
    ElAxiom ax;
    ax.line = no;
    if (form == "nf1") {
      ax.form = ElForm::NF1;
      ax.c = need("c");
      ax.d = need("d");
    } else if (form == "nf2") {
      ax.form = ElForm::NF2;
      ax.c = need("c");
      ax.c2 = need("c2");
      ax.d = need("d");
    } else if (form == "nf3") {
      ax.form = ElForm::NF3;
      ax.c = need("c");
      ax.r = need("r");
      ax.d = need("d");
    } else if (form == "nf4") {
      ax.form = ElForm::NF4;
      ax.r = need("r");
      ax.c = need("c");
      ax.d = need("d");
    } else if (form == "nf1_bot") {
      ax.form = ElForm::NF1Bot;
      ax.c = need("c");
    } else if (form == "nf2_bot") {
      ax.form = ElForm::NF2Bot;
      ax.c = need("c");
      ax.c2 = need("c2");
    } else if (form == "concept_assertion") {
      ax.form = ElForm::ConceptAssertion;
      ax.c = need("c");
      ax.a = need("a");
    } else if (form == "role_assertion") {
      ax.form = ElForm::RoleAssertion;
      ax.r = need("r");
      ax.a = need("a");
      ax.b = need("b");
    } else {
      throw ParseError(path, no, "unknown EL form tag: '" + form + "'");
    }
    out.push_back(std::move(ax));
  });
  return out;
}

inline poincare::HexGraph parse_hex(const std::string& path) {
  poincare::HexGraph g;
  detail::for_each_line(path, [&](const std::string& line, int no) {
    const auto f = detail::split(line, '\t');
    if (f.size() != 3) throw ParseError(path, no, "expected 'h|e<TAB>a<TAB>b'");
    if (f[0] != "h" && f[0] != "e") throw ParseError(path, no, "edge kind must be 'h' or 'e'");
    if (f[1].empty() || f[2].empty()) throw ParseError(path, no, "empty label name");
    const int a = g.add_label(f[1]);
    const int b = g.add_label(f[2]);
    if (f[0] == "h")
      g.hier.emplace_back(a, b);
    else
      g.excl.emplace_back(a, b);
  });
  g.validate();
  return g;
}

// ----- writers (parse . write . parse must be the identity) -----

inline void write_triples(const std::string& path, const std::vector<Triple>& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  for (const auto& t : v) out << t.h << '\t' << t.r << '\t' << t.t << '\n';
}

inline void write_hyper(const std::string& path, const std::vector<HyperFact>& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  for (const auto& f : v) {
    out << f.primal.h << '\t' << f.primal.r << '\t' << f.primal.t;
    for (const auto& q : f.qualifiers) out << '\t' << q.k << '\t' << q.v;
    out << '\n';
  }
}

inline void write_nested(const std::string& path, const std::vector<NestedTriple>& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  for (const auto& n : v)
    out << n.head.h << ',' << n.head.r << ',' << n.head.t << '\t' << n.rel << '\t' << n.tail.h
        << ',' << n.tail.r << ',' << n.tail.t << '\n';
}

inline void write_el_jsonl(const std::string& path, const std::vector<ElAxiom>& v) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  for (const auto& ax : v) {
    nlohmann::json j;
    switch (ax.form) {
      case ElForm::NF1: j = {{"form", "nf1"}, {"c", ax.c}, {"d", ax.d}}; break;
      case ElForm::NF2: j = {{"form", "nf2"}, {"c", ax.c}, {"c2", ax.c2}, {"d", ax.d}}; break;
      case ElForm::NF3: j = {{"form", "nf3"}, {"c", ax.c}, {"r", ax.r}, {"d", ax.d}}; break;
      case ElForm::NF4: j = {{"form", "nf4"}, {"r", ax.r}, {"c", ax.c}, {"d", ax.d}}; break;
      case ElForm::NF1Bot: j = {{"form", "nf1_bot"}, {"c", ax.c}}; break;
      case ElForm::NF2Bot: j = {{"form", "nf2_bot"}, {"c", ax.c}, {"c2", ax.c2}}; break;
      case ElForm::ConceptAssertion:
        j = {{"form", "concept_assertion"}, {"c", ax.c}, {"a", ax.a}};
        break;
      case ElForm::RoleAssertion:
        j = {{"form", "role_assertion"}, {"r", ax.r}, {"a", ax.a}, {"b", ax.b}};
        break;
    }
    out << j.dump() << '\n';
  }
}

inline void write_hex(const std::string& path, const poincare::HexGraph& g) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  for (const auto& [c, p] : g.hier) out << "h\t" << g.labels[c] << '\t' << g.labels[p] << '\n';
  for (const auto& [a, b] : g.excl) out << "e\t" << g.labels[a] << '\t' << g.labels[b] << '\n';
}

// ----- vocabulary -----

struct Vocab {
  std::map<std::string, int> entity, relation, nested_relation, concepts, role, individual;
  std::vector<std::string> entity_names, relation_names, nested_relation_names, concept_names,
      role_names, individual_names;

  static int intern(std::map<std::string, int>& m, std::vector<std::string>& names,
                    const std::string& s) {
    auto it = m.find(s);
    if (it != m.end()) return it->second;
    const int k = static_cast<int>(names.size());
    names.push_back(s);
    m.emplace(s, k);
    return k;
  }

  int ent(const std::string& s) { return intern(entity, entity_names, s); }
  int rel(const std::string& s) { return intern(relation, relation_names, s); }
  int nrel(const std::string& s) { return intern(nested_relation, nested_relation_names, s); }
  int con(const std::string& s) { return intern(concepts, concept_names, s); }
  int rol(const std::string& s) { return intern(role, role_names, s); }
  int ind(const std::string& s) { return intern(individual, individual_names, s); }

  int lookup(const std::map<std::string, int>& m, const std::string& s, const char* what) const {
    auto it = m.find(s);
    if (it == m.end()) throw Error(std::string("unknown ") + what + ": " + s);
    return it->second;
  }
};

// With sorted=true (the default) ids are stable under input reordering.
inline Vocab build_vocab(const std::vector<Triple>& triples, bool sorted = true) {
  Vocab v;
  if (sorted) {
    std::set<std::string> ents, rels;
    for (const auto& t : triples) {
      ents.insert(t.h);
      ents.insert(t.t);
      rels.insert(t.r);
    }
    for (const auto& e : ents) v.ent(e);
    for (const auto& r : rels) v.rel(r);
  } else {
    for (const auto& t : triples) {
      v.ent(t.h);
      v.rel(t.r);
      v.ent(t.t);
    }
  }
  return v;
}

inline std::vector<Triple> add_reciprocals(const std::vector<Triple>& triples) {
  std::vector<Triple> out = triples;
  out.reserve(triples.size() * 2);
  for (const auto& t : triples) out.push_back(Triple{t.t, t.r + "__inv", t.h, t.line});
  return out;
}

// Reciprocal augmentation for hyper-relational facts: the primal triple is
// reversed under r__inv, qualifiers ride along unchanged.
inline std::vector<HyperFact> add_reciprocals_hyper(const std::vector<HyperFact>& facts) {
  std::vector<HyperFact> out = facts;
  out.reserve(facts.size() * 2);
  for (const auto& f : facts) {
    HyperFact r = f;
    r.primal = Triple{f.primal.t, f.primal.r + "__inv", f.primal.h, f.line};
    out.push_back(std::move(r));
  }
  return out;
}

// n corrupted copies differing from the source in exactly one entity slot;
// deterministic under a fixed rng state.
inline std::vector<Triple> negative_sample(const Triple& fact,
                                           const std::vector<std::string>& entities, int n,
                                           std::mt19937_64& rng) {
  if (n < 0) throw Error("negative_sample: n must be nonnegative");
  if (n == 0) return {};
  if (entities.size() < 2) throw Error("negative_sample: vocabulary too small to corrupt");
  std::uniform_int_distribution<std::size_t> pick(0, entities.size() - 1);
  std::uniform_int_distribution<int> side(0, 1);
  std::vector<Triple> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Triple c = fact;
    const bool corrupt_head = side(rng) == 0;
    const std::string& keep = corrupt_head ? fact.h : fact.t;
    std::string repl = entities[pick(rng)];
    while (repl == keep) repl = entities[pick(rng)];
    (corrupt_head ? c.h : c.t) = repl;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace data
}  // namespace geore
