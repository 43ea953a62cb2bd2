// Word and chunk similarity backed by plain-text resource files: a synonym
// table, a class taxonomy with lemma memberships, a semantic type lexicon,
// numeric unit rules, and an interrogative map. Three-tier word similarity:
// exact match, then synonym table, then taxonomy (Wu-Palmer style).

#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kotae/corpus.hpp"

namespace kotae {

using SemanticClass = std::string;
inline const SemanticClass kAnyClass = "ANY";

struct InterrogativeClass {
  std::string trigger;  // "doko" or "nan nen"
  SemanticClass expected;
};

struct TaxonomyNode {
  std::string name;
  int parent = -1;  // -1 for forest roots
  int depth = 1;    // roots sit at depth 1
};

struct UnitRule {
  Pos pos = Pos::Num;
  std::string unit_lemma;
  SemanticClass semantic_class;
};

class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& which, std::size_t line, const std::string& what)
      : std::runtime_error(which + " line " + std::to_string(line) + ": " + what) {}
};

struct SimilarityModel {
  std::map<std::pair<std::string, std::string>, double> synonyms;  // both directions
  std::vector<TaxonomyNode> taxonomy;
  std::map<std::string, std::vector<int>> taxonomy_members;  // lemma -> node ids
  std::map<std::string, std::set<SemanticClass>> type_lexicon;
  std::vector<UnitRule> unit_rules;
  std::map<std::string, SemanticClass> interrogatives;  // "lemma" or "lemma noun"

  void add_synonym(const std::string& a, const std::string& b, double value) {
    synonyms[{a, b}] = value;
    synonyms[{b, a}] = value;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool skippable(const std::string& line) {
  auto t = trim(line);
  return t.empty() || t[0] == '#';
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(trim(field));
  return out;
}

}  // namespace detail

// synonyms: lemma<TAB>lemma<TAB>value, symmetric, value in [0,1]
inline void load_synonyms(SimilarityModel& model, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 3)
      throw ResourceError("synonyms", lineno, "expected lemma<TAB>lemma<TAB>value");
    double v = 0.0;
    try {
      v = std::stod(f[2]);
    } catch (const std::exception&) {
      throw ResourceError("synonyms", lineno, "bad similarity value '" + f[2] + "'");
    }
    if (v < 0.0 || v > 1.0)
      throw ResourceError("synonyms", lineno, "similarity must be in [0,1]");
    model.add_synonym(f[0], f[1], v);
  }
}

// taxonomy: indented class tree; "= lemma" lines attach members to the most
// recently declared class.
//
//   ENTITY
//     PLACE
//       CITY
//         = tokyo
inline void load_taxonomy(SimilarityModel& model, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::size_t, int>> stack;  // (indent, node id)
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    std::size_t indent = line.find_first_not_of(" \t");
    std::string body = detail::trim(line);
    if (body.rfind("= ", 0) == 0) {
      if (stack.empty())
        throw ResourceError("taxonomy", lineno, "membership before any class");
      std::string lemma = detail::trim(body.substr(2));
      if (lemma.empty())
        throw ResourceError("taxonomy", lineno, "empty member lemma");
      model.taxonomy_members[lemma].push_back(stack.back().second);
      continue;
    }
    while (!stack.empty() && stack.back().first >= indent) stack.pop_back();
    TaxonomyNode node;
    node.name = body;
    node.parent = stack.empty() ? -1 : stack.back().second;
    node.depth = stack.empty() ? 1 : model.taxonomy[node.parent].depth + 1;
    model.taxonomy.push_back(node);
    stack.emplace_back(indent, static_cast<int>(model.taxonomy.size()) - 1);
  }
}

// type lexicon: lemma<TAB>CLASS[,CLASS...]
inline void load_type_lexicon(SimilarityModel& model, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 2)
      throw ResourceError("types", lineno, "expected lemma<TAB>CLASS[,CLASS...]");
    std::istringstream cs(f[1]);
    std::string cls;
    while (std::getline(cs, cls, ',')) {
      cls = detail::trim(cls);
      if (cls.empty()) throw ResourceError("types", lineno, "empty class name");
      model.type_lexicon[f[0]].insert(cls);
    }
  }
}

// unit rules: POS<TAB>unit-lemma<TAB>CLASS  (e.g. NUM<TAB>nen<TAB>TIME_YEAR)
inline void load_unit_rules(SimilarityModel& model, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 3)
      throw ResourceError("units", lineno, "expected POS<TAB>unit-lemma<TAB>CLASS");
    auto pos = pos_from_string(f[0]);
    if (!pos) throw ResourceError("units", lineno, "unknown POS tag '" + f[0] + "'");
    model.unit_rules.push_back(UnitRule{*pos, f[1], f[2]});
  }
}

// interrogative map: lemma[ noun]<TAB>CLASS  (e.g. "nan nen<TAB>TIME_YEAR")
inline void load_interrogatives(SimilarityModel& model, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 2)
      throw ResourceError("interrogatives", lineno, "expected trigger<TAB>CLASS");
    model.interrogatives[f[0]] = f[1];
  }
}

namespace detail {

inline int lca_depth(const SimilarityModel& model, int a, int b) {
  // Walk the deeper node up until both are at the same depth, then climb
  // together. Returns 0 when the nodes sit in different trees.
  while (a != b) {
    if (a < 0 || b < 0) return 0;
    int da = model.taxonomy[a].depth;
    int db = model.taxonomy[b].depth;
    if (da >= db)
      a = model.taxonomy[a].parent;
    else
      b = model.taxonomy[b].parent;
  }
  return a < 0 ? 0 : model.taxonomy[a].depth;
}

}  // namespace detail

// 1 for identical lemmas, else the synonym table, else Wu-Palmer over the
// taxonomy (2 * depth(lca) / (depth(a) + depth(b)), where a member lemma sits
// one level below its class so two members of the same class stay below 1),
// else 0.
inline double word_sim(const SimilarityModel& model, const std::string& a,
                       const std::string& b) {
  if (a == b) return 1.0;
  auto syn = model.synonyms.find({a, b});
  if (syn != model.synonyms.end()) return syn->second;
  auto ma = model.taxonomy_members.find(a);
  auto mb = model.taxonomy_members.find(b);
  if (ma == model.taxonomy_members.end() || mb == model.taxonomy_members.end())
    return 0.0;
  double best = 0.0;
  for (int na : ma->second) {
    for (int nb : mb->second) {
      int lca = detail::lca_depth(model, na, nb);
      if (lca == 0) continue;
      double da = model.taxonomy[na].depth + 1;
      double db = model.taxonomy[nb].depth + 1;
      best = std::max(best, 2.0 * lca / (da + db));
    }
  }
  return best;
}

// Semantic classes of a chunk: lexicon classes of its content lemmas plus
// any unit rule that fires (a NUM token next to its unit lemma).
inline std::set<SemanticClass> bunsetsu_types(const SimilarityModel& model,
                                              const Bunsetsu& b) {
  std::set<SemanticClass> out;
  for (const auto& lemma : b.content_lemmas()) {
    auto it = model.type_lexicon.find(lemma);
    if (it != model.type_lexicon.end())
      out.insert(it->second.begin(), it->second.end());
  }
  for (const auto& rule : model.unit_rules) {
    bool has_pos = false, has_unit = false;
    for (const auto& t : b.tokens) {
      if (t.pos == rule.pos) has_pos = true;
      if (t.lemma == rule.unit_lemma) has_unit = true;
    }
    if (has_pos && has_unit) out.insert(rule.semantic_class);
  }
  return out;
}

// Expected answer class of an interrogative chunk. "nan nen" style triggers
// (interrogative plus the noun it governs) take precedence over the bare
// interrogative; an unmapped interrogative falls back to ANY.
inline std::optional<InterrogativeClass> interrogative_class(
    const SimilarityModel& model, const Bunsetsu& b) {
  const Token* interr = b.first_interrogative();
  if (!interr) return std::nullopt;
  bool past = false;
  for (const auto& t : b.tokens) {
    if (&t == interr) {
      past = true;
      continue;
    }
    if (past && t.pos == Pos::Noun) {
      std::string key = interr->lemma + " " + t.lemma;
      auto it = model.interrogatives.find(key);
      if (it != model.interrogatives.end())
        return InterrogativeClass{key, it->second};
      break;
    }
  }
  auto it = model.interrogatives.find(interr->lemma);
  if (it != model.interrogatives.end())
    return InterrogativeClass{interr->lemma, it->second};
  return InterrogativeClass{interr->lemma, kAnyClass};
}

inline int type_match(const SemanticClass& expected,
                      const std::set<SemanticClass>& candidate_types) {
  if (expected == kAnyClass) return 1;
  return candidate_types.count(expected) ? 1 : 0;
}

}  // namespace kotae
