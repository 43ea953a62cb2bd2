// Inverted IDF index over corpus content words, keyed by lemma, plus the
// keyword-sum retrieval stage.

#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kotae/corpus.hpp"

namespace kotae {

struct IdfIndex {
  std::size_t sentence_count = 0;                       // N
  std::map<std::string, std::vector<std::string>> postings;  // lemma -> sorted ids

  std::size_t df(const std::string& lemma) const {
    auto it = postings.find(lemma);
    return it == postings.end() ? 0 : it->second.size();
  }

  // ln(N / df), df clamped to at least 1 so unseen lemmas get the maximum
  // weight instead of blowing up.
  double idf(const std::string& lemma) const {
    std::size_t d = df(lemma);
    if (d < 1) d = 1;
    return std::log(static_cast<double>(sentence_count) / static_cast<double>(d));
  }

  std::size_t vocabulary_size() const { return postings.size(); }
};

struct RetrievalHit {
  std::string sentence_id;
  double idf_sum = 0.0;
  std::vector<std::string> matched_keywords;  // ascending lemma order
};

struct RetrievalResult {
  std::vector<RetrievalHit> hits;
  bool no_keywords = false;
};

inline IdfIndex build_index(const Corpus& corpus) {
  if (corpus.sentences.empty())
    throw std::invalid_argument("cannot index an empty corpus");
  IdfIndex index;
  index.sentence_count = corpus.sentences.size();
  for (const auto& s : corpus.sentences) {
    std::set<std::string> seen;
    for (const auto& b : s.bunsetsus)
      for (const auto& lemma : b.content_lemmas()) seen.insert(lemma);
    for (const auto& lemma : seen) index.postings[lemma].push_back(s.id);
  }
  for (auto& [lemma, ids] : index.postings) std::sort(ids.begin(), ids.end());
  return index;
}

// Question keywords: content-word lemmas minus interrogative tokens.
inline std::set<std::string> extract_keywords(const Sentence& question) {
  std::set<std::string> out;
  for (const auto& b : question.bunsetsus)
    for (const auto& t : b.tokens)
      if (is_content(t.pos) && t.pos != Pos::Interr && t.surface != "___")
        out.insert(t.lemma);
  return out;
}

// Top-k sentences by summed keyword IDF, descending; ties resolved by
// ascending sentence id. Sentences matching no keyword never appear.
inline RetrievalResult retrieve(const IdfIndex& index,
                                const std::set<std::string>& keywords,
                                std::size_t k) {
  RetrievalResult result;
  if (k < 1) throw std::invalid_argument("retrieve needs k >= 1");
  if (keywords.empty()) {
    result.no_keywords = true;
    return result;
  }
  std::map<std::string, RetrievalHit> acc;
  for (const auto& kw : keywords) {  // std::set iterates ascending
    auto it = index.postings.find(kw);
    if (it == index.postings.end()) continue;
    const double w = index.idf(kw);
    for (const auto& id : it->second) {
      auto& hit = acc[id];
      hit.sentence_id = id;
      hit.idf_sum += w;
      hit.matched_keywords.push_back(kw);
    }
  }
  for (auto& [id, hit] : acc) result.hits.push_back(std::move(hit));
  std::stable_sort(result.hits.begin(), result.hits.end(),
                   [](const RetrievalHit& a, const RetrievalHit& b) {
                     if (a.idf_sum != b.idf_sum) return a.idf_sum > b.idf_sum;
                     return a.sentence_id < b.sentence_id;
                   });
  if (result.hits.size() > k) result.hits.resize(k);
  return result;
}

// Sidecar persistence: magic line, N, then one "lemma df id,id,..." line per
// lemma in ascending lemma order.
inline void save_index(const IdfIndex& index, std::ostream& out) {
  out << "kotae-idf 1\n";
  out << "N " << index.sentence_count << "\n";
  for (const auto& [lemma, ids] : index.postings) {
    out << lemma << ' ' << ids.size() << ' ';
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i > 0) out << ',';
      out << ids[i];
    }
    out << "\n";
  }
}

inline std::string save_index(const IdfIndex& index) {
  std::ostringstream out;
  save_index(index, out);
  return out.str();
}

inline IdfIndex load_index(std::istream& in) {
  IdfIndex index;
  std::string line;
  if (!std::getline(in, line) || line != "kotae-idf 1")
    throw std::runtime_error("not a kotae index file (bad magic)");
  if (!std::getline(in, line) || line.rfind("N ", 0) != 0)
    throw std::runtime_error("index file missing sentence count");
  index.sentence_count = std::stoull(line.substr(2));
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string lemma, idlist;
    std::size_t df = 0;
    if (!(ls >> lemma >> df >> idlist))
      throw std::runtime_error("index line " + std::to_string(lineno) +
                               ": expected 'lemma df ids'");
    std::vector<std::string> ids;
    std::string id;
    std::istringstream is(idlist);
    while (std::getline(is, id, ',')) ids.push_back(id);
    if (ids.size() != df)
      throw std::runtime_error("index line " + std::to_string(lineno) +
                               ": df does not match id list");
    for (std::size_t i = 1; i < ids.size(); ++i)
      if (!(ids[i - 1] < ids[i]))
        throw std::runtime_error("index line " + std::to_string(lineno) +
                                 ": ids not strictly increasing");
    index.postings[lemma] = std::move(ids);
  }
  return index;
}

inline IdfIndex load_index(const std::string& text) {
  std::istringstream in(text);
  return load_index(in);
}

}  // namespace kotae
