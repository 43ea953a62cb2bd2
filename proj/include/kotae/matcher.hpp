// Chunk-level alignment between a question and a candidate sentence.
//
// An alignment maps each question chunk to a distinct candidate chunk or to
// none (-1). Its score is
//
//   total = B1 + alpha * B2 - beta * DNUM
//
// where B1 sums per-chunk node scores (interrogative chunks earn a type-match
// bonus, ordinary chunks earn term-weighted word similarity), B2 rewards
// aligned dependency edges, and DNUM is the candidate's bunsetsu count, so
// beta trades answer coverage against sentence length. The search is exact
// branch-and-bound up to a size budget and greedy with pairwise-swap
// refinement beyond it; both paths score leaves through one canonical routine
// so their results compare bit-for-bit.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kotae/corpus.hpp"
#include "kotae/index.hpp"
#include "kotae/similarity.hpp"

namespace kotae {

struct MatchParams {
  double alpha = 1.0;     // weight of the dependency term B2
  double beta = 0.1;      // weight of the length penalty DNUM
  double w_interr = 10.0; // bonus for a type-matched interrogative chunk
  double w_edge = 2.0;    // per-edge factor inside B2
  int exact_limit = 64;   // max |q|*|c| for the exact search
};

inline void apply_param(MatchParams& params, const std::string& key,
                        const std::string& value) {
  auto as_double = [&](const std::string& v) {
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw std::invalid_argument("bad numeric value '" + value + "' for " + key);
    }
  };
  if (key == "alpha")
    params.alpha = as_double(value);
  else if (key == "beta")
    params.beta = as_double(value);
  else if (key == "w_interr")
    params.w_interr = as_double(value);
  else if (key == "w_edge")
    params.w_edge = as_double(value);
  else if (key == "exact_limit")
    params.exact_limit = static_cast<int>(as_double(value));
  else
    throw std::invalid_argument("unknown parameter '" + key + "'");
}

// key = value lines; '#' comments and blank lines ignored.
inline void load_params(MatchParams& params, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("params line " + std::to_string(lineno) +
                                  ": expected key = value");
    apply_param(params, detail::trim(line.substr(0, eq)),
                detail::trim(line.substr(eq + 1)));
  }
}

// Per-word weights for the node score. Explicit overrides win, then the
// retrieval index's idf, then 1.0 so the matcher still works stand-alone.
struct TermWeights {
  const IdfIndex* index = nullptr;
  std::map<std::string, double> overrides;

  double weight(const std::string& lemma) const {
    auto it = overrides.find(lemma);
    if (it != overrides.end()) return it->second;
    if (index) return index->idf(lemma);
    return 1.0;
  }
};

// weights file: lemma<TAB>value
inline void load_weights(TermWeights& weights, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::skippable(line)) continue;
    auto f = detail::split_tabs(line);
    if (f.size() != 2)
      throw ResourceError("weights", lineno, "expected lemma<TAB>value");
    try {
      weights.overrides[f[0]] = std::stod(f[1]);
    } catch (const std::exception&) {
      throw ResourceError("weights", lineno, "bad weight '" + f[1] + "'");
    }
  }
}

// question chunk index -> candidate chunk index, or kUnaligned.
using Alignment = std::vector<int>;
inline constexpr int kUnaligned = -1;

enum class ContribKind { Node, Edge, Length };

struct Contribution {
  ContribKind kind = ContribKind::Node;
  int question_chunk = -1;   // dependent chunk for edges
  int candidate_chunk = -1;  // dependent image for edges
  double value = 0.0;
};

struct ScoreBreakdown {
  double b1 = 0.0;
  double b2 = 0.0;
  int dnum = 0;  // candidate bunsetsu count
  double total = 0.0;
  double alpha = 1.0;
  double beta = 0.1;
  std::vector<Contribution> contributions;
};

// Node score of question chunk q against candidate chunk c. An interrogative
// chunk scores w_interr times the answer-type match; any other chunk scores
// the weighted best word similarity, summed over its content words.
inline double bnst1(const SimilarityModel& model, const TermWeights& weights,
                    const MatchParams& params, const Bunsetsu& q,
                    const Bunsetsu& c) {
  auto interr = interrogative_class(model, q);
  if (interr) {
    return params.w_interr * type_match(interr->expected, bunsetsu_types(model, c));
  }
  double sum = 0.0;
  auto c_lemmas = c.content_lemmas();
  for (const auto& ql : q.content_lemmas()) {
    double best = 0.0;
    for (const auto& cl : c_lemmas) best = std::max(best, word_sim(model, ql, cl));
    sum += weights.weight(ql) * best;
  }
  return sum;
}

// Normalised node similarity used by the edge score: 1 for a type-matched
// interrogative pair, otherwise the best word similarity (already in [0,1]).
inline double nsim(const SimilarityModel& model, const Bunsetsu& q,
                   const Bunsetsu& c) {
  auto interr = interrogative_class(model, q);
  if (interr) return type_match(interr->expected, bunsetsu_types(model, c));
  double best = 0.0;
  auto c_lemmas = c.content_lemmas();
  for (const auto& ql : q.content_lemmas())
    for (const auto& cl : c_lemmas) best = std::max(best, word_sim(model, ql, cl));
  return best;
}

// Edge score for the question edge (dep -> head). Non-zero only when both
// endpoints are aligned and their images form a candidate edge in the same
// direction.
inline double bnst2(const SimilarityModel& model, const MatchParams& params,
                    const Sentence& question, const Sentence& candidate,
                    int q_dep, const Alignment& alignment) {
  int q_head = question.head[q_dep];
  if (q_head == kRoot) return 0.0;
  int c_dep = alignment[q_dep];
  int c_head = alignment[q_head];
  if (c_dep == kUnaligned || c_head == kUnaligned) return 0.0;
  if (candidate.head[c_dep] != c_head) return 0.0;
  double dep_sim = nsim(model, question.bunsetsus[q_dep], candidate.bunsetsus[c_dep]);
  double head_sim = nsim(model, question.bunsetsus[q_head], candidate.bunsetsus[c_head]);
  return params.w_edge * dep_sim * head_sim;
}

// Precomputed per-pair scores so the search never re-derives similarities.
struct PairScores {
  std::size_t nq = 0;
  std::size_t nc = 0;
  std::vector<double> node;  // nq * nc, node[q * nc + c] = bnst1(q, c)
  std::vector<double> edge;  // same layout, edge[q * nc + c] = nsim(q, c);
                             // an edge scores w_edge * edge[dep] * edge[head]

  double node_at(int q, int c) const { return node[q * nc + c]; }
  double edge_at(int q, int c) const { return edge[q * nc + c]; }
};

inline PairScores precompute_pair_scores(const SimilarityModel& model,
                                         const TermWeights& weights,
                                         const MatchParams& params,
                                         const Sentence& question,
                                         const Sentence& candidate) {
  PairScores ps;
  ps.nq = question.bunsetsus.size();
  ps.nc = candidate.bunsetsus.size();
  ps.node.resize(ps.nq * ps.nc);
  ps.edge.resize(ps.nq * ps.nc);
  for (std::size_t q = 0; q < ps.nq; ++q) {
    for (std::size_t c = 0; c < ps.nc; ++c) {
      ps.node[q * ps.nc + c] =
          bnst1(model, weights, params, question.bunsetsus[q], candidate.bunsetsus[c]);
      ps.edge[q * ps.nc + c] =
          nsim(model, question.bunsetsus[q], candidate.bunsetsus[c]);
    }
  }
  return ps;
}

// Canonical scorer: every search path funnels its leaves through this so
// alternative strategies agree bit-for-bit. Summation order is fixed: B1 over
// question chunks in ascending order, B2 over dependent chunks in ascending
// order, then total = b1 + alpha * b2 - beta * dnum with dnum = |candidate|.
inline double score_from_matrices(const PairScores& ps, const MatchParams& params,
                                  const Sentence& question,
                                  const Sentence& candidate,
                                  const Alignment& alignment) {
  double b1 = 0.0;
  for (std::size_t q = 0; q < ps.nq; ++q) {
    int c = alignment[q];
    if (c != kUnaligned) b1 += ps.node_at(static_cast<int>(q), c);
  }
  double b2 = 0.0;
  for (std::size_t q = 0; q < ps.nq; ++q) {
    int head = question.head[q];
    if (head == kRoot) continue;
    int c_dep = alignment[q];
    int c_head = alignment[head];
    if (c_dep == kUnaligned || c_head == kUnaligned) continue;
    if (candidate.head[c_dep] != c_head) continue;
    b2 += params.w_edge * ps.edge_at(static_cast<int>(q), c_dep) *
          ps.edge_at(head, c_head);
  }
  return b1 + params.alpha * b2 -
         params.beta * static_cast<double>(candidate.bunsetsus.size());
}

inline void validate_alignment(const Sentence& question, const Sentence& candidate,
                               const Alignment& alignment) {
  if (alignment.size() != question.bunsetsus.size())
    throw std::invalid_argument("alignment length mismatch");
  std::vector<bool> used(candidate.bunsetsus.size(), false);
  for (int c : alignment) {
    if (c == kUnaligned) continue;
    if (c < 0 || c >= static_cast<int>(candidate.bunsetsus.size()))
      throw std::invalid_argument("alignment target out of range");
    if (used[c]) throw std::invalid_argument("alignment reuses a candidate chunk");
    used[c] = true;
  }
}

// Full decomposition of one alignment, with a ledger of per-chunk, per-edge
// and length contributions. total is identical to score_from_matrices.
inline ScoreBreakdown score_alignment(const SimilarityModel& model,
                                      const TermWeights& weights,
                                      const MatchParams& params,
                                      const Sentence& question,
                                      const Sentence& candidate,
                                      const Alignment& alignment) {
  validate_alignment(question, candidate, alignment);
  PairScores ps = precompute_pair_scores(model, weights, params, question, candidate);
  ScoreBreakdown out;
  out.alpha = params.alpha;
  out.beta = params.beta;
  for (std::size_t q = 0; q < ps.nq; ++q) {
    int c = alignment[q];
    if (c == kUnaligned) continue;
    double v = ps.node_at(static_cast<int>(q), c);
    out.b1 += v;
    out.contributions.push_back(
        Contribution{ContribKind::Node, static_cast<int>(q), c, v});
  }
  for (std::size_t q = 0; q < ps.nq; ++q) {
    int head = question.head[q];
    if (head == kRoot) continue;
    int c_dep = alignment[q];
    int c_head = alignment[head];
    if (c_dep == kUnaligned || c_head == kUnaligned) continue;
    if (candidate.head[c_dep] != c_head) continue;
    double v = params.w_edge * ps.edge_at(static_cast<int>(q), c_dep) *
               ps.edge_at(head, c_head);
    out.b2 += v;
    out.contributions.push_back(
        Contribution{ContribKind::Edge, static_cast<int>(q), c_dep, v});
  }
  out.dnum = static_cast<int>(candidate.bunsetsus.size());
  if (params.beta != 0.0)
    out.contributions.push_back(Contribution{
        ContribKind::Length, -1, -1,
        -params.beta * static_cast<double>(out.dnum)});
  out.total = out.b1 + params.alpha * out.b2 -
              params.beta * static_cast<double>(out.dnum);
  return out;
}

struct MatchResult {
  Alignment alignment;
  ScoreBreakdown score;
  bool exact = true;  // false when the greedy fallback produced the alignment
};

namespace detail {

// Upper bound on what the still-unassigned suffix [q, nq) can add: each chunk
// takes its best node score and each question edge with an endpoint in the
// suffix its best dependent/head product.
inline double suffix_bound(const PairScores& ps, const MatchParams& params,
                           const Sentence& question, std::size_t q_from,
                           const std::vector<bool>& used) {
  double bound = 0.0;
  for (std::size_t q = q_from; q < ps.nq; ++q) {
    double best = 0.0;
    for (std::size_t c = 0; c < ps.nc; ++c)
      if (!used[c]) best = std::max(best, ps.node_at(static_cast<int>(q), c));
    bound += best;
  }
  if (params.alpha > 0.0) {
    for (std::size_t q = 0; q < ps.nq; ++q) {
      int head = question.head[q];
      if (head == kRoot) continue;
      if (q < q_from && static_cast<std::size_t>(head) < q_from) continue;
      double best_dep = 0.0, best_head = 0.0;
      for (std::size_t c = 0; c < ps.nc; ++c) {
        best_dep = std::max(best_dep, ps.edge_at(static_cast<int>(q), c));
        best_head = std::max(best_head, ps.edge_at(head, c));
      }
      bound += params.alpha * params.w_edge * best_dep * best_head;
    }
  }
  return bound;
}

struct ExactSearch {
  const PairScores& ps;
  const MatchParams& params;
  const Sentence& question;
  const Sentence& candidate;
  Alignment current;
  std::vector<bool> used;
  Alignment best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  ExactSearch(const PairScores& ps_, const MatchParams& params_,
              const Sentence& question_, const Sentence& candidate_)
      : ps(ps_), params(params_), question(question_), candidate(candidate_),
        current(ps_.nq, kUnaligned), used(ps_.nc, false) {}

  void run() { descend(0); }

  // Depth-first over question chunks; kUnaligned is tried first so ties
  // resolve toward the lexicographically smallest alignment under the order
  // -1 < 0 < 1 < ... Only strictly better leaves replace the incumbent.
  void descend(std::size_t q) {
    if (q == ps.nq) {
      double s = score_from_matrices(ps, params, question, candidate, current);
      if (!have_best || s > best_score) {
        best_score = s;
        best = current;
        have_best = true;
      }
      return;
    }
    if (have_best) {
      // done scores the prefix alone (suffix entries are still kUnaligned; the
      // length penalty is constant, so done already carries it in full). The
      // bound adds the best the suffix could contribute, then is inflated by
      // one part in 1e12 so ulp-level re-association against the canonical
      // leaf scorer can never prune the true optimum.
      double done = score_from_matrices(ps, params, question, candidate, current);
      double bound = done + suffix_bound(ps, params, question, q, used);
      bound += std::abs(bound) * 1e-12 + 1e-12;
      if (bound <= best_score) return;
    }
    current[q] = kUnaligned;
    descend(q + 1);
    for (std::size_t c = 0; c < ps.nc; ++c) {
      if (used[c]) continue;
      current[q] = static_cast<int>(c);
      used[c] = true;
      descend(q + 1);
      used[c] = false;
    }
    current[q] = kUnaligned;
  }
};

}  // namespace detail

// Exhaustive search, deliberately bound-free: the independent oracle for the
// optimised path. Guarded to tiny instances.
inline MatchResult brute_force_alignment(const SimilarityModel& model,
                                         const TermWeights& weights,
                                         const MatchParams& params,
                                         const Sentence& question,
                                         const Sentence& candidate) {
  std::size_t nq = question.bunsetsus.size();
  std::size_t nc = candidate.bunsetsus.size();
  if (nq > 6 || nc > 8)
    throw std::invalid_argument("brute_force_alignment: instance too large");
  PairScores ps = precompute_pair_scores(model, weights, params, question, candidate);
  Alignment current(nq, kUnaligned);
  Alignment best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool have_best = false;
  std::vector<bool> used(nc, false);
  // Same lexicographic enumeration order as the exact search, minus pruning.
  auto enumerate = [&](auto&& self, std::size_t q) -> void {
    if (q == nq) {
      double s = score_from_matrices(ps, params, question, candidate, current);
      if (!have_best || s > best_score) {
        best_score = s;
        best = current;
        have_best = true;
      }
      return;
    }
    current[q] = kUnaligned;
    self(self, q + 1);
    for (std::size_t c = 0; c < nc; ++c) {
      if (used[c]) continue;
      current[q] = static_cast<int>(c);
      used[c] = true;
      self(self, q + 1);
      used[c] = false;
    }
    current[q] = kUnaligned;
  };
  enumerate(enumerate, 0);
  MatchResult out;
  out.alignment = best;
  out.score = score_alignment(model, weights, params, question, candidate, best);
  out.exact = true;
  return out;
}

namespace detail {

// Greedy seed plus pairwise improvement for instances past the exact budget.
// Deterministic: chunks are assigned in ascending order, moves are scanned in
// a fixed order and only strict improvements are taken.
inline Alignment greedy_alignment(const PairScores& ps, const MatchParams& params,
                                  const Sentence& question,
                                  const Sentence& candidate) {
  Alignment a(ps.nq, kUnaligned);
  std::vector<bool> used(ps.nc, false);
  for (std::size_t q = 0; q < ps.nq; ++q) {
    int best_c = kUnaligned;
    double best_v = 0.0;
    for (std::size_t c = 0; c < ps.nc; ++c) {
      if (used[c]) continue;
      double v = ps.node_at(static_cast<int>(q), static_cast<int>(c));
      if (v > best_v) {
        best_v = v;
        best_c = static_cast<int>(c);
      }
    }
    if (best_c != kUnaligned) {
      a[q] = best_c;
      used[best_c] = true;
    }
  }
  double score = score_from_matrices(ps, params, question, candidate, a);
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t q = 0; q < ps.nq; ++q) {
      // Try moving q to every free target (or detaching it)...
      std::vector<bool> taken(ps.nc, false);
      for (int c : a)
        if (c != kUnaligned) taken[c] = true;
      int original = a[q];
      for (int c = kUnaligned; c < static_cast<int>(ps.nc); ++c) {
        if (c == original) continue;
        if (c != kUnaligned && taken[c]) continue;
        a[q] = c;
        double s = score_from_matrices(ps, params, question, candidate, a);
        if (s > score) {
          score = s;
          original = c;
          improved = true;
        } else {
          a[q] = original;
        }
      }
      a[q] = original;
      // ...then swapping q's target with every later chunk's.
      for (std::size_t r = q + 1; r < ps.nq; ++r) {
        std::swap(a[q], a[r]);
        double s = score_from_matrices(ps, params, question, candidate, a);
        if (s > score) {
          score = s;
          improved = true;
        } else {
          std::swap(a[q], a[r]);
        }
      }
    }
  }
  return a;
}

}  // namespace detail

// Best-scoring alignment of the question onto the candidate. Exact while
// |q| * |c| stays within params.exact_limit, deterministic greedy beyond.
inline MatchResult best_alignment(const SimilarityModel& model,
                                  const TermWeights& weights,
                                  const MatchParams& params,
                                  const Sentence& question,
                                  const Sentence& candidate) {
  if (question.bunsetsus.empty())
    throw std::invalid_argument("best_alignment: empty question");
  PairScores ps = precompute_pair_scores(model, weights, params, question, candidate);
  MatchResult out;
  std::size_t size = ps.nq * ps.nc;
  if (size <= static_cast<std::size_t>(std::max(params.exact_limit, 0))) {
    detail::ExactSearch search(ps, params, question, candidate);
    search.run();
    out.alignment = search.best;
    out.exact = true;
  } else {
    out.alignment = detail::greedy_alignment(ps, params, question, candidate);
    out.exact = false;
  }
  out.score =
      score_alignment(model, weights, params, question, candidate, out.alignment);
  return out;
}

}  // namespace kotae
