// End-to-end question answering: classify the question, retrieve candidate
// sentences, align each one, then either extract the chunk paired with the
// interrogative (WH and fill-in-the-blank) or compare the best score against
// the question's self-match (YES/NO).

#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "kotae/corpus.hpp"
#include "kotae/index.hpp"
#include "kotae/matcher.hpp"
#include "kotae/similarity.hpp"

namespace kotae {

enum class QuestionKind { Wh, YesNo, FillBlank };

inline std::string to_string(QuestionKind k) {
  switch (k) {
    case QuestionKind::Wh: return "WH";
    case QuestionKind::YesNo: return "YES_NO";
    case QuestionKind::FillBlank: return "FILL_BLANK";
  }
  return "?";
}

inline QuestionKind classify_question(const Sentence& question) {
  bool has_blank = false;
  for (const auto& b : question.bunsetsus) {
    if (b.first_interrogative()) return QuestionKind::Wh;
    if (b.has_blank()) has_blank = true;
  }
  return has_blank ? QuestionKind::FillBlank : QuestionKind::YesNo;
}

// A blank stands for an unknown of class ANY: rewriting "___" into an
// interrogative token lets the whole WH pipeline run unchanged (an unmapped
// interrogative already falls back to ANY).
inline Sentence blank_as_interrogative(const Sentence& question) {
  Sentence out = question;
  for (auto& b : out.bunsetsus)
    for (auto& t : b.tokens)
      if (t.surface == "___") t.pos = Pos::Interr;
  return out;
}

struct RankedAnswer {
  std::string answer;  // empty when answerless
  bool answerless = false;
  std::string sentence_id;
  Alignment alignment;
  ScoreBreakdown score;
  bool exact = true;
};

struct YesNoVerdict {
  bool yes = false;
  double normalized = 0.0;
};

struct AnswerResult {
  QuestionKind kind = QuestionKind::Wh;
  bool no_keywords = false;
  std::vector<RankedAnswer> answers;          // (score desc, sentence id asc)
  std::optional<YesNoVerdict> yesno;          // YES_NO questions only
  std::vector<std::string> matched_keywords;  // from retrieval, for reporting
};

// Index of the chunk holding the interrogative (or rewritten blank), if any.
inline std::optional<int> interrogative_chunk(const Sentence& question) {
  for (const auto& b : question.bunsetsus)
    if (b.first_interrogative()) return b.index;
  return std::nullopt;
}

// Answer text from the candidate chunk aligned with the interrogative chunk:
// trailing function tokens (PART/OTHER) are stripped, and when the question's
// interrogative named a unit ("nan nen") the matching trailing unit lemma is
// dropped too ("1215 nen" -> "1215"). Falls back to the full chunk surface if
// stripping would leave nothing. Returns nullopt when the interrogative chunk
// has no image.
inline std::optional<std::string> extract_answer(const SimilarityModel& model,
                                                 const Sentence& question,
                                                 const Sentence& candidate,
                                                 const Alignment& alignment,
                                                 int interr_index) {
  int c = alignment[interr_index];
  if (c == kUnaligned) return std::nullopt;
  const Bunsetsu& chunk = candidate.bunsetsus[c];
  std::vector<Token> kept = chunk.tokens;
  while (!kept.empty() &&
         (kept.back().pos == Pos::Part || kept.back().pos == Pos::Other))
    kept.pop_back();
  auto interr = interrogative_class(model, question.bunsetsus[interr_index]);
  if (interr) {
    auto space = interr->trigger.find(' ');
    if (space != std::string::npos) {
      std::string unit = interr->trigger.substr(space + 1);
      if (kept.size() > 1 && kept.back().lemma == unit) kept.pop_back();
    }
  }
  if (kept.empty()) return chunk.surface_text();
  std::string out;
  for (const auto& t : kept) {
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

// Normalized YES/NO score: how much of the question's self-match the best
// candidate recovers, with the length penalty excluded from both sides so
// sentence length alone cannot flip the verdict.
inline YesNoVerdict yes_no_decision(const ScoreBreakdown& best,
                                    const ScoreBreakdown& self_score,
                                    double theta) {
  YesNoVerdict v;
  double denom = self_score.b1 + self_score.alpha * self_score.b2;
  if (denom <= 0.0) return v;  // degenerate question: NO at score 0
  double num = best.b1 + best.alpha * best.b2;
  v.normalized = std::clamp(num / denom, 0.0, 1.0);
  v.yes = v.normalized >= theta;
  return v;
}

inline ScoreBreakdown self_match(const SimilarityModel& model,
                                 const TermWeights& weights,
                                 const MatchParams& params,
                                 const Sentence& question) {
  Alignment identity(question.bunsetsus.size());
  for (std::size_t i = 0; i < identity.size(); ++i)
    identity[i] = static_cast<int>(i);
  return score_alignment(model, weights, params, question, question, identity);
}

inline AnswerResult answer(const Sentence& question, const Corpus& corpus,
                           const IdfIndex& index, const SimilarityModel& model,
                           const TermWeights& weights, const MatchParams& params,
                           int k, double theta) {
  if (k < 1) throw std::invalid_argument("answer needs k >= 1");
  AnswerResult result;
  result.kind = classify_question(question);
  Sentence effective = result.kind == QuestionKind::FillBlank
                           ? blank_as_interrogative(question)
                           : question;

  auto retrieval = retrieve(index, extract_keywords(effective),
                            static_cast<std::size_t>(k));
  result.no_keywords = retrieval.no_keywords;
  if (retrieval.no_keywords) return result;
  if (!retrieval.hits.empty())
    result.matched_keywords = retrieval.hits.front().matched_keywords;

  std::optional<int> interr = interrogative_chunk(effective);
  for (const auto& hit : retrieval.hits) {
    const Sentence* candidate = corpus.find(hit.sentence_id);
    if (!candidate) continue;  // stale index entry
    MatchResult match = best_alignment(model, weights, params, effective, *candidate);
    RankedAnswer ranked;
    ranked.sentence_id = hit.sentence_id;
    ranked.alignment = match.alignment;
    ranked.score = match.score;
    ranked.exact = match.exact;
    if (interr) {
      auto text = extract_answer(model, effective, *candidate, match.alignment, *interr);
      if (text)
        ranked.answer = *text;
      else
        ranked.answerless = true;
    }
    result.answers.push_back(std::move(ranked));
  }
  std::stable_sort(result.answers.begin(), result.answers.end(),
                   [](const RankedAnswer& a, const RankedAnswer& b) {
                     if (a.score.total != b.score.total)
                       return a.score.total > b.score.total;
                     return a.sentence_id < b.sentence_id;
                   });

  if (result.kind == QuestionKind::YesNo) {
    if (result.answers.empty()) {
      result.yesno = YesNoVerdict{};
    } else {
      ScoreBreakdown self = self_match(model, weights, params, question);
      result.yesno =
          yes_no_decision(result.answers.front().score, self, theta);
    }
  }
  return result;
}

// First ranked entry that actually carries an answer (WH/FILL_BLANK).
inline const RankedAnswer* top_answer(const AnswerResult& result) {
  for (const auto& a : result.answers)
    if (!a.answerless) return &a;
  return nullptr;
}

}  // namespace kotae
