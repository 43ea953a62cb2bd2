// Renderers for answer results: a human-readable plain format whose explain
// ledger mirrors the "Matching between X and Y: value" breakdown style, a
// one-record-per-question TSV format for batch runs, and a JSON-lines format
// that carries full-precision numbers for machine consumers.

#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "kotae/corpus.hpp"
#include "kotae/matcher.hpp"
#include "kotae/qa.hpp"

namespace kotae {

// Scores are printed with one decimal in plain mode, matching the breakdown
// style the ledger imitates.
inline std::string plain_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

inline std::string normalized_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline void render_ledger(std::ostream& out, const Sentence& question,
                          const Sentence& candidate, const RankedAnswer& entry) {
  for (const auto& c : entry.score.contributions) {
    switch (c.kind) {
      case ContribKind::Node:
        out << "   Matching between \""
            << question.bunsetsus[c.question_chunk].surface_text() << "\" and \""
            << candidate.bunsetsus[c.candidate_chunk].surface_text()
            << "\": " << plain_value(c.value) << "\n";
        break;
      case ContribKind::Edge: {
        int q_head = question.head[c.question_chunk];
        int c_head = entry.alignment[q_head];
        out << "   Matching between dependency \""
            << question.bunsetsus[c.question_chunk].surface_text() << "\" -> \""
            << question.bunsetsus[q_head].surface_text() << "\" and \""
            << candidate.bunsetsus[c.candidate_chunk].surface_text() << "\" -> \""
            << candidate.bunsetsus[c_head].surface_text()
            << "\": " << plain_value(c.value) << "\n";
        break;
      }
      case ContribKind::Length:
        out << "   Length penalty (DNUM " << entry.score.dnum
            << "): " << plain_value(c.value) << "\n";
        break;
    }
  }
  out << "   B1 " << plain_value(entry.score.b1) << " + alpha "
      << plain_value(entry.score.alpha) << " * B2 " << plain_value(entry.score.b2)
      << " - beta " << plain_value(entry.score.beta) << " * DNUM "
      << entry.score.dnum << " = " << plain_value(entry.score.total) << "\n";
}

inline void render_plain(std::ostream& out, const Sentence& question,
                         const Corpus& corpus, const AnswerResult& result,
                         bool explain) {
  if (result.no_keywords) {
    out << "no keywords in question; nothing to retrieve\n";
    return;
  }
  if (result.answers.empty()) {
    out << "no candidate sentences retrieved\n";
    return;
  }
  int rank = 0;
  for (const auto& entry : result.answers) {
    ++rank;
    out << rank << ". ";
    if (result.kind == QuestionKind::YesNo)
      out << "match";
    else if (entry.answerless)
      out << "[no answer]";
    else
      out << entry.answer;
    out << " (score " << plain_value(entry.score.total) << ", sent "
        << entry.sentence_id << ")\n";
    if (explain) {
      const Sentence* candidate = corpus.find(entry.sentence_id);
      if (candidate) render_ledger(out, question, *candidate, entry);
    }
  }
  if (result.yesno) {
    out << (result.yesno->yes ? "YES" : "NO") << " ("
        << normalized_value(result.yesno->normalized) << ")\n";
  }
}

// One tab-separated record: question-id, kind, answer, sentence-id, score.
// WH/FILL_BLANK report the top-ranked entry that carries an answer; YES_NO
// reports the verdict with the normalized score. "-" marks a missing field.
inline void render_tsv(std::ostream& out, const std::string& question_id,
                       const AnswerResult& result) {
  std::string answer = "-";
  std::string sentence = "-";
  double score = 0.0;
  if (result.kind == QuestionKind::YesNo) {
    if (result.yesno) {
      answer = result.yesno->yes ? "YES" : "NO";
      score = result.yesno->normalized;
    }
    if (!result.answers.empty()) sentence = result.answers.front().sentence_id;
  } else if (const RankedAnswer* top = top_answer(result)) {
    answer = top->answer;
    sentence = top->sentence_id;
    score = top->score.total;
  }
  out << question_id << '\t' << to_string(result.kind) << '\t' << answer << '\t'
      << sentence << '\t' << score << "\n";
}

inline nlohmann::json breakdown_to_json(const ScoreBreakdown& score) {
  return nlohmann::json{{"b1", score.b1},     {"b2", score.b2},
                        {"dnum", score.dnum}, {"alpha", score.alpha},
                        {"beta", score.beta}, {"total", score.total}};
}

inline nlohmann::json result_to_json(const std::string& question_id,
                                     const Sentence& question,
                                     const Corpus& corpus,
                                     const AnswerResult& result, bool explain) {
  nlohmann::json j;
  j["question"] = question_id;
  j["kind"] = to_string(result.kind);
  j["no_keywords"] = result.no_keywords;
  j["answers"] = nlohmann::json::array();
  for (const auto& entry : result.answers) {
    nlohmann::json a;
    a["answer"] = entry.answer;
    a["answerless"] = entry.answerless;
    a["sentence"] = entry.sentence_id;
    a["alignment"] = entry.alignment;
    a["exact"] = entry.exact;
    a["score"] = breakdown_to_json(entry.score);
    if (explain) {
      const Sentence* candidate = corpus.find(entry.sentence_id);
      nlohmann::json ledger = nlohmann::json::array();
      for (const auto& c : entry.score.contributions) {
        nlohmann::json row;
        row["value"] = c.value;
        switch (c.kind) {
          case ContribKind::Node:
            row["kind"] = "node";
            row["q"] = c.question_chunk;
            row["c"] = c.candidate_chunk;
            if (candidate) {
              row["q_text"] =
                  question.bunsetsus[c.question_chunk].surface_text();
              row["c_text"] =
                  candidate->bunsetsus[c.candidate_chunk].surface_text();
            }
            break;
          case ContribKind::Edge:
            row["kind"] = "edge";
            row["q"] = c.question_chunk;
            row["c"] = c.candidate_chunk;
            break;
          case ContribKind::Length:
            row["kind"] = "length";
            break;
        }
        ledger.push_back(std::move(row));
      }
      a["ledger"] = std::move(ledger);
    }
    j["answers"].push_back(std::move(a));
  }
  if (result.yesno) {
    j["yesno"] = {{"verdict", result.yesno->yes ? "YES" : "NO"},
                  {"normalized", result.yesno->normalized}};
  }
  return j;
}

}  // namespace kotae
