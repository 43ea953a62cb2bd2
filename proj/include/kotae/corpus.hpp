// Chunked dependency corpus: data model, reader/writer, dictionary-entry
// prefixing.
//
// File format (UTF-8, line oriented):
//
//   #doc <doc-id> [entry-prefix=<word>]
//   #sent <sent-id>
//   <bunsetsu-idx> <head-idx|-1> <surface> <lemma> <POS> [; surface lemma POS ...]
//   ...
//   <blank line terminates the sentence>
//
// head-idx -1 marks the root bunsetsu. Fields are whitespace separated;
// token triples within a line are separated by a standalone ";". Lines
// starting with "# " are comments. A doc declared with entry-prefix=<word>
// gets "<word> wa" prepended to each of its sentences at load time
// (dictionary definitions become statements).

#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kotae {

enum class Pos { Noun, Verb, Adj, Adv, Pron, Interr, Num, Part, Other };

inline const char* to_string(Pos p) {
  switch (p) {
    case Pos::Noun: return "NOUN";
    case Pos::Verb: return "VERB";
    case Pos::Adj: return "ADJ";
    case Pos::Adv: return "ADV";
    case Pos::Pron: return "PRON";
    case Pos::Interr: return "INTERR";
    case Pos::Num: return "NUM";
    case Pos::Part: return "PART";
    case Pos::Other: return "OTHER";
  }
  return "OTHER";
}

inline std::optional<Pos> pos_from_string(const std::string& s) {
  if (s == "NOUN") return Pos::Noun;
  if (s == "VERB") return Pos::Verb;
  if (s == "ADJ") return Pos::Adj;
  if (s == "ADV") return Pos::Adv;
  if (s == "PRON") return Pos::Pron;
  if (s == "INTERR") return Pos::Interr;
  if (s == "NUM") return Pos::Num;
  if (s == "PART") return Pos::Part;
  if (s == "OTHER") return Pos::Other;
  return std::nullopt;
}

// Content words carry retrieval and matching weight; everything else is
// function material.
inline bool is_content(Pos p) {
  return p == Pos::Noun || p == Pos::Verb || p == Pos::Adj || p == Pos::Num;
}

struct Token {
  std::string surface;
  std::string lemma;
  Pos pos = Pos::Other;

  bool operator==(const Token&) const = default;
};

struct Bunsetsu {
  int index = 0;
  std::vector<Token> tokens;

  bool operator==(const Bunsetsu&) const = default;

  std::vector<std::string> content_lemmas() const {
    std::vector<std::string> out;
    for (const auto& t : tokens)
      if (is_content(t.pos)) out.push_back(t.lemma);
    return out;
  }

  const Token* first_interrogative() const {
    for (const auto& t : tokens)
      if (t.pos == Pos::Interr) return &t;
    return nullptr;
  }

  bool has_blank() const {
    return std::any_of(tokens.begin(), tokens.end(),
                       [](const Token& t) { return t.surface == "___"; });
  }

  std::string surface_text() const {
    std::string s;
    for (const auto& t : tokens) {
      if (!s.empty()) s += ' ';
      s += t.surface;
    }
    return s;
  }
};

constexpr int kRoot = -1;

struct Sentence {
  std::string id;
  std::string doc_id;
  std::vector<Bunsetsu> bunsetsus;
  std::vector<int> head;  // head[i] = index of the governor, kRoot for the root

  bool operator==(const Sentence&) const = default;

  std::size_t size() const { return bunsetsus.size(); }
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::map<std::string, std::string> docs;  // doc id -> source name

  bool operator==(const Corpus&) const = default;

  const Sentence* find(const std::string& sentence_id) const {
    for (const auto& s : sentences)
      if (s.id == sentence_id) return &s;
    return nullptr;
  }
};

enum class CorpusErrorKind {
  MalformedLine,
  DuplicateSentenceId,
  CyclicHead,
  MultipleRoots,
};

class CorpusError : public std::runtime_error {
 public:
  CorpusError(CorpusErrorKind kind, std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        kind_(kind),
        line_(line) {}

  CorpusErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  CorpusErrorKind kind_;
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string f;
  while (in >> f) out.push_back(f);
  return out;
}

inline bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace detail

// Structural checks shared by the reader and by transforms. `line` is only
// used for error reporting.
inline void validate_sentence(const Sentence& s, std::size_t line = 0) {
  const std::size_t n = s.bunsetsus.size();
  if (n == 0)
    throw CorpusError(CorpusErrorKind::MalformedLine, line,
                      "sentence '" + s.id + "' has no bunsetsus");
  if (s.head.size() != n)
    throw CorpusError(CorpusErrorKind::MalformedLine, line,
                      "sentence '" + s.id + "' head table size mismatch");
  int roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.bunsetsus[i].index != static_cast<int>(i))
      throw CorpusError(CorpusErrorKind::MalformedLine, line,
                        "sentence '" + s.id + "' bunsetsu indices not contiguous");
    if (s.bunsetsus[i].tokens.empty())
      throw CorpusError(CorpusErrorKind::MalformedLine, line,
                        "sentence '" + s.id + "' has an empty bunsetsu");
    const int h = s.head[i];
    if (h == kRoot) {
      ++roots;
      continue;
    }
    if (h < 0 || h >= static_cast<int>(n))
      throw CorpusError(CorpusErrorKind::MalformedLine, line,
                        "sentence '" + s.id + "' head index out of range");
    if (h == static_cast<int>(i))
      throw CorpusError(CorpusErrorKind::CyclicHead, line,
                        "cyclic head relation in sentence '" + s.id + "'");
  }
  if (roots > 1)
    throw CorpusError(CorpusErrorKind::MultipleRoots, line,
                      "sentence '" + s.id + "' has multiple roots");
  // Every bunsetsu must reach the root by following heads.
  for (std::size_t i = 0; i < n; ++i) {
    int cur = static_cast<int>(i);
    std::size_t steps = 0;
    while (cur != kRoot) {
      cur = s.head[cur];
      if (++steps > n)
        throw CorpusError(CorpusErrorKind::CyclicHead, line,
                          "cyclic head relation in sentence '" + s.id + "'");
    }
  }
  if (roots == 0)
    throw CorpusError(CorpusErrorKind::CyclicHead, line,
                      "cyclic head relation in sentence '" + s.id + "'");
}

// Prepends an entry bunsetsu (entry word plus topic marker) to a sentence,
// shifting all indices and head links by one. The new chunk depends on the
// original root.
inline Sentence apply_entry_prefix(const Sentence& s, const Bunsetsu& entry,
                                   const std::string& topic_marker) {
  Sentence out;
  out.id = s.id;
  out.doc_id = s.doc_id;

  Bunsetsu prefix = entry;
  prefix.index = 0;
  prefix.tokens.push_back(Token{topic_marker, topic_marker, Pos::Part});

  int old_root = kRoot;
  for (std::size_t i = 0; i < s.head.size(); ++i)
    if (s.head[i] == kRoot) old_root = static_cast<int>(i);

  out.bunsetsus.push_back(prefix);
  out.head.push_back(old_root + 1);
  for (std::size_t i = 0; i < s.bunsetsus.size(); ++i) {
    Bunsetsu b = s.bunsetsus[i];
    b.index = static_cast<int>(i) + 1;
    out.bunsetsus.push_back(std::move(b));
    out.head.push_back(s.head[i] == kRoot ? kRoot : s.head[i] + 1);
  }
  validate_sentence(out);
  return out;
}

inline Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string cur_doc;
  std::string cur_prefix;  // empty = no entry prefixing for this doc

  std::string line;
  std::size_t lineno = 0;

  Sentence sent;
  std::size_t sent_line = 0;
  bool in_sentence = false;

  auto finish_sentence = [&]() {
    if (!in_sentence) return;
    validate_sentence(sent, sent_line);
    if (corpus.find(sent.id) != nullptr)
      throw CorpusError(CorpusErrorKind::DuplicateSentenceId, sent_line,
                        "duplicate sentence id '" + sent.id + "'");
    if (!cur_prefix.empty()) {
      Bunsetsu entry;
      entry.tokens.push_back(Token{cur_prefix, cur_prefix, Pos::Noun});
      sent = apply_entry_prefix(sent, entry, "wa");
    }
    corpus.sentences.push_back(std::move(sent));
    sent = Sentence{};
    in_sentence = false;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_blank(line)) {
      finish_sentence();
      continue;
    }
    auto fields = detail::split_fields(line);
    if (fields[0] == "#doc") {
      finish_sentence();
      if (fields.size() < 2)
        throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                          "#doc requires a doc id");
      cur_doc = fields[1];
      cur_prefix.clear();
      for (std::size_t i = 2; i < fields.size(); ++i) {
        const std::string& opt = fields[i];
        if (opt.rfind("entry-prefix=", 0) == 0) {
          cur_prefix = opt.substr(13);
          if (cur_prefix.empty())
            throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                              "entry-prefix needs a word");
        } else {
          throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                            "unknown #doc option '" + opt + "'");
        }
      }
      corpus.docs.emplace(cur_doc, cur_doc);
      continue;
    }
    if (fields[0] == "#sent") {
      finish_sentence();
      if (fields.size() != 2)
        throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                          "#sent requires exactly one id");
      if (cur_doc.empty())
        throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                          "#sent before any #doc");
      if (fields[1].find(',') != std::string::npos)
        throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                          "sentence id must not contain ','");
      sent.id = fields[1];
      sent.doc_id = cur_doc;
      sent_line = lineno;
      in_sentence = true;
      continue;
    }
    if (fields[0] == "#") continue;  // "# ..." comment line
    if (fields[0][0] == '#')
      throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                        "unknown directive '" + fields[0] + "'");
    if (!in_sentence)
      throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                        "bunsetsu line outside a #sent block");

    // <idx> <head> <surface> <lemma> <POS> [; surface lemma POS]...
    if (fields.size() < 5)
      throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                        "bunsetsu line needs index, head and one token");
    Bunsetsu b;
    int head = 0;
    try {
      b.index = std::stoi(fields[0]);
      head = std::stoi(fields[1]);
    } catch (const std::exception&) {
      throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                        "bunsetsu index and head must be integers");
    }
    if (b.index != static_cast<int>(sent.bunsetsus.size()))
      throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                        "bunsetsu index " + fields[0] + " out of order");
    std::size_t i = 2;
    while (i < fields.size()) {
      if (fields[i] == ";") {
        ++i;
        continue;
      }
      if (i + 2 >= fields.size())
        throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                          "incomplete token triple");
      auto pos = pos_from_string(fields[i + 2]);
      if (!pos)
        throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                          "unknown POS tag '" + fields[i + 2] + "'");
      if (fields[i + 1] == ";")
        throw CorpusError(CorpusErrorKind::MalformedLine, lineno,
                          "';' is reserved as a token separator");
      b.tokens.push_back(Token{fields[i], fields[i + 1], *pos});
      i += 3;
    }
    sent.bunsetsus.push_back(std::move(b));
    sent.head.push_back(head);
  }
  finish_sentence();
  return corpus;
}

inline Corpus parse_corpus(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

inline void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  std::string cur_doc;
  std::map<std::string, bool> emitted;
  for (const auto& s : corpus.sentences) {
    if (s.doc_id != cur_doc) {
      out << "#doc " << s.doc_id << "\n";
      cur_doc = s.doc_id;
      emitted[s.doc_id] = true;
    }
    out << "#sent " << s.id << "\n";
    for (std::size_t i = 0; i < s.bunsetsus.size(); ++i) {
      const auto& b = s.bunsetsus[i];
      out << b.index << ' ' << s.head[i];
      for (std::size_t t = 0; t < b.tokens.size(); ++t) {
        if (t > 0) out << " ;";
        out << ' ' << b.tokens[t].surface << ' ' << b.tokens[t].lemma << ' '
            << to_string(b.tokens[t].pos);
      }
      out << "\n";
    }
    out << "\n";
  }
  // Docs that carry no sentences still round-trip.
  for (const auto& [id, _] : corpus.docs)
    if (!emitted.count(id)) out << "#doc " << id << "\n";
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  serialize_corpus(corpus, out);
  return out.str();
}

}  // namespace kotae
