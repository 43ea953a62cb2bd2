// kotae: question answering over a chunked dependency corpus.
//
//   kotae index --corpus data/corpus.txt --out index.txt
//   kotae ask questions.txt --corpus data/corpus.txt [resources...] [--explain]
//   kotae eval --questions q.txt --gold gold.tsv --corpus data/corpus.txt ...
//   kotae repl --corpus data/corpus.txt ...
//
// The KOTAE_CONFIG environment variable may name a "key = value" file whose
// entries (corpus, index, synonyms, taxonomy, types, interrogatives, units,
// weights, params, alpha, beta, w_interr, w_edge, exact_limit, k, theta,
// format) provide defaults; command-line flags override it.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kotae/corpus.hpp"
#include "kotae/index.hpp"
#include "kotae/matcher.hpp"
#include "kotae/output.hpp"
#include "kotae/qa.hpp"
#include "kotae/similarity.hpp"

namespace {

struct CliConfig {
  std::vector<std::string> corpus_paths;
  std::string index_path;
  std::string synonyms_path;
  std::string taxonomy_path;
  std::string types_path;
  std::string interrogatives_path;
  std::string units_path;
  std::string weights_path;
  std::string params_path;
  kotae::MatchParams params;
  int k = 20;
  double theta = 0.5;
  bool explain = false;
  std::string format = "plain";
};

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

// KOTAE_CONFIG file: same key = value shape as params files, extended with
// path-valued keys.
void load_config_file(CliConfig& cfg, const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (kotae::detail::skippable(line)) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + " line " + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = kotae::detail::trim(line.substr(0, eq));
    std::string value = kotae::detail::trim(line.substr(eq + 1));
    if (key == "corpus")
      cfg.corpus_paths.push_back(value);
    else if (key == "index")
      cfg.index_path = value;
    else if (key == "synonyms")
      cfg.synonyms_path = value;
    else if (key == "taxonomy")
      cfg.taxonomy_path = value;
    else if (key == "types")
      cfg.types_path = value;
    else if (key == "interrogatives")
      cfg.interrogatives_path = value;
    else if (key == "units")
      cfg.units_path = value;
    else if (key == "weights")
      cfg.weights_path = value;
    else if (key == "params")
      cfg.params_path = value;
    else if (key == "k")
      cfg.k = std::stoi(value);
    else if (key == "theta")
      cfg.theta = std::stod(value);
    else if (key == "format")
      cfg.format = value;
    else
      kotae::apply_param(cfg.params, key, value);
  }
}

kotae::Corpus load_corpus(const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::runtime_error("no --corpus given");
  kotae::Corpus corpus;
  for (const auto& path : paths) {
    auto in = open_or_throw(path);
    kotae::Corpus part;
    try {
      part = kotae::parse_corpus(in);
    } catch (const kotae::CorpusError& e) {
      throw std::runtime_error(path + ":" + e.what());
    }
    for (auto& s : part.sentences) {
      if (corpus.find(s.id))
        throw std::runtime_error("duplicate sentence id '" + s.id +
                                 "' across corpus files");
      corpus.sentences.push_back(std::move(s));
    }
    for (const auto& [id, src] : part.docs) corpus.docs.emplace(id, src);
  }
  return corpus;
}

// Everything a query needs, loaded once per invocation.
struct Engine {
  kotae::Corpus corpus;
  kotae::IdfIndex index;
  kotae::SimilarityModel model;
  kotae::TermWeights weights;
  kotae::MatchParams params;
  int k = 20;
  double theta = 0.5;
};

void load_engine(Engine& eng, const CliConfig& cfg) {
  eng.corpus = load_corpus(cfg.corpus_paths);
  if (!cfg.index_path.empty()) {
    auto in = open_or_throw(cfg.index_path);
    eng.index = kotae::load_index(in);
  } else {
    eng.index = kotae::build_index(eng.corpus);
  }
  if (!cfg.synonyms_path.empty()) {
    auto in = open_or_throw(cfg.synonyms_path);
    kotae::load_synonyms(eng.model, in);
  }
  if (!cfg.taxonomy_path.empty()) {
    auto in = open_or_throw(cfg.taxonomy_path);
    kotae::load_taxonomy(eng.model, in);
  }
  if (!cfg.types_path.empty()) {
    auto in = open_or_throw(cfg.types_path);
    kotae::load_type_lexicon(eng.model, in);
  }
  if (!cfg.interrogatives_path.empty()) {
    auto in = open_or_throw(cfg.interrogatives_path);
    kotae::load_interrogatives(eng.model, in);
  }
  if (!cfg.units_path.empty()) {
    auto in = open_or_throw(cfg.units_path);
    kotae::load_unit_rules(eng.model, in);
  }
  if (!cfg.weights_path.empty()) {
    auto in = open_or_throw(cfg.weights_path);
    kotae::load_weights(eng.weights, in);
  }
  eng.weights.index = &eng.index;
  eng.params = cfg.params;
  eng.k = cfg.k;
  eng.theta = cfg.theta;
}

void render(std::ostream& out, const Engine& eng, const CliConfig& cfg,
            const kotae::Sentence& question, const kotae::AnswerResult& result) {
  if (cfg.format == "tsv") {
    kotae::render_tsv(out, question.id, result);
  } else if (cfg.format == "json-lines") {
    out << kotae::result_to_json(question.id, question, eng.corpus, result,
                                 cfg.explain)
               .dump()
        << "\n";
  } else {
    out << "== " << question.id << " ("
        << kotae::to_string(kotae::classify_question(question)) << ")\n";
    kotae::render_plain(out, question, eng.corpus, result, cfg.explain);
  }
}

kotae::AnswerResult run_question(const Engine& eng, const kotae::Sentence& q) {
  return kotae::answer(q, eng.corpus, eng.index, eng.model, eng.weights,
                       eng.params, eng.k, eng.theta);
}

int cmd_index(const CliConfig& cfg, const std::string& out_path) {
  kotae::Corpus corpus = load_corpus(cfg.corpus_paths);
  kotae::IdfIndex index = kotae::build_index(corpus);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  kotae::save_index(index, out);
  std::cout << "sentences=" << index.sentence_count
            << " vocabulary=" << index.vocabulary_size() << "\n";
  return 0;
}

int cmd_ask(const CliConfig& cfg, const std::string& question_path) {
  Engine eng;
  load_engine(eng, cfg);
  auto in = open_or_throw(question_path);
  kotae::Corpus questions = kotae::parse_corpus(in);
  for (const auto& q : questions.sentences)
    render(std::cout, eng, cfg, q, run_question(eng, q));
  return 0;
}

int cmd_eval(const CliConfig& cfg, const std::string& question_path,
             const std::string& gold_path) {
  Engine eng;
  load_engine(eng, cfg);
  auto qin = open_or_throw(question_path);
  kotae::Corpus questions = kotae::parse_corpus(qin);

  auto gin = open_or_throw(gold_path);
  std::vector<std::pair<std::string, std::string>> gold;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(gin, line)) {
    ++lineno;
    if (kotae::detail::skippable(line)) continue;
    auto f = kotae::detail::split_tabs(line);
    if (f.size() != 2)
      throw std::runtime_error(gold_path + " line " + std::to_string(lineno) +
                               ": expected question-id<TAB>answer");
    gold.emplace_back(f[0], f[1]);
  }

  if (gold.empty()) {
    std::cout << "no questions\naccuracy = 0/0\n";
    return 0;
  }
  int correct = 0;
  for (const auto& [qid, expected] : gold) {
    const kotae::Sentence* q = questions.find(qid);
    if (!q)
      throw std::runtime_error("gold file names unknown question id '" + qid + "'");
    kotae::AnswerResult result = run_question(eng, *q);
    std::string got = "-";
    if (result.kind == kotae::QuestionKind::YesNo) {
      if (result.yesno) got = result.yesno->yes ? "YES" : "NO";
    } else if (const kotae::RankedAnswer* top = kotae::top_answer(result)) {
      got = top->answer;
    }
    bool ok = got == expected;
    correct += ok ? 1 : 0;
    std::cout << qid << "\t" << (ok ? "correct" : "incorrect") << "\t" << got
              << "\n";
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f",
                static_cast<double>(correct) / gold.size());
  std::cout << "accuracy = " << correct << "/" << gold.size() << " = " << buf
            << "\n";
  return 0;
}

// Inline question form: chunks separated by "||", tokens "surface/lemma/POS",
// optional "|head" after the last token of a chunk. Without explicit heads
// each chunk depends on the next and the last is the root.
kotae::Sentence parse_inline_question(const std::string& text, int serial) {
  kotae::Sentence s;
  s.id = "repl:" + std::to_string(serial);
  s.doc_id = "repl";
  std::vector<std::string> chunk_specs;
  std::size_t start = 0;
  while (true) {
    auto sep = text.find("||", start);
    chunk_specs.push_back(text.substr(start, sep - start));
    if (sep == std::string::npos) break;
    start = sep + 2;
  }
  int explicit_heads = 0;
  for (std::size_t i = 0; i < chunk_specs.size(); ++i) {
    std::string spec = kotae::detail::trim(chunk_specs[i]);
    int head = kotae::kRoot;
    bool has_head = false;
    auto bar = spec.rfind('|');
    if (bar != std::string::npos &&
        (bar + 1 == spec.size() ||
         spec.find_first_not_of("-0123456789", bar + 1) == std::string::npos)) {
      try {
        head = std::stoi(spec.substr(bar + 1));
        has_head = true;
        spec = kotae::detail::trim(spec.substr(0, bar));
      } catch (const std::exception&) {
        // not a head marker; leave the spec alone
      }
    }
    kotae::Bunsetsu b;
    b.index = static_cast<int>(i);
    std::istringstream ts(spec);
    std::string tok;
    while (ts >> tok) {
      auto first = tok.find('/');
      auto second = first == std::string::npos ? first : tok.find('/', first + 1);
      if (second == std::string::npos)
        throw std::runtime_error("token '" + tok + "' is not surface/lemma/POS");
      std::string surface = tok.substr(0, first);
      std::string lemma = tok.substr(first + 1, second - first - 1);
      auto pos = kotae::pos_from_string(tok.substr(second + 1));
      if (!pos)
        throw std::runtime_error("unknown POS in token '" + tok + "'");
      b.tokens.push_back(kotae::Token{surface, lemma, *pos});
    }
    if (b.tokens.empty()) throw std::runtime_error("empty chunk in question");
    s.bunsetsus.push_back(std::move(b));
    s.head.push_back(has_head ? head : kotae::kRoot);
    explicit_heads += has_head ? 1 : 0;
  }
  if (explicit_heads == 0) {
    // Default chain: each chunk depends on the next.
    for (std::size_t i = 0; i + 1 < s.head.size(); ++i)
      s.head[i] = static_cast<int>(i) + 1;
    if (!s.head.empty()) s.head.back() = kotae::kRoot;
  } else if (explicit_heads != static_cast<int>(s.head.size())) {
    throw std::runtime_error("give |head on every chunk or on none");
  }
  kotae::validate_sentence(s);
  return s;
}

int cmd_repl(CliConfig cfg) {
  Engine eng;
  load_engine(eng, cfg);
  int serial = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    line = kotae::detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line == ":quit") break;
    try {
      if (line.rfind(":set ", 0) == 0) {
        auto eq = line.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error(":set needs key=value");
        std::string key = kotae::detail::trim(line.substr(5, eq - 5));
        std::string value = kotae::detail::trim(line.substr(eq + 1));
        if (key == "k")
          eng.k = std::stoi(value);
        else if (key == "theta")
          eng.theta = std::stod(value);
        else
          kotae::apply_param(eng.params, key, value);
        std::cout << "set " << key << " = " << value << "\n";
        continue;
      }
      kotae::Sentence q = parse_inline_question(line, ++serial);
      render(std::cout, eng, cfg, q, run_question(eng, q));
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return 0;
}

void add_common_options(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--corpus", cfg.corpus_paths, "corpus file (repeatable)");
  cmd->add_option("--index", cfg.index_path, "saved index file");
  cmd->add_option("--synonyms", cfg.synonyms_path, "synonym table");
  cmd->add_option("--taxonomy", cfg.taxonomy_path, "class taxonomy");
  cmd->add_option("--types", cfg.types_path, "semantic type lexicon");
  cmd->add_option("--interrogatives", cfg.interrogatives_path,
                  "interrogative class map");
  cmd->add_option("--units", cfg.units_path, "numeric unit rules");
  cmd->add_option("--weights", cfg.weights_path, "term weight overrides");
  cmd->add_option("--params", cfg.params_path, "matching parameter file");
  cmd->add_option("--alpha", cfg.params.alpha, "weight of the edge term B2")
      ->capture_default_str();
  cmd->add_option("--beta", cfg.params.beta, "weight of the length penalty")
      ->capture_default_str();
  cmd->add_option("--w-interr", cfg.params.w_interr,
                  "interrogative type-match bonus")
      ->capture_default_str();
  cmd->add_option("--w-edge", cfg.params.w_edge, "per-edge factor in B2")
      ->capture_default_str();
  cmd->add_option("--exact-limit", cfg.params.exact_limit,
                  "max |question|*|candidate| for exact search")
      ->capture_default_str();
  cmd->add_option("--k", cfg.k, "candidates retrieved per question")
      ->capture_default_str();
  cmd->add_option("--theta", cfg.theta, "YES/NO threshold")
      ->capture_default_str();
  cmd->add_flag("--explain", cfg.explain, "print the contribution ledger");
  cmd->add_option("--format", cfg.format, "plain, tsv or json-lines")
      ->check(CLI::IsMember({"plain", "tsv", "json-lines"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"question answering over a chunked dependency corpus"};
  app.require_subcommand(1);

  CliConfig cfg;

  auto* index_cmd = app.add_subcommand("index", "build and save the idf index");
  std::string out_path = "index.txt";
  index_cmd->add_option("--corpus", cfg.corpus_paths, "corpus file (repeatable)");
  index_cmd->add_option("--out", out_path, "output index path")
      ->capture_default_str();

  auto* ask_cmd = app.add_subcommand("ask", "answer questions from a file");
  std::string question_path;
  add_common_options(ask_cmd, cfg);
  ask_cmd->add_option("questions", question_path, "question file (#sent blocks)")
      ->required();

  auto* eval_cmd = app.add_subcommand("eval", "score answers against a gold file");
  std::string eval_questions, gold_path;
  add_common_options(eval_cmd, cfg);
  eval_cmd->add_option("--questions", eval_questions, "question file")->required();
  eval_cmd->add_option("--gold", gold_path, "gold answers (id<TAB>answer)")
      ->required();

  auto* repl_cmd = app.add_subcommand("repl", "interactive question loop");
  add_common_options(repl_cmd, cfg);

  CLI11_PARSE(app, argc, argv);

  // True when the flag exists on the active subcommand and was given.
  auto flag_given = [&](const char* flag) {
    const CLI::Option* opt =
        app.get_subcommands().front()->get_option_no_throw(flag);
    return opt != nullptr && opt->count() > 0;
  };

  try {
    // Precedence: explicit flag > --params file > KOTAE_CONFIG > default.
    CliConfig env_cfg;
    if (const char* env = std::getenv("KOTAE_CONFIG"))
      load_config_file(env_cfg, env);
    if (!flag_given("--corpus") && cfg.corpus_paths.empty())
      cfg.corpus_paths = env_cfg.corpus_paths;
    auto env_path = [&](const char* flag, std::string& target,
                        const std::string& env_value) {
      if (!flag_given(flag) && target.empty()) target = env_value;
    };
    env_path("--index", cfg.index_path, env_cfg.index_path);
    env_path("--synonyms", cfg.synonyms_path, env_cfg.synonyms_path);
    env_path("--taxonomy", cfg.taxonomy_path, env_cfg.taxonomy_path);
    env_path("--types", cfg.types_path, env_cfg.types_path);
    env_path("--interrogatives", cfg.interrogatives_path,
             env_cfg.interrogatives_path);
    env_path("--units", cfg.units_path, env_cfg.units_path);
    env_path("--weights", cfg.weights_path, env_cfg.weights_path);
    env_path("--params", cfg.params_path, env_cfg.params_path);
    if (!flag_given("--k")) cfg.k = env_cfg.k;
    if (!flag_given("--theta")) cfg.theta = env_cfg.theta;
    if (!flag_given("--format")) cfg.format = env_cfg.format;

    kotae::MatchParams merged = env_cfg.params;
    if (!cfg.params_path.empty()) {
      auto in = open_or_throw(cfg.params_path);
      kotae::load_params(merged, in);
    }
    if (!flag_given("--alpha")) cfg.params.alpha = merged.alpha;
    if (!flag_given("--beta")) cfg.params.beta = merged.beta;
    if (!flag_given("--w-interr")) cfg.params.w_interr = merged.w_interr;
    if (!flag_given("--w-edge")) cfg.params.w_edge = merged.w_edge;
    if (!flag_given("--exact-limit")) cfg.params.exact_limit = merged.exact_limit;

    if (index_cmd->parsed()) return cmd_index(cfg, out_path);
    if (ask_cmd->parsed()) return cmd_ask(cfg, question_path);
    if (eval_cmd->parsed()) return cmd_eval(cfg, eval_questions, gold_path);
    if (repl_cmd->parsed()) return cmd_repl(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
