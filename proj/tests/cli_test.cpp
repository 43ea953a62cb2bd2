#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kotae/output.hpp"
#include "kotae/qa.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path temp_path(const std::string& hint) {
  static int counter = 0;
  return fs::temp_directory_path() /
         ("kotae-test-" + std::to_string(::getpid()) + "-" +
          std::to_string(counter++) + "-" + hint);
}

std::string write_temp(const std::string& hint, const std::string& content) {
  fs::path p = temp_path(hint);
  std::ofstream out(p);
  out << content;
  return p.string();
}

CliResult run_cli(const std::string& args, const std::string& stdin_text = "",
                  const std::string& env_prefix = "") {
  fs::path in = temp_path("stdin"), out = temp_path("stdout"),
           err = temp_path("stderr");
  {
    std::ofstream f(in);
    f << stdin_text;
  }
  std::string cmd = env_prefix + std::string(KOTAE_CLI_PATH) + " " + args +
                    " < " + in.string() + " > " + out.string() + " 2> " +
                    err.string();
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = ts::read_file(out.string());
  r.err = ts::read_file(err.string());
  fs::remove(in);
  fs::remove(out);
  fs::remove(err);
  return r;
}

std::string resources() {
  return " --corpus " + ts::data_path("corpus.txt") + " --synonyms " +
         ts::data_path("synonyms.tsv") + " --taxonomy " +
         ts::data_path("taxonomy.txt") + " --types " +
         ts::data_path("types.tsv") + " --interrogatives " +
         ts::data_path("interrogatives.tsv") + " --units " +
         ts::data_path("units.tsv") + " --weights " +
         ts::data_path("weights.tsv") + " --params " +
         ts::data_path("params.conf");
}

// The same pipeline the binary runs, for byte-for-byte output comparison.
struct Local {
  kotae::Corpus corpus = ts::fixture_corpus();
  kotae::IdfIndex index = kotae::build_index(corpus);
  kotae::SimilarityModel model = ts::fixture_model();
  kotae::TermWeights weights = ts::fixture_weights(&index);
  kotae::MatchParams params = ts::fixture_params();
  kotae::Corpus questions = ts::fixture_questions();

  std::string render_all(const std::string& format, bool explain) {
    std::ostringstream out;
    for (const auto& q : questions.sentences) {
      kotae::AnswerResult r =
          kotae::answer(q, corpus, index, model, weights, params, 20, 0.5);
      if (format == "tsv") {
        kotae::render_tsv(out, q.id, r);
      } else if (format == "json-lines") {
        out << kotae::result_to_json(q.id, q, corpus, r, explain).dump()
            << "\n";
      } else {
        out << "== " << q.id << " ("
            << kotae::to_string(kotae::classify_question(q)) << ")\n";
        kotae::render_plain(out, q, corpus, r, explain);
      }
    }
    return out.str();
  }
};

}  // namespace

TEST_CASE("index subcommand reports and saves the idf index") {
  fs::path out_path = temp_path("index.txt");
  CliResult r = run_cli("index --corpus " + ts::data_path("corpus.txt") +
                        " --out " + out_path.string());
  CHECK(r.exit_code == 0);

  kotae::IdfIndex expected = kotae::build_index(ts::fixture_corpus());
  CHECK(r.out == "sentences=8 vocabulary=" +
                     std::to_string(expected.vocabulary_size()) + "\n");
  std::ostringstream buf;
  kotae::save_index(expected, buf);
  CHECK(ts::read_file(out_path.string()) == buf.str());

  SECTION("rebuilding is byte-identical") {
    fs::path again = temp_path("index-again.txt");
    CliResult r2 = run_cli("index --corpus " + ts::data_path("corpus.txt") +
                           " --out " + again.string());
    CHECK(r2.exit_code == 0);
    CHECK(ts::read_file(again.string()) == ts::read_file(out_path.string()));
    fs::remove(again);
  }
  SECTION("asking through a saved index matches building it fresh") {
    std::string direct =
        run_cli("ask " + ts::data_path("questions.txt") + resources()).out;
    std::string via_index =
        run_cli("ask " + ts::data_path("questions.txt") + resources() +
                " --index " + out_path.string())
            .out;
    CHECK(via_index == direct);
  }
  fs::remove(out_path);
}

TEST_CASE("index subcommand rejects an empty corpus") {
  std::string empty = write_temp("empty-corpus.txt", "# nothing here\n");
  fs::path out_path = temp_path("index.txt");
  CliResult r = run_cli("index --corpus " + empty + " --out " + out_path.string());
  CHECK(r.exit_code != 0);
  CHECK_THAT(r.err, ContainsSubstring("cannot index an empty corpus"));
  fs::remove(empty);
}

TEST_CASE("ask matches the in-process pipeline byte for byte") {
  Local local;
  CliResult r = run_cli("ask " + ts::data_path("questions.txt") + resources());
  CHECK(r.exit_code == 0);
  CHECK(r.err.empty());
  CHECK(r.out == local.render_all("plain", false));

  // spot checks on the exact lines
  CHECK_THAT(r.out, ContainsSubstring(
                        "== q-uganda (WH)\n"
                        "1. kanpara (score 48.9, sent daijirin:uganda)\n"
                        "2. tokyo (score 37.6, sent mainichi:tokyo)\n"));
  CHECK_THAT(r.out,
             ContainsSubstring("1. 1215 (score 45.7, sent daijirin:magna)\n"));
  CHECK_THAT(r.out, ContainsSubstring("== q-lemon-yn (YES_NO)\n"));
  CHECK_THAT(r.out, ContainsSubstring("NO (0.39)\n"));
  CHECK_THAT(r.out, ContainsSubstring("== q-uganda-blank (FILL_BLANK)\n"));

  SECTION("runs are deterministic") {
    CliResult r2 = run_cli("ask " + ts::data_path("questions.txt") + resources());
    CHECK(r2.out == r.out);
  }
}

TEST_CASE("ask reproduces the worked definition-lookup example") {
  CliResult r = run_cli("ask " + ts::data_path("questions.txt") + resources() +
                        " --w-interr 1e-10 --beta 0 --explain");
  CHECK(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring(
                        "1. kanpara (score 17.2, sent daijirin:uganda)\n"));
  // the ledger spells out both node matches and the dependency match
  CHECK_THAT(r.out, ContainsSubstring(
                        "Matching between \"uganda no\" and "
                        "\"uganda kyouwakoku no\": 9.7\n"));
  CHECK_THAT(r.out, ContainsSubstring(
                        "Matching between \"shuto wa\" and \"shuto desu\": 5.9\n"));
  CHECK_THAT(r.out, ContainsSubstring("\"shuto desu\": 1.6\n"));
}

TEST_CASE("ask shows the year question's components without the length term") {
  CliResult r = run_cli("ask " + ts::data_path("questions.txt") + resources() +
                        " --beta 0 --explain");
  CHECK(r.exit_code == 0);
  CHECK_THAT(r.out,
             ContainsSubstring("1. 1215 (score 46.6, sent daijirin:magna)\n"));
  CHECK_THAT(r.out, ContainsSubstring("\"magunakaruta wa\": 14.6\n"));
  CHECK_THAT(r.out, ContainsSubstring("\"1215 nen\": 32.0\n"));
  CHECK_THAT(r.out, ContainsSubstring(
                        "B1 46.6 + alpha 1.0 * B2 0.0 - beta 0.0 * DNUM 9 "
                        "= 46.6\n"));
}

TEST_CASE("ask supports tsv and json-lines formats") {
  Local local;

  SECTION("tsv") {
    CliResult r = run_cli("ask " + ts::data_path("questions.txt") + resources() +
                          " --format tsv");
    CHECK(r.exit_code == 0);
    CHECK(r.out == local.render_all("tsv", false));
    CHECK_THAT(r.out, ContainsSubstring(
                          "q-uganda\tWH\tkanpara\tdaijirin:uganda\t48.9\n"));
  }
  SECTION("json-lines with explain can be re-parsed and recombined") {
    CliResult r = run_cli("ask " + ts::data_path("questions.txt") + resources() +
                          " --format json-lines --explain");
    CHECK(r.exit_code == 0);
    CHECK(r.out == local.render_all("json-lines", true));

    std::istringstream lines(r.out);
    std::string line;
    int parsed = 0;
    while (std::getline(lines, line)) {
      nlohmann::json j = nlohmann::json::parse(line);
      ++parsed;
      for (const auto& a : j["answers"]) {
        double b1 = 0.0, b2 = 0.0;
        for (const auto& row : a["ledger"]) {
          if (row["kind"] == "node") b1 += row["value"].get<double>();
          if (row["kind"] == "edge") b2 += row["value"].get<double>();
        }
        const auto& s = a["score"];
        CHECK(b1 == s["b1"].get<double>());
        CHECK(b2 == s["b2"].get<double>());
        CHECK(s["b1"].get<double>() +
                  s["alpha"].get<double>() * s["b2"].get<double>() -
                  s["beta"].get<double>() * s["dnum"].get<double>() ==
              s["total"].get<double>());
      }
    }
    CHECK(parsed == 5);
  }
  SECTION("unknown formats are rejected at parse time") {
    CliResult r = run_cli("ask " + ts::data_path("questions.txt") + resources() +
                          " --format xml");
    CHECK(r.exit_code != 0);
  }
}

TEST_CASE("ask respects k and the greedy fallback") {
  CliResult r = run_cli("ask " + ts::data_path("questions.txt") + resources() +
                        " --k 1");
  CHECK(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring(
                        "1. kanpara (score 48.9, sent daijirin:uganda)\n"));
  CHECK(r.out.find("2. tokyo") == std::string::npos);

  CliResult bad = run_cli("ask " + ts::data_path("questions.txt") + resources() +
                          " --k 0");
  CHECK(bad.exit_code != 0);
  CHECK_THAT(bad.err, ContainsSubstring("k >= 1"));

  CliResult greedy = run_cli("ask " + ts::data_path("questions.txt") +
                             resources() + " --exact-limit 0");
  CHECK(greedy.exit_code == 0);
  CHECK_THAT(greedy.out, ContainsSubstring(
                             "1. kanpara (score 48.9, sent daijirin:uganda)\n"));
}

TEST_CASE("ask handles questions without keywords") {
  std::string qfile = write_temp("funcs-q.txt",
                                 "#doc t\n#sent t:funcs\n0 -1 wa wa PART\n");
  CliResult r = run_cli("ask " + qfile + resources());
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "== t:funcs (YES_NO)\nno keywords in question; nothing to retrieve\n");
  fs::remove(qfile);
}

TEST_CASE("corpora may span several files") {
  std::string extra = write_temp(
      "extra-corpus.txt", "#doc extra\n#sent extra:banana\n"
                          "0 -1 banana banana NOUN ; desu desu OTHER\n");
  std::string qfile = write_temp(
      "banana-q.txt", "#doc t\n#sent t:q\n0 -1 banana banana NOUN ; ka ka OTHER\n");
  CliResult r = run_cli("ask " + qfile + resources() + " --corpus " + extra);
  CHECK(r.exit_code == 0);
  CHECK_THAT(r.out, ContainsSubstring("match (score"));
  CHECK_THAT(r.out, ContainsSubstring("sent extra:banana"));
  CHECK_THAT(r.out, ContainsSubstring("YES (1.00)\n"));

  SECTION("duplicate sentence ids across files are rejected") {
    CliResult dup = run_cli("ask " + qfile + resources() + " --corpus " +
                            ts::data_path("corpus.txt"));
    CHECK(dup.exit_code != 0);
    CHECK_THAT(dup.err, ContainsSubstring("duplicate sentence id"));
  }
  fs::remove(extra);
  fs::remove(qfile);
}

TEST_CASE("missing files are reported as errors") {
  CliResult r = run_cli("ask " + ts::data_path("questions.txt") +
                        " --corpus /nonexistent/corpus.txt");
  CHECK(r.exit_code != 0);
  CHECK_THAT(r.err, ContainsSubstring("error:"));
  CHECK_THAT(r.err, ContainsSubstring("cannot open"));
}

TEST_CASE("eval scores answers against the gold file") {
  CliResult r = run_cli("eval --questions " + ts::data_path("questions.txt") +
                        " --gold " + ts::data_path("gold.tsv") + resources());
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "q-uganda\tcorrect\tkanpara\n"
        "q-magna\tcorrect\t1215\n"
        "q-parkinson\tcorrect\tkokushitsu\n"
        "accuracy = 3/3 = 1.00\n");

  SECTION("wrong answers lower the accuracy") {
    std::string gold = write_temp("gold-wrong.tsv",
                                  "q-uganda\tkanpara\nq-magna\tnope\n");
    CliResult r2 = run_cli("eval --questions " + ts::data_path("questions.txt") +
                           " --gold " + gold + resources());
    CHECK(r2.exit_code == 0);
    CHECK(r2.out ==
          "q-uganda\tcorrect\tkanpara\n"
          "q-magna\tincorrect\t1215\n"
          "accuracy = 1/2 = 0.50\n");
    fs::remove(gold);
  }
  SECTION("an unknown question id is an error that names the id") {
    std::string gold = write_temp("gold-unknown.tsv", "q-nope\twhatever\n");
    CliResult r2 = run_cli("eval --questions " + ts::data_path("questions.txt") +
                           " --gold " + gold + resources());
    CHECK(r2.exit_code != 0);
    CHECK_THAT(r2.err, ContainsSubstring("q-nope"));
    fs::remove(gold);
  }
  SECTION("an empty gold file reports no questions and exits cleanly") {
    std::string gold = write_temp("gold-empty.tsv", "# no entries\n");
    CliResult r2 = run_cli("eval --questions " + ts::data_path("questions.txt") +
                           " --gold " + gold + resources());
    CHECK(r2.exit_code == 0);
    CHECK(r2.out == "no questions\naccuracy = 0/0\n");
    fs::remove(gold);
  }
}

TEST_CASE("repl answers inline questions and takes :set commands") {
  std::string question =
      "uganda/uganda/NOUN no/no/PART || shuto/shuto/NOUN wa/wa/PART || "
      "doko/doko/INTERR desu/desu/OTHER ka/ka/OTHER\n";
  std::string session = question + ":set alpha=2.0\n" + question +
                        ":set k=1\n" + question + "bogus line\n" +
                        "a/a/NOUN|1 || b/b/NOUN\n" + ":quit\n";
  CliResult r = run_cli("repl" + resources(), session);
  CHECK(r.exit_code == 0);

  auto p1 = r.out.find("1. kanpara (score 48.9, sent daijirin:uganda)");
  auto p2 = r.out.find("set alpha = 2.0");
  auto p3 = r.out.find("1. kanpara (score 50.5, sent daijirin:uganda)");
  auto p4 = r.out.find("set k = 1");
  REQUIRE(p1 != std::string::npos);
  REQUIRE(p2 != std::string::npos);
  REQUIRE(p3 != std::string::npos);
  REQUIRE(p4 != std::string::npos);
  CHECK(p1 < p2);
  CHECK(p2 < p3);
  CHECK(p3 < p4);
  // after k=1 no second-ranked entry appears
  CHECK(r.out.find("2. tokyo", p4) == std::string::npos);
  // malformed lines are reported without ending the session
  CHECK_THAT(r.out, ContainsSubstring(
                        "error: token 'bogus' is not surface/lemma/POS"));
  CHECK_THAT(r.out, ContainsSubstring(
                        "error: give |head on every chunk or on none"));
  CHECK_THAT(r.out, ContainsSubstring("== repl:1 (WH)"));

  SECTION("end of input without :quit also exits cleanly") {
    CliResult r2 = run_cli("repl" + resources(), question);
    CHECK(r2.exit_code == 0);
    CHECK_THAT(r2.out, ContainsSubstring("score 48.9"));
  }
  SECTION("bad :set values are per-line errors") {
    CliResult r2 = run_cli("repl" + resources(), ":set alpha=fast\n:quit\n");
    CHECK(r2.exit_code == 0);
    CHECK_THAT(r2.out, ContainsSubstring("error:"));
  }
}

TEST_CASE("KOTAE_CONFIG provides defaults that flags override") {
  std::string config = write_temp(
      "config.conf", "corpus = " + ts::data_path("corpus.txt") +
                         "\nsynonyms = " + ts::data_path("synonyms.tsv") +
                         "\ntaxonomy = " + ts::data_path("taxonomy.txt") +
                         "\ntypes = " + ts::data_path("types.tsv") +
                         "\ninterrogatives = " +
                         ts::data_path("interrogatives.tsv") + "\nunits = " +
                         ts::data_path("units.tsv") + "\nweights = " +
                         ts::data_path("weights.tsv") + "\nparams = " +
                         ts::data_path("params.conf") + "\nformat = tsv\n");
  std::string prefix = "KOTAE_CONFIG=" + config + " ";

  Local local;
  CliResult r = run_cli("ask " + ts::data_path("questions.txt"), "", prefix);
  CHECK(r.exit_code == 0);
  CHECK(r.out == local.render_all("tsv", false));

  SECTION("a flag beats the config file") {
    CliResult r2 =
        run_cli("ask " + ts::data_path("questions.txt") + " --format plain", "",
                prefix);
    CHECK(r2.exit_code == 0);
    CHECK(r2.out == local.render_all("plain", false));
  }
  fs::remove(config);
}
