#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include "dmon/corpus.hpp"
#include "dmon/types.hpp"

using namespace dmon;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("dmon_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::set<Relation> relation_set(const Document& doc) {
  return {doc.relations.begin(), doc.relations.end()};
}

}  // namespace

TEST_CASE("document json round trip") {
  Document doc;
  doc.doc_id = "d1";
  doc.sentences = {"first claim", "second claim", "third claim"};
  doc.relations = {{0, 1, "support"}, {2, 0, "attack"}};

  const std::string line = document_to_jsonl_line(doc);
  const Document back = document_from_json(nlohmann::json::parse(line), "test");
  CHECK(back == doc);
}

TEST_CASE("document_from_json rejects malformed records") {
  auto parse = [](const char* text) {
    return document_from_json(nlohmann::json::parse(text), "test");
  };
  // Well-formed baseline.
  CHECK_NOTHROW(parse(R"({"doc_id":"d","sentences":["a","b"],"relations":[[0,1,"s"]]})"));

  CHECK_THROWS_AS(parse(R"({"sentences":["a"],"relations":[]})"), ParseError);
  CHECK_THROWS_AS(parse(R"({"doc_id":"d","relations":[]})"), ParseError);
  CHECK_THROWS_AS(parse(R"({"doc_id":"d","sentences":["a","b"]})"), ParseError);
  // Relation triples must be [int, int, str].
  CHECK_THROWS_AS(parse(R"({"doc_id":"d","sentences":["a","b"],"relations":[[0,1]]})"),
                  ParseError);
  CHECK_THROWS_AS(parse(R"({"doc_id":"d","sentences":["a","b"],"relations":[["0",1,"s"]]})"),
                  ParseError);
  // Structurally valid JSON violating document invariants.
  CHECK_THROWS_AS(parse(R"({"doc_id":"d","sentences":["a","b"],"relations":[[0,5,"s"]]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse(R"({"doc_id":"d","sentences":["a","b"],"relations":[[1,1,"s"]]})"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse(R"({"doc_id":"d","sentences":["a","b"],"relations":[[0,1,"s"],[0,1,"t"]]})"),
      ValidationError);
}

TEST_CASE("jsonl corpus preserves order and skips blank lines") {
  TempDir tmp("jsonl");
  const fs::path p = tmp.path / "corpus.jsonl";
  write_file(p,
             R"({"doc_id":"a","sentences":["s1","s2"],"relations":[[0,1,"support"]]})"
             "\n\n"
             R"({"doc_id":"b","sentences":["s1"],"relations":[]})"
             "\n   \n"
             R"({"doc_id":"c","sentences":["s1","s2","s3"],"relations":[[2,0,"attack"]]})"
             "\n");

  const auto docs = parse_corpus(p, CorpusFormat::jsonl);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].doc_id == "a");
  CHECK(docs[1].doc_id == "b");
  CHECK(docs[2].doc_id == "c");
  CHECK(docs[2].relations[0] == Relation{2, 0, "attack"});
}

TEST_CASE("jsonl parse errors carry file and line") {
  TempDir tmp("jsonl_err");
  const fs::path p = tmp.path / "bad.jsonl";
  write_file(p, "{\"doc_id\":\"a\",\"sentences\":[\"s\"],\"relations\":[]}\nnot json\n");
  try {
    parse_corpus(p, CorpusFormat::jsonl);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
  }
}

TEST_CASE("jsonl write then parse is the identity") {
  SynthSpec spec;
  spec.num_docs = 5;
  spec.min_sentences = 3;
  spec.max_sentences = 7;
  spec.seed = 42;
  const auto docs = generate_synthetic_corpus(spec);

  TempDir tmp("roundtrip");
  const fs::path p = tmp.path / "c.jsonl";
  write_jsonl(docs, p);
  CHECK(parse_corpus(p, CorpusFormat::jsonl) == docs);
}

TEST_CASE("abstrct-like directory reader") {
  TempDir tmp("abstrct");
  write_file(tmp.path / "doc2.txt", "claim one\nclaim two\nclaim three\n");
  write_file(tmp.path / "doc2.ann",
             "T1 Claim 0 9 claim one\n"
             "# a comment\n"
             "R1 support Arg1:0 Arg2:1\n"
             "R2 attack Arg1:2 Arg2:0\n");
  write_file(tmp.path / "doc1.txt", "lone sentence\n\n\n");  // trailing blanks trimmed
  write_file(tmp.path / "notes.md", "ignored\n");

  const auto docs = parse_corpus(tmp.path, CorpusFormat::abstrct_like);
  REQUIRE(docs.size() == 2);
  // Lexicographic file order.
  CHECK(docs[0].doc_id == "doc1");
  CHECK(docs[0].sentences == std::vector<std::string>{"lone sentence"});
  CHECK(docs[0].relations.empty());

  CHECK(docs[1].doc_id == "doc2");
  REQUIRE(docs[1].sentences.size() == 3);
  CHECK(relation_set(docs[1]) ==
        std::set<Relation>{{0, 1, "support"}, {2, 0, "attack"}});
}

TEST_CASE("abstrct-like reader rejects malformed relation records") {
  TempDir tmp("abstrct_bad");
  write_file(tmp.path / "d.txt", "a\nb\n");
  write_file(tmp.path / "d.ann", "R1 support Arg1:x Arg2:1\n");
  CHECK_THROWS_AS(parse_corpus(tmp.path, CorpusFormat::abstrct_like), ParseError);
}

TEST_CASE("cdcp-like directory reader") {
  TempDir tmp("cdcp");
  write_file(tmp.path / "00195.json",
             R"({"propositions": ["p0", "p1", "p2"],
                 "links": [{"src": 1, "dst": 0, "type": "reason"},
                           {"src": 2, "dst": 0, "type": "evidence"}]})");
  write_file(tmp.path / "00042.json", R"({"propositions": ["solo"]})");

  const auto docs = parse_corpus(tmp.path, CorpusFormat::cdcp_like);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].doc_id == "00042");
  CHECK(docs[0].relations.empty());
  CHECK(docs[1].doc_id == "00195");
  CHECK(relation_set(docs[1]) ==
        std::set<Relation>{{1, 0, "reason"}, {2, 0, "evidence"}});
}

TEST_CASE("scidtb-like directory reader") {
  TempDir tmp("scidtb");
  write_file(tmp.path / "t.json",
             R"({"root": [
                  {"id": 0, "parent": -1, "relation": "null", "text": "ROOT"},
                  {"id": 1, "parent": 0, "relation": "ROOT", "text": "u1"},
                  {"id": 2, "parent": 1, "relation": "elab-addition", "text": "u2"},
                  {"id": 3, "parent": 1, "relation": "evaluation", "text": "u3"}
                ]})");

  const auto docs = parse_corpus(tmp.path, CorpusFormat::scidtb_like);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].sentences == std::vector<std::string>{"u1", "u2", "u3"});
  // Unit 1's parent is the virtual root: no edge. Others point at unit 1.
  CHECK(relation_set(docs[0]) ==
        std::set<Relation>{{1, 0, "elab-addition"}, {2, 0, "evaluation"}});
}

TEST_CASE("scidtb-like reader rejects gapped unit ids") {
  TempDir tmp("scidtb_gap");
  write_file(tmp.path / "t.json",
             R"({"root": [{"id": 1, "parent": 0, "relation": "ROOT", "text": "u1"},
                          {"id": 3, "parent": 1, "relation": "x", "text": "u3"}]})");
  CHECK_THROWS_AS(parse_corpus(tmp.path, CorpusFormat::scidtb_like), ParseError);
}

TEST_CASE("corpus format names") {
  CHECK(corpus_format_from_string("jsonl") == CorpusFormat::jsonl);
  CHECK(corpus_format_from_string("abstrct_like") == CorpusFormat::abstrct_like);
  CHECK(corpus_format_from_string("cdcp_like") == CorpusFormat::cdcp_like);
  CHECK(corpus_format_from_string("scidtb_like") == CorpusFormat::scidtb_like);
  CHECK_THROWS_AS(corpus_format_from_string("tsv"), ValidationError);
}

TEST_CASE("build_label_matrix fills explicit cells, defaults the rest") {
  const LabelSpace space = default_synth_space();
  Document doc;
  doc.doc_id = "d";
  doc.sentences = {"a", "b", "c"};
  doc.relations = {{0, 1, "support"}, {2, 0, "attack"}};

  const LabelMatrix m = build_label_matrix(doc, space);
  REQUIRE(m.n == 3);
  CHECK(m.at(0, 1) == space.index_of("support"));
  CHECK(m.at(2, 0) == space.index_of("attack"));
  // Everything else, diagonal included, is the no-relation class.
  int defaults = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (m.at(i, j) == space.no_relation_index) ++defaults;
    }
  }
  CHECK(defaults == 7);

  doc.relations.push_back({1, 2, "missing-label"});
  CHECK_THROWS_AS(build_label_matrix(doc, space), ValidationError);
}

TEST_CASE("relations_from_matrix inverts build_label_matrix") {
  const LabelSpace space = default_synth_space();
  SynthSpec spec;
  spec.num_docs = 8;
  spec.min_sentences = 2;
  spec.max_sentences = 9;
  spec.seed = 3;
  for (const Document& doc : generate_synthetic_corpus(spec)) {
    const LabelMatrix m = build_label_matrix(doc, space);
    auto recovered = relations_from_matrix(m, space);
    auto expected = doc.relations;
    std::sort(expected.begin(), expected.end());
    CHECK(recovered == expected);  // output is already (head, tail) sorted
  }
}

TEST_CASE("infer_label_space sorts labels and places the default class") {
  Document d1{"a", {"s", "t"}, {{0, 1, "support"}}};
  Document d2{"b", {"s", "t"}, {{1, 0, "attack"}}};

  const LabelSpace s1 = infer_label_space({d1, d2});
  CHECK(s1.labels == std::vector<std::string>{"attack", "support", "none"});
  CHECK(s1.no_relation_index == 2);

  // A corpus that already uses the no-relation label keeps it in place.
  Document d3{"c", {"s", "t"}, {{0, 1, "none"}}};
  const LabelSpace s2 = infer_label_space({d1, d3});
  CHECK(s2.labels == std::vector<std::string>{"none", "support"});
  CHECK(s2.no_relation_index == 0);
}

TEST_CASE("validate_document catches structural problems") {
  Document doc{"d", {"a", "b"}, {}};
  CHECK_NOTHROW(validate_document(doc));

  CHECK_THROWS_AS(validate_document(Document{"", {"a"}, {}}), ValidationError);
  CHECK_THROWS_AS(validate_document(Document{"d", {}, {}}), ValidationError);
  CHECK_THROWS_AS(validate_document(Document{"d", {"a", "b"}, {{0, 2, "x"}}}), ValidationError);
  CHECK_THROWS_AS(validate_document(Document{"d", {"a", "b"}, {{-1, 1, "x"}}}), ValidationError);
  CHECK_THROWS_AS(validate_document(Document{"d", {"a", "b"}, {{0, 0, "x"}}}), ValidationError);
  CHECK_THROWS_AS(validate_document(Document{"d", {"a", "b"}, {{0, 1, ""}}}), ValidationError);

  const LabelSpace space = default_synth_space();
  CHECK_THROWS_AS(validate_document(Document{"d", {"a", "b"}, {{0, 1, "bogus"}}}, space),
                  ValidationError);
  // Explicit no-relation edges are contradictory.
  CHECK_THROWS_AS(validate_document(Document{"d", {"a", "b"}, {{0, 1, "none"}}}, space),
                  ValidationError);
}

TEST_CASE("synthetic generator is deterministic per seed") {
  SynthSpec spec;
  spec.num_docs = 6;
  spec.min_sentences = 4;
  spec.max_sentences = 8;
  spec.seed = 99;
  CHECK(generate_synthetic_corpus(spec) == generate_synthetic_corpus(spec));

  SynthSpec other = spec;
  other.seed = 100;
  CHECK(generate_synthetic_corpus(other) != generate_synthetic_corpus(spec));
}

TEST_CASE("chain rule: relations derive from polarity bits") {
  SynthSpec spec;
  spec.num_docs = 20;
  spec.min_sentences = 2;
  spec.max_sentences = 10;
  spec.seed = 7;
  for (const Document& doc : generate_synthetic_corpus(spec)) {
    const int n = doc.size();
    std::vector<int> pol(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      pol[static_cast<size_t>(i)] = sentence_polarity(doc.sentences[static_cast<size_t>(i)]);
      REQUIRE(pol[static_cast<size_t>(i)] >= 0);
    }
    // Independently re-derive the full relation set from the polarities.
    std::set<Relation> expected;
    for (int i = 0; i + 1 < n; ++i) {
      const bool same = pol[static_cast<size_t>(i)] == pol[static_cast<size_t>(i + 1)];
      expected.insert({i, i + 1, same ? "support" : "attack"});
      if (same && i + 2 < n) expected.insert({i, i + 2, "attack"});
    }
    CHECK(relation_set(doc) == expected);
  }
}

TEST_CASE("star rule: every sentence points at the first") {
  SynthSpec spec;
  spec.num_docs = 10;
  spec.min_sentences = 3;
  spec.max_sentences = 6;
  spec.planted_rule = "star";
  spec.seed = 5;
  for (const Document& doc : generate_synthetic_corpus(spec)) {
    const int n = doc.size();
    CHECK(doc.relations.size() == static_cast<size_t>(n - 1));
    for (const Relation& r : doc.relations) {
      CHECK(r.tail == 0);
      const bool same = sentence_polarity(doc.sentences[static_cast<size_t>(r.head)]) ==
                        sentence_polarity(doc.sentences[0]);
      CHECK(r.label == (same ? "support" : "attack"));
    }
  }
}

TEST_CASE("chain corpus label frequencies track the polarity coin") {
  SynthSpec spec;
  spec.num_docs = 300;
  spec.min_sentences = 8;
  spec.max_sentences = 8;
  spec.seed = 2024;
  long support = 0, adjacent = 0;
  for (const Document& doc : generate_synthetic_corpus(spec)) {
    for (const Relation& r : doc.relations) {
      if (r.tail == r.head + 1) {
        ++adjacent;
        if (r.label == "support") ++support;
      }
    }
  }
  CHECK(adjacent == 300 * 7);
  // Adjacent labels are fair coin flips; allow a wide band.
  const double frac = static_cast<double>(support) / static_cast<double>(adjacent);
  CHECK(frac > 0.4);
  CHECK(frac < 0.6);
}

TEST_CASE("label flips preserve structure and stay near the requested rate") {
  SynthSpec clean;
  clean.num_docs = 200;
  clean.min_sentences = 6;
  clean.max_sentences = 6;
  clean.seed = 31;
  SynthSpec noisy = clean;
  noisy.label_flip_rate = 0.25;

  const auto a = generate_synthetic_corpus(clean);
  const auto b = generate_synthetic_corpus(noisy);
  REQUIRE(a.size() == b.size());

  long total = 0, flipped = 0;
  for (size_t di = 0; di < a.size(); ++di) {
    CHECK(a[di].sentences == b[di].sentences);
    REQUIRE(a[di].relations.size() == b[di].relations.size());
    for (size_t ri = 0; ri < a[di].relations.size(); ++ri) {
      const Relation& x = a[di].relations[ri];
      const Relation& y = b[di].relations[ri];
      CHECK(x.head == y.head);
      CHECK(x.tail == y.tail);
      ++total;
      if (x.label != y.label) ++flipped;
    }
  }
  const double rate = static_cast<double>(flipped) / static_cast<double>(total);
  CHECK(rate > 0.18);
  CHECK(rate < 0.32);
}

TEST_CASE("synthetic spec validation") {
  SynthSpec spec;
  spec.num_docs = 0;
  spec.min_sentences = 2;
  spec.max_sentences = 3;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec), ValidationError);
  spec.num_docs = 1;
  spec.max_sentences = 1;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec), ValidationError);
  spec.max_sentences = 3;
  spec.planted_rule = "ring";
  CHECK_THROWS_AS(generate_synthetic_corpus(spec), ValidationError);
  spec.planted_rule = "chain";
  spec.label_flip_rate = 1.5;
  CHECK_THROWS_AS(generate_synthetic_corpus(spec), ValidationError);
}

TEST_CASE("sentence_polarity recognizes only the templated token") {
  CHECK(sentence_polarity("arg0 pol1 t12") == 1);
  CHECK(sentence_polarity("arg3 pol0 t999") == 0);
  CHECK(sentence_polarity("polite words only") == -1);
  CHECK(sentence_polarity("pol2 is not a bit") == -1);
  CHECK(sentence_polarity("") == -1);
}
