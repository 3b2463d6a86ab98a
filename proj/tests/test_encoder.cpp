#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "dmon/encoder.hpp"
#include "dmon/rng.hpp"

using namespace dmon;
namespace fs = std::filesystem;

namespace {

// Independent re-derivation of the documented hashing scheme, kept separate
// from the implementation on purpose.
std::vector<double> reference_encode(const std::string& text, int d, std::uint64_t seed) {
  std::vector<double> v(static_cast<size_t>(d), 0.0);
  std::istringstream ss(text);
  std::string token;
  size_t pos = 0;
  while (ss >> token) {
    const std::uint64_t slot = mix64(fnv1a64(token) ^ derive_seed(seed, "toy-token", pos));
    v[slot % static_cast<std::uint64_t>(d)] += (slot >> 63) == 0 ? 1.0 : -1.0;
    ++pos;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= std::sqrt(norm);
  return v;
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("dmon_enc_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Misbehaving backends for the error paths.
class ThrowingBackend final : public EncoderBackend {
 public:
  std::string name() const override { return "throwing"; }
  int dim() const override { return 4; }
  int max_seq_len() const override { return 16; }
  std::string separator() const override { return " | "; }
  bool concurrent_safe() const override { return true; }
  std::vector<double> encode(std::string_view) const override {
    throw std::runtime_error("backend exploded");
  }
};

class WrongSizeBackend final : public EncoderBackend {
 public:
  std::string name() const override { return "short"; }
  int dim() const override { return 4; }
  int max_seq_len() const override { return 16; }
  std::string separator() const override { return " | "; }
  bool concurrent_safe() const override { return true; }
  std::vector<double> encode(std::string_view) const override { return {1.0, 2.0}; }
};

class NanBackend final : public EncoderBackend {
 public:
  std::string name() const override { return "nan"; }
  int dim() const override { return 2; }
  int max_seq_len() const override { return 16; }
  std::string separator() const override { return " | "; }
  bool concurrent_safe() const override { return true; }
  std::vector<double> encode(std::string_view) const override {
    return {0.0, std::nan("")};
  }
};

}  // namespace

TEST_CASE("pair_text keeps head first") {
  CHECK(pair_text("alpha", "beta", " [SEP] ") == "alpha [SEP] beta");
  CHECK(pair_text("", "beta", "|") == "|beta");
  CHECK(pair_text("a", "b", "") == "ab");
}

TEST_CASE("toy_encode matches the documented hashing scheme") {
  const std::uint64_t seed = 17;
  for (const char* text : {"one", "one two three", "arg0 pol1 t7 [SEP] arg1 pol0 t9",
                           "  spaced\tout \n tokens "}) {
    for (int d : {3, 8, 64}) {
      CHECK(toy_encode(text, d, seed) == reference_encode(text, d, seed));
    }
  }
}

TEST_CASE("toy_encode embeddings are unit length") {
  for (const char* text : {"a", "a b c d e", "x y z"}) {
    const auto v = toy_encode(text, 32, 5);
    CHECK(l2(v) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("toy_encode is deterministic and seed sensitive") {
  CHECK(toy_encode("claim text", 16, 1) == toy_encode("claim text", 16, 1));
  CHECK(toy_encode("claim text", 16, 1) != toy_encode("claim text", 16, 2));
}

TEST_CASE("toy_encode is order sensitive") {
  // Position salting distinguishes permuted token bags.
  CHECK(toy_encode("a b", 64, 0) != toy_encode("b a", 64, 0));
}

TEST_CASE("empty text maps to a fixed unit vector") {
  const auto v = toy_encode("", 8, 3);
  CHECK(v[0] == 1.0);
  for (size_t i = 1; i < v.size(); ++i) CHECK(v[i] == 0.0);
}

TEST_CASE("encoder truncates past max_seq_len tokens") {
  ToyHashEncoder enc(16, 0, /*max_seq_len=*/3);
  CHECK(enc.encode("a b c d e f") == enc.encode("a b c"));
  CHECK(enc.encode("a b c d e f") != enc.encode("a b"));
}

TEST_CASE("toy encoder constructor validation") {
  CHECK_THROWS_AS(ToyHashEncoder(0, 0), ValidationError);
  CHECK_THROWS_AS(ToyHashEncoder(8, 0, 0), ValidationError);
}

TEST_CASE("encode_pairs lays out cells as (head, tail)") {
  Document doc;
  doc.doc_id = "d";
  doc.sentences = {"alpha one", "beta two", "gamma three"};
  ToyHashEncoder enc(24, 9);

  const RelationshipTensor t = encode_pairs(doc, enc);
  REQUIRE(t.n == 3);
  REQUIRE(t.d == 24);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const auto expected = enc.encode(pair_text(doc.sentences[static_cast<size_t>(i)],
                                                 doc.sentences[static_cast<size_t>(j)],
                                                 enc.separator()));
      const auto got = t.cell(i, j);
      REQUIRE(got.size() == expected.size());
      for (size_t c = 0; c < expected.size(); ++c) CHECK(got[c] == expected[c]);
    }
  }
  // Ordered pairs: (0, 1) and (1, 0) encode differently.
  bool same = true;
  for (int c = 0; c < t.d; ++c) same = same && t.at(0, 1, c) == t.at(1, 0, c);
  CHECK_FALSE(same);
}

TEST_CASE("encode_pairs with identical sentences is symmetric") {
  Document doc;
  doc.doc_id = "d";
  doc.sentences = {"same text", "same text"};
  ToyHashEncoder enc(16, 2);
  const RelationshipTensor t = encode_pairs(doc, enc);
  for (int c = 0; c < t.d; ++c) {
    CHECK(t.at(0, 1, c) == t.at(1, 0, c));
    CHECK(t.at(0, 0, c) == t.at(1, 1, c));
  }
}

TEST_CASE("threaded encoding equals sequential") {
  Document doc;
  doc.doc_id = "d";
  for (int i = 0; i < 9; ++i) doc.sentences.push_back("sentence number " + std::to_string(i));
  ToyHashEncoder enc(32, 4);
  const RelationshipTensor seq = encode_pairs(doc, enc, 1);
  const RelationshipTensor par = encode_pairs(doc, enc, 4);
  CHECK(seq == par);
}

TEST_CASE("encode_pairs error reporting") {
  Document doc;
  doc.doc_id = "d";
  doc.sentences = {"a", "b"};
  CHECK_THROWS_AS(encode_pairs(doc, ThrowingBackend{}), EncoderError);
  CHECK_THROWS_AS(encode_pairs(doc, WrongSizeBackend{}), EncoderError);
  CHECK_THROWS_AS(encode_pairs(doc, NanBackend{}), NumericError);
  CHECK_THROWS_AS(encode_pairs(doc, ThrowingBackend{}, 4), EncoderError);

  Document empty;
  empty.doc_id = "e";
  CHECK_THROWS_AS(encode_pairs(empty, ThrowingBackend{}), ValidationError);
}

TEST_CASE("backend registry builds the toy encoder from json") {
  const auto backend = make_backend(
      nlohmann::json{{"name", "toy"}, {"dim", 12}, {"seed", 77}, {"max_seq_len", 32}});
  CHECK(backend->name() == "toy");
  CHECK(backend->dim() == 12);
  CHECK(backend->max_seq_len() == 32);
  CHECK(backend->encode("x y") == toy_encode("x y", 12, 77));

  CHECK_THROWS_AS(make_backend(nlohmann::json{{"name", "bert-base"}}), ValidationError);
}

TEST_CASE("version hash separates structurally different backends") {
  ToyHashEncoder a(16, 0, 128), b(32, 0, 128), c(16, 0, 64);
  CHECK(a.version_hash() == ToyHashEncoder(16, 0, 128).version_hash());
  CHECK(a.version_hash() != b.version_hash());
  CHECK(a.version_hash() != c.version_hash());
}

TEST_CASE("tensor cache round trips and key-checks its entries") {
  TempDir tmp("cache");
  TensorCache cache(tmp.path);
  ToyHashEncoder enc(16, 3);

  Document doc;
  doc.doc_id = "doc-1";
  doc.sentences = {"u", "v w", "x y z"};

  CHECK_FALSE(cache.load(doc.doc_id, enc).has_value());
  const RelationshipTensor fresh = encode_pairs(doc, enc);
  cache.store(doc.doc_id, enc, fresh);

  const auto hit = cache.load(doc.doc_id, enc);
  REQUIRE(hit.has_value());
  CHECK(*hit == fresh);

  // A different encoder configuration must miss.
  ToyHashEncoder other(16, 4);
  CHECK_FALSE(cache.load(doc.doc_id, other).has_value());

  // Cached path must agree with direct encoding.
  CHECK(encode_pairs_cached(doc, enc, &cache) == fresh);
  CHECK(encode_pairs_cached(doc, enc, nullptr) == fresh);
}
