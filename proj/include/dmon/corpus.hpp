#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmon/types.hpp"

namespace dmon {

enum class CorpusFormat { jsonl, abstrct_like, cdcp_like, scidtb_like };

CorpusFormat corpus_format_from_string(std::string_view name);

// Reads a corpus into the uniform document model. `path` is a file for jsonl
// and a directory of per-document annotation files for the other formats.
// Document order follows file order (lexicographic for directories).
std::vector<Document> parse_corpus(const std::filesystem::path& path, CorpusFormat format);

// Canonical interchange format: one JSON document per line.
void write_jsonl(const std::vector<Document>& docs, const std::filesystem::path& path);
std::string document_to_jsonl_line(const Document& doc);

nlohmann::ordered_json document_to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j, const std::string& context);

// Dense label matrix: values[h][t] = class index of the relation (h, t), all
// other cells (diagonal included) the no-relation class.
LabelMatrix build_label_matrix(const Document& doc, const LabelSpace& space);

// Inverse of build_label_matrix: recovers the relation triples, skipping
// no-relation cells and the diagonal. Output sorted by (head, tail).
std::vector<Relation> relations_from_matrix(const LabelMatrix& m, const LabelSpace& space);

// Sorted unique relation labels observed in the corpus, with the no-relation
// label appended (or reused, if it already occurs).
LabelSpace infer_label_space(const std::vector<Document>& docs,
                             const std::string& no_relation_label = "none");

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

LabelSpace default_synth_space();  // {attack, support, none}, no-relation = none

// Generator rules:
//   chain: every adjacent pair (i, i+1) carries a relation whose label is
//          "support" when the two sentences' polarity tokens match and
//          "attack" otherwise; (i, i+2) carries "attack" exactly when
//          (i, i+1) is "support". The skip label is thus decidable only with
//          the neighbouring pair in view.
//   star:  every sentence i >= 1 relates to sentence 0, "support" on matching
//          polarity and "attack" otherwise.
// Sentences are templated token strings ("arg3 pol1 t2") so a hashing encoder
// can tell them apart and tests can recover the polarity bits.
struct SynthSpec {
  int num_docs = 0;
  int min_sentences = 0;
  int max_sentences = 0;
  LabelSpace label_space = default_synth_space();
  std::string planted_rule = "chain";
  std::uint64_t seed = 0;
  // Probability that a planted relation's label is swapped support<->attack.
  // Keeps class marginals intact while capping attainable accuracy.
  double label_flip_rate = 0.0;
};

std::vector<Document> generate_synthetic_corpus(const SynthSpec& spec);

// Recovers the polarity bit from a templated synthetic sentence; -1 when the
// sentence carries no polarity token.
int sentence_polarity(const std::string& sentence);

}  // namespace dmon
