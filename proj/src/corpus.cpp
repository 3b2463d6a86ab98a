#include "dmon/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dmon/rng.hpp"

namespace dmon {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
}

const json& field(const json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(context + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const json& j, const char* key, const std::string& context) {
  const json& v = field(j, key, context);
  if (!v.is_string()) throw ParseError(context + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

int int_field(const json& j, const char* key, const std::string& context) {
  const json& v = field(j, key, context);
  if (!v.is_number_integer()) throw ParseError(context + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir,
                                                std::string_view extension) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("'" + dir.string() + "' is not a readable directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<Document> parse_jsonl(const std::filesystem::path& path) {
  std::vector<Document> docs;
  int line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string context = path.filename().string() + ":" + std::to_string(line_no);
    docs.push_back(document_from_json(parse_json(line, context), context));
  }
  return docs;
}

// One document per <id>.txt (one sentence per line) with an optional <id>.ann
// of whitespace-separated relation records "R<k> <label> Arg1:<head> Arg2:<tail>".
// Lines starting with T or # are span/comment records and are skipped.
Document parse_abstrct_doc(const std::filesystem::path& txt_path) {
  Document doc;
  doc.doc_id = txt_path.stem().string();
  doc.sentences = read_lines(txt_path);
  while (!doc.sentences.empty() && doc.sentences.back().empty()) doc.sentences.pop_back();

  std::filesystem::path ann_path = txt_path;
  ann_path.replace_extension(".ann");
  if (!std::filesystem::exists(ann_path)) return doc;

  int line_no = 0;
  for (const std::string& line : read_lines(ann_path)) {
    ++line_no;
    const std::string context = ann_path.filename().string() + ":" + std::to_string(line_no);
    if (line.empty() || line[0] == '#' || line[0] == 'T') continue;
    std::istringstream ss(line);
    std::string id, label, arg1, arg2;
    if (!(ss >> id >> label >> arg1 >> arg2) || id[0] != 'R') {
      throw ParseError(context + ": expected 'R<k> <label> Arg1:<head> Arg2:<tail>'");
    }
    auto index_of = [&](const std::string& token, std::string_view prefix) {
      if (token.substr(0, prefix.size()) != prefix) {
        throw ParseError(context + ": expected '" + std::string(prefix) + "<index>', got '" +
                         token + "'");
      }
      try {
        return std::stoi(token.substr(prefix.size()));
      } catch (const std::exception&) {
        throw ParseError(context + ": malformed index in '" + token + "'");
      }
    };
    doc.relations.push_back(
        {index_of(arg1, "Arg1:"), index_of(arg2, "Arg2:"), label});
  }
  return doc;
}

// One document per <id>.json: {"propositions": [str], "links": [{"src": int,
// "dst": int, "type": str}]}.
Document parse_cdcp_doc(const std::filesystem::path& path) {
  const std::string context = path.filename().string();
  const json j = parse_json(slurp(path), context);
  Document doc;
  doc.doc_id = path.stem().string();
  const json& props = field(j, "propositions", context);
  if (!props.is_array()) throw ParseError(context + ": 'propositions' must be an array");
  for (const json& p : props) {
    if (!p.is_string()) throw ParseError(context + ": propositions must be strings");
    doc.sentences.push_back(p.get<std::string>());
  }
  if (auto it = j.find("links"); it != j.end()) {
    if (!it->is_array()) throw ParseError(context + ": 'links' must be an array");
    for (const json& link : *it) {
      doc.relations.push_back({int_field(link, "src", context), int_field(link, "dst", context),
                               string_field(link, "type", context)});
    }
  }
  return doc;
}

// One document per <id>.json: {"root": [{"id": int, "parent": int,
// "relation": str, "text": str}]}. Unit ids are 1-based; id 0 is the virtual
// root and is skipped. Each unit with parent >= 1 yields the relation
// (unit - 1, parent - 1, relation); parent <= 0 marks the tree root.
Document parse_scidtb_doc(const std::filesystem::path& path) {
  const std::string context = path.filename().string();
  const json j = parse_json(slurp(path), context);
  Document doc;
  doc.doc_id = path.stem().string();
  const json& units = field(j, "root", context);
  if (!units.is_array()) throw ParseError(context + ": 'root' must be an array");

  std::map<int, std::pair<std::string, std::pair<int, std::string>>> by_id;  // id -> (text, (parent, rel))
  for (const json& u : units) {
    const int id = int_field(u, "id", context);
    if (id == 0) continue;
    if (id < 0) throw ParseError(context + ": unit id " + std::to_string(id) + " is negative");
    const int parent = int_field(u, "parent", context);
    if (!by_id.emplace(id, std::make_pair(string_field(u, "text", context),
                                          std::make_pair(parent, string_field(u, "relation",
                                                                              context))))
             .second) {
      throw ParseError(context + ": duplicate unit id " + std::to_string(id));
    }
  }
  int expected = 1;
  for (const auto& [id, unit] : by_id) {
    if (id != expected) {
      throw ParseError(context + ": unit ids must be consecutive from 1, missing " +
                       std::to_string(expected));
    }
    ++expected;
    doc.sentences.push_back(unit.first);
    const auto& [parent, rel] = unit.second;
    if (parent >= 1) doc.relations.push_back({id - 1, parent - 1, rel});
  }
  return doc;
}

}  // namespace

CorpusFormat corpus_format_from_string(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "abstrct_like") return CorpusFormat::abstrct_like;
  if (name == "cdcp_like") return CorpusFormat::cdcp_like;
  if (name == "scidtb_like") return CorpusFormat::scidtb_like;
  throw ValidationError("unknown corpus format '" + std::string(name) +
                        "' (expected jsonl, abstrct_like, cdcp_like, or scidtb_like)");
}

std::vector<Document> parse_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::vector<Document> docs;
  switch (format) {
    case CorpusFormat::jsonl:
      if (!std::filesystem::is_regular_file(path)) {
        throw IoError("'" + path.string() + "' is not a readable file");
      }
      docs = parse_jsonl(path);
      break;
    case CorpusFormat::abstrct_like:
      for (const auto& f : sorted_files(path, ".txt")) docs.push_back(parse_abstrct_doc(f));
      break;
    case CorpusFormat::cdcp_like:
      for (const auto& f : sorted_files(path, ".json")) docs.push_back(parse_cdcp_doc(f));
      break;
    case CorpusFormat::scidtb_like:
      for (const auto& f : sorted_files(path, ".json")) docs.push_back(parse_scidtb_doc(f));
      break;
  }
  for (const Document& doc : docs) validate_document(doc);
  return docs;
}

nlohmann::ordered_json document_to_json(const Document& doc) {
  nlohmann::ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["sentences"] = doc.sentences;
  auto rels = nlohmann::ordered_json::array();
  for (const Relation& r : doc.relations) {
    rels.push_back(nlohmann::ordered_json::array({r.head, r.tail, r.label}));
  }
  j["relations"] = std::move(rels);
  return j;
}

std::string document_to_jsonl_line(const Document& doc) { return document_to_json(doc).dump(); }

void write_jsonl(const std::vector<Document>& docs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const Document& doc : docs) out << document_to_jsonl_line(doc) << '\n';
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

Document document_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.is_object()) throw ParseError(context + ": document record must be a JSON object");
  Document doc;
  doc.doc_id = string_field(j, "doc_id", context);
  const json& sents = field(j, "sentences", context);
  if (!sents.is_array()) throw ParseError(context + ": 'sentences' must be an array");
  for (const json& s : sents) {
    if (!s.is_string()) throw ParseError(context + ": sentences must be strings");
    doc.sentences.push_back(s.get<std::string>());
  }
  const json& rels = field(j, "relations", context);
  if (!rels.is_array()) throw ParseError(context + ": 'relations' must be an array");
  for (const json& r : rels) {
    if (!r.is_array() || r.size() != 3 || !r[0].is_number_integer() ||
        !r[1].is_number_integer() || !r[2].is_string()) {
      throw ParseError(context + ": each relation must be [head: int, tail: int, label: str]");
    }
    doc.relations.push_back({r[0].get<int>(), r[1].get<int>(), r[2].get<std::string>()});
  }
  validate_document(doc);
  return doc;
}

LabelMatrix build_label_matrix(const Document& doc, const LabelSpace& space) {
  validate_document(doc, space);
  LabelMatrix m = LabelMatrix::filled(doc.size(), space.no_relation_index);
  for (const Relation& r : doc.relations) m.at(r.head, r.tail) = space.index_of(r.label);
  return m;
}

std::vector<Relation> relations_from_matrix(const LabelMatrix& m, const LabelSpace& space) {
  std::vector<Relation> out;
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      if (i == j) continue;
      const int c = m.at(i, j);
      if (c < 0 || c >= space.size()) {
        throw ValidationError("matrix class index " + std::to_string(c) +
                              " is outside the label space");
      }
      if (c == space.no_relation_index) continue;
      out.push_back({i, j, space.labels[static_cast<size_t>(c)]});
    }
  }
  return out;  // (head, tail) order falls out of the scan
}

LabelSpace infer_label_space(const std::vector<Document>& docs,
                             const std::string& no_relation_label) {
  std::set<std::string> seen;
  for (const Document& doc : docs) {
    for (const Relation& r : doc.relations) seen.insert(r.label);
  }
  LabelSpace space;
  space.labels.assign(seen.begin(), seen.end());
  auto it = std::find(space.labels.begin(), space.labels.end(), no_relation_label);
  if (it == space.labels.end()) {
    space.labels.push_back(no_relation_label);
    space.no_relation_index = space.size() - 1;
  } else {
    space.no_relation_index = static_cast<int>(it - space.labels.begin());
  }
  space.validate();
  return space;
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

LabelSpace default_synth_space() { return {{"attack", "support", "none"}, 2}; }

namespace {

void validate_synth_spec(const SynthSpec& spec) {
  if (spec.num_docs < 1) throw ValidationError("synthetic spec: num_docs must be >= 1");
  if (spec.min_sentences < 1 || spec.max_sentences < spec.min_sentences) {
    throw ValidationError("synthetic spec: sentence range [" +
                          std::to_string(spec.min_sentences) + ", " +
                          std::to_string(spec.max_sentences) + "] is degenerate");
  }
  if (spec.planted_rule != "chain" && spec.planted_rule != "star") {
    throw ValidationError("synthetic spec: unknown planted_rule '" + spec.planted_rule +
                          "' (expected chain or star)");
  }
  if (spec.label_flip_rate < 0.0 || spec.label_flip_rate > 1.0) {
    throw ValidationError("synthetic spec: label_flip_rate must be in [0, 1]");
  }
  spec.label_space.validate();
  for (const char* needed : {"support", "attack"}) {
    if (!spec.label_space.find(needed)) {
      throw ValidationError(std::string("synthetic spec: label space lacks '") + needed + "'");
    }
  }
}

}  // namespace

std::vector<Document> generate_synthetic_corpus(const SynthSpec& spec) {
  validate_synth_spec(spec);
  std::vector<Document> docs;
  docs.reserve(static_cast<size_t>(spec.num_docs));
  for (int di = 0; di < spec.num_docs; ++di) {
    Rng rng(derive_seed(spec.seed, "synth-doc", static_cast<std::uint64_t>(di)));
    const int n = rng.uniform_int(spec.min_sentences, spec.max_sentences);

    Document doc;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%04d", di);
    doc.doc_id = idbuf;

    std::vector<int> pol(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      pol[static_cast<size_t>(i)] = static_cast<int>(rng.below(2));
      const int nonce = static_cast<int>(rng.below(1000));
      doc.sentences.push_back("arg" + std::to_string(i) + " pol" +
                              std::to_string(pol[static_cast<size_t>(i)]) + " t" +
                              std::to_string(nonce));
    }

    if (spec.planted_rule == "chain") {
      // Adjacent edges always exist; their label is the polarity agreement.
      // The skip edge (i, i+2) exists exactly when (i, i+1) is supportive, so
      // its presence is undecidable from the pair (i, i+2) alone.
      std::vector<bool> adjacent_support(static_cast<size_t>(std::max(0, n - 1)));
      for (int i = 0; i + 1 < n; ++i) {
        const bool same = pol[static_cast<size_t>(i)] == pol[static_cast<size_t>(i + 1)];
        adjacent_support[static_cast<size_t>(i)] = same;
        doc.relations.push_back({i, i + 1, same ? "support" : "attack"});
      }
      for (int i = 0; i + 2 < n; ++i) {
        if (adjacent_support[static_cast<size_t>(i)]) doc.relations.push_back({i, i + 2, "attack"});
      }
    } else {  // star
      for (int i = 1; i < n; ++i) {
        const bool same = pol[static_cast<size_t>(i)] == pol[0];
        doc.relations.push_back({i, 0, same ? "support" : "attack"});
      }
    }

    if (spec.label_flip_rate > 0.0) {
      for (Relation& r : doc.relations) {
        if (rng.uniform01() < spec.label_flip_rate) {
          r.label = r.label == "support" ? "attack" : "support";
        }
      }
    }

    validate_document(doc, spec.label_space);
    docs.push_back(std::move(doc));
  }
  return docs;
}

int sentence_polarity(const std::string& sentence) {
  std::istringstream ss(sentence);
  std::string token;
  while (ss >> token) {
    if (token.size() == 4 && token.compare(0, 3, "pol") == 0 &&
        (token[3] == '0' || token[3] == '1')) {
      return token[3] - '0';
    }
  }
  return -1;
}

}  // namespace dmon
