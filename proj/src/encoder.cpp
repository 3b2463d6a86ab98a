#include "dmon/encoder.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "dmon/rng.hpp"

namespace dmon {

std::string pair_text(std::string_view head, std::string_view tail, std::string_view separator) {
  std::string out;
  out.reserve(head.size() + separator.size() + tail.size());
  out.append(head).append(separator).append(tail);
  return out;
}

std::string EncoderBackend::version_hash() const {
  // Default identity: name + structural parameters. Backends with weights
  // should override with a digest of them.
  return hex64(fnv1a64(name() + "/" + std::to_string(dim()) + "/" +
                       std::to_string(max_seq_len()) + "/" + separator()));
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view text) {
  std::vector<std::string_view> tokens;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

std::vector<double> hash_tokens(const std::vector<std::string_view>& tokens, int d,
                               std::uint64_t seed) {
  if (d <= 0) throw ValidationError("toy_encode: dimension must be positive");
  std::vector<double> v(static_cast<size_t>(d), 0.0);
  for (size_t pos = 0; pos < tokens.size(); ++pos) {
    const std::uint64_t slot =
        mix64(fnv1a64(tokens[pos]) ^ derive_seed(seed, "toy-token", pos));
    const size_t index = static_cast<size_t>(slot % static_cast<std::uint64_t>(d));
    const double sign = (slot >> 63) == 0 ? 1.0 : -1.0;
    v[index] += sign;
  }
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq == 0.0) {
    v[0] = 1.0;  // empty or fully cancelled bag: a fixed unit vector
    return v;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace

std::vector<double> toy_encode(std::string_view text, int d, std::uint64_t seed) {
  return hash_tokens(split_tokens(text), d, seed);
}

ToyHashEncoder::ToyHashEncoder(int dim, std::uint64_t seed, int max_seq_len)
    : dim_(dim), seed_(seed), max_seq_len_(max_seq_len) {
  if (dim <= 0) throw ValidationError("toy encoder: dimension must be positive");
  if (max_seq_len <= 0) throw ValidationError("toy encoder: max_seq_len must be positive");
}

std::vector<double> ToyHashEncoder::encode(std::string_view paired_text) const {
  std::vector<std::string_view> tokens = split_tokens(paired_text);
  if (tokens.size() > static_cast<size_t>(max_seq_len_)) {
    tokens.resize(static_cast<size_t>(max_seq_len_));
  }
  return hash_tokens(tokens, dim_, seed_);
}

RelationshipTensor encode_pairs(const Document& doc, const EncoderBackend& backend, int threads) {
  const int n = doc.size();
  if (n < 1) throw ValidationError("encode_pairs: document has no sentences");
  const int d = backend.dim();
  RelationshipTensor tensor = RelationshipTensor::zeros(n, d);

  auto encode_cell = [&](int i, int j) {
    std::vector<double> vec;
    try {
      vec = backend.encode(
          pair_text(doc.sentences[static_cast<size_t>(i)], doc.sentences[static_cast<size_t>(j)],
                    backend.separator()));
    } catch (const std::exception& e) {
      throw EncoderError("backend '" + backend.name() + "' failed on pair (" +
                         std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
    }
    if (static_cast<int>(vec.size()) != d) {
      throw EncoderError("backend '" + backend.name() + "' returned length " +
                         std::to_string(vec.size()) + " for pair (" + std::to_string(i) + ", " +
                         std::to_string(j) + "), expected " + std::to_string(d));
    }
    for (double x : vec) {
      if (!std::isfinite(x)) {
        throw NumericError("non-finite embedding for pair (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
      }
    }
    auto dst = tensor.cell(i, j);
    std::copy(vec.begin(), vec.end(), dst.begin());
  };

  if (threads > 1 && backend.concurrent_safe() && n > 1) {
    // Rows are parallel units; every writer owns disjoint cells, so the
    // result is identical to the sequential scan.
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::atomic<int> next_row{0};
    const int workers = std::min(threads, n);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        try {
          for (int i = next_row.fetch_add(1); i < n; i = next_row.fetch_add(1)) {
            for (int j = 0; j < n; ++j) encode_cell(i, j);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) encode_cell(i, j);
    }
  }
  return tensor;
}

// ---------------------------------------------------------------------------
// Backend registry
// ---------------------------------------------------------------------------

BackendRegistry& BackendRegistry::instance() {
  static BackendRegistry registry;
  return registry;
}

BackendRegistry::BackendRegistry() {
  register_factory("toy", [](const nlohmann::json& params) -> std::unique_ptr<EncoderBackend> {
    const int dim = params.value("dim", 64);
    const std::uint64_t seed = params.value("seed", std::uint64_t{0});
    const int max_seq_len = params.value("max_seq_len", 128);
    return std::make_unique<ToyHashEncoder>(dim, seed, max_seq_len);
  });
}

void BackendRegistry::register_factory(const std::string& name, BackendFactory factory) {
  factories_[name] = std::move(factory);
}

std::unique_ptr<EncoderBackend> BackendRegistry::make(const std::string& name,
                                                      const nlohmann::json& params) const {
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    std::string known;
    for (const auto& [k, v] : factories_) {
      if (!known.empty()) known += ", ";
      known += k;
    }
    throw ValidationError("unknown encoder backend '" + name + "' (available: " + known + ")");
  }
  return it->second(params);
}

std::vector<std::string> BackendRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

std::unique_ptr<EncoderBackend> make_backend(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("name") || !config["name"].is_string()) {
    throw ValidationError("encoder config must be an object with a string 'name'");
  }
  return BackendRegistry::instance().make(config["name"].get<std::string>(), config);
}

// ---------------------------------------------------------------------------
// On-disk tensor cache
// ---------------------------------------------------------------------------

TensorCache::TensorCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path TensorCache::entry_path(const std::string& doc_id,
                                              const EncoderBackend& backend) const {
  const std::string key =
      doc_id + "\x1f" + backend.name() + "\x1f" + backend.version_hash();
  return dir_ / (hex64(fnv1a64(key)) + ".bin");
}

std::optional<RelationshipTensor> TensorCache::load(const std::string& doc_id,
                                                    const EncoderBackend& backend) const {
  const std::filesystem::path bin = entry_path(doc_id, backend);
  std::filesystem::path meta = bin;
  meta.replace_extension(".json");
  if (!std::filesystem::exists(bin) || !std::filesystem::exists(meta)) return std::nullopt;

  std::ifstream in(meta);
  if (!in) throw IoError("cannot open '" + meta.string() + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("cache sidecar '" + meta.string() + "': " + e.what());
  }
  if (j.value("doc_id", "") != doc_id || j.value("backend", "") != backend.name() ||
      j.value("version", "") != backend.version_hash()) {
    return std::nullopt;  // hash collision or stale entry; fall through to recompute
  }
  const int n = j.value("n", 0);
  const int d = j.value("d", 0);
  if (n < 1 || d != backend.dim()) return std::nullopt;

  RelationshipTensor tensor = RelationshipTensor::zeros(n, d);
  tensor.values = load_array_file(bin, tensor.values.size());
  return tensor;
}

void TensorCache::store(const std::string& doc_id, const EncoderBackend& backend,
                        const RelationshipTensor& tensor) const {
  const std::filesystem::path bin = entry_path(doc_id, backend);
  std::filesystem::path meta = bin;
  meta.replace_extension(".json");
  save_array_file(bin, tensor.values);
  nlohmann::ordered_json j;
  j["doc_id"] = doc_id;
  j["backend"] = backend.name();
  j["version"] = backend.version_hash();
  j["n"] = tensor.n;
  j["d"] = tensor.d;
  std::ofstream out(meta, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + meta.string() + "' for writing");
  out << j.dump(2) << '\n';
}

RelationshipTensor encode_pairs_cached(const Document& doc, const EncoderBackend& backend,
                                       const TensorCache* cache, int threads) {
  if (cache != nullptr) {
    if (auto hit = cache->load(doc.doc_id, backend);
        hit.has_value() && hit->n == doc.size()) {
      return std::move(*hit);
    }
  }
  RelationshipTensor tensor = encode_pairs(doc, backend, threads);
  if (cache != nullptr) cache->store(doc.doc_id, backend, tensor);
  return tensor;
}

}  // namespace dmon
