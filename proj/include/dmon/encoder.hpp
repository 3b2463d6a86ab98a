#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dmon/tensor.hpp"
#include "dmon/types.hpp"

namespace dmon {

// Head text, separator, tail text. Order matters: head first.
std::string pair_text(std::string_view head, std::string_view tail, std::string_view separator);

// A pluggable text encoder mapping paired text to a d-vector. Implementations
// must be deterministic given fixed weights and truncate their input to
// max_seq_len units before encoding.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual int max_seq_len() const = 0;
  virtual std::string separator() const = 0;
  // Whether encode() may be called from several threads at once.
  virtual bool concurrent_safe() const = 0;
  virtual std::vector<double> encode(std::string_view paired_text) const = 0;

  // Identity of the encoding function; cache keys include it.
  virtual std::string version_hash() const;
};

// Deterministic feature-hashed token vector, L2-normalized. Token hashes are
// salted with the token's position so that head/tail order is encodable;
// the documented mapping is
//   slot  = mix64(fnv1a64(token) ^ derive_seed(seed, "toy-token", position))
//   index = slot % d, sign = +1 if the top bit of slot is 0 else -1
// followed by L2 normalization (a degenerate all-zero bag normalizes to e0).
std::vector<double> toy_encode(std::string_view text, int d, std::uint64_t seed);

// Test-scale backend over toy_encode. Tokenization is ASCII whitespace
// splitting; truncation keeps the first max_seq_len tokens.
class ToyHashEncoder final : public EncoderBackend {
 public:
  ToyHashEncoder(int dim, std::uint64_t seed, int max_seq_len = 128);

  std::string name() const override { return "toy"; }
  int dim() const override { return dim_; }
  int max_seq_len() const override { return max_seq_len_; }
  std::string separator() const override { return " [SEP] "; }
  bool concurrent_safe() const override { return true; }
  std::vector<double> encode(std::string_view paired_text) const override;

  std::uint64_t seed() const { return seed_; }

 private:
  int dim_;
  std::uint64_t seed_;
  int max_seq_len_;
};

// Builds the relationship tensor: result[i][j] is the encoding of
// pair_text(sentences[i], sentences[j]). With threads > 1 and a backend that
// declares itself concurrent-safe, rows are encoded in parallel; outputs are
// written by (i, j) index so the result is identical either way.
RelationshipTensor encode_pairs(const Document& doc, const EncoderBackend& backend,
                                int threads = 1);

// ---------------------------------------------------------------------------
// Backend registry
// ---------------------------------------------------------------------------

using BackendFactory =
    std::function<std::unique_ptr<EncoderBackend>(const nlohmann::json& params)>;

class BackendRegistry {
 public:
  static BackendRegistry& instance();

  void register_factory(const std::string& name, BackendFactory factory);
  std::unique_ptr<EncoderBackend> make(const std::string& name, const nlohmann::json& params) const;
  std::vector<std::string> names() const;

 private:
  BackendRegistry();
  std::map<std::string, BackendFactory> factories_;
};

// Convenience: { "name": "toy", "dim": 64, "seed": 0, "max_seq_len": 128 }.
std::unique_ptr<EncoderBackend> make_backend(const nlohmann::json& config);

// ---------------------------------------------------------------------------
// On-disk tensor cache
// ---------------------------------------------------------------------------

// Stores one binary array file per (doc_id, backend name, backend version
// hash) with a JSON sidecar of metadata.
class TensorCache {
 public:
  explicit TensorCache(std::filesystem::path dir);

  std::optional<RelationshipTensor> load(const std::string& doc_id,
                                         const EncoderBackend& backend) const;
  void store(const std::string& doc_id, const EncoderBackend& backend,
             const RelationshipTensor& tensor) const;

  std::filesystem::path entry_path(const std::string& doc_id,
                                   const EncoderBackend& backend) const;

 private:
  std::filesystem::path dir_;
};

// encode_pairs with an optional cache in front of it.
RelationshipTensor encode_pairs_cached(const Document& doc, const EncoderBackend& backend,
                                       const TensorCache* cache, int threads = 1);

}  // namespace dmon
