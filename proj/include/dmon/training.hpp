#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmon/encoder.hpp"
#include "dmon/fusion.hpp"
#include "dmon/metrics.hpp"
#include "dmon/model.hpp"
#include "dmon/types.hpp"

namespace dmon {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct TrainConfig {
  int window = 13;  // cropping window m
  double lambda_h = 0.5;
  double lambda_t = 0.5;
  double base_lr = 2e-5;
  int total_steps = 1000;
  int batch_docs = 1;  // documents per optimizer step
  std::uint64_t seed = 0;
  bool mixed_precision = false;  // float-rounded parameter arithmetic
  std::string encoder_mode = "frozen-toy";
  int encoder_dim = 64;
  std::uint64_t encoder_seed = 0;
  int max_seq_len = 128;
  std::array<int, 5> kernel_sizes = {7, 5, 5, 3, 1};
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int checkpoint_every = 0;  // 0: final only
  int log_every = 1;
  int eval_every = 0;  // 0: never (validation ignored)
  std::string variant = "full";
  std::string no_relation_label = "none";
  std::string cache_dir;  // optional on-disk tensor cache

  void validate() const;
};

TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json train_config_to_json(const TrainConfig& c);

// FNV-1a over the canonical serialized config; echoed into every output.
std::string config_hash(const TrainConfig& c);

// ---------------------------------------------------------------------------
// Losses and schedule
// ---------------------------------------------------------------------------

// Mean over all m^2 cells of categorical cross-entropy between
// softmax(logits[cell]) and the one-hot label.
double branch_loss(const BranchLogits& logits, const LabelMatrix& labels);

// Same, also writing scale * d(loss)/d(logits) into *dlogits.
double branch_loss_grad(const BranchLogits& logits, const LabelMatrix& labels, double scale,
                        BranchLogits* dlogits);

double joint_loss(double loss_h, double loss_t, double lambda_h, double lambda_t);

// base_lr * (1 - step / total_steps); steps past the end clamp to 0.
double lr_schedule(int step, int total_steps, double base_lr);

// ---------------------------------------------------------------------------
// Optimizer: Adam with decoupled weight decay
// ---------------------------------------------------------------------------

struct AdamW {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  long t = 0;
  std::vector<std::vector<double>> m;  // first moments, tensors() order
  std::vector<std::vector<double>> v;  // second moments

  void init(DmonParams& params);
  void step(DmonParams& params, DmonParams& grads, double lr);
};

// ---------------------------------------------------------------------------
// Variants: one code path, config transformations
// ---------------------------------------------------------------------------

enum class ShuffleMode { none, ord, rad, ord_rad };

struct VariantPlan {
  double lambda_h = 0.5;
  double lambda_t = 0.5;
  bool msrm_bypass = false;
  ShuffleMode shuffle = ShuffleMode::none;
  bool crop = true;  // false: always feed the full tensor
  VoterMode voter = VoterMode::confidence;
};

const std::vector<std::string>& variant_names();
// Throws ValidationError listing valid names on an unknown variant.
VariantPlan resolve_variant(std::string_view name, double lambda_h, double lambda_t);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct CheckpointState {
  DmonParams params;
  AdamW opt;
  long step = 0;
  std::uint64_t seed = 0;
  std::string cfg_hash;
  LabelSpace space;
  nlohmann::json encoder_info;  // {name, dim, seed, max_seq_len, version}
  std::string variant = "full";
};

// stem + ".json" manifest (shapes, kernel map, seed, config hash) and
// stem + ".bin" little-endian double archive (parameters, then moments).
void save_checkpoint(const std::filesystem::path& stem, const CheckpointState& state);
CheckpointState load_checkpoint(const std::filesystem::path& stem);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct StepRecord {
  long step = 0;
  double loss_h = 0.0;
  double loss_t = 0.0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainHooks {
  std::function<void(const StepRecord&)> on_step;  // called every log_every steps
  std::function<void(long step, double val_f1)> on_validation;
  std::function<void(long step, const CheckpointState&)> on_checkpoint;
};

// Pre-encoded training set: one tensor and gold matrix per document.
struct EncodedCorpus {
  std::vector<Document> docs;
  std::vector<RelationshipTensor> tensors;
  std::vector<LabelMatrix> golds;
  LabelSpace space;
};

EncodedCorpus encode_corpus(const std::vector<Document>& docs, const LabelSpace& space,
                            const EncoderBackend& backend, const TensorCache* cache = nullptr);

// Fresh state at step 0: parameters from the config seed, optimizer zeroed.
CheckpointState init_training(const TrainConfig& config, const LabelSpace& space,
                              const EncoderBackend& backend);

// Advances `steps` optimizer steps. The trajectory is a pure function of
// (config, corpus, state.step), so resuming a loaded checkpoint reproduces an
// uninterrupted run exactly. Throws NumericError naming step and document on
// a non-finite loss.
void train_steps(CheckpointState& state, const EncodedCorpus& corpus, const TrainConfig& config,
                 long steps, const TrainHooks& hooks = {},
                 const EncodedCorpus* validation = nullptr);

// Convenience: init + train total_steps.
CheckpointState train(const std::vector<Document>& corpus, const TrainConfig& config,
                      const TrainHooks& hooks = {},
                      const std::vector<Document>* validation = nullptr);

// Fused macro-F1 of the model on the given documents (the overall macro
// column), using the variant's voter mode.
double evaluate_macro_f1(const CheckpointState& state, const EncodedCorpus& corpus,
                         VoterMode voter);

// Full metrics report over fused full-tensor predictions.
MetricsReport evaluate_report(const CheckpointState& state, const EncodedCorpus& corpus,
                              VoterMode voter, const std::vector<ColumnDef>& columns,
                              bool include_diagonal = false);

// Rebuilds the encoder backend recorded in a checkpoint / config.
std::unique_ptr<EncoderBackend> backend_from_config(const TrainConfig& config);
std::unique_ptr<EncoderBackend> backend_from_info(const nlohmann::json& encoder_info);

}  // namespace dmon
