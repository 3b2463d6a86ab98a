#include "dmon/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dmon/corpus.hpp"
#include "dmon/cropping.hpp"
#include "dmon/metrics.hpp"

namespace dmon {

void TrainConfig::validate() const {
  if (window < 1) throw ValidationError("config: window must be >= 1");
  if (lambda_h < 0.0 || lambda_t < 0.0) throw ValidationError("config: lambdas must be >= 0");
  if (base_lr <= 0.0) throw ValidationError("config: base_lr must be positive");
  if (total_steps < 1) throw ValidationError("config: total_steps must be >= 1");
  if (batch_docs < 1) throw ValidationError("config: batch_docs must be >= 1");
  if (encoder_dim < 1) throw ValidationError("config: encoder_dim must be >= 1");
  if (max_seq_len < 1) throw ValidationError("config: max_seq_len must be >= 1");
  for (int k : kernel_sizes) {
    if (k < 1 || k % 2 == 0) {
      throw ValidationError("config: kernel size " + std::to_string(k) + " must be odd and >= 1");
    }
  }
  if (weight_decay < 0.0) throw ValidationError("config: weight_decay must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ValidationError("config: betas must lie in [0, 1)");
  }
  if (adam_eps <= 0.0) throw ValidationError("config: adam_eps must be positive");
  if (checkpoint_every < 0 || eval_every < 0) {
    throw ValidationError("config: periodic intervals must be >= 0");
  }
  if (log_every < 1) throw ValidationError("config: log_every must be >= 1");
  if (no_relation_label.empty()) throw ValidationError("config: no_relation_label is empty");
  if (encoder_mode == "finetune-pretrained") {
    throw ValidationError(
        "encoder mode 'finetune-pretrained' is not available in this build; use 'frozen-toy'");
  }
  if (encoder_mode != "frozen-toy") {
    throw ValidationError("config: unknown encoder mode '" + encoder_mode + "'");
  }
  resolve_variant(variant, lambda_h, lambda_t);  // throws on unknown names
}

// ---------------------------------------------------------------------------
// Losses and schedule
// ---------------------------------------------------------------------------

namespace {

// Per-cell log-softmax statistics; shared by loss and gradient.
double cell_cross_entropy(std::span<const double> logits, int truth) {
  double max_logit = logits[0];
  for (double x : logits) max_logit = std::max(max_logit, x);
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - max_logit);
  const double lse = max_logit + std::log(sum);
  return lse - logits[static_cast<size_t>(truth)];
}

}  // namespace

double branch_loss(const BranchLogits& logits, const LabelMatrix& labels) {
  return branch_loss_grad(logits, labels, 0.0, nullptr);
}

double branch_loss_grad(const BranchLogits& logits, const LabelMatrix& labels, double scale,
                        BranchLogits* dlogits) {
  if (logits.m != labels.n) {
    throw ValidationError("branch loss: logits are " + std::to_string(logits.m) +
                          "x but labels are " + std::to_string(labels.n) + "x");
  }
  const int m = logits.m;
  const int l = logits.l;
  double total = 0.0;
  const double cell_weight = 1.0 / (static_cast<double>(m) * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const int truth = labels.at(i, j);
      if (truth < 0 || truth >= l) {
        throw ValidationError("branch loss: label " + std::to_string(truth) + " at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ") outside [0, " +
                              std::to_string(l) + ")");
      }
      const auto cell = logits.cell(i, j);
      total += cell_cross_entropy(cell, truth);
      if (dlogits != nullptr && scale != 0.0) {
        double max_logit = cell[0];
        for (double x : cell) max_logit = std::max(max_logit, x);
        double sum = 0.0;
        for (double x : cell) sum += std::exp(x - max_logit);
        auto dcell = dlogits->cell(i, j);
        for (int c = 0; c < l; ++c) {
          const double p = std::exp(cell[static_cast<size_t>(c)] - max_logit) / sum;
          dcell[static_cast<size_t>(c)] =
              scale * cell_weight * (p - (c == truth ? 1.0 : 0.0));
        }
      }
    }
  }
  return total * cell_weight;
}

double joint_loss(double loss_h, double loss_t, double lambda_h, double lambda_t) {
  return lambda_h * loss_h + lambda_t * loss_t;
}

double lr_schedule(int step, int total_steps, double base_lr) {
  if (total_steps < 1) throw ValidationError("lr schedule: total_steps must be >= 1");
  if (step < 0) throw ValidationError("lr schedule: step must be >= 0");
  if (step >= total_steps) return 0.0;  // past-the-end steps clamp to 0
  return base_lr * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

void AdamW::init(DmonParams& params) {
  m.clear();
  v.clear();
  t = 0;
  for (const auto& ref : params.tensors()) {
    m.emplace_back(ref.data->size(), 0.0);
    v.emplace_back(ref.data->size(), 0.0);
  }
}

void AdamW::step(DmonParams& params, DmonParams& grads, double lr) {
  auto prefs = params.tensors();
  auto grefs = grads.tensors();
  if (m.size() != prefs.size() || grefs.size() != prefs.size()) {
    throw ValidationError("optimizer state does not match the parameter layout");
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < prefs.size(); ++i) {
    std::vector<double>& p = *prefs[i].data;
    const std::vector<double>& g = *grefs[i].data;
    std::vector<double>& mi = m[i];
    std::vector<double>& vi = v[i];
    if (g.size() != p.size() || mi.size() != p.size()) {
      throw ValidationError("optimizer tensor '" + prefs[i].name + "' has a mismatched size");
    }
    for (size_t e = 0; e < p.size(); ++e) {
      mi[e] = beta1 * mi[e] + (1.0 - beta1) * g[e];
      vi[e] = beta2 * vi[e] + (1.0 - beta2) * g[e] * g[e];
      const double mhat = mi[e] / bc1;
      const double vhat = vi[e] / bc2;
      p[e] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * p[e]);
    }
  }
}

// ---------------------------------------------------------------------------
// Variants
// ---------------------------------------------------------------------------

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {
      "full",        "no_voter_h",  "no_voter_t", "no_T",        "no_H",
      "no_HT",       "ord_shuffle", "rad_shuffle", "ord_and_rad", "full_tensor_training"};
  return names;
}

VariantPlan resolve_variant(std::string_view name, double lambda_h, double lambda_t) {
  VariantPlan plan;
  plan.lambda_h = lambda_h;
  plan.lambda_t = lambda_t;
  if (name == "full") {
    // defaults
  } else if (name == "no_voter_h") {
    plan.voter = VoterMode::force_head;
  } else if (name == "no_voter_t") {
    plan.voter = VoterMode::force_tail;
  } else if (name == "no_T") {
    // tail tower removed: nothing trains it, nothing reads it
    plan.lambda_t = 0.0;
    plan.voter = VoterMode::force_head;
  } else if (name == "no_H") {
    plan.lambda_h = 0.0;
    plan.voter = VoterMode::force_tail;
  } else if (name == "no_HT") {
    // both towers removed: a per-cell classifier over raw tensor cells
    plan.msrm_bypass = true;
    plan.lambda_t = 0.0;
    plan.voter = VoterMode::force_head;
  } else if (name == "ord_shuffle") {
    plan.shuffle = ShuffleMode::ord;
  } else if (name == "rad_shuffle") {
    plan.shuffle = ShuffleMode::rad;
  } else if (name == "ord_and_rad") {
    plan.shuffle = ShuffleMode::ord_rad;
  } else if (name == "full_tensor_training") {
    plan.crop = false;
  } else {
    std::string valid;
    for (const std::string& v : variant_names()) {
      if (!valid.empty()) valid += ", ";
      valid += v;
    }
    throw ValidationError("unknown variant '" + std::string(name) + "' (valid: " + valid + ")");
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

void save_checkpoint(const std::filesystem::path& stem, const CheckpointState& state) {
  CheckpointState& mut = const_cast<CheckpointState&>(state);
  auto refs = mut.params.tensors();

  nlohmann::ordered_json manifest;
  manifest["format"] = "dmon-checkpoint";
  manifest["version"] = 1;
  manifest["step"] = state.step;
  manifest["seed"] = state.seed;
  manifest["config_hash"] = state.cfg_hash;
  manifest["variant"] = state.variant;
  manifest["label_space"] = {{"labels", state.space.labels},
                             {"no_relation_index", state.space.no_relation_index}};
  manifest["encoder"] = state.encoder_info;
  manifest["model"] = {
      {"feature_dim", mut.params.feature_dim()},
      {"num_labels", mut.params.num_labels()},
      {"kernel_sizes", mut.params.head_msrm.kernel_sizes()},
      {"msrm_bypass", mut.params.msrm_bypass},
  };
  manifest["optimizer"] = {{"beta1", state.opt.beta1}, {"beta2", state.opt.beta2},
                           {"eps", state.opt.eps},     {"weight_decay", state.opt.weight_decay},
                           {"t", state.opt.t}};
  auto tensor_list = nlohmann::ordered_json::array();
  size_t total = 0;
  for (const auto& ref : refs) {
    tensor_list.push_back({{"name", ref.name}, {"shape", ref.shape}});
    total += ref.data->size();
  }
  manifest["tensors"] = std::move(tensor_list);

  std::filesystem::path manifest_path = stem;
  manifest_path += ".json";
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + manifest_path.string() + "' for writing");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("short write to '" + manifest_path.string() + "'");

  // Archive layout: all parameter tensors, then first moments, then second
  // moments, each in tensors() order.
  std::vector<double> blob;
  blob.reserve(total * 3);
  for (const auto& ref : refs) blob.insert(blob.end(), ref.data->begin(), ref.data->end());
  for (const auto& mo : state.opt.m) blob.insert(blob.end(), mo.begin(), mo.end());
  for (const auto& vo : state.opt.v) blob.insert(blob.end(), vo.begin(), vo.end());
  std::filesystem::path bin_path = stem;
  bin_path += ".bin";
  save_array_file(bin_path, blob);
}

CheckpointState load_checkpoint(const std::filesystem::path& stem) {
  std::filesystem::path manifest_path = stem;
  manifest_path += ".json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open '" + manifest_path.string() + "' for reading");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint manifest '" + manifest_path.string() + "': " + e.what());
  }
  if (manifest.value("format", "") != "dmon-checkpoint") {
    throw ParseError("'" + manifest_path.string() + "' is not a checkpoint manifest");
  }

  CheckpointState state;
  try {
    state.step = manifest.at("step").get<long>();
    state.seed = manifest.at("seed").get<std::uint64_t>();
    state.cfg_hash = manifest.at("config_hash").get<std::string>();
    state.variant = manifest.at("variant").get<std::string>();
    state.space.labels = manifest.at("label_space").at("labels").get<std::vector<std::string>>();
    state.space.no_relation_index = manifest.at("label_space").at("no_relation_index").get<int>();
    state.encoder_info = manifest.at("encoder");

    const auto& model = manifest.at("model");
    const int d = model.at("feature_dim").get<int>();
    const int l = model.at("num_labels").get<int>();
    const auto ks = model.at("kernel_sizes").get<std::vector<int>>();
    if (ks.size() != 5) throw ParseError("checkpoint: expected five kernel sizes");
    std::array<int, 5> kernel_sizes;
    std::copy(ks.begin(), ks.end(), kernel_sizes.begin());
    state.params.head_msrm = make_msrm(d, kernel_sizes);
    state.params.tail_msrm = make_msrm(d, kernel_sizes);
    state.params.head_classifier = Linear::zeros(d, l);
    state.params.tail_classifier = Linear::zeros(d, l);
    state.params.msrm_bypass = model.at("msrm_bypass").get<bool>();

    const auto& opt = manifest.at("optimizer");
    state.opt.beta1 = opt.at("beta1").get<double>();
    state.opt.beta2 = opt.at("beta2").get<double>();
    state.opt.eps = opt.at("eps").get<double>();
    state.opt.weight_decay = opt.at("weight_decay").get<double>();
    state.opt.init(state.params);
    state.opt.t = opt.at("t").get<long>();

    auto refs = state.params.tensors();
    const auto& tensor_list = manifest.at("tensors");
    if (tensor_list.size() != refs.size()) {
      throw ParseError("checkpoint: expected " + std::to_string(refs.size()) + " tensors, found " +
                       std::to_string(tensor_list.size()));
    }
    size_t total = 0;
    for (size_t i = 0; i < refs.size(); ++i) {
      if (tensor_list[i].at("name").get<std::string>() != refs[i].name ||
          tensor_list[i].at("shape").get<std::vector<int>>() != refs[i].shape) {
        throw ParseError("checkpoint: tensor '" + refs[i].name +
                         "' does not match the manifest entry");
      }
      total += refs[i].data->size();
    }

    std::filesystem::path bin_path = stem;
    bin_path += ".bin";
    const std::vector<double> blob = load_array_file(bin_path, total * 3);
    size_t off = 0;
    for (auto& ref : refs) {
      std::copy(blob.begin() + static_cast<long>(off),
                blob.begin() + static_cast<long>(off + ref.data->size()), ref.data->begin());
      off += ref.data->size();
    }
    for (auto& mo : state.opt.m) {
      std::copy(blob.begin() + static_cast<long>(off),
                blob.begin() + static_cast<long>(off + mo.size()), mo.begin());
      off += mo.size();
    }
    for (auto& vo : state.opt.v) {
      std::copy(blob.begin() + static_cast<long>(off),
                blob.begin() + static_cast<long>(off + vo.size()), vo.begin());
      off += vo.size();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint manifest '" + manifest_path.string() + "': " + e.what());
  }
  state.space.validate();
  return state;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

EncodedCorpus encode_corpus(const std::vector<Document>& docs, const LabelSpace& space,
                            const EncoderBackend& backend, const TensorCache* cache) {
  EncodedCorpus corpus;
  corpus.space = space;
  for (const Document& doc : docs) {
    corpus.golds.push_back(build_label_matrix(doc, space));
    corpus.tensors.push_back(encode_pairs_cached(doc, backend, cache));
    corpus.docs.push_back(doc);
  }
  return corpus;
}

CheckpointState init_training(const TrainConfig& config, const LabelSpace& space,
                              const EncoderBackend& backend) {
  config.validate();
  space.validate();
  const VariantPlan plan = resolve_variant(config.variant, config.lambda_h, config.lambda_t);

  CheckpointState state;
  state.params = init_params(backend.dim(), space.size(), config.kernel_sizes, config.seed);
  state.params.msrm_bypass = plan.msrm_bypass;
  state.opt.beta1 = config.beta1;
  state.opt.beta2 = config.beta2;
  state.opt.eps = config.adam_eps;
  state.opt.weight_decay = config.weight_decay;
  state.opt.init(state.params);
  state.step = 0;
  state.seed = config.seed;
  state.cfg_hash = config_hash(config);
  state.space = space;
  state.encoder_info = {{"name", backend.name()},
                        {"dim", backend.dim()},
                        {"seed", config.encoder_seed},
                        {"max_seq_len", backend.max_seq_len()},
                        {"version", backend.version_hash()}};
  state.variant = config.variant;
  return state;
}

namespace {

std::vector<int> epoch_permutation(std::uint64_t seed, long epoch, int n) {
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, "order", static_cast<std::uint64_t>(epoch)));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  return perm;
}

void round_to_float(DmonParams& params) {
  for (auto& ref : params.tensors()) {
    for (double& x : *ref.data) x = static_cast<double>(static_cast<float>(x));
  }
}

}  // namespace

void train_steps(CheckpointState& state, const EncodedCorpus& corpus, const TrainConfig& config,
                 long steps, const TrainHooks& hooks, const EncodedCorpus* validation) {
  config.validate();
  if (corpus.docs.empty()) throw ValidationError("training corpus is empty");
  if (state.space.size() != state.params.num_labels()) {
    throw ValidationError("label space and model head are inconsistent");
  }
  const VariantPlan plan = resolve_variant(config.variant, config.lambda_h, config.lambda_t);
  state.params.msrm_bypass = plan.msrm_bypass;

  const int num_docs = static_cast<int>(corpus.docs.size());
  const long end = state.step + steps;
  long perm_epoch = -1;
  std::vector<int> perm;
  DmonParams grads = zeros_like(state.params);

  for (long s = state.step; s < end; ++s) {
    const double lr = lr_schedule(static_cast<int>(s), config.total_steps, config.base_lr);
    for (auto& ref : grads.tensors()) std::fill(ref.data->begin(), ref.data->end(), 0.0);

    double loss_h_sum = 0.0;
    double loss_t_sum = 0.0;
    for (int b = 0; b < config.batch_docs; ++b) {
      const long cursor = s * config.batch_docs + b;
      const long epoch = cursor / num_docs;
      if (epoch != perm_epoch) {
        perm = epoch_permutation(config.seed, epoch, num_docs);
        perm_epoch = epoch;
      }
      const int di = perm[static_cast<size_t>(cursor % num_docs)];
      const RelationshipTensor& tensor = corpus.tensors[static_cast<size_t>(di)];
      const LabelMatrix& gold = corpus.golds[static_cast<size_t>(di)];
      const std::string& doc_id = corpus.docs[static_cast<size_t>(di)].doc_id;

      // Fresh augmentation stream per (step, batch slot): the trajectory is a
      // pure function of (config, corpus, step), which is what makes resume
      // exact.
      Rng aug(derive_seed(config.seed, "crop", static_cast<std::uint64_t>(s),
                          static_cast<std::uint64_t>(b)));
      RelationshipTensor sub;
      LabelMatrix sub_labels;
      if (!plan.crop) {
        sub = tensor;
        sub_labels = gold;
      } else if (plan.shuffle == ShuffleMode::rad || plan.shuffle == ShuffleMode::ord_rad) {
        const int m_eff = std::min(config.window, tensor.n);
        std::tie(sub, sub_labels) = shuffle_rad(tensor, gold, m_eff, aug);
        if (plan.shuffle == ShuffleMode::ord_rad) {
          CropPlan identity;
          identity.n = m_eff;
          identity.indices.resize(static_cast<size_t>(m_eff));
          std::iota(identity.indices.begin(), identity.indices.end(), 0);
          std::tie(sub, sub_labels) = apply_crop(sub, sub_labels, shuffle_ord(identity, aug));
        }
      } else {
        CropPlan crop = sample_crop(tensor.n, config.window, aug);
        if (plan.shuffle == ShuffleMode::ord) crop = shuffle_ord(crop, aug);
        std::tie(sub, sub_labels) = apply_crop(tensor, gold, crop);
      }

      try {
        BranchWorkspace ws_h, ws_t;
        const BranchLogits head =
            branch_forward_train(sub, state.params.head_msrm, state.params.head_classifier,
                                 Branch::head, state.params.msrm_bypass, ws_h);
        const BranchLogits tail =
            branch_forward_train(sub, state.params.tail_msrm, state.params.tail_classifier,
                                 Branch::tail, state.params.msrm_bypass, ws_t);

        const double inv_batch = 1.0 / static_cast<double>(config.batch_docs);
        double loss_h, loss_t;
        if (plan.lambda_h > 0.0) {
          BranchLogits dhead = BranchLogits::zeros(head.m, head.l, Branch::head);
          loss_h = branch_loss_grad(head, sub_labels, plan.lambda_h * inv_batch, &dhead);
          branch_backward(state.params.head_msrm, state.params.head_classifier, Branch::head,
                          ws_h, dhead, &grads.head_msrm, &grads.head_classifier);
        } else {
          loss_h = branch_loss(head, sub_labels);
        }
        if (plan.lambda_t > 0.0) {
          BranchLogits dtail = BranchLogits::zeros(tail.m, tail.l, Branch::tail);
          loss_t = branch_loss_grad(tail, sub_labels, plan.lambda_t * inv_batch, &dtail);
          branch_backward(state.params.tail_msrm, state.params.tail_classifier, Branch::tail,
                          ws_t, dtail, &grads.tail_msrm, &grads.tail_classifier);
        } else {
          loss_t = branch_loss(tail, sub_labels);
        }
        if (!std::isfinite(loss_h) || !std::isfinite(loss_t)) {
          throw NumericError("non-finite loss");
        }
        loss_h_sum += loss_h;
        loss_t_sum += loss_t;
      } catch (const NumericError& e) {
        throw NumericError("training aborted at step " + std::to_string(s + 1) +
                           " on document '" + doc_id + "': " + e.what());
      }
    }

    state.opt.step(state.params, grads, lr);
    if (config.mixed_precision) round_to_float(state.params);
    state.step = s + 1;

    if (hooks.on_step && state.step % config.log_every == 0) {
      StepRecord rec;
      rec.step = state.step;
      rec.loss_h = loss_h_sum / config.batch_docs;
      rec.loss_t = loss_t_sum / config.batch_docs;
      rec.loss = joint_loss(rec.loss_h, rec.loss_t, plan.lambda_h, plan.lambda_t);
      rec.lr = lr;
      hooks.on_step(rec);
    }
    if (hooks.on_validation && validation != nullptr && config.eval_every > 0 &&
        state.step % config.eval_every == 0) {
      hooks.on_validation(state.step, evaluate_macro_f1(state, *validation, plan.voter));
    }
    if (hooks.on_checkpoint && config.checkpoint_every > 0 &&
        state.step % config.checkpoint_every == 0) {
      hooks.on_checkpoint(state.step, state);
    }
  }
}

CheckpointState train(const std::vector<Document>& corpus, const TrainConfig& config,
                      const TrainHooks& hooks, const std::vector<Document>* validation) {
  config.validate();
  if (corpus.empty()) throw ValidationError("training corpus is empty");
  const LabelSpace space = infer_label_space(corpus, config.no_relation_label);
  const std::unique_ptr<EncoderBackend> backend = backend_from_config(config);

  std::optional<TensorCache> cache;
  if (!config.cache_dir.empty()) cache.emplace(config.cache_dir);
  const TensorCache* cache_ptr = cache.has_value() ? &*cache : nullptr;

  const EncodedCorpus encoded = encode_corpus(corpus, space, *backend, cache_ptr);
  std::optional<EncodedCorpus> encoded_val;
  if (validation != nullptr) {
    encoded_val = encode_corpus(*validation, space, *backend, cache_ptr);
  }

  CheckpointState state = init_training(config, space, *backend);
  train_steps(state, encoded, config, config.total_steps, hooks,
              encoded_val.has_value() ? &*encoded_val : nullptr);
  return state;
}

MetricsReport evaluate_report(const CheckpointState& state, const EncodedCorpus& corpus,
                              VoterMode voter, const std::vector<ColumnDef>& columns,
                              bool include_diagonal) {
  std::vector<LabelMatrix> preds;
  for (const RelationshipTensor& tensor : corpus.tensors) {
    auto [head, tail] = dmon_forward(tensor, state.params);
    FusedPrediction pred = fuse(head, tail, voter);
    for (int i = 0; i < pred.n; ++i) pred.labels.at(i, i) = corpus.space.no_relation_index;
    preds.push_back(std::move(pred.labels));
  }
  return macro_f1(preds, corpus.golds, corpus.space, columns, include_diagonal);
}

double evaluate_macro_f1(const CheckpointState& state, const EncodedCorpus& corpus,
                         VoterMode voter) {
  const auto columns = make_columns("auto", corpus.space);
  return evaluate_report(state, corpus, voter, columns).average("F1");
}

std::unique_ptr<EncoderBackend> backend_from_config(const TrainConfig& config) {
  config.validate();
  // validate() admits only frozen-toy in this build.
  return std::make_unique<ToyHashEncoder>(config.encoder_dim, config.encoder_seed,
                                          config.max_seq_len);
}

std::unique_ptr<EncoderBackend> backend_from_info(const nlohmann::json& encoder_info) {
  if (!encoder_info.is_object() || !encoder_info.contains("name")) {
    throw ValidationError("checkpoint encoder record lacks a name");
  }
  return BackendRegistry::instance().make(encoder_info["name"].get<std::string>(), encoder_info);
}

}  // namespace dmon
