#include "dmon/config.hpp"

#include <algorithm>
#include <fstream>

#include "dmon/corpus.hpp"

namespace dmon {

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

void save_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

void require_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                        std::string_view context) {
  if (!j.is_object()) {
    throw ParseError(std::string(context) + " must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string known;
      for (const std::string& k : allowed) {
        if (!known.empty()) known += ", ";
        known += k;
      }
      throw ParseError(std::string(context) + ": unknown key '" + key + "' (known keys: " +
                       known + ")");
    }
  }
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> keys = {
      "window",        "lambda_h",     "lambda_t",    "base_lr",        "total_steps",
      "batch_docs",    "seed",         "mixed_precision", "encoder_mode", "encoder_dim",
      "encoder_seed",  "max_seq_len",  "kernel_sizes", "weight_decay",  "beta1",
      "beta2",         "adam_eps",     "checkpoint_every", "log_every", "eval_every",
      "variant",       "no_relation_label", "cache_dir"};
  require_known_keys(j, keys, "train config");
  TrainConfig c;
  try {
    c.window = j.value("window", c.window);
    c.lambda_h = j.value("lambda_h", c.lambda_h);
    c.lambda_t = j.value("lambda_t", c.lambda_t);
    c.base_lr = j.value("base_lr", c.base_lr);
    c.total_steps = j.value("total_steps", c.total_steps);
    c.batch_docs = j.value("batch_docs", c.batch_docs);
    c.seed = j.value("seed", c.seed);
    c.mixed_precision = j.value("mixed_precision", c.mixed_precision);
    c.encoder_mode = j.value("encoder_mode", c.encoder_mode);
    c.encoder_dim = j.value("encoder_dim", c.encoder_dim);
    c.encoder_seed = j.value("encoder_seed", c.encoder_seed);
    c.max_seq_len = j.value("max_seq_len", c.max_seq_len);
    if (j.contains("kernel_sizes")) {
      const auto ks = j.at("kernel_sizes").get<std::vector<int>>();
      if (ks.size() != 5) {
        throw ParseError("train config: kernel_sizes must list exactly five sizes");
      }
      std::copy(ks.begin(), ks.end(), c.kernel_sizes.begin());
    }
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.log_every = j.value("log_every", c.log_every);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.variant = j.value("variant", c.variant);
    c.no_relation_label = j.value("no_relation_label", c.no_relation_label);
    c.cache_dir = j.value("cache_dir", c.cache_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["window"] = c.window;
  j["lambda_h"] = c.lambda_h;
  j["lambda_t"] = c.lambda_t;
  j["base_lr"] = c.base_lr;
  j["total_steps"] = c.total_steps;
  j["batch_docs"] = c.batch_docs;
  j["seed"] = c.seed;
  j["mixed_precision"] = c.mixed_precision;
  j["encoder_mode"] = c.encoder_mode;
  j["encoder_dim"] = c.encoder_dim;
  j["encoder_seed"] = c.encoder_seed;
  j["max_seq_len"] = c.max_seq_len;
  j["kernel_sizes"] = c.kernel_sizes;
  j["weight_decay"] = c.weight_decay;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["adam_eps"] = c.adam_eps;
  j["checkpoint_every"] = c.checkpoint_every;
  j["log_every"] = c.log_every;
  j["eval_every"] = c.eval_every;
  j["variant"] = c.variant;
  j["no_relation_label"] = c.no_relation_label;
  j["cache_dir"] = c.cache_dir;
  return j;
}

std::string config_hash(const TrainConfig& c) {
  return hex64(fnv1a64(train_config_to_json(c).dump()));
}

void RunConfig::validate() const {
  train.validate();
  corpus_format_from_string(corpus_format);
  if (metric_preset != "abstrct" && metric_preset != "cdcp" && metric_preset != "scidtb" &&
      metric_preset != "auto") {
    throw ValidationError("unknown metric preset '" + metric_preset +
                          "' (expected abstrct, cdcp, scidtb, or auto)");
  }
  if (out_dir.empty()) throw ValidationError("out_dir must not be empty");
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> keys = {"train",     "corpus_path", "corpus_format",
                                                "eval_path", "metric_preset", "out_dir"};
  require_known_keys(j, keys, "run config");
  RunConfig c;
  try {
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    c.corpus_path = j.value("corpus_path", c.corpus_path);
    c.corpus_format = j.value("corpus_format", c.corpus_format);
    c.eval_path = j.value("eval_path", c.eval_path);
    c.metric_preset = j.value("metric_preset", c.metric_preset);
    c.out_dir = j.value("out_dir", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("run config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["train"] = train_config_to_json(c.train);
  j["corpus_path"] = c.corpus_path;
  j["corpus_format"] = c.corpus_format;
  j["eval_path"] = c.eval_path;
  j["metric_preset"] = c.metric_preset;
  j["out_dir"] = c.out_dir;
  return j;
}

}  // namespace dmon
