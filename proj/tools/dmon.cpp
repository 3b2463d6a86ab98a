// dmon: train, evaluate, ablate, and sweep the dual-tower relation model.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dmon/config.hpp"
#include "dmon/corpus.hpp"
#include "dmon/plot.hpp"
#include "dmon/training.hpp"

namespace {

using namespace dmon;

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool quiet = false;
};

RunConfig load_run(const GlobalOpts& g) {
  RunConfig run;
  if (!g.config_path.empty()) run = run_config_from_json(load_json_file(g.config_path));
  if (g.seed.has_value()) run.train.seed = *g.seed;
  if (g.out_dir.has_value()) run.out_dir = *g.out_dir;
  return run;
}

void say(const GlobalOpts& g, const std::string& line) {
  if (!g.quiet) std::cout << line << '\n';
}

std::vector<Document> read_corpus(const std::string& path, const std::string& format) {
  return parse_corpus(path, corpus_format_from_string(format));
}

// Shared by train / sweep / ablate: one full training run plus optional
// held-out evaluation, all artifacts under `dir`.
struct RunResult {
  CheckpointState state;
  std::optional<MetricsReport> metrics;
};

RunResult run_training(const GlobalOpts& g, const RunConfig& run,
                       const std::vector<Document>& train_docs,
                       const std::vector<Document>* eval_docs,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  nlohmann::ordered_json cfg_echo = run_config_to_json(run);
  cfg_echo["config_hash"] = config_hash(run.train);
  save_json_file(dir / "config.json", cfg_echo);

  std::ofstream log(dir / "train_log.jsonl", std::ios::trunc);
  if (!log) throw IoError("cannot open '" + (dir / "train_log.jsonl").string() + "' for writing");
  std::ofstream val_log;
  if (eval_docs != nullptr && run.train.eval_every > 0) {
    val_log.open(dir / "val_log.jsonl", std::ios::trunc);
  }

  double best_val = -1.0;
  TrainHooks hooks;
  hooks.on_step = [&log](const StepRecord& r) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["loss_h"] = r.loss_h;
    j["loss_t"] = r.loss_t;
    j["loss"] = r.loss;
    j["lr"] = r.lr;
    log << j.dump() << '\n';
  };
  hooks.on_validation = [&](long step, double val_f1) {
    if (val_log.is_open()) {
      nlohmann::ordered_json j;
      j["step"] = step;
      j["val_f1"] = val_f1;
      val_log << j.dump() << '\n';
    }
    if (val_f1 > best_val) best_val = val_f1;
  };
  hooks.on_checkpoint = [&dir](long step, const CheckpointState& st) {
    save_checkpoint(dir / ("model_step" + std::to_string(step)), st);
  };

  RunResult result;
  result.state = train(train_docs, run.train, hooks, eval_docs);
  save_checkpoint(dir / "model", result.state);

  if (eval_docs != nullptr) {
    const auto backend = backend_from_config(run.train);
    const EncodedCorpus encoded = encode_corpus(*eval_docs, result.state.space, *backend);
    const VariantPlan plan =
        resolve_variant(run.train.variant, run.train.lambda_h, run.train.lambda_t);
    const auto columns = make_columns(run.metric_preset, result.state.space);
    result.metrics = evaluate_report(result.state, encoded, plan.voter, columns);

    nlohmann::ordered_json mj = result.metrics->to_json();
    mj["config_hash"] = result.state.cfg_hash;
    mj["checkpoint_step"] = result.state.step;
    save_json_file(dir / "metrics.json", mj);
  }
  say(g, "trained " + std::to_string(result.state.step) + " steps -> " +
             (dir / "model").string() + " (config hash " + result.state.cfg_hash + ")");
  return result;
}

int run_guarded(const GlobalOpts& g, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  (void)g;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DMON: dual-tower multi-scale relation model over sentence pairs"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "Run config JSON file");
  app.add_option("--seed", g.seed, "Override the training seed");
  app.add_option("--out-dir", g.out_dir, "Output directory");
  app.add_flag("--quiet", g.quiet, "Suppress progress text");

  // --- synth ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  int synth_docs = 0;
  std::string synth_rule = "chain";
  std::string synth_out;
  int synth_min = 4, synth_max = 10;
  double synth_flip = 0.0;
  synth->add_option("--docs", synth_docs, "Number of documents")->required();
  synth->add_option("--rule", synth_rule, "Planted rule: chain or star");
  synth->add_option("-o,--output", synth_out, "Output JSONL path");
  synth->add_option("--min-sentences", synth_min, "Minimum sentences per document");
  synth->add_option("--max-sentences", synth_max, "Maximum sentences per document");
  synth->add_option("--flip-rate", synth_flip, "Probability of swapping support/attack labels");

  // --- train ---------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  std::string train_corpus, train_format, train_eval, train_variant;
  std::optional<int> train_window;
  train_cmd->add_option("--corpus", train_corpus, "Training corpus path");
  train_cmd->add_option("--format", train_format, "Corpus format");
  train_cmd->add_option("--eval-corpus", train_eval, "Held-out corpus for validation/metrics");
  train_cmd->add_option("--variant", train_variant, "Ablation variant");
  train_cmd->add_option("--window", train_window, "Cropping window override");

  // --- eval ----------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_ckpt, eval_corpus, eval_format, eval_columns = "auto", eval_json, eval_csv;
  bool eval_diag = false;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint stem (without .json/.bin)")
      ->required();
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus to evaluate on")->required();
  eval_cmd->add_option("--format", eval_format, "Corpus format");
  eval_cmd->add_option("--columns", eval_columns, "Column preset: abstrct, cdcp, scidtb, auto");
  eval_cmd->add_flag("--include-diagonal", eval_diag, "Score diagonal cells too");
  eval_cmd->add_option("-o,--output", eval_json, "Metrics JSON path");
  eval_cmd->add_option("--csv", eval_csv, "Optional metrics CSV path");

  // --- sweep ---------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "Train/eval across window sizes");
  std::vector<int> sweep_windows;
  std::string sweep_corpus, sweep_format, sweep_eval;
  sweep_cmd->add_option("--windows", sweep_windows, "Window sizes")->required()->delimiter(',');
  sweep_cmd->add_option("--corpus", sweep_corpus, "Training corpus path");
  sweep_cmd->add_option("--format", sweep_format, "Corpus format");
  sweep_cmd->add_option("--eval-corpus", sweep_eval, "Held-out corpus (defaults to training set)");

  // --- ablate --------------------------------------------------------------
  auto* ablate_cmd = app.add_subcommand("ablate", "Train/eval a list of variants");
  std::vector<std::string> ablate_variants;
  std::string ablate_corpus, ablate_format, ablate_eval;
  ablate_cmd->add_option("--variants", ablate_variants, "Variant names")
      ->required()
      ->delimiter(',');
  ablate_cmd->add_option("--corpus", ablate_corpus, "Training corpus path");
  ablate_cmd->add_option("--format", ablate_format, "Corpus format");
  ablate_cmd->add_option("--eval-corpus", ablate_eval, "Held-out corpus (defaults to training set)");

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    return run_guarded(g, [&]() {
      SynthSpec spec;
      spec.num_docs = synth_docs;
      spec.min_sentences = synth_min;
      spec.max_sentences = synth_max;
      spec.planted_rule = synth_rule;
      spec.seed = g.seed.value_or(0);
      spec.label_flip_rate = synth_flip;
      const std::vector<Document> docs = generate_synthetic_corpus(spec);
      std::filesystem::path out = synth_out.empty()
                                      ? std::filesystem::path(g.out_dir.value_or("out")) /
                                            "corpus.jsonl"
                                      : std::filesystem::path(synth_out);
      if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
      write_jsonl(docs, out);
      say(g, "wrote " + std::to_string(docs.size()) + " documents -> " + out.string());
      return 0;
    });
  }

  if (train_cmd->parsed()) {
    return run_guarded(g, [&]() {
      RunConfig run = load_run(g);
      if (!train_corpus.empty()) run.corpus_path = train_corpus;
      if (!train_format.empty()) run.corpus_format = train_format;
      if (!train_eval.empty()) run.eval_path = train_eval;
      if (!train_variant.empty()) run.train.variant = train_variant;
      if (train_window.has_value()) run.train.window = *train_window;
      run.validate();
      if (run.corpus_path.empty()) {
        throw ValidationError("no training corpus: pass --corpus or set corpus_path in --config");
      }
      const std::vector<Document> docs = read_corpus(run.corpus_path, run.corpus_format);
      std::optional<std::vector<Document>> eval_docs;
      if (!run.eval_path.empty()) {
        eval_docs = read_corpus(run.eval_path, run.corpus_format);
      }
      run_training(g, run, docs, eval_docs.has_value() ? &*eval_docs : nullptr, run.out_dir);
      return 0;
    });
  }

  if (eval_cmd->parsed()) {
    return run_guarded(g, [&]() {
      RunConfig run = load_run(g);
      if (!eval_format.empty()) run.corpus_format = eval_format;
      const CheckpointState state = load_checkpoint(eval_ckpt);
      const std::vector<Document> docs = read_corpus(eval_corpus, run.corpus_format);
      const auto backend = backend_from_info(state.encoder_info);
      const EncodedCorpus encoded = encode_corpus(docs, state.space, *backend);
      const VariantPlan plan = resolve_variant(state.variant, 0.5, 0.5);
      const auto columns = make_columns(eval_columns, state.space);
      const MetricsReport report =
          evaluate_report(state, encoded, plan.voter, columns, eval_diag);

      nlohmann::ordered_json mj = report.to_json();
      mj["config_hash"] = state.cfg_hash;
      mj["checkpoint_step"] = state.step;
      std::filesystem::path out = eval_json.empty()
                                      ? std::filesystem::path(g.out_dir.value_or("out")) /
                                            "metrics.json"
                                      : std::filesystem::path(eval_json);
      if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
      save_json_file(out, mj);
      if (!eval_csv.empty()) write_text_file(eval_csv, report.to_csv());

      std::string cols;
      for (const auto& [name, value] : report.averages) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s%s=%.4f", cols.empty() ? "" : "  ", name.c_str(),
                      value);
        cols += buf;
      }
      say(g, cols + "  -> " + out.string());
      return 0;
    });
  }

  if (sweep_cmd->parsed()) {
    return run_guarded(g, [&]() {
      RunConfig run = load_run(g);
      if (!sweep_corpus.empty()) run.corpus_path = sweep_corpus;
      if (!sweep_format.empty()) run.corpus_format = sweep_format;
      if (!sweep_eval.empty()) run.eval_path = sweep_eval;
      run.validate();
      if (run.corpus_path.empty()) {
        throw ValidationError("no training corpus: pass --corpus or set corpus_path in --config");
      }
      for (int w : sweep_windows) {
        if (w < 1) throw ValidationError("sweep: window sizes must be >= 1");
      }
      const std::vector<Document> docs = read_corpus(run.corpus_path, run.corpus_format);
      const std::vector<Document> eval_docs =
          run.eval_path.empty() ? docs : read_corpus(run.eval_path, run.corpus_format);

      const std::filesystem::path dir(run.out_dir);
      std::filesystem::create_directories(dir);
      auto rows = nlohmann::ordered_json::array();
      Series f1_series{"F1", {}, {}};
      bool any_failed = false;
      for (int w : sweep_windows) {
        RunConfig sub = run;
        sub.train.window = w;
        nlohmann::ordered_json row;
        row["window"] = w;
        try {
          RunResult res = run_training(g, sub, docs, &eval_docs,
                                       dir / ("window_" + std::to_string(w)));
          const double f1 = res.metrics->average("F1");
          row["f1"] = f1;
          row["config_hash"] = res.state.cfg_hash;
          row["status"] = "ok";
          f1_series.x.push_back(w);
          f1_series.y.push_back(f1);
        } catch (const std::exception& e) {
          row["status"] = std::string("failed: ") + e.what();
          any_failed = true;
        }
        rows.push_back(std::move(row));
      }

      nlohmann::ordered_json out;
      out["rows"] = rows;
      save_json_file(dir / "sweep.json", out);
      std::string csv = "window,F1\n";
      for (size_t i = 0; i < f1_series.x.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d,%.6f\n", static_cast<int>(f1_series.x[i]),
                      f1_series.y[i]);
        csv += buf;
      }
      write_text_file(dir / "sweep.csv", csv);
      if (!f1_series.x.empty()) {
        write_text_file(dir / "sweep.svg",
                        render_line_chart_svg({f1_series}, "Macro-F1 vs window size",
                                              "window size", "macro-F1"));
      }
      say(g, "sweep results -> " + (dir / "sweep.csv").string());
      return any_failed ? 1 : 0;
    });
  }

  if (ablate_cmd->parsed()) {
    return run_guarded(g, [&]() {
      RunConfig run = load_run(g);
      if (!ablate_corpus.empty()) run.corpus_path = ablate_corpus;
      if (!ablate_format.empty()) run.corpus_format = ablate_format;
      if (!ablate_eval.empty()) run.eval_path = ablate_eval;
      run.validate();
      if (run.corpus_path.empty()) {
        throw ValidationError("no training corpus: pass --corpus or set corpus_path in --config");
      }
      // Fail fast on unknown names before any training starts.
      for (const std::string& v : ablate_variants) resolve_variant(v, 0.5, 0.5);

      const std::vector<Document> docs = read_corpus(run.corpus_path, run.corpus_format);
      const std::vector<Document> eval_docs =
          run.eval_path.empty() ? docs : read_corpus(run.eval_path, run.corpus_format);

      const std::filesystem::path dir(run.out_dir);
      std::filesystem::create_directories(dir);
      auto rows = nlohmann::ordered_json::array();
      std::string csv;
      bool any_failed = false;
      for (const std::string& v : ablate_variants) {
        RunConfig sub = run;
        sub.train.variant = v;
        nlohmann::ordered_json row;
        row["variant"] = v;
        try {
          RunResult res = run_training(g, sub, docs, &eval_docs, dir / v);
          row["config_hash"] = res.state.cfg_hash;
          row["status"] = "ok";
          if (csv.empty()) {
            csv = "variant";
            for (const auto& [name, value] : res.metrics->averages) csv += "," + name;
            csv += '\n';
          }
          csv += v;
          for (const auto& [name, value] : res.metrics->averages) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.6f", value);
            csv += buf;
            row[name] = value;
          }
          csv += '\n';
        } catch (const std::exception& e) {
          row["status"] = std::string("failed: ") + e.what();
          any_failed = true;
        }
        rows.push_back(std::move(row));
      }
      nlohmann::ordered_json out;
      out["rows"] = rows;
      save_json_file(dir / "ablate.json", out);
      write_text_file(dir / "ablate.csv", csv);
      say(g, "ablation results -> " + (dir / "ablate.csv").string());
      return any_failed ? 1 : 0;
    });
  }

  return 0;
}
