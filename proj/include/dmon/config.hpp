#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmon/training.hpp"

namespace dmon {

// Parses a JSON file; wraps syntax failures in ParseError with the path.
nlohmann::json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const nlohmann::ordered_json& j);

// Rejects keys outside `allowed` (typo guard). `context` names the object in
// the error message.
void require_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                        std::string_view context);

// Full run description as read from --config: training hyperparameters plus
// data locations and reporting choices.
struct RunConfig {
  TrainConfig train;
  std::string corpus_path;
  std::string corpus_format = "jsonl";
  std::string eval_path;  // optional held-out set
  std::string metric_preset = "auto";
  std::string out_dir = "out";

  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json run_config_to_json(const RunConfig& c);

}  // namespace dmon
