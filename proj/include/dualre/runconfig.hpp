#pragma once

#include <map>
#include <string>

#include "dualre/dataset_io.hpp"
#include "dualre/trainer.hpp"

namespace dualre {

// A run is fully determined by one flat config (plus the method flag):
// dataset paths and the TrainConfig knobs.
struct RunConfig {
  std::string labeled_path;
  std::string unlabeled_path;  // may be empty for supervised runs
  std::string dev_path;
  std::string test_path;
  std::string truth_path;  // sealed gold labels; optional
  DataFormat format = DataFormat::kTabular;
  TrainConfig train;
};

// Flat "key = value" lines, '#' starts a comment, blank lines ignored.
// Unknown or duplicate keys are rejected; missing required keys
// (data.labeled, data.dev, data.test) are reported all at once.
RunConfig parse_run_config_file(const std::string& path);
RunConfig parse_run_config(const std::map<std::string, std::string>& entries);

// Every key with its value in effect, defaults filled; re-parsing the text
// reproduces the config exactly.
std::string render_run_config(const RunConfig& config);

}  // namespace dualre
