#include "dualre/runconfig.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dualre {
namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_run_config(const std::map<std::string, std::string>& entries) {
  RunConfig config;
  bool have[3] = {false, false, false};  // data.labeled, data.dev, data.test
  for (const auto& [key, value] : entries) {
    if (key == "data.labeled") {
      config.labeled_path = value;
      have[0] = true;
    } else if (key == "data.unlabeled") {
      config.unlabeled_path = value;
    } else if (key == "data.dev") {
      config.dev_path = value;
      have[1] = true;
    } else if (key == "data.test") {
      config.test_path = value;
      have[2] = true;
    } else if (key == "data.truth") {
      config.truth_path = value;
    } else if (key == "data.format") {
      config.format = parse_format(value);
    } else {
      apply_train_key(config.train, key, value);
    }
  }
  std::string missing;
  const char* required[3] = {"data.labeled", "data.dev", "data.test"};
  for (int i = 0; i < 3; ++i) {
    if (have[i]) continue;
    if (!missing.empty()) missing += ", ";
    missing += required[i];
  }
  if (!missing.empty()) throw std::invalid_argument("missing config keys: " + missing);
  return config;
}

RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config '" + path + "' line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config '" + path + "' line " + std::to_string(line_no) +
                                  ": empty key");
    if (!entries.emplace(key, value).second)
      throw std::invalid_argument("config '" + path + "' line " + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
  }
  try {
    return parse_run_config(entries);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("config '" + path + "': " + e.what());
  }
}

std::string render_run_config(const RunConfig& config) {
  const TrainConfig& t = config.train;
  std::ostringstream out;
  out << "data.dev = " << config.dev_path << '\n';
  out << "data.format = " << format_name(config.format) << '\n';
  out << "data.labeled = " << config.labeled_path << '\n';
  out << "data.test = " << config.test_path << '\n';
  out << "data.truth = " << config.truth_path << '\n';
  out << "data.unlabeled = " << config.unlabeled_path << '\n';
  out << "loop.convergence_patience = " << t.convergence_patience << '\n';
  out << "loop.iterations_cap = " << t.iterations_cap << '\n';
  out << "loop.k = " << t.k << '\n';
  out << "model.hidden_dim = " << t.encoder.hidden_dim << '\n';
  out << "model.max_dist = " << t.encoder.max_dist << '\n';
  out << "model.pos_dim = " << t.encoder.pos_dim << '\n';
  out << "model.word_dim = " << t.encoder.word_dim << '\n';
  out << "optim.batch_size = " << t.batch_size << '\n';
  out << "optim.learning_rate = " << fmt_double(t.learning_rate) << '\n';
  out << "optim.max_epochs = " << t.max_epochs << '\n';
  out << "optim.patience = " << t.patience << '\n';
  out << "promote.alpha = " << fmt_double(t.alpha) << '\n';
  out << "promote.beta = " << fmt_double(t.beta) << '\n';
  out << "promote.mode = " << (t.weighted_promotion ? "weighted" : "equal") << '\n';
  out << "retriever.dropout = " << fmt_double(t.retrieval_dropout) << '\n';
  out << "retriever.negatives = "
      << (t.negatives_per_positive == kAllNegatives ? std::string("all")
                                                    : std::to_string(t.negatives_per_positive))
      << '\n';
  out << "seed = " << t.seed << '\n';
  out << "select.distribution = "
      << (t.distribution_mode == DistributionMode::kTrue
              ? std::string("true")
              : "top-" + std::to_string(t.distribution_n) + "k")
      << '\n';
  out << "select.expansion_factor = " << fmt_double(t.expansion_factor) << '\n';
  out << "select.max_expansions = " << t.max_expansions << '\n';
  return out.str();
}

}  // namespace dualre
