#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "dualre/runconfig.hpp"

using namespace dualre;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto path = temp_path(name);
  std::ofstream out(path, std::ios::trunc);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("a config file parses through comments, blanks and loose spacing") {
  const auto path = write_file("dualre_cfg_basic.conf",
                               "# run configuration\n"
                               "\n"
                               "data.labeled = train.tsv   # inline comment\n"
                               "data.dev=dev.tsv\n"
                               "  data.test   =   test.tsv  \n"
                               "data.unlabeled = pool.tsv\n"
                               "optim.learning_rate = 0.125\n"
                               "promote.mode = equal\n"
                               "select.distribution = top-3k\n"
                               "seed = 17\n");
  const auto config = parse_run_config_file(path);
  CHECK(config.labeled_path == "train.tsv");
  CHECK(config.dev_path == "dev.tsv");
  CHECK(config.test_path == "test.tsv");
  CHECK(config.unlabeled_path == "pool.tsv");
  CHECK(config.truth_path.empty());
  CHECK(config.format == DataFormat::kTabular);
  CHECK(config.train.learning_rate == 0.125);
  CHECK_FALSE(config.train.weighted_promotion);
  CHECK(config.train.distribution_mode == DistributionMode::kTopNk);
  CHECK(config.train.distribution_n == 3);
  CHECK(config.train.seed == 17);
  // Untouched knobs keep their defaults.
  CHECK(config.train.batch_size == TrainConfig{}.batch_size);
  CHECK(config.train.max_epochs == TrainConfig{}.max_epochs);
}

TEST_CASE("missing required keys are reported together") {
  CHECK_THROWS_WITH_AS(parse_run_config({}),
                       "missing config keys: data.labeled, data.dev, data.test",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_run_config({{"data.labeled", "a.tsv"}}),
                       "missing config keys: data.dev, data.test", std::invalid_argument);
  CHECK_NOTHROW(parse_run_config(
      {{"data.labeled", "a"}, {"data.dev", "b"}, {"data.test", "c"}}));
}

TEST_CASE("malformed lines carry the file name and line number") {
  const auto no_eq = write_file("dualre_cfg_noeq.conf", "data.labeled = a.tsv\njust words\n");
  CHECK_THROWS_WITH_AS(parse_run_config_file(no_eq),
                       doctest::Contains("line 2: expected 'key = value'"),
                       std::invalid_argument);

  const auto dup = write_file("dualre_cfg_dup.conf",
                              "data.labeled = a.tsv\nseed = 1\nseed = 2\n");
  CHECK_THROWS_WITH_AS(parse_run_config_file(dup),
                       doctest::Contains("line 3: duplicate key 'seed'"), std::invalid_argument);

  const auto empty_key = write_file("dualre_cfg_emptykey.conf", "= value\n");
  CHECK_THROWS_WITH_AS(parse_run_config_file(empty_key), doctest::Contains("line 1: empty key"),
                       std::invalid_argument);

  CHECK_THROWS_WITH_AS(parse_run_config_file(temp_path("dualre_cfg_missing.conf")),
                       doctest::Contains("cannot open config"), std::runtime_error);
}

TEST_CASE("unknown and invalid keys are rejected with the file context") {
  const auto unknown = write_file("dualre_cfg_unknown.conf",
                                  "data.labeled = a\ndata.dev = b\ndata.test = c\nwat = 1\n");
  CHECK_THROWS_WITH_AS(parse_run_config_file(unknown),
                       doctest::Contains("unknown config key 'wat'"), std::invalid_argument);

  CHECK_THROWS_AS(parse_run_config({{"data.labeled", "a"},
                                    {"data.dev", "b"},
                                    {"data.test", "c"},
                                    {"data.format", "parquet"}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_run_config({{"data.labeled", "a"},
                                    {"data.dev", "b"},
                                    {"data.test", "c"},
                                    {"optim.max_epochs", "-1"}}),
                  std::invalid_argument);
}

TEST_CASE("rendering is a fixpoint under re-parsing") {
  RunConfig config;
  config.labeled_path = "data/train.tsv";
  config.unlabeled_path = "data/pool.tsv";
  config.dev_path = "data/dev.tsv";
  config.test_path = "data/test.tsv";
  config.truth_path = "data/truth.tsv";
  config.format = DataFormat::kTacredJson;
  config.train.learning_rate = 0.3;
  config.train.alpha = 1.5;
  config.train.weighted_promotion = true;
  config.train.negatives_per_positive = 4;
  config.train.distribution_mode = DistributionMode::kTopNk;
  config.train.distribution_n = 2;
  config.train.expansion_factor = 1.75;
  config.train.k = 30;
  config.train.seed = 424242;

  const auto text = render_run_config(config);
  const auto path = write_file("dualre_cfg_render.conf", text);
  const auto reparsed = parse_run_config_file(path);
  CHECK(render_run_config(reparsed) == text);

  CHECK(reparsed.labeled_path == config.labeled_path);
  CHECK(reparsed.format == DataFormat::kTacredJson);
  CHECK(reparsed.train.learning_rate == config.train.learning_rate);
  CHECK(reparsed.train.negatives_per_positive == 4);
  CHECK(reparsed.train.distribution_n == 2);
  CHECK(reparsed.train.seed == 424242);

  // Defaults render and survive the same loop, including negatives = all.
  RunConfig bare;
  bare.labeled_path = "l";
  bare.dev_path = "d";
  bare.test_path = "t";
  const auto bare_text = render_run_config(bare);
  const auto bare_path = write_file("dualre_cfg_bare.conf", bare_text);
  const auto bare_reparsed = parse_run_config_file(bare_path);
  CHECK(render_run_config(bare_reparsed) == bare_text);
  CHECK(bare_reparsed.train.negatives_per_positive == kAllNegatives);
}
