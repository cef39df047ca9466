#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dualre/checkpoint.hpp"
#include "dualre/dataset_io.hpp"
#include "dualre/runconfig.hpp"
#include "dualre/split.hpp"
#include "dualre/synthetic.hpp"
#include "dualre/trainer.hpp"

namespace {

using namespace dualre;

std::string data_extension(DataFormat format) {
  return format == DataFormat::kTabular ? "tsv" : "json";
}

struct LoadedRun {
  CorpusState corpus;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
  std::optional<SealedTruth> truth;
};

// Loads every dataset of a run under one merged schema (union of the label
// names seen across the labeled, dev and test files).
LoadedRun load_run_data(const RunConfig& config, bool need_unlabeled) {
  auto [labeled_schema, labeled] = read_dataset(config.labeled_path, config.format);
  auto [dev_schema, dev] = read_dataset(config.dev_path, config.format);
  auto [test_schema, test] = read_dataset(config.test_path, config.format);

  std::vector<std::string> names;
  for (const auto* schema : {&labeled_schema, &dev_schema, &test_schema})
    names.insert(names.end(), schema->labels.begin(), schema->labels.end());
  RelationSchema schema = RelationSchema::from_observed(std::move(names));

  remap_labels(labeled_schema, schema, labeled);
  remap_labels(dev_schema, schema, dev);
  remap_labels(test_schema, schema, test);

  LoadedRun run;
  run.corpus.schema = std::move(schema);
  run.corpus.labeled = std::move(labeled);
  run.dev = std::move(dev);
  run.test = std::move(test);
  if (!config.unlabeled_path.empty())
    run.corpus.unlabeled = read_mentions(config.unlabeled_path, config.format);
  else if (need_unlabeled)
    throw std::invalid_argument("this method needs config key data.unlabeled");
  if (!config.truth_path.empty())
    run.truth = read_sealed_truth(config.truth_path, run.corpus.schema);
  run.corpus.check_disjoint_ids();
  return run;
}

nlohmann::json score_json(const ScoreReport& report) {
  return {{"precision", report.precision},
          {"recall", report.recall},
          {"f1", report.f1},
          {"predicted_positive", report.predicted_positive},
          {"gold_positive", report.gold_positive},
          {"correct_positive", report.correct_positive}};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Per-iteration records of a finished run as CSV rows.
std::vector<RecordRow> run_record_rows(const RunResult& result, std::uint64_t seed) {
  std::vector<RecordRow> rows;
  rows.reserve(result.records.size());
  for (const auto& rec : result.records) {
    RecordRow row;
    row.run_id = method_name(result.method);
    row.seed = seed;
    row.iteration = rec.iteration;
    row.n_pseudo = rec.n_pseudo;
    row.sel_precision = rec.sel_precision;
    row.dev = rec.dev;
    row.test = rec.test;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json run_summary(const RunResult& result, const LoadedRun& run,
                           const TrainConfig& config) {
  const auto& final_rec = result.records.back();
  nlohmann::json summary;
  summary["method"] = method_name(result.method);
  summary["seed"] = config.seed;
  summary["iterations"] = static_cast<int>(result.records.size()) - 1;
  summary["n_labeled"] = run.corpus.labeled.size();
  summary["n_unlabeled"] = run.corpus.unlabeled.size();
  summary["n_pseudo_final"] = final_rec.n_pseudo;
  summary["dev"] = score_json(final_rec.dev);
  summary["test"] = score_json(final_rec.test);
  std::vector<double> precisions;
  for (const auto& rec : result.records)
    if (rec.sel_precision >= 0.0) precisions.push_back(rec.sel_precision);
  if (precisions.empty())
    summary["mean_selection_precision"] = nullptr;
  else
    summary["mean_selection_precision"] = mean_stddev(precisions).mean;
  return summary;
}

int cmd_synth(const std::string& out_path, DataFormat format, const SyntheticConfig& config) {
  const auto [schema, examples] = generate_synthetic(config);
  write_dataset(out_path, format, schema, examples);
  std::cout << "wrote " << examples.size() << " examples to " << out_path << '\n';
  return 0;
}

int cmd_split(const std::string& input, DataFormat format, const SplitSpec& spec,
              const std::string& out_dir) {
  const auto [schema, data] = read_dataset(input, format);
  const SplitResult split = stratified_split(data, schema, spec);
  std::filesystem::create_directories(out_dir);
  const std::string ext = data_extension(format);
  write_dataset(out_dir + "/labeled." + ext, format, schema, split.labeled);
  write_mentions(out_dir + "/unlabeled." + ext, format, split.unlabeled);
  write_dataset(out_dir + "/dev." + ext, format, schema, split.dev);
  write_dataset(out_dir + "/test." + ext, format, schema, split.test);
  write_sealed_truth(out_dir + "/truth.tsv", schema, split.sealed_truth);
  std::cout << "labeled=" << split.labeled.size() << " unlabeled=" << split.unlabeled.size()
            << " dev=" << split.dev.size() << " test=" << split.test.size() << " -> " << out_dir
            << '\n';
  return 0;
}

int cmd_train(const std::string& method_name_arg, RunConfig config, const std::string& out_dir) {
  const Method method = parse_method(method_name_arg);
  const bool semi = method != Method::kSupervised;
  LoadedRun run = load_run_data(config, semi && method != Method::kGold);
  const SealedTruth* sealed = run.truth ? &*run.truth : nullptr;

  const RunResult result = train(method, run.corpus, run.dev, run.test, sealed, config.train);

  std::filesystem::create_directories(out_dir);
  write_text(out_dir + "/config.resolved", render_run_config(config));
  write_records_csv(run_record_rows(result, config.train.seed), out_dir + "/records.csv");

  std::ofstream promoted(out_dir + "/promoted.jsonl");
  if (!promoted) throw std::runtime_error("cannot write promoted.jsonl");
  for (const auto& rec : result.records) {
    int rank = 0;
    for (const auto& item : rec.promoted) {
      nlohmann::json line = {{"iteration", rec.iteration},
                             {"rank", rank++},
                             {"id", item.id},
                             {"label", result.schema.label(item.label)},
                             {"p", item.p},
                             {"q", item.q},
                             {"weight_p", item.weight_p},
                             {"weight_q", item.weight_q}};
      promoted << line.dump() << '\n';
    }
  }

  save_predictor(result.predictor, result.vocab, result.schema, out_dir + "/predictor.ckpt");
  if (result.retriever)
    save_retriever(*result.retriever, result.vocab, result.schema, out_dir + "/retriever.ckpt");
  if (result.predictor_b)
    save_predictor(*result.predictor_b, result.vocab, result.schema,
                   out_dir + "/predictor_b.ckpt");

  const nlohmann::json summary = run_summary(result, run, config.train);
  write_text(out_dir + "/summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& data_path,
                 DataFormat format, const std::string& out_path) {
  const PredictorCheckpoint cp = load_predictor(checkpoint_path);
  auto [file_schema, examples] = read_dataset(data_path, format);
  remap_labels(file_schema, cp.schema, examples);
  const ScoreReport report = evaluate_model(cp.model, cp.vocab, examples, cp.schema);
  const std::string text = score_json(report).dump(2) + "\n";
  if (!out_path.empty()) write_text(out_path, text);
  std::cout << text;
  return 0;
}

int cmd_select(const std::string& method_name_arg, const RunConfig& config,
               const std::string& out_path) {
  const Method method = parse_method(method_name_arg);
  LoadedRun run = load_run_data(config, true);
  const PromotedBatch batch = pretrain_and_select(method, run.corpus, run.dev, config.train);

  std::ostringstream out;
  int rank = 0;
  for (const auto& item : batch.items) {
    nlohmann::json line = {{"rank", rank++},
                           {"id", item.id},
                           {"label", run.corpus.schema.label(item.label)},
                           {"p", item.p_confidence},
                           {"q", item.q_score}};
    out << line.dump() << '\n';
  }
  if (!out_path.empty())
    write_text(out_path, out.str());
  else
    std::cout << out.str();
  std::cerr << "selected " << batch.items.size() << " instances\n";
  return 0;
}

int cmd_grid(const std::string& method_name_arg, RunConfig config,
             const std::vector<std::string>& axis_args, bool greedy, int jobs,
             const std::string& out_dir) {
  const Method method = parse_method(method_name_arg);
  std::vector<GridAxis> axes;
  for (const auto& arg : axis_args) {
    const std::size_t eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= arg.size())
      throw std::invalid_argument("--axis expects key=value1,value2,... got '" + arg + "'");
    GridAxis axis;
    axis.key = arg.substr(0, eq);
    std::string values = arg.substr(eq + 1);
    std::size_t pos = 0;
    while (pos <= values.size()) {
      const std::size_t comma = values.find(',', pos);
      const std::size_t end = comma == std::string::npos ? values.size() : comma;
      if (end > pos) axis.values.push_back(values.substr(pos, end - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    axes.push_back(std::move(axis));
  }

  LoadedRun run = load_run_data(config, method != Method::kSupervised);
  const SealedTruth* sealed = run.truth ? &*run.truth : nullptr;
  const GridResult result = grid_search(method, run.corpus, run.dev, run.test, sealed,
                                        config.train, axes, greedy, jobs);

  std::filesystem::create_directories(out_dir);
  std::ostringstream table;
  table << "point,dev_f1,best\n";
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    char f1[40];
    std::snprintf(f1, sizeof f1, "%.17g", result.points[i].dev_f1);
    table << '"' << result.points[i].description << "\"," << f1 << ','
          << (static_cast<int>(i) == result.best_index ? 1 : 0) << '\n';
  }
  write_text(out_dir + "/grid.csv", table.str());

  RunConfig best = config;
  best.train = result.points[result.best_index].config;
  write_text(out_dir + "/best_config.resolved", render_run_config(best));
  std::cout << "best: " << result.points[result.best_index].description
            << " dev_f1=" << result.points[result.best_index].dev_f1 << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& record_files, const std::string& out_dir) {
  std::vector<RecordRow> rows;
  for (const auto& path : record_files) {
    auto part = read_records_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  emit_report(rows, out_dir);
  std::cout << "report written to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised relation extraction via dual prediction/retrieval modules"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a trigger-token synthetic corpus");
  std::string synth_out;
  std::string synth_format = "tabular";
  SyntheticConfig synth_config;
  synth->add_option("--out", synth_out, "Output dataset file")->required();
  synth->add_option("--format", synth_format, "tabular or tacred_json");
  synth->add_option("--relations", synth_config.num_relations, "Positive relation count");
  synth->add_option("--vocab", synth_config.vocab_size, "Vocabulary size");
  synth->add_option("--per-relation", synth_config.examples_per_relation,
                    "Examples per positive relation");
  synth->add_option("--noise", synth_config.trigger_noise, "Trigger replacement fraction");
  synth->add_option("--negative-fraction", synth_config.negative_fraction,
                    "Share of no_relation examples");
  synth->add_option("--seed", synth_config.seed, "Random seed");

  // split
  auto* split = app.add_subcommand("split", "Stratified labeled/unlabeled/dev split");
  std::string split_input, split_out;
  std::string split_format = "tabular";
  SplitSpec split_spec;
  split->add_option("--input", split_input, "Labeled dataset file")->required();
  split->add_option("--format", split_format, "tabular or tacred_json");
  split->add_option("--labeled-fraction", split_spec.labeled_fraction, "Labeled share");
  split->add_option("--unlabeled-fraction", split_spec.unlabeled_fraction, "Unlabeled share");
  split->add_option("--dev-fraction", split_spec.dev_fraction, "Dev share");
  split->add_option("--seed", split_spec.seed, "Random seed");
  split->add_option("--out", split_out, "Output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one method end to end");
  std::string train_method = "dualre", train_config_path, train_out;
  std::uint64_t cli_seed = 0;
  bool train_seed_set = false;
  train_cmd->add_option("--method", train_method,
                        "dualre|dualre-pairwise|self|ensemble|gold|supervised");
  train_cmd->add_option("--config", train_config_path, "Run config file")->required();
  train_cmd->add_option("--seed", cli_seed, "Overrides the config seed")
      ->each([&](const std::string&) { train_seed_set = true; });
  train_cmd->add_option("--out", train_out, "Run output directory")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a predictor checkpoint on a dataset");
  std::string eval_checkpoint, eval_data, eval_out;
  std::string eval_format = "tabular";
  evaluate->add_option("--checkpoint", eval_checkpoint, "predictor.ckpt path")->required();
  evaluate->add_option("--data", eval_data, "Labeled dataset file")->required();
  evaluate->add_option("--format", eval_format, "tabular or tacred_json");
  evaluate->add_option("--out", eval_out, "Optional JSON output file");

  // select
  auto* select = app.add_subcommand("select", "Dump one promoted batch after pretraining");
  std::string select_method = "dualre", select_config_path, select_out;
  std::uint64_t select_seed = 0;
  bool select_seed_set = false;
  select->add_option("--method", select_method, "dualre|dualre-pairwise|self|ensemble");
  select->add_option("--config", select_config_path, "Run config file")->required();
  select->add_option("--seed", select_seed, "Overrides the config seed")
      ->each([&](const std::string&) { select_seed_set = true; });
  select->add_option("--out", select_out, "JSON-lines output file (default stdout)");

  // grid
  auto* grid = app.add_subcommand("grid", "Hyperparameter search by dev F1");
  std::string grid_method = "dualre", grid_config_path, grid_out;
  std::vector<std::string> grid_axes;
  bool grid_greedy = false;
  int grid_jobs = 1;
  std::uint64_t grid_seed = 0;
  bool grid_seed_set = false;
  grid->add_option("--method", grid_method, "Training method");
  grid->add_option("--config", grid_config_path, "Run config file")->required();
  grid->add_option("--axis", grid_axes, "key=value1,value2,... (repeatable)")->required();
  grid->add_flag("--greedy", grid_greedy, "Greedy per-axis sweep instead of cross-product");
  grid->add_option("--jobs", grid_jobs, "Parallel runs");
  grid->add_option("--seed", grid_seed, "Overrides the config seed")
      ->each([&](const std::string&) { grid_seed_set = true; });
  grid->add_option("--out", grid_out, "Output directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Merge run records into a summary report");
  std::vector<std::string> report_records;
  std::string report_out;
  report->add_option("--records", report_records, "records.csv files (repeatable)")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_out, parse_format(synth_format), synth_config);
    if (split->parsed())
      return cmd_split(split_input, parse_format(split_format), split_spec, split_out);
    if (train_cmd->parsed()) {
      RunConfig config = parse_run_config_file(train_config_path);
      if (train_seed_set) config.train.seed = cli_seed;
      return cmd_train(train_method, std::move(config), train_out);
    }
    if (evaluate->parsed())
      return cmd_evaluate(eval_checkpoint, eval_data, parse_format(eval_format), eval_out);
    if (select->parsed()) {
      RunConfig config = parse_run_config_file(select_config_path);
      if (select_seed_set) config.train.seed = select_seed;
      return cmd_select(select_method, config, select_out);
    }
    if (grid->parsed()) {
      RunConfig config = parse_run_config_file(grid_config_path);
      if (grid_seed_set) config.train.seed = grid_seed;
      return cmd_grid(grid_method, std::move(config), grid_axes, grid_greedy, grid_jobs,
                      grid_out);
    }
    if (report->parsed()) return cmd_report(report_records, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cerr << "error: no subcommand\n";
  return 1;
}
