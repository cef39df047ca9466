#include "dualre/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dualre {
namespace {

double safe_div(long long num, long long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ScoreReport score(const std::vector<int>& gold, const std::vector<int>& pred,
                  const RelationSchema& schema) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("score: gold and pred length mismatch");
  ScoreReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= schema.size() || pred[i] < 0 || pred[i] >= schema.size())
      throw std::invalid_argument("score: label index out of range");
    const bool gold_pos = !schema.is_no_relation(gold[i]);
    const bool pred_pos = !schema.is_no_relation(pred[i]);
    if (gold_pos) ++r.gold_positive;
    if (pred_pos) ++r.predicted_positive;
    if (gold_pos && pred_pos && gold[i] == pred[i]) ++r.correct_positive;
  }
  r.precision = safe_div(r.correct_positive, r.predicted_positive);
  r.recall = safe_div(r.correct_positive, r.gold_positive);
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

double selection_precision(const std::vector<std::pair<std::string, int>>& batch,
                           const SealedTruth& sealed) {
  if (batch.empty())
    throw std::invalid_argument("selection_precision: empty batch has no precision");
  long long correct = 0;
  for (const auto& [id, label] : batch)
    if (sealed.label_of(id) == label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

MeanStd mean_stddev(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean_stddev: no values");
  MeanStd ms;
  for (double v : values) ms.mean += v;
  ms.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - ms.mean) * (v - ms.mean);
    ms.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return ms;
}

std::string record_row_csv(const RecordRow& row) {
  std::ostringstream out;
  out << row.run_id << ',' << row.seed << ',' << row.iteration << ',' << row.n_pseudo << ','
      << fmt_double(row.sel_precision) << ',' << fmt_double(row.dev.precision) << ','
      << fmt_double(row.dev.recall) << ',' << fmt_double(row.dev.f1) << ','
      << fmt_double(row.test.precision) << ',' << fmt_double(row.test.recall) << ','
      << fmt_double(row.test.f1);
  return out.str();
}

RecordRow parse_record_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  if (fields.size() != 11)
    throw std::runtime_error("records csv: expected 11 fields, got " +
                             std::to_string(fields.size()) + " in: " + line);
  RecordRow row;
  try {
    row.run_id = fields[0];
    row.seed = std::stoull(fields[1]);
    row.iteration = std::stoi(fields[2]);
    row.n_pseudo = std::stoi(fields[3]);
    row.sel_precision = std::stod(fields[4]);
    row.dev.precision = std::stod(fields[5]);
    row.dev.recall = std::stod(fields[6]);
    row.dev.f1 = std::stod(fields[7]);
    row.test.precision = std::stod(fields[8]);
    row.test.recall = std::stod(fields[9]);
    row.test.f1 = std::stod(fields[10]);
  } catch (const std::exception&) {
    throw std::runtime_error("records csv: malformed numeric field in: " + line);
  }
  return row;
}

void write_records_csv(const std::vector<RecordRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write records csv '" + path + "'");
  out << kRecordsHeader << '\n';
  for (const auto& row : rows) out << record_row_csv(row) << '\n';
  if (!out) throw std::runtime_error("write failed for records csv '" + path + "'");
}

std::vector<RecordRow> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read records csv '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader)
    throw std::runtime_error("records csv '" + path + "': bad or missing header");
  std::vector<RecordRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_record_row(line));
  }
  return rows;
}

void emit_report(const std::vector<RecordRow>& rows, const std::string& destination) {
  if (rows.empty()) throw std::runtime_error("emit_report: no records");
  std::filesystem::create_directories(destination);
  write_records_csv(rows, destination + std::string("/records.csv"));

  // Final iteration of each (run_id, seed) pair; summarized per run_id.
  std::map<std::string, std::map<std::uint64_t, RecordRow>> finals;
  for (const auto& row : rows) {
    auto& slot = finals[row.run_id];
    auto it = slot.find(row.seed);
    if (it == slot.end() || row.iteration >= it->second.iteration) slot[row.seed] = row;
  }

  nlohmann::json summary;
  for (const auto& [run_id, by_seed] : finals) {
    std::vector<double> dev_f1, test_f1, test_p, test_r;
    std::vector<std::uint64_t> seeds;
    for (const auto& [seed, row] : by_seed) {
      seeds.push_back(seed);
      dev_f1.push_back(row.dev.f1);
      test_f1.push_back(row.test.f1);
      test_p.push_back(row.test.precision);
      test_r.push_back(row.test.recall);
    }
    nlohmann::json entry;
    entry["seeds"] = seeds;
    const auto put = [&entry](const char* key, const std::vector<double>& v) {
      const auto ms = mean_stddev(v);
      entry[key] = {{"mean", ms.mean}, {"stddev", ms.stddev}};
    };
    put("dev_f1", dev_f1);
    put("test_f1", test_f1);
    put("test_precision", test_p);
    put("test_recall", test_r);
    summary[run_id] = entry;
  }

  const std::string path = destination + std::string("/summary.json");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write summary '" + path + "'");
  out << summary.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for summary '" + path + "'");
}

}  // namespace dualre
