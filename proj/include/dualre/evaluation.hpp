#pragma once

#include <string>
#include <vector>

#include "dualre/types.hpp"

namespace dualre {

// Micro-averaged precision/recall/F1 where no_relation never counts as a
// positive: correct no_relation predictions contribute to no tally.
struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long predicted_positive = 0;
  long long gold_positive = 0;
  long long correct_positive = 0;
};

// gold/pred are label indices into the schema. Throws std::invalid_argument
// on length mismatch or out-of-range labels.
ScoreReport score(const std::vector<int>& gold, const std::vector<int>& pred,
                  const RelationSchema& schema);

// Fraction of promoted (id, label) items whose label matches the sealed
// truth. Throws std::invalid_argument on an empty batch (undefined) and
// std::out_of_range on an id absent from the sealed map.
double selection_precision(const std::vector<std::pair<std::string, int>>& batch,
                           const SealedTruth& sealed);

// Mean and sample (n-1) standard deviation; n = 1 yields stddev 0.
struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
};
MeanStd mean_stddev(const std::vector<double>& values);

// One per-iteration row of a training run, as written to records CSV.
struct RecordRow {
  std::string run_id;
  std::uint64_t seed = 0;
  int iteration = 0;
  int n_pseudo = 0;
  double sel_precision = -1.0;  // negative = not available this row
  ScoreReport dev;
  ScoreReport test;
};

inline constexpr const char* kRecordsHeader =
    "run_id,seed,iteration,n_pseudo,sel_precision,dev_p,dev_r,dev_f1,test_p,test_r,test_f1";

std::string record_row_csv(const RecordRow& row);
RecordRow parse_record_row(const std::string& line);  // throws on malformed rows

void write_records_csv(const std::vector<RecordRow>& rows, const std::string& path);
std::vector<RecordRow> read_records_csv(const std::string& path);

// Merges rows from several runs into <destination>/records.csv plus
// <destination>/summary.json holding, per run_id, mean +/- sample stddev of
// the final-iteration dev/test metrics over seeds. Throws std::runtime_error
// when rows are empty or the destination is unwritable.
void emit_report(const std::vector<RecordRow>& rows, const std::string& destination);

}  // namespace dualre
