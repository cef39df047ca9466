#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dualre/evaluation.hpp"
#include "dualre/rng.hpp"

using namespace dualre;

namespace {

RelationSchema schema3() { return RelationSchema::from_observed({"r1", "r2", "r3"}); }

// Blunt recount of the micro metrics, kept deliberately separate from the
// library's single-pass tally.
ScoreReport recount(const std::vector<int>& gold, const std::vector<int>& pred,
                    const RelationSchema& schema) {
  ScoreReport r;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!schema.is_no_relation(pred[i])) r.predicted_positive += 1;
    if (!schema.is_no_relation(gold[i])) r.gold_positive += 1;
    if (!schema.is_no_relation(pred[i]) && gold[i] == pred[i]) r.correct_positive += 1;
  }
  r.precision = r.predicted_positive ? double(r.correct_positive) / r.predicted_positive : 0.0;
  r.recall = r.gold_positive ? double(r.correct_positive) / r.gold_positive : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("score reproduces the hand-checked confusion") {
  const auto schema = schema3();
  const int r1 = schema.index_of("r1");
  const int r2 = schema.index_of("r2");
  const int nr = schema.no_relation_index;

  // gold (r1, r1, no_relation) vs pred (r1, r2, r1):
  // 3 predicted positives, 2 gold positives, 1 correct.
  const auto report = score({r1, r1, nr}, {r1, r2, r1}, schema);
  CHECK(report.predicted_positive == 3);
  CHECK(report.gold_positive == 2);
  CHECK(report.correct_positive == 1);
  CHECK(report.precision == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(report.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(report.f1 == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("score edge cases") {
  const auto schema = schema3();
  const int r1 = schema.index_of("r1");
  const int nr = schema.no_relation_index;

  const auto perfect = score({r1, r1}, {r1, r1}, schema);
  CHECK(perfect.f1 == 1.0);

  // Correct no_relation predictions count nowhere.
  const auto with_neg = score({r1, nr, nr}, {r1, nr, nr}, schema);
  CHECK(with_neg.predicted_positive == 1);
  CHECK(with_neg.gold_positive == 1);
  CHECK(with_neg.f1 == 1.0);

  // Nothing predicted positive and nothing gold positive: all zeros, no NaN.
  const auto empty = score({nr, nr}, {nr, nr}, schema);
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.f1 == 0.0);

  CHECK_THROWS_AS(score({r1}, {r1, r1}, schema), std::invalid_argument);
  CHECK_THROWS_AS(score({99}, {r1}, schema), std::invalid_argument);
}

TEST_CASE("score agrees with an independent recount on random label sequences") {
  const auto schema = schema3();
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.next_int(1, 40);
    std::vector<int> gold(n), pred(n);
    for (int i = 0; i < n; ++i) {
      gold[i] = rng.next_int(0, schema.size() - 1);
      pred[i] = rng.next_int(0, schema.size() - 1);
    }
    const auto a = score(gold, pred, schema);
    const auto b = recount(gold, pred, schema);
    CHECK(a.predicted_positive == b.predicted_positive);
    CHECK(a.gold_positive == b.gold_positive);
    CHECK(a.correct_positive == b.correct_positive);
    CHECK(a.precision == doctest::Approx(b.precision).epsilon(1e-12));
    CHECK(a.recall == doctest::Approx(b.recall).epsilon(1e-12));
    CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
    if (a.precision + a.recall > 0.0)
      CHECK(a.f1 ==
            doctest::Approx(2 * a.precision * a.recall / (a.precision + a.recall)).epsilon(1e-12));
  }
}

TEST_CASE("appending agreeing no_relation rows never moves the metrics") {
  const auto schema = schema3();
  std::vector<int> gold{0, 1, 2, 0};
  std::vector<int> pred{0, 2, 2, 1};
  const auto before = score(gold, pred, schema);
  gold.push_back(schema.no_relation_index);
  pred.push_back(schema.no_relation_index);
  const auto after = score(gold, pred, schema);
  CHECK(before.precision == after.precision);
  CHECK(before.recall == after.recall);
  CHECK(before.f1 == after.f1);
}

TEST_CASE("selection precision checks promoted labels against sealed truth") {
  const auto schema = schema3();
  SealedTruth sealed({{"u1", 0}, {"u2", 1}, {"u3", 2}, {"u4", 0}});

  CHECK(selection_precision({{"u1", 0}, {"u2", 1}}, sealed) == 1.0);
  CHECK(selection_precision({{"u1", 0}, {"u2", 0}, {"u3", 2}, {"u4", 1}}, sealed) == 0.5);
  CHECK_THROWS_AS(selection_precision({}, sealed), std::invalid_argument);
  CHECK_THROWS_WITH_AS(selection_precision({{"ghost", 0}}, sealed), doctest::Contains("ghost"),
                       std::out_of_range);
}

TEST_CASE("mean and sample standard deviation") {
  const auto flat = mean_stddev({0.6, 0.6, 0.6, 0.6, 0.6});
  CHECK(flat.mean == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(flat.stddev == doctest::Approx(0.0).epsilon(1e-12));

  const auto spread = mean_stddev({0.5, 0.6, 0.7});
  CHECK(spread.mean == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(spread.stddev == doctest::Approx(0.1).epsilon(1e-12));

  const auto single = mean_stddev({0.42});
  CHECK(single.mean == 0.42);
  CHECK(single.stddev == 0.0);

  CHECK_THROWS_AS(mean_stddev({}), std::invalid_argument);
}

TEST_CASE("record rows survive a CSV round trip") {
  RecordRow row;
  row.run_id = "dualre";
  row.seed = 1234567890123ULL;
  row.iteration = 3;
  row.n_pseudo = 150;
  row.sel_precision = 0.8125;
  row.dev = {1.0 / 3.0, 0.5, 0.4, 3, 2, 1};
  row.test = {0.25, 0.125, 1.0 / 6.0, 8, 16, 2};

  const auto line = record_row_csv(row);
  const auto back = parse_record_row(line);
  CHECK(back.run_id == row.run_id);
  CHECK(back.seed == row.seed);
  CHECK(back.iteration == row.iteration);
  CHECK(back.n_pseudo == row.n_pseudo);
  CHECK(back.sel_precision == row.sel_precision);  // %.17g: exact
  CHECK(back.dev.precision == row.dev.precision);
  CHECK(back.dev.recall == row.dev.recall);
  CHECK(back.dev.f1 == row.dev.f1);
  CHECK(back.test.f1 == row.test.f1);

  CHECK_THROWS_AS(parse_record_row("too,few,fields"), std::runtime_error);

  const auto path = temp_path("dualre_records.csv");
  write_records_csv({row, row}, path);
  const auto rows = read_records_csv(path);
  std::filesystem::remove(path);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].dev.f1 == row.dev.f1);
}

TEST_CASE("read_records_csv validates the header") {
  const auto path = temp_path("dualre_badheader.csv");
  {
    std::ofstream out(path);
    out << "wrong,header\n";
  }
  CHECK_THROWS_AS(read_records_csv(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("emit_report aggregates final-iteration metrics per run") {
  std::vector<RecordRow> rows;
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    for (int it = 0; it <= 1; ++it) {
      RecordRow row;
      row.run_id = "methodA";
      row.seed = seed;
      row.iteration = it;
      row.n_pseudo = 10 * it;
      // Final-iteration dev F1: 0.5 for seed 1, 0.7 for seed 2.
      row.dev.f1 = (it == 1) ? (seed == 1 ? 0.5 : 0.7) : 0.1;
      row.test.f1 = row.dev.f1;
      rows.push_back(row);
    }
  }

  const auto dir = temp_path("dualre_report_dir");
  std::filesystem::remove_all(dir);
  emit_report(rows, dir);

  std::ifstream summary(dir + "/summary.json");
  REQUIRE(summary.good());
  std::stringstream buffer;
  buffer << summary.rdbuf();
  const auto text = buffer.str();
  CHECK(text.find("methodA") != std::string::npos);
  CHECK(text.find("0.6") != std::string::npos);  // mean of 0.5 and 0.7

  CHECK(std::filesystem::exists(dir + "/records.csv"));
  CHECK(read_records_csv(dir + "/records.csv").size() == rows.size());
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(emit_report({}, dir), std::runtime_error);
}
