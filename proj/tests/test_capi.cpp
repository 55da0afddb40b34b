// Copyright 2026 The lrevent Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "lrevent/lrevent.h"

namespace {

std::string TempPath(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lrevent_capi_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

TEST_CASE("status reporting") {
  lrev_matrix* m = nullptr;
  CHECK(lrev_matrix_load("/nonexistent/file.lrev", &m) == LREV_IO);
  CHECK(m == nullptr);
  CHECK(std::string(lrev_last_error()).find("/nonexistent/file.lrev") != std::string::npos);
  CHECK(lrev_matrix_load(nullptr, &m) == LREV_INVALID_ARGUMENT);
  CHECK(std::string(lrev_status_name(LREV_NUMERICAL)) == "numerical failure");
  size_t s = 0;
  CHECK(lrev_sample_size(10, 0.1, 1.0 / 3.0, 1.0, &s) == LREV_OK);
  CHECK(s == 1264);
  CHECK(std::string(lrev_last_error()).empty());
  CHECK(lrev_sample_size(10, 2.0, 0.5, 1.0, &s) == LREV_INVALID_ARGUMENT);
  lrev_matrix_free(nullptr);
  lrev_model_free(nullptr);
}

TEST_CASE("matrix round trip") {
  const double nan = std::nan("");
  const std::vector<double> dense{1, nan, 3, 4, 5, nan};
  lrev_matrix* m = nullptr;
  REQUIRE(lrev_matrix_from_dense(dense.data(), 2, 3, &m) == LREV_OK);
  CHECK(lrev_matrix_rows(m) == 2);
  CHECK(lrev_matrix_cols(m) == 3);
  CHECK(lrev_matrix_size(m) == 4);
  const std::string path = TempPath("m.lrev");
  REQUIRE(lrev_matrix_save(m, path.c_str()) == LREV_OK);
  lrev_matrix* back = nullptr;
  REQUIRE(lrev_matrix_load(path.c_str(), &back) == LREV_OK);
  std::vector<double> row(3);
  REQUIRE(lrev_matrix_dense_row(back, 1, row.data(), row.size()) == LREV_OK);
  CHECK(row[0] == 4);
  CHECK(row[1] == 5);
  CHECK(std::isnan(row[2]));
  CHECK(lrev_matrix_dense_row(back, 2, row.data(), row.size()) == LREV_OUT_OF_RANGE);

  const std::string csv = TempPath("m.csv");
  REQUIRE(lrev_matrix_write_records_csv(m, csv.c_str(), 3, 1) == LREV_OK);
  lrev_matrix* from_csv = nullptr;
  REQUIRE(lrev_matrix_read_records_csv(csv.c_str(), 2, 3, 1, 0, &from_csv, nullptr) == LREV_OK);
  CHECK(lrev_matrix_size(from_csv) == 4);
  lrev_matrix* widened = nullptr;
  CHECK(lrev_matrix_widen(m, -1.0, &widened) == LREV_INVALID_ARGUMENT);
  lrev_matrix_free(from_csv);
  lrev_matrix_free(back);
  lrev_matrix_free(m);
}

TEST_CASE("fit, query, classify and evaluate") {
  lrev_synth_config synth;
  lrev_synth_config_default(&synth);
  CHECK(synth.event_mean_count == 4);
  synth.base_rows = 10;
  synth.periods = 8;
  synth.sensors = 4;
  synth.base_rank = 2;
  synth.rows_out = 50;
  synth.train_rows = 40;
  synth.event_rows = 5;
  lrev_dataset* data = nullptr;
  REQUIRE(lrev_synth_generate(&synth, &data) == LREV_OK);
  REQUIRE(lrev_dataset_variants(data) == 4);
  CHECK(lrev_dataset_event_mean(data, 3) == 35.0);

  lrev_matrix* train = nullptr;
  REQUIRE(lrev_dataset_train(data, &train) == LREV_OK);
  lrev_fit_config fit;
  lrev_fit_config_default(&fit);
  CHECK(fit.rank == 10);
  CHECK(fit.tolerance == 1e-4);
  fit.rank = 2;
  fit.max_epochs = 200;
  lrev_model* model = nullptr;
  lrev_trace* trace = nullptr;
  REQUIRE(lrev_fit(train, &fit, &model, &trace) == LREV_OK);
  CHECK(lrev_model_rank(model) == 2);
  CHECK(lrev_model_cols(model) == 32);
  const size_t epochs = lrev_trace_epochs(trace);
  REQUIRE(epochs >= 1);
  double objective = 0, rmse = 0, seconds = 0;
  REQUIRE(lrev_trace_get(trace, epochs - 1, &objective, &rmse, &seconds) == LREV_OK);
  double check = 0;
  REQUIRE(lrev_model_rmse(model, train, &check) == LREV_OK);
  CHECK(check == doctest::Approx(rmse).epsilon(1e-9));
  CHECK(lrev_trace_get(trace, epochs, &objective, &rmse, &seconds) == LREV_OUT_OF_RANGE);

  const std::string model_path = TempPath("model.lrfa");
  REQUIRE(lrev_model_save(model, model_path.c_str()) == LREV_OK);
  lrev_model* loaded = nullptr;
  REQUIRE(lrev_model_load(model_path.c_str(), &loaded) == LREV_OK);
  CHECK(lrev_model_rows(loaded) == 40);

  std::vector<double> x(32);
  REQUIRE(lrev_matrix_dense_row(train, 0, x.data(), x.size()) == LREV_OK);
  lrev_query_config query;
  lrev_query_config_default(&query);
  query.delta = 1e6;
  lrev_query_result result;
  REQUIRE(lrev_membership(loaded, x.data(), x.size(), &query, &result) == LREV_OK);
  CHECK(result.inside == 1);
  lrev_query_result exact;
  REQUIRE(lrev_exact_membership(loaded, x.data(), x.size(), 0.0, &exact) == LREV_OK);
  CHECK(exact.distance >= result.distance - 1e-9);
  CHECK(lrev_membership(loaded, x.data(), 5, &query, &result) == LREV_INVALID_ARGUMENT);

  double delta = 0;
  REQUIRE(lrev_calibrate_delta(loaded, train, 1, &delta) == LREV_OK);
  query.delta = delta;
  lrev_label label;
  double distance = 0;
  REQUIRE(lrev_classify(loaded, &query, 1, x.data(), x.size(), 3, &label, &distance) == LREV_OK);
  CHECK(label == LREV_NONEVENT);
  CHECK(distance <= delta);

  lrev_matrix* eval = nullptr;
  uint8_t* labels = nullptr;
  size_t count = 0;
  REQUIRE(lrev_dataset_eval(data, 3, &eval) == LREV_OK);
  REQUIRE(lrev_dataset_eval_labels(data, 3, &labels, &count) == LREV_OK);
  CHECK(count == lrev_matrix_rows(eval));
  const std::string labels_path = TempPath("labels.csv");
  REQUIRE(lrev_labels_write_csv(labels_path.c_str(), labels, count) == LREV_OK);
  uint8_t* reread = nullptr;
  size_t reread_count = 0;
  REQUIRE(lrev_labels_read_csv(labels_path.c_str(), &reread, &reread_count) == LREV_OK);
  CHECK(std::vector<uint8_t>(reread, reread + reread_count) == std::vector<uint8_t>(labels, labels + count));
  lrev_buffer_free(reread);

  const std::vector<double> grid{0.0, delta, 1e6};
  lrev_report* report = nullptr;
  REQUIRE(lrev_evaluate(loaded, &query, 0, eval, labels, count, grid.data(), grid.size(), 2, 1, 1, &report) ==
          LREV_OK);
  CHECK(lrev_report_rows(report) == 3);
  CHECK(lrev_report_repetitions(report) == 2);
  lrev_eval_row row;
  REQUIRE(lrev_report_get(report, 0, &row) == LREV_OK);
  CHECK(row.recall == 1.0);
  REQUIRE(lrev_report_get(report, 2, &row) == LREV_OK);
  CHECK(row.tp == 0.0);
  CHECK(row.tn + row.fn == doctest::Approx(static_cast<double>(count)));
  REQUIRE(lrev_report_write_csv(report, TempPath("report.csv").c_str()) == LREV_OK);
  CHECK(lrev_evaluate(loaded, &query, 0, eval, labels, count - 1, grid.data(), grid.size(), 2, 1, 1, &report) ==
        LREV_INVALID_ARGUMENT);

  lrev_report_free(report);
  lrev_buffer_free(labels);
  lrev_matrix_free(eval);
  lrev_model_free(loaded);
  lrev_model_free(model);
  lrev_trace_free(trace);
  lrev_matrix_free(train);
  lrev_dataset_free(data);
}

TEST_CASE("divergence maps to the numerical status") {
  const std::vector<double> dense{1e300};
  lrev_matrix* m = nullptr;
  REQUIRE(lrev_matrix_from_dense(dense.data(), 1, 1, &m) == LREV_OK);
  lrev_fit_config fit;
  lrev_fit_config_default(&fit);
  fit.rank = 1;
  lrev_model* model = nullptr;
  CHECK(lrev_fit(m, &fit, &model, nullptr) == LREV_NUMERICAL);
  CHECK(model == nullptr);
  lrev_matrix_free(m);
}

}  // namespace
