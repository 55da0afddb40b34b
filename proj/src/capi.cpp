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


#include "lrevent/lrevent.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lrevent/completion.hpp"
#include "lrevent/detect.hpp"
#include "lrevent/error.hpp"
#include "lrevent/obs_matrix.hpp"
#include "lrevent/query.hpp"
#include "lrevent/synth.hpp"

struct lrev_matrix {
  lrevent::ObservationMatrix value;
};
struct lrev_model {
  lrevent::Factorization value;
};
struct lrev_trace {
  lrevent::FitTrace value;
};
struct lrev_report {
  lrevent::EvalReport value;
};
struct lrev_dataset {
  lrevent::Dataset value;
};

namespace {

thread_local std::string g_last_error;

lrev_status StatusOf(lrevent::ErrorCode code) {
  switch (code) {
    case lrevent::ErrorCode::kInvalidArgument:
      return LREV_INVALID_ARGUMENT;
    case lrevent::ErrorCode::kOutOfRange:
      return LREV_OUT_OF_RANGE;
    case lrevent::ErrorCode::kIo:
      return LREV_IO;
    case lrevent::ErrorCode::kFormat:
      return LREV_FORMAT;
    case lrevent::ErrorCode::kNumerical:
      return LREV_NUMERICAL;
  }
  return LREV_INTERNAL;
}

// Runs `body`, translating exceptions into a status and the thread's last error.
template <typename Body>
lrev_status Guard(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return LREV_OK;
  } catch (const lrevent::Error& e) {
    g_last_error = e.what();
    return StatusOf(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LREV_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LREV_INTERNAL;
  }
}

void Require(bool condition, const char* what) {
  if (!condition) lrevent::Fail(lrevent::ErrorCode::kInvalidArgument, what);
}

std::span<const double> Point(const lrev_model* model, const double* x, size_t n) {
  Require(model != nullptr && x != nullptr, "null model or point");
  if (n != model->value.cols()) {
    lrevent::Fail(lrevent::ErrorCode::kInvalidArgument,
                  "point has " + std::to_string(n) + " values, model expects " + std::to_string(model->value.cols()));
  }
  return {x, n};
}

lrevent::QueryConfig ToQuery(const lrev_query_config* c) {
  Require(c != nullptr, "null query config");
  lrevent::QueryConfig q;
  q.delta = c->delta;
  q.epsilon = c->epsilon;
  q.failure_probability = c->failure_probability;
  q.constant = c->constant;
  if (c->sample_size > 0) q.sample_size = c->sample_size;
  q.seed = c->seed;
  q.Validate();
  return q;
}

lrevent::DetectorModel ToDetector(const lrev_model* model, const lrev_query_config* config, int exact) {
  Require(model != nullptr, "null model");
  lrevent::DetectorModel detector;
  detector.factors = model->value;
  detector.query = ToQuery(config);
  detector.exact = exact != 0;
  return detector;
}

template <typename T>
T* CopyBuffer(std::span<const T> values) {
  T* buffer = static_cast<T*>(std::malloc(std::max<size_t>(1, values.size()) * sizeof(T)));
  if (buffer == nullptr) throw std::bad_alloc();
  if (!values.empty()) std::memcpy(buffer, values.data(), values.size() * sizeof(T));
  return buffer;
}

uint8_t* LabelBuffer(std::span<const lrevent::Label> labels) {
  std::vector<uint8_t> raw(labels.size());
  for (size_t k = 0; k < labels.size(); ++k) raw[k] = static_cast<uint8_t>(labels[k]);
  return CopyBuffer<uint8_t>(raw);
}

std::vector<lrevent::Label> ToLabels(const uint8_t* labels, size_t count) {
  Require(labels != nullptr || count == 0, "null labels");
  std::vector<lrevent::Label> out(count);
  for (size_t k = 0; k < count; ++k) {
    if (labels[k] > 1) lrevent::Fail(lrevent::ErrorCode::kInvalidArgument, "label values must be 0 or 1");
    out[k] = static_cast<lrevent::Label>(labels[k]);
  }
  return out;
}

lrevent::SynthConfig ToSynth(const lrev_synth_config* c) {
  Require(c != nullptr, "null synth config");
  Require(c->event_mean_count <= LREV_MAX_EVENT_MEANS, "too many event means");
  Require(c->base_shape == LREV_BASE_UNIFORM || c->base_shape == LREV_BASE_TRAFFIC, "unknown base shape");
  lrevent::SynthConfig s;
  s.base_shape = c->base_shape == LREV_BASE_TRAFFIC ? lrevent::BaseShape::kTraffic : lrevent::BaseShape::kUniform;
  s.base_rows = c->base_rows;
  s.periods = c->periods;
  s.sensors = c->sensors;
  s.base_rank = c->base_rank;
  s.value_scale = c->value_scale;
  s.density = c->density;
  s.rows_out = c->rows_out;
  s.train_rows = c->train_rows;
  s.scalar_min = c->scalar_min;
  s.scalar_max = c->scalar_max;
  s.noise_delta = c->noise_delta;
  s.noise_fraction = c->noise_fraction;
  s.event_means.assign(c->event_means, c->event_means + c->event_mean_count);
  s.event_sigma = c->event_sigma;
  s.event_rows = c->event_rows;
  s.seed = c->seed;
  s.Validate();
  return s;
}

const lrevent::Dataset& Data(const lrev_dataset* dataset, size_t variant) {
  Require(dataset != nullptr, "null dataset");
  if (variant >= dataset->value.eval.size()) lrevent::Fail(lrevent::ErrorCode::kOutOfRange, "variant out of range");
  return dataset->value;
}

}  // namespace

extern "C" {

const char* lrev_version(void) { return "0.1.0"; }

const char* lrev_last_error(void) { return g_last_error.c_str(); }

const char* lrev_status_name(lrev_status status) {
  switch (status) {
    case LREV_OK:
      return "ok";
    case LREV_INVALID_ARGUMENT:
      return "invalid argument";
    case LREV_OUT_OF_RANGE:
      return "out of range";
    case LREV_IO:
      return "i/o error";
    case LREV_FORMAT:
      return "format error";
    case LREV_NUMERICAL:
      return "numerical failure";
    case LREV_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

lrev_status lrev_matrix_read_records_csv(const char* path, size_t days, size_t periods, size_t sensors,
                                         int zeros_as_missing, lrev_matrix** out, size_t* duplicates) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    const std::vector<lrevent::TimeSeriesRecord> records = lrevent::ReadRecordsCsv(std::string(path));
    auto extent = [&](auto field, size_t given) {
      if (given > 0) return given;
      size_t n = 0;
      for (const auto& r : records) n = std::max(n, static_cast<size_t>(std::max<int64_t>(0, field(r))) + 1);
      return n;
    };
    days = extent([](const auto& r) { return r.day; }, days);
    periods = extent([](const auto& r) { return r.period; }, periods);
    sensors = extent([](const auto& r) { return r.sensor; }, sensors);
    lrevent::FlattenOptions options;
    options.zeros_as_missing = zeros_as_missing != 0;
    lrevent::FlattenResult flat = lrevent::Flatten(records, days, periods, sensors, options);
    if (duplicates != nullptr) *duplicates = flat.duplicates;
    *out = new lrev_matrix{std::move(flat.matrix)};
  });
}

lrev_status lrev_matrix_write_records_csv(const lrev_matrix* matrix, const char* path, size_t periods,
                                          size_t sensors) {
  return Guard([&] {
    Require(matrix != nullptr && path != nullptr, "null argument");
    std::ofstream out(path);
    if (!out) lrevent::Fail(lrevent::ErrorCode::kIo, std::string("cannot open ") + path + " for writing");
    lrevent::WriteRecordsCsv(out, matrix->value, periods, sensors);
    if (!out) lrevent::Fail(lrevent::ErrorCode::kIo, std::string("write failed: ") + path);
  });
}

lrev_status lrev_matrix_load(const char* path, lrev_matrix** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = new lrev_matrix{lrevent::LoadMatrix(path)};
  });
}

lrev_status lrev_matrix_save(const lrev_matrix* matrix, const char* path) {
  return Guard([&] {
    Require(matrix != nullptr && path != nullptr, "null argument");
    lrevent::SaveMatrix(path, matrix->value);
  });
}

lrev_status lrev_matrix_from_dense(const double* values, size_t rows, size_t cols, lrev_matrix** out) {
  return Guard([&] {
    Require((values != nullptr || rows * cols == 0) && out != nullptr, "null argument");
    *out = new lrev_matrix{lrevent::ObservationMatrix::FromDense(rows, cols, {values, rows * cols})};
  });
}

lrev_status lrev_matrix_widen(const lrev_matrix* matrix, double delta, lrev_matrix** out) {
  return Guard([&] {
    Require(matrix != nullptr && out != nullptr, "null argument");
    *out = new lrev_matrix{lrevent::Widen(matrix->value, delta)};
  });
}

size_t lrev_matrix_rows(const lrev_matrix* matrix) { return matrix ? matrix->value.rows() : 0; }
size_t lrev_matrix_cols(const lrev_matrix* matrix) { return matrix ? matrix->value.cols() : 0; }
size_t lrev_matrix_size(const lrev_matrix* matrix) { return matrix ? matrix->value.size() : 0; }

lrev_status lrev_matrix_dense_row(const lrev_matrix* matrix, size_t row, double* out, size_t cols) {
  return Guard([&] {
    Require(matrix != nullptr && out != nullptr, "null argument");
    if (row >= matrix->value.rows()) lrevent::Fail(lrevent::ErrorCode::kOutOfRange, "row out of range");
    Require(cols == matrix->value.cols(), "output length differs from the column count");
    const std::vector<double> dense = matrix->value.DenseRow(row);
    std::copy(dense.begin(), dense.end(), out);
  });
}

void lrev_matrix_free(lrev_matrix* matrix) { delete matrix; }

void lrev_fit_config_default(lrev_fit_config* config) {
  if (config == nullptr) return;
  const lrevent::FitConfig d;
  *config = {d.rank, d.mu, d.row_fraction, d.column_fraction, d.max_epochs,
             d.tolerance, d.seed, d.init_scale, d.threads};
}

lrev_status lrev_fit(const lrev_matrix* matrix, const lrev_fit_config* config, lrev_model** model,
                     lrev_trace** trace) {
  return Guard([&] {
    Require(matrix != nullptr && config != nullptr && model != nullptr, "null argument");
    lrevent::FitConfig c;
    c.rank = config->rank;
    c.mu = config->mu;
    c.row_fraction = config->row_fraction;
    c.column_fraction = config->column_fraction;
    c.max_epochs = config->max_epochs;
    c.tolerance = config->tolerance;
    c.seed = config->seed;
    c.init_scale = config->init_scale;
    c.threads = config->threads;
    lrevent::FitResult result = lrevent::Fit(matrix->value, c);
    *model = new lrev_model{std::move(result.model)};
    if (trace != nullptr) *trace = new lrev_trace{std::move(result.trace)};
  });
}

size_t lrev_trace_epochs(const lrev_trace* trace) { return trace ? trace->value.epochs() : 0; }

double lrev_trace_initial_objective(const lrev_trace* trace) {
  return trace ? trace->value.initial_objective : std::nan("");
}

lrev_status lrev_trace_get(const lrev_trace* trace, size_t epoch, double* objective, double* rmse,
                           double* seconds) {
  return Guard([&] {
    Require(trace != nullptr, "null trace");
    if (epoch >= trace->value.epochs()) lrevent::Fail(lrevent::ErrorCode::kOutOfRange, "epoch out of range");
    if (objective) *objective = trace->value.objective[epoch];
    if (rmse) *rmse = trace->value.rmse[epoch];
    if (seconds) *seconds = trace->value.seconds[epoch];
  });
}

void lrev_trace_free(lrev_trace* trace) { delete trace; }

lrev_status lrev_model_load(const char* path, lrev_model** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = new lrev_model{lrevent::LoadModel(path)};
  });
}

lrev_status lrev_model_save(const lrev_model* model, const char* path) {
  return Guard([&] {
    Require(model != nullptr && path != nullptr, "null argument");
    lrevent::SaveModel(path, model->value);
  });
}

size_t lrev_model_rows(const lrev_model* model) { return model ? model->value.rows() : 0; }
size_t lrev_model_cols(const lrev_model* model) { return model ? model->value.cols() : 0; }
size_t lrev_model_rank(const lrev_model* model) { return model ? model->value.rank() : 0; }

lrev_status lrev_model_objective(const lrev_model* model, const lrev_matrix* matrix, double* out) {
  return Guard([&] {
    Require(model != nullptr && matrix != nullptr && out != nullptr, "null argument");
    *out = lrevent::Objective(model->value, matrix->value);
  });
}

lrev_status lrev_model_rmse(const lrev_model* model, const lrev_matrix* matrix, double* out) {
  return Guard([&] {
    Require(model != nullptr && matrix != nullptr && out != nullptr, "null argument");
    *out = lrevent::Rmse(model->value, matrix->value);
  });
}

void lrev_model_free(lrev_model* model) { delete model; }

void lrev_query_config_default(lrev_query_config* config) {
  if (config == nullptr) return;
  const lrevent::QueryConfig d;
  *config = {d.delta, d.epsilon, d.failure_probability, d.constant, 0, d.seed};
}

lrev_status lrev_sample_size(size_t rank, double epsilon, double failure_probability, double constant,
                             size_t* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = lrevent::SampleSize(rank, epsilon, failure_probability, constant);
  });
}

lrev_status lrev_membership(const lrev_model* model, const double* x, size_t n, const lrev_query_config* config,
                            lrev_query_result* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    const lrevent::QueryResult r = lrevent::Membership(model->value.right, Point(model, x, n), ToQuery(config));
    *out = {r.inside ? 1 : 0, r.distance, r.sampled.size()};
  });
}

lrev_status lrev_exact_membership(const lrev_model* model, const double* x, size_t n, double delta,
                                  lrev_query_result* out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    const lrevent::QueryResult r = lrevent::ExactMembership(model->value.right, Point(model, x, n), delta);
    *out = {r.inside ? 1 : 0, r.distance, r.sampled.size()};
  });
}

lrev_status lrev_calibrate_delta(const lrev_model* model, const lrev_matrix* holdout, unsigned threads,
                                 double* out) {
  return Guard([&] {
    Require(model != nullptr && holdout != nullptr && out != nullptr, "null argument");
    *out = lrevent::CalibrateDelta(model->value, holdout->value, threads);
  });
}

lrev_status lrev_classify(const lrev_model* model, const lrev_query_config* config, int exact, const double* x,
                          size_t n, uint64_t seed, lrev_label* label, double* distance) {
  return Guard([&] {
    Require(label != nullptr && distance != nullptr, "null argument");
    const lrevent::DetectorModel detector = ToDetector(model, config, exact);
    const lrevent::Classification c = lrevent::Classify(detector, Point(model, x, n), seed);
    *label = c.label == lrevent::Label::kEvent ? LREV_EVENT : LREV_NONEVENT;
    *distance = c.distance;
  });
}

uint64_t lrev_evaluation_seed(uint64_t seed, size_t repetition, size_t index) {
  return lrevent::EvaluationSeed(seed, repetition, index);
}

lrev_status lrev_labels_read_csv(const char* path, uint8_t** labels, size_t* count) {
  return Guard([&] {
    Require(path != nullptr && labels != nullptr && count != nullptr, "null argument");
    const std::vector<lrevent::Label> read = lrevent::ReadLabelsCsv(std::string(path));
    *labels = LabelBuffer(read);
    *count = read.size();
  });
}

lrev_status lrev_labels_write_csv(const char* path, const uint8_t* labels, size_t count) {
  return Guard([&] {
    Require(path != nullptr, "null argument");
    const std::vector<lrevent::Label> values = ToLabels(labels, count);
    std::ofstream out(path);
    if (!out) lrevent::Fail(lrevent::ErrorCode::kIo, std::string("cannot open ") + path + " for writing");
    lrevent::WriteLabelsCsv(out, values);
    if (!out) lrevent::Fail(lrevent::ErrorCode::kIo, std::string("write failed: ") + path);
  });
}

void lrev_buffer_free(void* buffer) { std::free(buffer); }

lrev_status lrev_evaluate(const lrev_model* model, const lrev_query_config* config, int exact,
                          const lrev_matrix* samples, const uint8_t* labels, size_t label_count, const double* grid,
                          size_t grid_count, size_t repetitions, uint64_t seed, unsigned threads,
                          lrev_report** out) {
  return Guard([&] {
    Require(samples != nullptr && out != nullptr && (grid != nullptr || grid_count == 0), "null argument");
    const lrevent::DetectorModel detector = ToDetector(model, config, exact);
    const std::vector<lrevent::Label> truth = ToLabels(labels, label_count);
    *out = new lrev_report{lrevent::Evaluate(detector, samples->value, truth, {grid, grid_count}, repetitions,
                                             seed, threads)};
  });
}

size_t lrev_report_rows(const lrev_report* report) { return report ? report->value.rows.size() : 0; }

lrev_status lrev_report_get(const lrev_report* report, size_t index, lrev_eval_row* out) {
  return Guard([&] {
    Require(report != nullptr && out != nullptr, "null argument");
    if (index >= report->value.rows.size()) lrevent::Fail(lrevent::ErrorCode::kOutOfRange, "row out of range");
    const lrevent::EvalRow& r = report->value.rows[index];
    *out = {r.delta, r.counts.tp, r.counts.fp, r.counts.fn, r.counts.tn,
            r.metrics.precision, r.metrics.recall, r.metrics.f1};
  });
}

size_t lrev_report_sample_size(const lrev_report* report) { return report ? report->value.sample_size : 0; }
size_t lrev_report_repetitions(const lrev_report* report) { return report ? report->value.repetitions : 0; }

lrev_status lrev_report_write_csv(const lrev_report* report, const char* path) {
  return Guard([&] {
    Require(report != nullptr && path != nullptr, "null argument");
    std::ofstream out(path);
    if (!out) lrevent::Fail(lrevent::ErrorCode::kIo, std::string("cannot open ") + path + " for writing");
    lrevent::WriteReportCsv(out, report->value);
    if (!out) lrevent::Fail(lrevent::ErrorCode::kIo, std::string("write failed: ") + path);
  });
}

void lrev_report_free(lrev_report* report) { delete report; }

void lrev_synth_config_default(lrev_synth_config* config) {
  if (config == nullptr) return;
  const lrevent::SynthConfig d;
  *config = lrev_synth_config{};
  config->base_shape = d.base_shape == lrevent::BaseShape::kTraffic ? LREV_BASE_TRAFFIC : LREV_BASE_UNIFORM;
  config->base_rows = d.base_rows;
  config->periods = d.periods;
  config->sensors = d.sensors;
  config->base_rank = d.base_rank;
  config->value_scale = d.value_scale;
  config->density = d.density;
  config->rows_out = d.rows_out;
  config->train_rows = d.train_rows;
  config->scalar_min = d.scalar_min;
  config->scalar_max = d.scalar_max;
  config->noise_delta = d.noise_delta;
  config->noise_fraction = d.noise_fraction;
  config->event_mean_count = std::min<size_t>(d.event_means.size(), LREV_MAX_EVENT_MEANS);
  std::copy_n(d.event_means.begin(), config->event_mean_count, config->event_means);
  config->event_sigma = d.event_sigma;
  config->event_rows = d.event_rows;
  config->seed = d.seed;
}

lrev_status lrev_synth_generate(const lrev_synth_config* config, lrev_dataset** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = new lrev_dataset{lrevent::MakeDataset(ToSynth(config))};
  });
}

lrev_status lrev_dataset_nonevents(const lrev_dataset* dataset, lrev_matrix** out) {
  return Guard([&] {
    Require(dataset != nullptr && out != nullptr, "null argument");
    *out = new lrev_matrix{dataset->value.nonevents.matrix};
  });
}

lrev_status lrev_dataset_train(const lrev_dataset* dataset, lrev_matrix** out) {
  return Guard([&] {
    Require(dataset != nullptr && out != nullptr, "null argument");
    *out = new lrev_matrix{dataset->value.train};
  });
}

size_t lrev_dataset_variants(const lrev_dataset* dataset) { return dataset ? dataset->value.eval.size() : 0; }

double lrev_dataset_event_mean(const lrev_dataset* dataset, size_t variant) {
  if (dataset == nullptr || variant >= dataset->value.events.size()) return std::nan("");
  return dataset->value.events[variant].mean;
}

lrev_status lrev_dataset_events(const lrev_dataset* dataset, size_t variant, lrev_matrix** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = new lrev_matrix{Data(dataset, variant).events[variant].matrix};
  });
}

lrev_status lrev_dataset_eval(const lrev_dataset* dataset, size_t variant, lrev_matrix** out) {
  return Guard([&] {
    Require(out != nullptr, "null argument");
    *out = new lrev_matrix{Data(dataset, variant).eval[variant]};
  });
}

lrev_status lrev_dataset_eval_labels(const lrev_dataset* dataset, size_t variant, uint8_t** labels,
                                     size_t* count) {
  return Guard([&] {
    Require(labels != nullptr && count != nullptr, "null argument");
    const auto& values = Data(dataset, variant).eval_labels[variant];
    *labels = LabelBuffer(values);
    *count = values.size();
  });
}

void lrev_dataset_free(lrev_dataset* dataset) { delete dataset; }

}  // extern "C"
