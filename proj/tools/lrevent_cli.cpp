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


// Command-line front end over the C API. Every run writes a manifest of
// key=value lines next to its main output; passing that file back through
// --config repeats the run.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "lrevent/lrevent.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

// Failure carrying the exit code the process should return.
struct CliError : std::runtime_error {
  CliError(int code, const std::string& message) : std::runtime_error(message), exit_code(code) {}
  int exit_code;
};

void Check(lrev_status status, const std::string& context) {
  if (status == LREV_OK) return;
  const int code = status == LREV_NUMERICAL ? kExitNumerical : kExitInvalid;
  throw CliError(code, context + ": " + lrev_status_name(status) + ": " + lrev_last_error());
}

[[noreturn]] void Invalid(const std::string& message) { throw CliError(kExitInvalid, message); }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Matrix = std::unique_ptr<lrev_matrix, Deleter<lrev_matrix, lrev_matrix_free>>;
using Model = std::unique_ptr<lrev_model, Deleter<lrev_model, lrev_model_free>>;
using Trace = std::unique_ptr<lrev_trace, Deleter<lrev_trace, lrev_trace_free>>;
using Report = std::unique_ptr<lrev_report, Deleter<lrev_report, lrev_report_free>>;
using Dataset = std::unique_ptr<lrev_dataset, Deleter<lrev_dataset, lrev_dataset_free>>;

std::vector<uint8_t> TakeBuffer(uint8_t* data, size_t count) {
  std::vector<uint8_t> out(data, data + count);
  lrev_buffer_free(data);
  return out;
}

std::string Format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string Format(const std::string& v) { return v; }
std::string Format(bool v) { return v ? "true" : "false"; }
template <typename T>
  requires std::is_integral_v<T>
std::string Format(T v) {
  return std::to_string(v);
}

using Clock = std::chrono::steady_clock;
double Since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Registers options on a subcommand and remembers them for the manifest.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* Add(const std::string& name, T& value, const std::string& help) {
    dump_.emplace_back([name, &value] { return std::make_pair(name, Format(value)); });
    return app_->add_option("--" + name, value, help);
  }

  CLI::Option* Flag(const std::string& name, bool& value, const std::string& help) {
    dump_.emplace_back([name, &value] { return std::make_pair(name, Format(value)); });
    return app_->add_flag("--" + name, value, help);
  }

  std::vector<std::pair<std::string, std::string>> Resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : dump_) out.push_back(f());
    return out;
  }

  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::function<std::pair<std::string, std::string>()>> dump_;
};

struct Manifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> outputs;
  std::vector<std::pair<std::string, std::string>> info;
  std::vector<std::pair<std::string, double>> timings;

  void Write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) Invalid("cannot write manifest " + path);
    out << "# lrevent " << lrev_version() << " run manifest; rerun with --config " << path << "\n";
    out << "subcommand=" << subcommand << "\n";
    for (const auto& [k, v] : config) out << k << "=" << v << "\n";
    for (std::size_t i = 0; i < outputs.size(); ++i) out << "info.output" << i << "=" << outputs[i] << "\n";
    for (const auto& [k, v] : info) out << "info." << k << "=" << v << "\n";
    for (const auto& [k, v] : timings) out << "timing." << k << "=" << Format(v) << "\n";
    if (!out) Invalid("cannot write manifest " + path);
  }
};

// Reads key=value lines; blank lines and '#' comments are skipped, and
// informational keys written into manifests are ignored.
std::vector<std::pair<std::string, std::string>> ReadConfig(const std::string& path,
                                                            const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) Invalid("cannot open config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) Invalid(path + ":" + std::to_string(number) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) Invalid(path + ":" + std::to_string(number) + ": empty key");
    if (key == "subcommand") {
      if (value != subcommand) Invalid(path + ": written for '" + value + "', not '" + subcommand + "'");
      continue;
    }
    if (key.rfind("timing.", 0) == 0 || key.rfind("info.", 0) == 0) continue;
    if (key == "config") Invalid(path + ": config files cannot nest");
    out.emplace_back(key, value);
  }
  return out;
}

std::vector<double> ParseList(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
      Invalid("bad number '" + item + "' in " + what);
    }
    out.push_back(v);
  }
  if (out.empty()) Invalid(what + " is empty");
  return out;
}

// "start:stop:step" (inclusive) or a comma-separated list.
std::vector<double> ParseGrid(const std::string& text) {
  if (text.find(':') == std::string::npos) return ParseList(text, "delta grid");
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(ParseList(item, "delta grid").front());
  if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
    Invalid("delta grid range must be start:stop:step with step > 0 and stop >= start");
  }
  const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
  if (count > 1000000) Invalid("delta grid has too many points");
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = parts[0] + static_cast<double>(k) * parts[2];
  return grid;
}

std::vector<std::size_t> ParseRanks(const std::string& text) {
  std::vector<std::size_t> ranks;
  for (double v : ParseList(text, "rank list")) {
    if (v < 1 || v != std::floor(v)) Invalid("ranks must be positive integers");
    ranks.push_back(static_cast<std::size_t>(v));
  }
  return ranks;
}

struct DataOptions {
  std::size_t days = 0, periods = 0, sensors = 0;
  bool zeros_missing = false;

  void Register(Options& o) {
    o.Add("days", days, "Days when reading a records CSV (0 infers)");
    o.Add("periods", periods, "Periods per day when reading a records CSV (0 infers)");
    o.Add("sensors", sensors, "Sensors when reading a records CSV (0 infers)");
    o.Flag("zeros-missing", zeros_missing, "Treat zero readings in a records CSV as missing");
  }

  // Records CSV by extension, otherwise the binary matrix container.
  Matrix Load(const std::string& path) const {
    lrev_matrix* raw = nullptr;
    if (std::filesystem::path(path).extension() == ".csv") {
      Check(lrev_matrix_read_records_csv(path.c_str(), days, periods, sensors, zeros_missing ? 1 : 0, &raw, nullptr),
            "reading " + path);
    } else {
      Check(lrev_matrix_load(path.c_str(), &raw), "reading " + path);
    }
    return Matrix(raw);
  }
};

Model LoadModel(const std::string& path) {
  lrev_model* raw = nullptr;
  Check(lrev_model_load(path.c_str(), &raw), "reading " + path);
  return Model(raw);
}

std::vector<double> DenseRow(const lrev_matrix* m, std::size_t i) {
  std::vector<double> row(lrev_matrix_cols(m));
  Check(lrev_matrix_dense_row(m, i, row.data(), row.size()), "row " + std::to_string(i));
  return row;
}

struct QueryOptions {
  lrev_query_config config{};
  std::size_t sample_size = 0;
  bool exact = false;

  QueryOptions() { lrev_query_config_default(&config); }

  void Register(Options& o) {
    o.Add("epsilon", config.epsilon, "Fraction of violated coordinates the sample must catch");
    o.Add("fail-prob", config.failure_probability, "Allowed probability of missing them");
    o.Add("constant", config.constant, "Constant in front of the sample-size bound");
    o.Add("sample-size", sample_size, "Explicit number of sampled coordinates (0 derives it)");
    o.Flag("exact", exact, "Test every observed coordinate");
  }

  lrev_query_config Resolved() const {
    lrev_query_config c = config;
    c.sample_size = sample_size;
    return c;
  }
};

// ---------------------------------------------------------------- generate

struct GenerateCommand {
  lrev_synth_config synth{};
  std::string out_dir;
  std::string base_shape = "traffic";
  std::string event_means;
  bool records_csv = false;

  GenerateCommand() {
    lrev_synth_config_default(&synth);
    // Zero derives the count from --rows in the default proportions.
    synth.train_rows = 0;
    synth.event_rows = 0;
    for (std::size_t k = 0; k < synth.event_mean_count; ++k) {
      event_means += (k ? "," : "") + Format(synth.event_means[k]);
    }
  }

  void Register(Options& o) {
    o.Add("out", out_dir, "Output directory")->required();
    o.Add("seed", synth.seed, "Random seed");
    o.Add("base-shape", base_shape, "Base matrix generator: traffic or uniform")
        ->check(CLI::IsMember({"traffic", "uniform"}));
    o.Add("base-rows", synth.base_rows, "Rows of the base matrix");
    o.Add("periods", synth.periods, "Periods per day");
    o.Add("sensors", synth.sensors, "Sensors");
    o.Add("rank", synth.base_rank, "Rank of the base matrix");
    o.Add("scale", synth.value_scale, "Mean observed base value");
    o.Add("density", synth.density, "Fraction of observed cells");
    o.Add("rows", synth.rows_out, "Non-event rows to generate");
    o.Add("train-rows", synth.train_rows, "Leading non-event rows used for training (0: 5/6 of --rows)");
    o.Add("scalar-min", synth.scalar_min, "Lower end of the row scalars");
    o.Add("scalar-max", synth.scalar_max, "Upper end of the row scalars");
    o.Add("noise-delta", synth.noise_delta, "Noise half-width parameter");
    o.Add("noise-fraction", synth.noise_fraction, "Uniform noise spans +-fraction*noise-delta");
    o.Add("event-means", event_means, "Comma-separated event noise means");
    o.Add("event-sigma", synth.event_sigma, "Event noise standard deviation");
    o.Add("event-rows", synth.event_rows, "Event rows per mean (0: 1/6 of --rows)");
    o.Flag("records-csv", records_csv, "Also write each matrix as a records CSV");
  }

  int Run(const Options& o) {
    const auto t0 = Clock::now();
    const std::vector<double> means = ParseList(event_means, "event means");
    if (means.size() > LREV_MAX_EVENT_MEANS) Invalid("at most 16 event means");
    synth.event_mean_count = means.size();
    std::copy(means.begin(), means.end(), synth.event_means);
    synth.base_shape = base_shape == "traffic" ? LREV_BASE_TRAFFIC : LREV_BASE_UNIFORM;
    Manifest manifest{"generate", o.Resolved(), {}, {}, {}};
    if (synth.train_rows == 0) synth.train_rows = synth.rows_out * 5 / 6;
    if (synth.event_rows == 0) synth.event_rows = synth.rows_out / 6;

    lrev_dataset* raw = nullptr;
    Check(lrev_synth_generate(&synth, &raw), "generating data");
    const Dataset data(raw);
    const double generate_seconds = Since(t0);

    std::filesystem::create_directories(out_dir);
    const auto t1 = Clock::now();
    auto save = [&](const Matrix& m, const std::string& stem) {
      const std::string path = (std::filesystem::path(out_dir) / (stem + ".lrev")).string();
      Check(lrev_matrix_save(m.get(), path.c_str()), "writing " + path);
      manifest.outputs.push_back(path);
      if (records_csv) {
        const std::string csv = (std::filesystem::path(out_dir) / (stem + ".csv")).string();
        Check(lrev_matrix_write_records_csv(m.get(), csv.c_str(), synth.periods, synth.sensors), "writing " + csv);
        manifest.outputs.push_back(csv);
      }
    };
    lrev_matrix* m = nullptr;
    Check(lrev_dataset_nonevents(data.get(), &m), "non-event rows");
    save(Matrix(m), "Y");
    Check(lrev_dataset_train(data.get(), &m), "training rows");
    save(Matrix(m), "train");
    for (std::size_t v = 0; v < lrev_dataset_variants(data.get()); ++v) {
      const std::string tag = "mu" + Format(lrev_dataset_event_mean(data.get(), v));
      Check(lrev_dataset_events(data.get(), v, &m), "event rows");
      save(Matrix(m), "G_" + tag);
      Check(lrev_dataset_eval(data.get(), v, &m), "evaluation rows");
      save(Matrix(m), "eval_" + tag);
      uint8_t* labels = nullptr;
      std::size_t count = 0;
      Check(lrev_dataset_eval_labels(data.get(), v, &labels, &count), "labels");
      const std::vector<uint8_t> owned = TakeBuffer(labels, count);
      const std::string path = (std::filesystem::path(out_dir) / ("eval_" + tag + "_labels.csv")).string();
      Check(lrev_labels_write_csv(path.c_str(), owned.data(), owned.size()), "writing " + path);
      manifest.outputs.push_back(path);
    }
    manifest.timings = {{"generate_seconds", generate_seconds}, {"write_seconds", Since(t1)}};
    manifest.Write((std::filesystem::path(out_dir) / "generate.manifest").string());
    std::printf("wrote %zu files to %s\n", manifest.outputs.size(), out_dir.c_str());
    return kExitOk;
  }
};

// ------------------------------------------------------------------- train

struct TrainCommand {
  DataOptions data;
  lrev_fit_config fit{};
  std::string data_path, out_path, trace_path, table_path;
  std::string ranks = "10";
  double widen = 0.0;

  TrainCommand() { lrev_fit_config_default(&fit); }

  void Register(Options& o) {
    o.Add("data", data_path, "Training matrix (.lrev container or records .csv)")->required();
    o.Add("out", out_path, "Model file; a rank sweep appends .r<rank>")->required();
    o.Add("trace", trace_path, "Per-epoch trace CSV (default <out>.trace.csv)");
    o.Add("table", table_path, "Rank sweep summary CSV (default <out>.sweep.csv)");
    o.Add("rank", ranks, "Rank, or a comma-separated list for a sweep");
    o.Add("mu", fit.mu, "Regularization weight");
    o.Add("delta", widen, "Widen exact entries to [x - delta, x + delta]");
    o.Add("tol", fit.tolerance, "Stop when an epoch improves the objective by less than this fraction");
    o.Add("max-epochs", fit.max_epochs, "Epoch limit");
    o.Add("row-fraction", fit.row_fraction, "Fraction of rows updated per epoch");
    o.Add("column-fraction", fit.column_fraction, "Fraction of columns updated per epoch");
    o.Add("init-scale", fit.init_scale, "Initial factor scale (0 picks one from the data)");
    o.Add("seed", fit.seed, "Random seed");
    data.Register(o);
  }

  int Run(const Options& o, unsigned threads) {
    const std::vector<std::size_t> rank_list = ParseRanks(ranks);
    const bool sweep = rank_list.size() > 1;
    // Recorded before the defaults are derived so a rerun with --out follows it.
    Manifest manifest{"train", o.Resolved(), {}, {}, {}};
    if (trace_path.empty()) trace_path = out_path + ".trace.csv";
    if (table_path.empty()) table_path = out_path + ".sweep.csv";
    auto t0 = Clock::now();
    Matrix matrix = data.Load(data_path);
    if (widen > 0.0) {
      lrev_matrix* w = nullptr;
      Check(lrev_matrix_widen(matrix.get(), widen, &w), "widening");
      matrix.reset(w);
    } else if (widen < 0.0) {
      Invalid("--delta must be >= 0");
    }
    manifest.timings.emplace_back("load_seconds", Since(t0));

    std::ofstream table;
    if (sweep) {
      table.open(table_path);
      if (!table) Invalid("cannot write " + table_path);
      table << "rank,epochs,objective,rmse,seconds\n";
      manifest.outputs.push_back(table_path);
    }
    for (std::size_t rank : rank_list) {
      const std::string suffix = sweep ? ".r" + std::to_string(rank) : "";
      lrev_fit_config config = fit;
      config.rank = rank;
      config.threads = threads;
      lrev_model* raw_model = nullptr;
      lrev_trace* raw_trace = nullptr;
      t0 = Clock::now();
      Check(lrev_fit(matrix.get(), &config, &raw_model, &raw_trace), "training rank " + std::to_string(rank));
      const double seconds = Since(t0);
      const Model model(raw_model);
      const Trace trace(raw_trace);
      manifest.timings.emplace_back("fit_seconds" + suffix, seconds);

      const std::string model_path = out_path + suffix;
      Check(lrev_model_save(model.get(), model_path.c_str()), "writing " + model_path);
      manifest.outputs.push_back(model_path);
      const std::string this_trace = trace_path + suffix;
      std::ofstream tout(this_trace);
      if (!tout) Invalid("cannot write " + this_trace);
      tout << "epoch,objective,rmse,seconds\n";
      const std::size_t epochs = lrev_trace_epochs(trace.get());
      double objective = lrev_trace_initial_objective(trace.get()), rmse = NAN, secs = 0.0;
      for (std::size_t e = 0; e < epochs; ++e) {
        Check(lrev_trace_get(trace.get(), e, &objective, &rmse, &secs), "trace");
        tout << (e + 1) << "," << Format(objective) << "," << Format(rmse) << "," << Format(secs) << "\n";
      }
      if (!tout) Invalid("write failed: " + this_trace);
      manifest.outputs.push_back(this_trace);
      if (sweep) {
        table << rank << "," << epochs << "," << Format(objective) << "," << Format(rmse) << "," << Format(seconds)
              << "\n";
      }
      std::printf("rank %zu: %zu epochs, objective %.6g, rmse %.6g, %.3f s\n", rank, epochs, objective, rmse,
                  seconds);
    }
    if (sweep && !table) Invalid("write failed: " + table_path);
    manifest.Write(out_path + ".manifest");
    return kExitOk;
  }
};

// ------------------------------------------------------------------ detect

struct DetectCommand {
  DataOptions data;
  QueryOptions query;
  std::string model_path, data_path, out_path, calibrate_path;

  void Register(Options& o) {
    o.Add("model", model_path, "Model file")->required();
    o.Add("data", data_path, "Rows to classify (.lrev container or records .csv)")->required();
    o.Add("out", out_path, "Verdict CSV")->required();
    o.Add("delta", query.config.delta, "Noise threshold; rows farther than this are events");
    o.Add("calibrate", calibrate_path, "Holdout matrix; sets delta to its largest exact distance");
    o.Add("seed", query.config.seed, "Random seed");
    query.Register(o);
    data.Register(o);
  }

  int Run(const Options& o, unsigned threads) {
    Manifest manifest{"detect", o.Resolved(), {out_path}, {}, {}};
    auto t0 = Clock::now();
    const Model model = LoadModel(model_path);
    const Matrix samples = data.Load(data_path);
    if (lrev_matrix_cols(samples.get()) != lrev_model_cols(model.get())) {
      Invalid("data has " + std::to_string(lrev_matrix_cols(samples.get())) + " columns, model expects " +
              std::to_string(lrev_model_cols(model.get())));
    }
    manifest.timings.emplace_back("load_seconds", Since(t0));
    lrev_query_config config = query.Resolved();
    if (!calibrate_path.empty()) {
      t0 = Clock::now();
      const Matrix holdout = data.Load(calibrate_path);
      Check(lrev_calibrate_delta(model.get(), holdout.get(), threads, &config.delta), "calibrating delta");
      manifest.timings.emplace_back("calibrate_seconds", Since(t0));
      manifest.info.emplace_back("calibrated_delta", Format(config.delta));
      std::printf("calibrated delta %.17g\n", config.delta);
    }

    std::ofstream out(out_path);
    if (!out) Invalid("cannot write " + out_path);
    out << "row,verdict,distance,seconds\n";
    std::size_t events = 0;
    t0 = Clock::now();
    for (std::size_t i = 0; i < lrev_matrix_rows(samples.get()); ++i) {
      const std::vector<double> x = DenseRow(samples.get(), i);
      lrev_label label = LREV_NONEVENT;
      double distance = 0.0;
      const auto q0 = Clock::now();
      Check(lrev_classify(model.get(), &config, query.exact ? 1 : 0, x.data(), x.size(),
                          lrev_evaluation_seed(config.seed, 0, i), &label, &distance),
            "row " + std::to_string(i));
      const double seconds = Since(q0);
      events += label == LREV_EVENT ? 1 : 0;
      out << i << "," << (label == LREV_EVENT ? "event" : "nonevent") << "," << Format(distance) << ","
          << Format(seconds) << "\n";
    }
    if (!out) Invalid("write failed: " + out_path);
    manifest.timings.emplace_back("classify_seconds", Since(t0));
    manifest.Write(out_path + ".manifest");
    std::printf("%zu of %zu rows flagged as events\n", events, lrev_matrix_rows(samples.get()));
    return kExitOk;
  }
};

// -------------------------------------------------------------------- eval

struct EvalCommand {
  DataOptions data;
  QueryOptions query;
  std::string model_path, data_path, labels_path, out_path;
  std::string grid = "0:60:0.5";
  std::size_t reps = 5;
  uint64_t seed = 1;

  void Register(Options& o) {
    o.Add("model", model_path, "Model file")->required();
    o.Add("data", data_path, "Labelled rows (.lrev container or records .csv)")->required();
    o.Add("labels", labels_path, "Labels CSV (row,label)")->required();
    o.Add("out", out_path, "Report CSV")->required();
    o.Add("delta-grid", grid, "Thresholds as start:stop:step or a comma-separated list");
    o.Add("reps", reps, "Repetitions with independent coordinate samples");
    o.Add("seed", seed, "Random seed");
    query.Register(o);
    data.Register(o);
  }

  int Run(const Options& o, unsigned threads) {
    Manifest manifest{"eval", o.Resolved(), {out_path}, {}, {}};
    const std::vector<double> delta_grid = ParseGrid(grid);
    auto t0 = Clock::now();
    const Model model = LoadModel(model_path);
    const Matrix samples = data.Load(data_path);
    uint8_t* raw_labels = nullptr;
    std::size_t count = 0;
    Check(lrev_labels_read_csv(labels_path.c_str(), &raw_labels, &count), "reading " + labels_path);
    const std::vector<uint8_t> labels = TakeBuffer(raw_labels, count);
    manifest.timings.emplace_back("load_seconds", Since(t0));

    const lrev_query_config config = query.Resolved();
    lrev_report* raw = nullptr;
    t0 = Clock::now();
    Check(lrev_evaluate(model.get(), &config, query.exact ? 1 : 0, samples.get(), labels.data(), labels.size(),
                        delta_grid.data(), delta_grid.size(), reps, seed, threads, &raw),
          "evaluating");
    const Report report(raw);
    manifest.timings.emplace_back("evaluate_seconds", Since(t0));
    Check(lrev_report_write_csv(report.get(), out_path.c_str()), "writing " + out_path);
    manifest.info.emplace_back("sample_size", Format(lrev_report_sample_size(report.get())));
    manifest.Write(out_path + ".manifest");

    double best_f1 = 0.0, best_delta = 0.0;
    for (std::size_t k = 0; k < lrev_report_rows(report.get()); ++k) {
      lrev_eval_row row;
      Check(lrev_report_get(report.get(), k, &row), "report");
      if (row.f1 > best_f1) best_f1 = row.f1, best_delta = row.delta;
    }
    std::printf("%zu thresholds, peak F1 %.4f at delta %.6g\n", delta_grid.size(), best_f1, best_delta);
    return kExitOk;
  }
};

// Splices the --config file of the chosen subcommand in front of the
// user's own arguments so later (command-line) values win.
std::vector<std::string> ExpandConfig(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2) return args;
  std::string config_path;
  std::size_t config_at = 0, config_len = 0;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1], config_at = i, config_len = 2;
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9), config_at = i, config_len = 1;
    }
  }
  if (config_path.empty()) return args;
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  // An empty value stands for the built-in default.
  for (const auto& [key, value] : ReadConfig(config_path, args[1])) {
    if (!value.empty()) out.push_back("--" + key + "=" + value);
  }
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (i >= config_at && i < config_at + config_len) continue;
    out.push_back(args[i]);
  }
  return out;
}

int Main(int argc, char** argv) {
  CLI::App app{"Event detection with low-rank models of partially observed sensor data"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", lrev_version());

  unsigned threads = 0;
  std::string unused_config;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads (0 uses every hardware thread)");
    sub->add_option("--config", unused_config, "key=value file (a run manifest works too)");
  };

  GenerateCommand generate;
  TrainCommand train;
  DetectCommand detect;
  EvalCommand eval;
  Options generate_opts(app.add_subcommand("generate", "Generate synthetic non-event and event data"));
  Options train_opts(app.add_subcommand("train", "Fit a low-rank model"));
  Options detect_opts(app.add_subcommand("detect", "Classify rows as events or non-events"));
  Options eval_opts(app.add_subcommand("eval", "Precision, recall and F1 over a threshold grid"));
  generate.Register(generate_opts);
  train.Register(train_opts);
  detect.Register(detect_opts);
  eval.Register(eval_opts);
  for (const Options* o : {&generate_opts, &train_opts, &detect_opts, &eval_opts}) common(o->app());

  std::vector<std::string> args;
  try {
    args = ExpandConfig(argc, argv);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (generate_opts.app()->parsed()) return generate.Run(generate_opts);
    if (train_opts.app()->parsed()) return train.Run(train_opts, threads);
    if (detect_opts.app()->parsed()) return detect.Run(detect_opts, threads);
    return eval.Run(eval_opts, threads);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) { return Main(argc, argv); }
