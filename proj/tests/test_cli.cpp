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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "lrevent/detect.hpp"
#include "lrevent/obs_matrix.hpp"

namespace lrevent {
namespace {

namespace fs = std::filesystem;

fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "lrevent_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int Run(const std::string& args) {
  const std::string command = std::string("\"") + LREV_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::vector<std::string>> Csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string Generate(const fs::path& dir, const std::string& extra = "") {
  return "generate --out " + (dir / "data").string() +
         " --base-rows 10 --periods 8 --sensors 4 --rank 2 --rows 36 --seed 5 " + extra;
}

TEST_CASE("generate at desk scale writes readable files") {
  const fs::path dir = Scratch("generate");
  REQUIRE(Run("generate --out " + (dir / "d").string() + " --rows 12 --sensors 3 --rank 2") == 0);
  const ObservationMatrix y = LoadMatrix((dir / "d" / "Y.lrev").string());
  CHECK(y.rows() == 12);
  CHECK(y.cols() == 300);
  for (int mu : {5, 15, 25, 35}) {
    const std::string name = "eval_mu" + std::to_string(mu);
    CHECK(fs::exists(dir / "d" / ("G_mu" + std::to_string(mu) + ".lrev")));
    const ObservationMatrix eval = LoadMatrix((dir / "d" / (name + ".lrev")).string());
    CHECK(ReadLabelsCsv((dir / "d" / (name + "_labels.csv")).string()).size() == eval.rows());
  }
  CHECK(fs::exists(dir / "d" / "generate.manifest"));
}

TEST_CASE("generate is deterministic for a fixed seed") {
  const fs::path a = Scratch("det_a"), b = Scratch("det_b");
  REQUIRE(Run(Generate(a, "--records-csv")) == 0);
  REQUIRE(Run(Generate(b, "--records-csv")) == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(a / "data")) {
    if (entry.path().extension() == ".manifest") continue;
    CHECK(Slurp(entry.path()) == Slurp(b / "data" / entry.path().filename()));
    ++files;
  }
  CHECK(files > 10);
}

TEST_CASE("train writes a trace per epoch and a sweep table per rank") {
  const fs::path dir = Scratch("train");
  REQUIRE(Run(Generate(dir)) == 0);
  const std::string data = (dir / "data" / "train.lrev").string();
  REQUIRE(Run("train --data " + data + " --out " + (dir / "m").string() + " --rank 2 --max-epochs 40 --tol 0") == 0);
  const auto trace = Csv(dir / "m.trace.csv");
  REQUIRE(trace.size() == 41);  // header and one row per epoch
  CHECK(trace[0] == std::vector<std::string>{"epoch", "objective", "rmse", "seconds"});
  CHECK(trace.back()[0] == "40");

  REQUIRE(Run("train --data " + data + " --out " + (dir / "s").string() + " --rank 1,2,3 --max-epochs 20") == 0);
  const auto table = Csv(dir / "s.sweep.csv");
  REQUIRE(table.size() == 4);
  CHECK(table[0] == std::vector<std::string>{"rank", "epochs", "objective", "rmse", "seconds"});
  for (int r = 1; r <= 3; ++r) CHECK(fs::exists(dir / ("s.r" + std::to_string(r))));
}

TEST_CASE("detect with the exact flag equals a saturated sample") {
  const fs::path dir = Scratch("detect");
  REQUIRE(Run(Generate(dir)) == 0);
  const std::string model = (dir / "m").string();
  REQUIRE(Run("train --data " + (dir / "data" / "train.lrev").string() + " --out " + model + " --rank 2") == 0);
  const std::string common = "detect --model " + model + " --data " + (dir / "data" / "eval_mu15.lrev").string() +
                             " --calibrate " + (dir / "data" / "train.lrev").string();
  REQUIRE(Run(common + " --exact --out " + (dir / "exact.csv").string()) == 0);
  REQUIRE(Run(common + " --sample-size 32 --out " + (dir / "full.csv").string()) == 0);
  const auto exact = Csv(dir / "exact.csv"), full = Csv(dir / "full.csv");
  REQUIRE(exact.size() == full.size());
  CHECK(exact[0] == std::vector<std::string>{"row", "verdict", "distance", "seconds"});
  for (std::size_t i = 0; i < exact.size(); ++i) {
    CHECK(exact[i][1] == full[i][1]);
    CHECK(exact[i][2] == full[i][2]);
  }
}

TEST_CASE("eval reports one row per threshold and repeats deterministically") {
  const fs::path dir = Scratch("eval");
  REQUIRE(Run(Generate(dir)) == 0);
  const std::string model = (dir / "m").string();
  REQUIRE(Run("train --data " + (dir / "data" / "train.lrev").string() + " --out " + model + " --rank 2") == 0);
  const std::string common = "eval --model " + model + " --data " + (dir / "data" / "eval_mu5.lrev").string() +
                             " --labels " + (dir / "data" / "eval_mu5_labels.csv").string() +
                             " --delta-grid 0:10:0.5 --reps 1 --sample-size 8 --seed 3";
  REQUIRE(Run(common + " --out " + (dir / "a.csv").string()) == 0);
  REQUIRE(Run(common + " --out " + (dir / "b.csv").string()) == 0);
  const auto report = Csv(dir / "a.csv");
  CHECK(report.size() == 22);
  CHECK(report[0] == std::vector<std::string>{"delta", "tp", "fp", "fn", "tn", "precision", "recall", "f1"});
  CHECK(Slurp(dir / "a.csv") == Slurp(dir / "b.csv"));
}

TEST_CASE("flags override the config file") {
  const fs::path dir = Scratch("precedence");
  REQUIRE(Run(Generate(dir)) == 0);
  const std::string data = (dir / "data" / "train.lrev").string();
  {
    std::ofstream config(dir / "train.cfg");
    config << "# comment\nrank=2\nmax-epochs=7\ntol=0\n";
  }
  REQUIRE(Run("train --config " + (dir / "train.cfg").string() + " --data " + data + " --out " +
              (dir / "m").string() + " --max-epochs 5") == 0);
  CHECK(Csv(dir / "m.trace.csv").size() == 6);
  const std::string manifest = Slurp(dir / "m.manifest");
  CHECK(manifest.find("rank=2\n") != std::string::npos);
  CHECK(manifest.find("max-epochs=5\n") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path dir = Scratch("exit");
  CHECK(Run("train --data " + (dir / "missing.lrev").string() + " --out " + (dir / "m").string()) == 2);
  CHECK(Run("train --bogus-flag") == 2);
  CHECK(Run("generate --out " + (dir / "g").string() + " --density 0") == 2);
  CHECK(Run("train --config " + (dir / "missing.cfg").string()) == 2);
  SaveMatrix((dir / "huge.lrev").string(),
             ObservationMatrix(1, 1, std::vector<Entry>{Entry::Exact(0, 0, 1e300)}));
  CHECK(Run("train --data " + (dir / "huge.lrev").string() + " --out " + (dir / "m").string() + " --rank 1") == 3);
}

}  // namespace
}  // namespace lrevent
