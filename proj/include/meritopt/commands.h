// Copyright 2026 The MeritOpt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Subcommands behind the meritopt executable. Each returns a process exit
// code: 0 on success, 1 on a failed run or check, 2 on a usage error.

#ifndef MERITOPT_COMMANDS_H_
#define MERITOPT_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "meritopt/config.h"
#include "meritopt/verify.h"

namespace meritopt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string check;
};

// The config document selected by --config or --preset, with --seed and --out
// applied before parsing.
Json load_config_json(const CommandOptions& opts);

// Named variants of the md-ablation grid: eta in {0.1, 0.01} x iterations in
// {5, 100}. Each entry is (subdirectory, config).
std::vector<std::pair<std::string, Json>> ablation_grid(const Json& base);

struct RunOutput {
  TrainResult result;
  std::string csv;
};

// Trains and writes resolved_config.json, trajectory.csv, trajectory.jsonl and
// final_x.txt into `dir`.
RunOutput run_experiment(const ExperimentConfig& cfg, const std::string& dir);

// Inputs of the delta check at the starting point of a config.
PhiSnapshot initial_snapshot(const ExperimentConfig& cfg, const SourceSet& sources,
                             const LossModel& model);

VerificationReport run_check(const std::string& check, const ExperimentConfig& cfg);

// key=value lines.
std::string format_report(const VerificationReport& report);
// CSV rows "name,index,value"; series entries carry their index.
std::string report_csv(const VerificationReport& report);

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err);
// --config is a single source declaration; --out is the file to write.
int cmd_generate(const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace meritopt

#endif  // MERITOPT_COMMANDS_H_
