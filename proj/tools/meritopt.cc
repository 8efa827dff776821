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

// meritopt command-line entry point: run, verify and generate.

#include <iostream>

#include "CLI11.hpp"
#include "meritopt/commands.h"

namespace {

void add_common(CLI::App* cmd, meritopt::CommandOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON experiment config");
  cmd->add_option("--preset", opts.preset, "built-in config name");
  cmd->add_option("--seed", opts.seed, "override the experiment seed");
  cmd->add_option("--out", opts.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted multi-source training with mirror-descent weights"};
  app.require_subcommand(1);
  meritopt::CommandOptions opts;

  CLI::App* run = app.add_subcommand("run", "train and export the trajectory");
  add_common(run, opts);
  CLI::App* verify = app.add_subcommand("verify", "run an empirical check");
  add_common(verify, opts);
  verify->add_option("--check", opts.check,
                     "variance, delta, neighborhood or optimizer")
      ->required();
  CLI::App* generate =
      app.add_subcommand("generate", "write a file-backed source");
  generate->add_option("--config", opts.config_path, "source declaration JSON")
      ->required();
  generate->add_option("--seed", opts.seed, "override the source seed");
  generate->add_option("--out", opts.out_dir, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return meritopt::kExitUsage;
  }

  if (run->parsed()) return meritopt::cmd_run(opts, std::cout, std::cerr);
  if (verify->parsed()) return meritopt::cmd_verify(opts, std::cout, std::cerr);
  return meritopt::cmd_generate(opts, std::cout, std::cerr);
}
