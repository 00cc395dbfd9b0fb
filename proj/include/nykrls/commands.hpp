#pragma once

#include <string>

#include "nykrls/config.hpp"

namespace nykrls {

// Experiment commands behind the `nystrom` binary. Each writes its outputs
// under out_dir (created if missing) with the resolved config embedded, and
// reports failures through the typed error classes; exit-code mapping lives
// in run_cli.
void cmd_grid(const ExperimentConfig& config, const std::string& out_dir);
void cmd_path(const ExperimentConfig& config, const std::string& out_dir);
void cmd_scores(const ExperimentConfig& config, const std::string& out_dir);
void cmd_effdim(const ExperimentConfig& config, const std::string& out_dir);

// Full command-line entry point: parses arguments, loads the config, runs the
// requested command. Returns the process exit code: 0 success, 2 config
// error, 3 data error, 4 resource-cap error, 1 anything else.
int run_cli(int argc, const char* const* argv);

}  // namespace nykrls
