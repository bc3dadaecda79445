#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace stoqlab::cli {

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 failed acceptance assertion, 2 config error
  std::vector<std::string> files_written;
  std::string message;
};

// Executes one configured operation and writes its result files into
// out_dir. The schema is {"module", "op", "seed", "params": {...}}.
RunOutcome run(const nlohmann::json& config, const std::string& out_dir);

// Full command-line entry point (subcommands, --config/--seed/--out flags).
int main_entry(int argc, char** argv);

}  // namespace stoqlab::cli
