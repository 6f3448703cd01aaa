#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "efg/config.hpp"
#include "efg/solver.hpp"
#include "efg/verify.hpp"

namespace efg {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_check_failed = 1,  // verify band or audit bound missed
  exit_not_converged = 2,
  exit_diverged = 3,      // divergence or inversion
  exit_usage = 64,
  exit_input = 65,        // unreadable or invalid configuration / data
};

int exit_code(RunStatus status);

struct VerifyOutcome {
  RunResult run;
  std::vector<ReportRow> rows;
  std::vector<std::string> failures;
};

/// Runs a preset benchmark and evaluates its checks. Writes run artifacts and
/// report.csv under out_dir when it is non-empty.
VerifyOutcome verify_benchmark(const std::string& benchmark, const PresetOptions& preset,
                               const RunOptions& options, const std::filesystem::path& out_dir);

/// Entry point of the efg tool: generate | run | verify | audit.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace efg
