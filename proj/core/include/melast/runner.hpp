#pragma once

#include <string>
#include <vector>

#include "melast/config.hpp"

namespace melast {

enum class RunMode { Static, Evolve, VerifyDegree, VerifyEnergy, VerifyBalance };

RunMode mode_from_string(const std::string& name);
std::string to_string(RunMode mode);

/// One diagnostic outcome; summary.txt carries one line per entry:
///   name status residual tolerance
struct SummaryLine {
    std::string name;
    std::string status;  // PASS, FAIL or SKIPPED
    double residual = 0.0;
    double tolerance = 0.0;
};

struct RunResult {
    int exit_code = 0;  // 0 pass, 1 diagnostic failure, 2 config, 3 numerical
    std::vector<SummaryLine> summary;
};

/// Executes one mode, writing trace CSV, snapshots and summary.txt under
/// output_dir. Partial artifacts are preserved on failure.
RunResult run_command(RunMode mode, const RunConfig& config,
                      const std::string& output_dir);

/// Row-for-row text of the evolution trace CSV (also used by tests).
std::vector<std::string> trace_csv_lines(const EvolutionTrace& trace);

}  // namespace melast
