#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "armopt/scenarios.hpp"

namespace armopt {

struct RunConfig {
  std::string command;          // simulate | optimize | validate
  std::string scenario = "all"; // builtin name, "all", or file:<path>
  std::filesystem::path out_dir = ".";
  std::vector<std::string> overrides;  // key=value solver/config overrides
  bool emit_trace = true;
};

/// Parses a scenario JSON file. Unknown keys and missing required fields are
/// rejected with a diagnostic naming the offending path.
Scenario parse_scenario_file(const std::filesystem::path& path);
Scenario parse_scenario_json(const std::string& text);
std::string scenario_to_json(const Scenario& scenario);

/// Applies `key=value` overrides (solver fields plus `power_mode`) onto a
/// config. Throws std::invalid_argument listing unknown keys or bad values.
void apply_overrides(SolverConfig& config,
                     const std::vector<std::string>& overrides);

/// Fixed-format writers: 6 significant digits, LF line endings, no
/// timestamps, so repeated runs are byte-identical.
std::string format_number(double v);
void write_summary_csv(std::ostream& os, const std::vector<ScenarioResult>& rows);
void write_trace_csv(std::ostream& os, const ArmParams& params,
                     const JointTrajectory& traj, PowerMode mode);

/// Entry point behind the armopt binary. Returns 0 on success, 1 on
/// validation/usage failure, 2 on internal inconsistency.
int cli_run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace armopt
