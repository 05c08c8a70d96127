#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smlab/config.hpp"
#include "smlab/common.hpp"
#include "smlab/space.hpp"
#include "smlab/spectral.hpp"

namespace smlab {

/// Space described by a [space] config section.
Space space_from_section(const ConfigSection& sec);

/// Operator described by an [operator] config section, on the given space.
SpectralOperator operator_from_section(const ConfigSection& sec, const Space& space);

struct RunOptions {
  std::string out_dir;          ///< empty: no files written
  std::string task_filter;      ///< empty: run all tasks
  std::uint64_t seed_override = 0;  ///< 0: use the config seed
  bool has_seed_override = false;
  int threads = 0;              ///< 0: hardware (SMLAB_THREADS overrides either way)
};

struct TaskOutcome {
  std::string type;
  int index = 0;
  bool pass = false;
  std::string report_json;  ///< canonical serialized report
  std::vector<std::pair<std::string, std::string>> csv_files;  ///< name -> contents
};

struct ScenarioOutcome {
  std::string name;
  bool all_pass = true;
  std::vector<TaskOutcome> tasks;
  std::string summary_json;
};

/// Executes the scenario's tasks in file order. Throws Error with code parse
/// on bad configs; task failures are pass=false outcomes, not exceptions.
ScenarioOutcome run_scenario(const Config& cfg, const RunOptions& opt);
ScenarioOutcome run_scenario_file(const std::string& path, const RunOptions& opt);

/// Writes per-task reports, CSV companions and the summary into out_dir.
void write_outcome(const ScenarioOutcome& outcome, const std::string& out_dir);

/// Merges task reports (JSON texts) into a summary CSV, one row per
/// (scenario, task), sorted by (scenario, task, p, s, m). Throws on schema
/// mismatch.
std::string merge_reports(const std::vector<std::string>& reports);

}  // namespace smlab
