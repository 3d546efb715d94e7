#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cgpkit/json_io.hpp"

namespace cgpkit::tools {

inline constexpr int kSchemaVersion = 1;

const std::vector<std::string>& experiment_names();

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's seed
};

/// Summary row per method, also used for sweep aggregation.
struct MethodSummary {
  std::string method;
  std::optional<double> rmse;
  double seconds = 0.0;  // median wall time of the numeric call
};

struct RunResult {
  std::string experiment;
  std::string config_hash;
  std::vector<MethodSummary> methods;
};

/// Reads and validates the config, runs the experiment, and writes
/// results.json plus the CSV tables into out_dir.
RunResult run_experiment(const std::string& name, const std::filesystem::path& config_path,
                         const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Same, for an already-parsed config. `base_dir` resolves relative paths.
RunResult run_experiment(const std::string& name, Json config, const std::filesystem::path& base_dir,
                         const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Config with exactly one list-valued field; runs one experiment per value and
/// writes sweep.csv (one row per value per method) plus a run directory per value.
std::vector<RunResult> sweep(const std::filesystem::path& config_path,
                             const std::filesystem::path& out_dir);

/// Pointer to the single list-valued axis of a sweep config.
std::string find_sweep_axis(const Json& config);

/// Maps an exception to the process exit code: 2 config, 3 numeric, 4 I/O.
int exit_code_for(const std::exception& e);

Json read_json_file(const std::filesystem::path& path);

}  // namespace cgpkit::tools
