#pragma once

// Shared plumbing for the experiment implementations: config access with JSON
// pointers in every error, hashed CSV tables and timed method runs.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cgpkit/cgp.hpp"
#include "cgpkit/csv.hpp"
#include "cgpkit/data.hpp"
#include "cgpkit/gp.hpp"
#include "cgpkit/json_io.hpp"
#include "cgpkit_tools/runner.hpp"

namespace cgpkit::tools {

namespace fs = std::filesystem;

struct Context {
  std::string experiment;
  Json config;  // effective config, seed included
  std::string hash;
  fs::path base_dir;
  fs::path out;
  std::uint64_t seed = 0;
  int repeats = 3;

  const Json& data() const;  // the /data object ({} if absent)
  fs::path resolve(const std::string& path) const;
};

// Optional fields fall back to a default; present fields must have the right type.
double opt_number(const Json& j, const std::string& key, double fallback, const std::string& where);
std::size_t opt_count(const Json& j, const std::string& key, std::size_t fallback,
                      const std::string& where);
bool opt_bool(const Json& j, const std::string& key, bool fallback, const std::string& where);
std::string opt_string(const Json& j, const std::string& key, const std::string& fallback,
                       const std::string& where);

GpModel model_from_config(const Json& config);
Segmentation segmentation_from_config(const Json& config);

/// CSV table whose first column is the config hash.
class Table {
 public:
  Table(std::string hash, std::vector<std::string> header);
  Table& add(std::vector<std::string> row);
  void write(const fs::path& path) const;

 private:
  std::string hash_;
  CsvTable table_;
};

std::string num(double v);
void write_json(const fs::path& path, const Json& j);

double median(std::vector<double> v);

/// Wall time of `repeats` calls; the result of the last call is kept.
template <class T>
struct Timed {
  T value;
  std::vector<double> seconds;
};

template <class F>
auto timed(int repeats, F&& f) -> Timed<decltype(f())> {
  std::vector<double> seconds;
  for (int i = 0; i + 1 < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)f();
    seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto value = f();
  seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return {std::move(value), std::move(seconds)};
}

struct Posterior {
  std::string method;
  GaussianBelief belief;
  std::vector<double> seconds;
};

struct Truth {
  std::optional<Vector> observed;
  std::optional<Vector> latent;
};

/// Writes predictions.csv, variance.csv, posterior_<method>.csv,
/// covariance_<method>.csv and timing.csv; fills per-method metrics into
/// results["methods"] and the summaries into `summaries`.
void write_posteriors(const Context& ctx, const Inputs& test_X, const std::vector<Posterior>& posts,
                      const Truth& truth, Json& results, std::vector<MethodSummary>& summaries,
                      std::optional<Transform> transform = std::nullopt);

/// Writes timing.csv for named timings.
void write_timing(const Context& ctx, const std::vector<std::pair<std::string, std::vector<double>>>& rows);

/// Per-segment ML estimates fused by Fisher information. The trajectory of the
/// fused estimate after each segment goes to `trajectory` if given.
struct FusedFit {
  GpModel model;
  FusionState state;
  std::vector<Vector> trajectory;  // fused theta after k = 1..K
  std::vector<Vector> estimates;   // per-segment theta_hat
};
FusedFit fit_by_fusion(const GpModel& init, std::span<const DataSegment> segments);

Json model_to_json(const GpModel& m);

// Experiment bodies. Each returns the method summaries and writes its outputs.
RunResult run_learn_fusion(const Context& ctx);
RunResult run_timeseries(const Context& ctx);
RunResult run_grf(const Context& ctx);
RunResult run_excess_mse(const Context& ctx);
RunResult run_info_gap(const Context& ctx);
RunResult run_csv_predict(const Context& ctx);

// Shared results.json skeleton.
Json results_header(const Context& ctx);

}  // namespace cgpkit::tools
