#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include "cgpkit/csv.hpp"
#include "cgpkit/errors.hpp"
#include "cgpkit/parallel.hpp"
#include "context.hpp"

namespace cgpkit::tools {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"learn-fusion", "timeseries", "grf",
                                              "excess-mse",   "info-gap",   "csv-predict"};
  return names;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const EmptySeries*>(&e)) {
    return 4;
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 4;
  return 3;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what(), "");
  }
}

// ---------------------------------------------------------------------------
// Config access

const Json& Context::data() const {
  static const Json empty = Json::object();
  const auto it = config.find("data");
  return it == config.end() ? empty : *it;
}

fs::path Context::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

namespace {

const Json* find_field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ConfigError("expected an object", where.empty() ? "/" : where);
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

}  // namespace

double opt_number(const Json& j, const std::string& key, double fallback, const std::string& where) {
  return find_field(j, key, where) ? get_number(j, key, where) : fallback;
}

std::size_t opt_count(const Json& j, const std::string& key, std::size_t fallback,
                      const std::string& where) {
  return find_field(j, key, where) ? get_count(j, key, where) : fallback;
}

bool opt_bool(const Json& j, const std::string& key, bool fallback, const std::string& where) {
  const Json* v = find_field(j, key, where);
  if (!v) return fallback;
  if (!v->is_boolean()) throw ConfigError("'" + key + "' must be true or false", where + "/" + key);
  return v->get<bool>();
}

std::string opt_string(const Json& j, const std::string& key, const std::string& fallback,
                       const std::string& where) {
  const Json* v = find_field(j, key, where);
  if (!v) return fallback;
  if (!v->is_string()) throw ConfigError("'" + key + "' must be a string", where + "/" + key);
  return v->get<std::string>();
}

GpModel model_from_config(const Json& config) {
  const Json* model = find_field(config, "model", "");
  if (!model) throw ConfigError("missing field 'model'", "/model");
  const Json* kernel = find_field(*model, "kernel", "/model");
  if (!kernel) throw ConfigError("missing field 'kernel'", "/model/kernel");
  GpModel m;
  m.kernel = kernel_from_json(*kernel, "/model/kernel");
  if (const Json* mean = find_field(*model, "mean", "/model")) {
    m.mean = mean_from_json(*mean, "/model/mean");
  }
  if (m.mean.family == MeanFamily::Linear && m.kernel.input_dim() != 1) {
    throw ConfigError("a linear mean needs 1-D inputs", "/model/mean");
  }
  return m;
}

Segmentation segmentation_from_config(const Json& config) {
  const Json* seg = find_field(config, "segmentation", "");
  if (!seg) throw ConfigError("missing field 'segmentation'", "/segmentation");
  const Segmentation s{opt_count(*seg, "count", 0, "/segmentation"),
                       opt_count(*seg, "size", 0, "/segmentation")};
  if ((s.count == 0) == (s.size == 0)) {
    throw ConfigError("give exactly one of 'count' or 'size' (positive)", "/segmentation");
  }
  return s;
}

Json model_to_json(const GpModel& m) {
  return {{"kernel", to_json(m.kernel)}, {"mean", to_json(m.mean)}};
}

// ---------------------------------------------------------------------------
// Output

Table::Table(std::string hash, std::vector<std::string> header)
    : hash_(std::move(hash)), table_([&] {
        header.insert(header.begin(), "config_hash");
        return header;
      }()) {}

Table& Table::add(std::vector<std::string> row) {
  row.insert(row.begin(), hash_);
  table_.add_row(row);
  return *this;
}

void Table::write(const fs::path& path) const { table_.write(path); }

std::string num(double v) { return format_double(v); }

void write_json(const fs::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Json results_header(const Context& ctx) {
  return {{"schema", kSchemaVersion},
          {"experiment", ctx.experiment},
          {"config_hash", ctx.hash},
          {"seed", ctx.seed},
          {"config", ctx.config}};
}

void write_timing(const Context& ctx,
                  const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::size_t runs = 0;
  for (const auto& r : rows) runs = std::max(runs, r.second.size());
  std::vector<std::string> header{"method", "median_seconds"};
  for (std::size_t i = 0; i < runs; ++i) header.push_back("run_" + std::to_string(i + 1));
  Table t(ctx.hash, header);
  for (const auto& [name, secs] : rows) {
    std::vector<std::string> row{name, num(median(secs))};
    for (std::size_t i = 0; i < runs; ++i) row.push_back(i < secs.size() ? num(secs[i]) : "");
    t.add(row);
  }
  t.write(ctx.out / "timing.csv");
}

namespace {

double rmse(const Vector& a, const Vector& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

std::vector<std::string> input_header(const Inputs& X) {
  if (X.cols() == 1) return {"x"};
  return {"x1", "x2"};
}

void push_inputs(std::vector<std::string>& row, const Inputs& X, Index i) {
  for (Index c = 0; c < X.cols(); ++c) row.push_back(num(X(i, c)));
}

}  // namespace

void write_posteriors(const Context& ctx, const Inputs& test_X, const std::vector<Posterior>& posts,
                      const Truth& truth, Json& results, std::vector<MethodSummary>& summaries,
                      std::optional<Transform> transform) {
  const bool log_scale = transform && *transform == Transform::Log;
  std::vector<std::string> header{"method", "index"};
  for (const auto& h : input_header(test_X)) header.push_back(h);
  header.insert(header.end(), {"mean", "sd", "lower", "upper"});
  if (truth.observed) header.push_back("observed");
  if (truth.latent) header.push_back("latent");

  Table predictions(ctx.hash, header);
  Table variance(ctx.hash, {"method", "index", "variance"});
  std::vector<std::pair<std::string, std::vector<double>>> timing;

  for (const Posterior& p : posts) {
    const Vector var = p.belief.variance();
    const Vector sd = var.cwiseMax(0.0).cwiseSqrt();
    std::optional<BackTransformed> bt;
    if (log_scale) bt = back_transform(p.belief, Transform::Log);
    // Point prediction on the scale the data were given on.
    const Vector point = bt ? bt->median : p.belief.mean;

    std::vector<std::string> method_header = header;
    method_header.erase(method_header.begin());
    Table own(ctx.hash, method_header);
    Table cov(ctx.hash, {"i", "j", "value"});
    for (Index i = 0; i < p.belief.dim(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      push_inputs(row, test_X, i);
      if (bt) {
        row.insert(row.end(), {num(bt->median[i]), num(sd[i]), num(bt->lower[i]), num(bt->upper[i])});
      } else {
        constexpr double z = 1.959963984540054;
        row.insert(row.end(), {num(p.belief.mean[i]), num(sd[i]), num(p.belief.mean[i] - z * sd[i]),
                               num(p.belief.mean[i] + z * sd[i])});
      }
      if (truth.observed) row.push_back(num((*truth.observed)[i]));
      if (truth.latent) row.push_back(num((*truth.latent)[i]));
      own.add(row);
      row.insert(row.begin(), p.method);
      predictions.add(row);
      variance.add({p.method, std::to_string(i), num(var[i])});
      for (Index j = 0; j < p.belief.dim(); ++j) {
        cov.add({std::to_string(i), std::to_string(j), num(p.belief.cov.matrix()(i, j))});
      }
    }
    std::string lower = p.method;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    own.write(ctx.out / ("posterior_" + lower + ".csv"));
    cov.write(ctx.out / ("covariance_" + lower + ".csv"));

    Json m = {{"mean_variance", var.mean()}, {"log_scale", log_scale}};
    MethodSummary s{p.method, std::nullopt, median(p.seconds)};
    if (truth.observed) {
      s.rmse = rmse(point, *truth.observed);
      m["rmse"] = *s.rmse;
    }
    if (truth.latent) m["rmse_latent"] = rmse(p.belief.mean, *truth.latent);
    results["methods"][p.method] = m;
    summaries.push_back(s);
    timing.emplace_back(p.method, p.seconds);
  }
  predictions.write(ctx.out / "predictions.csv");
  variance.write(ctx.out / "variance.csv");
  write_timing(ctx, timing);
}

FusedFit fit_by_fusion(const GpModel& init, std::span<const DataSegment> segments) {
  if (segments.empty()) throw InvalidInput("fit_by_fusion: no segments");
  std::vector<MlEstimate> est(segments.size());
  std::vector<FisherInfo> fim(segments.size());
  parallel_for(segments.size(), [&](std::size_t k) {
    est[k] = ml_estimate(init, segments[k]);
    fim[k] = fisher_information(est[k].model, segments[k]);
  });
  FusedFit fit;
  fit.state = FusionState::empty(parameter_count(init));
  for (std::size_t k = 0; k < segments.size(); ++k) {
    fit.state = fusion_update(fit.state, est[k].theta, fim[k]);
    fit.trajectory.push_back(fused_theta(fit.state));
    fit.estimates.push_back(est[k].theta);
  }
  fit.model = with_parameters(init, fit.trajectory.back());
  return fit;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace {

const std::set<std::string> kTopLevel{"schema",         "experiment",     "description",
                                      "seed",           "model",          "data",
                                      "segmentation",   "inducing_count", "learn_hyperparams",
                                      "resume_from",    "timing_repeats", "mc_draws",
                                      "segment_sizes",  "init",           "full_reports"};

// Keys whose value is a list in an ordinary run.
const std::set<std::string> kListKeys{"segment_sizes"};

void validate_top_level(const Json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object", "/");
  for (const auto& [key, _] : config.items()) {
    if (!kTopLevel.count(key)) throw ConfigError("unknown field '" + key + "'", "/" + key);
  }
  const auto it = config.find("schema");
  if (it == config.end()) throw ConfigError("missing field 'schema'", "/schema");
  if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
    throw ConfigError("unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")",
                      "/schema");
  }
}

}  // namespace

RunResult run_experiment(const std::string& name, Json config, const fs::path& base_dir,
                         const fs::path& out_dir, const RunOptions& options) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("unknown experiment '" + name + "'", "/experiment");
  }
  validate_top_level(config);
  if (const auto it = config.find("experiment"); it != config.end() && *it != name) {
    throw ConfigError("config is for experiment " + it->dump() + ", not '" + name + "'",
                      "/experiment");
  }
  if (options.seed) config["seed"] = *options.seed;
  if (!config.contains("seed")) throw ConfigError("missing field 'seed'", "/seed");

  Context ctx;
  ctx.experiment = name;
  ctx.seed = get_count(config, "seed", "");
  ctx.repeats = static_cast<int>(opt_count(config, "timing_repeats", 3, ""));
  if (ctx.repeats < 1) throw ConfigError("'timing_repeats' must be at least 1", "/timing_repeats");
  ctx.config = std::move(config);
  ctx.hash = config_hash(ctx.config);
  ctx.base_dir = base_dir;
  ctx.out = out_dir;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError("cannot create output directory '" + out_dir.string() + "'");
  }

  if (name == "learn-fusion") return run_learn_fusion(ctx);
  if (name == "timeseries") return run_timeseries(ctx);
  if (name == "grf") return run_grf(ctx);
  if (name == "excess-mse") return run_excess_mse(ctx);
  if (name == "info-gap") return run_info_gap(ctx);
  return run_csv_predict(ctx);
}

RunResult run_experiment(const std::string& name, const fs::path& config_path,
                         const fs::path& out_dir, const RunOptions& options) {
  return run_experiment(name, read_json_file(config_path), config_path.parent_path(), out_dir,
                        options);
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

void collect_axes(const Json& j, const std::string& pointer, const std::string& key,
                  std::vector<std::string>& axes) {
  if (j.is_array()) {
    const bool nested = !j.empty() && j.front().is_array();
    if (!kListKeys.count(key) || nested) axes.push_back(pointer);
    return;
  }
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) collect_axes(v, pointer + "/" + k, k, axes);
  }
}

}  // namespace

std::string find_sweep_axis(const Json& config) {
  std::vector<std::string> axes;
  collect_axes(config, "", "", axes);
  if (axes.empty()) throw ConfigError("sweep needs one list-valued field; found none", "/");
  if (axes.size() > 1) {
    std::string all;
    for (const auto& a : axes) all += (all.empty() ? "" : ", ") + a;
    throw ConfigError("sweep takes exactly one list-valued field; found " + all, axes[1]);
  }
  const Json& values = config.at(Json::json_pointer(axes[0]));
  if (values.empty()) throw ConfigError("sweep axis is empty", axes[0]);
  return axes[0];
}

std::vector<RunResult> sweep(const fs::path& config_path, const fs::path& out_dir) {
  const Json config = read_json_file(config_path);
  if (!config.is_object() || !config.contains("experiment") || !config["experiment"].is_string()) {
    throw ConfigError("sweep configs must name their experiment", "/experiment");
  }
  const std::string name = config["experiment"].get<std::string>();
  const std::string axis = find_sweep_axis(config);
  const Json values = config.at(Json::json_pointer(axis));
  const std::string hash = config_hash(config);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError("cannot create output directory '" + out_dir.string() + "'");
  }

  std::vector<RunResult> results(values.size());
  parallel_for(values.size(), [&](std::size_t i) {
    Json point = config;
    point[Json::json_pointer(axis)] = values[i];
    results[i] = run_experiment(name, point, config_path.parent_path(),
                                out_dir / ("point_" + std::to_string(i)));
  });

  Table t(hash, {"axis", "value", "point", "point_hash", "method", "rmse", "seconds"});
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const MethodSummary& m : results[i].methods) {
      t.add({axis, values[i].dump(), std::to_string(i), results[i].config_hash, m.method,
             m.rmse ? num(*m.rmse) : "", num(m.seconds)});
    }
  }
  t.write(out_dir / "sweep.csv");
  return results;
}

}  // namespace cgpkit::tools
