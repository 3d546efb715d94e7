#include <algorithm>
#include <cmath>
#include <map>

#include "cgpkit/analysis.hpp"
#include "cgpkit/errors.hpp"
#include "cgpkit/fitc.hpp"
#include "cgpkit/parallel.hpp"
#include "context.hpp"

namespace cgpkit::tools {

namespace {

// ---------------------------------------------------------------------------
// Problem setup shared by the prediction experiments

struct Problem {
  DataSegment train;
  Inputs test_X;
  Truth truth;
};

std::vector<std::string> coord_header(const Inputs& X) {
  return X.cols() == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x1", "x2"};
}

void write_inputs(const Context& ctx, const Inputs& X, const fs::path& path) {
  Table t(ctx.hash, coord_header(X));
  for (Index i = 0; i < X.rows(); ++i) {
    std::vector<std::string> row;
    for (Index c = 0; c < X.cols(); ++c) row.push_back(num(X(i, c)));
    t.add(row);
  }
  t.write(path);
}

SeriesConfig series_config(const Context& ctx, const GpModel& model, std::size_t n_train_default,
                           std::size_t n_test_default) {
  const Json& d = ctx.data();
  SeriesConfig cfg;
  cfg.model = model;
  cfg.n_train = opt_count(d, "n_train", n_train_default, "/data");
  cfg.n_test = opt_count(d, "n_test", n_test_default, "/data");
  cfg.t0 = opt_number(d, "t0", 0.0, "/data");
  cfg.spacing = opt_number(d, "spacing", 1.0, "/data");
  cfg.seed = ctx.seed;
  if (cfg.n_train == 0) throw ConfigError("'n_train' must be positive", "/data/n_train");
  if (!(cfg.spacing > 0.0)) throw ConfigError("'spacing' must be positive", "/data/spacing");
  return cfg;
}

// Simulated 1-D series with the train/test files and a sidecar describing them.
Problem series_problem(const Context& ctx, const SeriesConfig& cfg) {
  const SimulatedSeries sim = simulate_gp_series(cfg);
  write_csv(sim.train, ctx.out / "train.csv");
  if (cfg.n_test > 0) write_csv(sim.test, ctx.out / "test.csv");
  write_json(ctx.out / "dataset.json",
             {{"kind", "gp_series"},
              {"config_hash", ctx.hash},
              {"seed", cfg.seed},
              {"model", model_to_json(cfg.model)},
              {"n_train", cfg.n_train},
              {"n_test", cfg.n_test},
              {"t0", cfg.t0},
              {"spacing", cfg.spacing}});
  Problem p;
  p.train = sim.train.as_segment();
  p.test_X = sim.test.t;
  p.truth.observed = sim.test.y;
  p.truth.latent = sim.test_latent;
  return p;
}

GrfConfig grid_config(const Context& ctx, std::size_t n_default) {
  const Json& d = ctx.data();
  GrfConfig cfg;
  cfg.nx = opt_count(d, "nx", n_default, "/data");
  cfg.ny = opt_count(d, "ny", n_default, "/data");
  cfg.test_nx = opt_count(d, "test_nx", 0, "/data");
  cfg.test_ny = opt_count(d, "test_ny", 0, "/data");
  cfg.seed = ctx.seed;
  return cfg;
}

// Simulated field on a grid with field.csv and a sidecar.
Problem grid_problem(const Context& ctx, const GrfConfig& cfg) {
  const GrfSample s = simulate_grf(cfg);
  std::vector<char> is_test(static_cast<std::size_t>(s.coords.rows()), 0);
  for (const Index i : s.test_index) is_test[static_cast<std::size_t>(i)] = 1;
  Table field(ctx.hash, {"i", "j", "x1", "x2", "field", "observed", "split"});
  for (Index r = 0; r < s.coords.rows(); ++r) {
    const auto i = static_cast<std::size_t>(r) / s.ny;
    const auto j = static_cast<std::size_t>(r) % s.ny;
    field.add({std::to_string(i), std::to_string(j), num(s.coords(r, 0)), num(s.coords(r, 1)),
               num(s.field[r]), num(s.observed[r]),
               is_test[static_cast<std::size_t>(r)] ? "test" : "train"});
  }
  field.write(ctx.out / "field.csv");
  write_json(ctx.out / "dataset.json", {{"kind", "grf"},
                                        {"config_hash", ctx.hash},
                                        {"seed", cfg.seed},
                                        {"nx", s.nx},
                                        {"ny", s.ny},
                                        {"alpha", cfg.alpha},
                                        {"theta1", cfg.theta1},
                                        {"theta2", cfg.theta2},
                                        {"noise_var", cfg.noise_var},
                                        {"n_train", s.train_index.size()},
                                        {"n_test", s.test_index.size()}});
  Problem p;
  p.train = s.train();
  p.test_X = s.test_inputs();
  Vector obs(static_cast<Index>(s.test_index.size()));
  for (std::size_t i = 0; i < s.test_index.size(); ++i) {
    obs[static_cast<Index>(i)] = s.observed[s.test_index[i]];
  }
  p.truth.observed = obs;
  p.truth.latent = s.test_field();
  return p;
}

// Series for 1-D kernels, a grid drawn from the same model for 2-D kernels.
Problem model_problem(const Context& ctx, const GpModel& model, std::size_t n_train,
                      std::size_t n_test, std::size_t grid) {
  if (model.kernel.input_dim() == 1) {
    return series_problem(ctx, series_config(ctx, model, n_train, n_test));
  }
  GrfConfig cfg = grid_config(ctx, grid);
  const Hyperparams& h = model.kernel.params;
  cfg.alpha = h.natural("alpha");
  cfg.theta1 = h.natural("theta1");
  cfg.theta2 = h.natural("theta2");
  cfg.noise_var = h.noise_var();
  return grid_problem(ctx, cfg);
}

// ---------------------------------------------------------------------------
// Methods

InputRange range_of(const Inputs& X) {
  return {X.colwise().minCoeff().transpose(), X.colwise().maxCoeff().transpose()};
}

struct Methods {
  std::vector<Posterior> posts;
  std::optional<CgpRun> cgp;
  std::optional<InducingSet> inducing;
};

struct MethodPlan {
  bool gp = true;
  bool sgp = true;
  std::size_t inducing_count = 0;
  std::optional<CgpState> resume;  // continue the CGP from this state
};

Methods run_methods(const Context& ctx, const GpModel& model, const DataSegment& train,
                    std::span<const DataSegment> segments, const Inputs& test_X,
                    const MethodPlan& plan) {
  Methods m;
  if (plan.gp) {
    auto r = timed(ctx.repeats, [&] {
      return gp_posterior(prior_belief(model, test_X), model, train, test_X);
    });
    m.posts.push_back({"GP", std::move(r.value), std::move(r.seconds)});
  }
  {
    auto r = timed(ctx.repeats, [&] {
      if (plan.resume) {
        const std::size_t k = plan.resume->segments_seen();
        if (k == segments.size()) return CgpRun{*plan.resume, {}};
        return cgp_run(*plan.resume, segments.subspan(k), model);
      }
      return cgp_run(segments, model, test_X);
    });
    m.posts.push_back({"CGP", r.value.state.current(), std::move(r.seconds)});
    m.cgp = std::move(r.value);
  }
  if (plan.sgp) {
    const InducingSet inducing = place_uniform(range_of(train.X), plan.inducing_count);
    auto r = timed(ctx.repeats, [&] { return fitc_posterior(model, train, inducing, test_X); });
    m.posts.push_back({"SGP", std::move(r.value), std::move(r.seconds)});
    m.inducing = inducing;
  }
  return m;
}

void write_cgp_extras(const Context& ctx, const Methods& m, std::span<const DataSegment> segments) {
  if (m.cgp) {
    write_json(ctx.out / "cgp_state.json", snapshot_to_json(m.cgp->state));
    Table steps(ctx.hash, {"k", "n_k", "seconds"});
    const std::size_t first = segments.size() - m.cgp->step_seconds.size();
    for (std::size_t i = 0; i < m.cgp->step_seconds.size(); ++i) {
      steps.add({std::to_string(first + i + 1), std::to_string(segments[first + i].size()),
                 num(m.cgp->step_seconds[i])});
    }
    steps.write(ctx.out / "cgp_steps.csv");
  }
  if (m.inducing) write_inputs(ctx, m.inducing->locations(), ctx.out / "inducing.csv");
}

std::size_t inducing_count(const Context& ctx, std::size_t fallback) {
  const std::size_t n = opt_count(ctx.config, "inducing_count", fallback, "");
  if (n == 0) throw ConfigError("'inducing_count' must be positive", "/inducing_count");
  return n;
}

std::vector<DataSegment> split(const DataSegment& train, const Segmentation& seg) {
  if (seg.count > static_cast<std::size_t>(train.size())) {
    throw ConfigError("more segments than training points", "/segmentation/count");
  }
  if (seg.size > static_cast<std::size_t>(train.size())) {
    throw ConfigError("segment size exceeds the training set", "/segmentation/size");
  }
  return segment_contiguous(train, seg);
}

void write_fusion_trajectory(const Context& ctx, const GpModel& model, const FusedFit& fit,
                             const fs::path& path) {
  const auto names = parameter_names(model);
  std::vector<std::string> header{"k"};
  for (const auto& n : names) header.push_back("fused_" + n);
  for (const auto& n : names) header.push_back("segment_" + n);
  Table t(ctx.hash, header);
  for (std::size_t k = 0; k < fit.trajectory.size(); ++k) {
    std::vector<std::string> row{std::to_string(k + 1)};
    for (Index i = 0; i < fit.trajectory[k].size(); ++i) row.push_back(num(fit.trajectory[k][i]));
    for (Index i = 0; i < fit.estimates[k].size(); ++i) row.push_back(num(fit.estimates[k][i]));
    t.add(row);
  }
  t.write(path);
}

Json fit_to_json(const FusedFit& fit) {
  return {{"segments", fit.trajectory.size()},
          {"theta", to_json_vector(fit.trajectory.back())},
          {"parameter_names", parameter_names(fit.model)},
          {"model", model_to_json(fit.model)}};
}

// Optionally replaces the model with its fused estimate over the segments.
GpModel maybe_learn(const Context& ctx, const GpModel& model, std::span<const DataSegment> segments,
                    bool fallback, Json& results) {
  if (!opt_bool(ctx.config, "learn_hyperparams", fallback, "")) return model;
  const FusedFit fit = fit_by_fusion(model, segments);
  write_fusion_trajectory(ctx, model, fit, ctx.out / "fusion.csv");
  results["learned"] = fit_to_json(fit);
  return fit.model;
}

std::optional<CgpState> load_resume(const Context& ctx, const Inputs& test_X,
                                    std::size_t n_segments) {
  const std::string path = opt_string(ctx.config, "resume_from", "", "");
  if (path.empty()) return std::nullopt;
  CgpState state = [&] {
    try {
      return snapshot_from_json(read_json_file(ctx.resolve(path)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("snapshot: ") + e.what(), "/resume_from");
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("snapshot: ") + e.what(), "/resume_from");
    }
  }();
  if (state.test_inputs().rows() != test_X.rows() || state.test_inputs().cols() != test_X.cols() ||
      (state.test_inputs() - test_X).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("snapshot test inputs differ from this run's", "/resume_from");
  }
  if (state.segments_seen() > n_segments) {
    throw ConfigError("snapshot has seen more segments than this run has", "/resume_from");
  }
  return state;
}

RunResult finish(const Context& ctx, Json results, std::vector<MethodSummary> summaries) {
  write_json(ctx.out / "results.json", results);
  return {ctx.experiment, ctx.hash, std::move(summaries)};
}

}  // namespace

// ---------------------------------------------------------------------------

RunResult run_learn_fusion(const Context& ctx) {
  const GpModel truth = model_from_config(ctx.config);
  const Json& sizes_json = ctx.config.contains("segment_sizes") ? ctx.config["segment_sizes"]
                                                                 : Json::array({50, 100, 200});
  if (!sizes_json.is_array() || sizes_json.empty()) {
    throw ConfigError("'segment_sizes' must be a non-empty list of counts", "/segment_sizes");
  }
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < sizes_json.size(); ++i) {
    const Json& v = sizes_json[i];
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
      throw ConfigError("segment size must be a positive integer",
                        "/segment_sizes/" + std::to_string(i));
    }
    sizes.push_back(v.get<std::size_t>());
  }

  const std::string init_name = opt_string(ctx.config, "init", "zeros", "");
  GpModel init = truth;
  if (init_name == "zeros") {
    init = with_parameters(truth, Vector::Zero(parameter_count(truth)));
  } else if (init_name != "truth") {
    throw ConfigError("'init' must be \"zeros\" or \"truth\"", "/init");
  }

  const Problem p = series_problem(ctx, series_config(ctx, truth, 5000, 64));
  const Vector theta_true = parameters(truth);

  Json results = results_header(ctx);
  results["truth"] = {{"theta", to_json_vector(theta_true)}, {"model", model_to_json(truth)}};
  std::vector<MethodSummary> summaries;
  std::vector<std::pair<std::string, std::vector<double>>> timing;
  std::vector<Posterior> posts;

  for (const std::size_t n_k : sizes) {
    const auto segments = split(p.train, {0, n_k});
    auto fit = timed(ctx.repeats, [&] { return fit_by_fusion(init, segments); });
    const std::string tag = "N" + std::to_string(n_k);
    write_fusion_trajectory(ctx, truth, fit.value, ctx.out / ("fusion_" + tag + ".csv"));

    const Matrix cov = fused_covariance(fit.value.state);
    const Vector diff = fit.value.trajectory.back() - theta_true;
    Json entry = fit_to_json(fit.value);
    entry["segment_size"] = n_k;
    entry["covariance"] = to_json_vector(Eigen::Map<const Vector>(cov.data(), cov.size()));
    entry["mahalanobis"] = std::sqrt(std::max(0.0, diff.dot(fit.value.state.lambda.matrix() * diff)));
    results["fits"][tag] = entry;
    summaries.push_back({"fusion_" + tag, std::nullopt, median(fit.seconds)});
    timing.emplace_back("fusion_" + tag, fit.seconds);

    if (p.test_X.rows() > 0) {
      auto run = timed(ctx.repeats, [&] { return cgp_run(segments, fit.value.model, p.test_X); });
      posts.push_back({"CGP_" + tag, run.value.state.current(), std::move(run.seconds)});
    }
  }

  if (!posts.empty()) {
    std::vector<MethodSummary> prediction_summaries;
    write_posteriors(ctx, p.test_X, posts, p.truth, results, prediction_summaries);
    for (auto& s : prediction_summaries) summaries.push_back(s);
    for (const auto& post : posts) timing.emplace_back(post.method, post.seconds);
  }
  write_timing(ctx, timing);
  return finish(ctx, std::move(results), std::move(summaries));
}

RunResult run_timeseries(const Context& ctx) {
  GpModel model = model_from_config(ctx.config);
  const Problem p = series_problem(ctx, series_config(ctx, model, 4096, 128));
  const auto segments = split(p.train, segmentation_from_config(ctx.config));

  Json results = results_header(ctx);
  model = maybe_learn(ctx, model, segments, false, results);

  MethodPlan plan;
  plan.inducing_count = inducing_count(ctx, 128);
  plan.resume = load_resume(ctx, p.test_X, segments.size());
  if (plan.resume) results["resumed_after"] = plan.resume->segments_seen();

  const Methods m = run_methods(ctx, model, p.train, segments, p.test_X, plan);
  results["segments"] = segments.size();
  results["inducing_count"] = plan.inducing_count;

  std::vector<MethodSummary> summaries;
  write_posteriors(ctx, p.test_X, m.posts, p.truth, results, summaries);
  write_cgp_extras(ctx, m, segments);
  return finish(ctx, std::move(results), std::move(summaries));
}

RunResult run_grf(const Context& ctx) {
  const Json& d = ctx.data();
  GrfConfig cfg = grid_config(ctx, 64);
  cfg.alpha = opt_number(d, "alpha", 1.0, "/data");
  cfg.theta1 = opt_number(d, "theta1", 8.0, "/data");
  cfg.theta2 = opt_number(d, "theta2", 8.0, "/data");
  cfg.noise_var = opt_number(d, "noise_var", 1e-2, "/data");
  const Problem p = grid_problem(ctx, cfg);

  GpModel model;
  if (ctx.config.contains("model")) {
    model = model_from_config(ctx.config);
  } else {
    model.kernel = make_se2d_ard(cfg.alpha, cfg.theta1, cfg.theta2, cfg.noise_var);
  }
  if (model.kernel.input_dim() != 2) {
    throw ConfigError("the grid experiment needs a 2-D kernel", "/model/kernel/family");
  }
  const auto segments = split(p.train, segmentation_from_config(ctx.config));

  Json results = results_header(ctx);
  model = maybe_learn(ctx, model, segments, false, results);
  results["model"] = model_to_json(model);

  MethodPlan plan;
  plan.inducing_count = inducing_count(ctx, 256);
  const Methods m = run_methods(ctx, model, p.train, segments, p.test_X, plan);
  results["segments"] = segments.size();
  results["inducing_count"] = plan.inducing_count;

  std::vector<MethodSummary> summaries;
  write_posteriors(ctx, p.test_X, m.posts, p.truth, results, summaries);
  write_cgp_extras(ctx, m, segments);
  return finish(ctx, std::move(results), std::move(summaries));
}

RunResult run_excess_mse(const Context& ctx) {
  const GpModel model = model_from_config(ctx.config);
  if (model.mean.family != MeanFamily::Zero) {
    throw ConfigError("the excess-MSE analysis needs a zero mean", "/model/mean");
  }
  const Problem p = model_problem(ctx, model, 256, 32, 24);
  const auto segments = split(p.train, {2, 0});
  const std::vector<Inputs> segs_X{segments[0].X, segments[1].X};
  const std::size_t mc_draws = opt_count(ctx.config, "mc_draws", 0, "");
  if (mc_draws > 0 && mc_draws < 1000) {
    throw ConfigError("'mc_draws' must be 0 or at least 1000", "/mc_draws");
  }

  const auto n = static_cast<std::size_t>(p.test_X.rows());
  std::vector<ExcessMseReport> reports(n);
  std::vector<std::optional<ExcessMseMc>> mc(n);
  std::vector<double> seconds(n);
  parallel_for(n, [&](std::size_t i) {
    const Inputs x = p.test_X.row(static_cast<Index>(i));
    auto r = timed(1, [&] { return excess_mse_closed_form(model, segs_X[0], segs_X[1], x); });
    reports[i] = std::move(r.value);
    seconds[i] = r.seconds.back();
    if (mc_draws > 0) {
      mc[i] = excess_mse_monte_carlo(model, segs_X, x, mc_draws, ctx.seed + i);
    }
  });

  std::vector<std::string> header = p.test_X.cols() == 1
                                        ? std::vector<std::string>{"x"}
                                        : std::vector<std::string>{"x", "y"};
  header.insert(header.end(), {"value", "prior_var", "gp_posterior_var", "seg1_posterior_var"});
  if (mc_draws > 0) {
    header.insert(header.end(), {"mc_excess", "mc_excess_se", "mc_cgp_mse", "mc_cgp_mse_se",
                                 "mc_decomposition", "mc_decomposition_se"});
  }
  Table table(ctx.hash, header);
  Json points = Json::array();
  const bool full = opt_bool(ctx.config, "full_reports", false, "");
  double worst = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const ExcessMseReport& r = reports[i];
    std::vector<std::string> row;
    for (Index c = 0; c < p.test_X.cols(); ++c) row.push_back(num(p.test_X(static_cast<Index>(i), c)));
    row.insert(row.end(), {num(r.closed_form), num(r.prior_var), num(r.posterior_var),
                           num(r.posterior_var_seg1)});
    if (mc[i]) {
      row.insert(row.end(), {num(mc[i]->excess.mean), num(mc[i]->excess.std_error),
                             num(mc[i]->cgp_mse.mean), num(mc[i]->cgp_mse.std_error),
                             num(mc[i]->decomposition.mean), num(mc[i]->decomposition.std_error)});
    }
    table.add(row);
    worst = std::max(worst, r.closed_form);
    total += r.closed_form;
    if (full) {
      ExcessMseReport copy = r;
      if (mc[i]) copy.monte_carlo = mc[i]->excess;
      points.push_back(to_json(copy));
    } else {
      Json e = {{"closed_form", r.closed_form},
                {"prior_var", r.prior_var},
                {"posterior_var", r.posterior_var},
                {"posterior_var_seg1", r.posterior_var_seg1},
                {"monte_carlo", nullptr}};
      if (mc[i]) e["monte_carlo"] = to_json(mc[i]->excess);
      points.push_back(e);
    }
  }
  table.write(ctx.out / "excess_mse.csv");

  Json results = results_header(ctx);
  results["excess_mse"] = {{"points", points},
                           {"max", worst},
                           {"mean", n ? total / static_cast<double>(n) : 0.0},
                           {"segment_sizes", {segments[0].size(), segments[1].size()}}};

  // GP and CGP predictions on the simulated draw behind the analysis.
  MethodPlan plan;
  plan.sgp = false;
  const Methods m = run_methods(ctx, model, p.train, segments, p.test_X, plan);
  std::vector<MethodSummary> summaries;
  write_posteriors(ctx, p.test_X, m.posts, p.truth, results, summaries);
  summaries.push_back({"excess_mse", std::nullopt, median(seconds)});
  return finish(ctx, std::move(results), std::move(summaries));
}

RunResult run_info_gap(const Context& ctx) {
  const GpModel model = model_from_config(ctx.config);
  const Problem p = model_problem(ctx, model, 256, 16, 16);
  const auto segments = split(p.train, segmentation_from_config(ctx.config));
  std::vector<Inputs> segs_X;
  for (const auto& s : segments) segs_X.push_back(s.X);

  const InfoReport joint = info_gap(model, segs_X, p.test_X);
  Table gap_table(ctx.hash, {"segment", "n_points", "mi"});
  double sum = 0.0;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    gap_table.add({std::to_string(k + 1), std::to_string(segments[k].size()),
                   num(joint.mi_segments[k])});
    sum += joint.mi_segments[k];
  }
  gap_table.add({"sum", std::to_string(p.train.size()), num(sum)});
  gap_table.add({"joint", std::to_string(p.train.size()), num(joint.mi_full)});
  gap_table.write(ctx.out / "info_gap.csv");

  MethodPlan plan;
  plan.sgp = false;
  const Methods m = run_methods(ctx, model, p.train, segments, p.test_X, plan);
  const Vector gp_var = m.posts[0].belief.variance();
  const Vector cgp_var = m.posts[1].belief.variance();

  const auto n = static_cast<std::size_t>(p.test_X.rows());
  std::vector<InfoReport> point(n);
  std::vector<double> prior(n);
  parallel_for(n, [&](std::size_t i) {
    const Inputs x = p.test_X.row(static_cast<Index>(i));
    point[i] = info_gap(model, segs_X, x);
    prior[i] = kernel_eval(model.kernel, x.row(0), x.row(0));
  });

  std::vector<std::string> header = coord_header(p.test_X);
  header.insert(header.end(), {"prior_var", "mi", "mse_bound", "gp_var", "cgp_var", "gap", "verdict"});
  Table pointwise(ctx.hash, header);
  std::map<std::string, int> verdicts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row;
    for (Index c = 0; c < p.test_X.cols(); ++c) row.push_back(num(p.test_X(static_cast<Index>(i), c)));
    const std::string verdict(to_string(point[i].verdict));
    row.insert(row.end(), {num(prior[i]), num(point[i].mi_full),
                           num(mse_lower_bound(prior[i], point[i].mi_full)),
                           num(gp_var[static_cast<Index>(i)]), num(cgp_var[static_cast<Index>(i)]),
                           num(point[i].gap), verdict});
    pointwise.add(row);
    ++verdicts[verdict];
  }
  pointwise.write(ctx.out / "pointwise.csv");

  Json results = results_header(ctx);
  results["info_gap"] = to_json(joint);
  results["pointwise_verdicts"] = verdicts;
  std::vector<MethodSummary> summaries;
  write_posteriors(ctx, p.test_X, m.posts, p.truth, results, summaries);
  return finish(ctx, std::move(results), std::move(summaries));
}

RunResult run_csv_predict(const Context& ctx) {
  const Json& d = ctx.data();
  const std::string ts_col = opt_string(d, "timestamp_column", "timestamp", "/data");
  const std::string val_col = opt_string(d, "value_column", "value", "/data");
  const std::string transform_name = opt_string(d, "transform", "Log", "/data");
  Transform transform;
  try {
    transform = transform_from_string(transform_name);
  } catch (const Error&) {
    throw ConfigError("'transform' must be \"None\" or \"Log\"", "/data/transform");
  }

  fs::path path;
  if (d.contains("path")) {
    path = ctx.resolve(opt_string(d, "path", "", "/data"));
  } else {
    // Synthetic stand-in, written out so the ingest path is the same.
    const std::size_t n = opt_count(d, "synthetic_points", 2048, "/data");
    path = ctx.out / "input.csv";
    write_csv(synthetic_lognormal_series(n, ctx.seed), path, ts_col, val_col);
  }
  const IngestResult ingested = ingest_csv(path, ts_col, val_col, transform);
  const TimeSeries& series = ingested.series;

  const auto total = static_cast<std::size_t>(series.t.size());
  const std::size_t n_test = opt_count(d, "n_test", std::max<std::size_t>(1, total / 10), "/data");
  if (n_test == 0 || n_test >= total) {
    throw ConfigError("'n_test' must leave at least one training point", "/data/n_test");
  }
  const auto n_train = static_cast<Index>(total - n_test);
  const DataSegment all = series.as_segment();
  DataSegment train{all.X.topRows(n_train), all.y.head(n_train)};
  const Inputs test_X = all.X.bottomRows(static_cast<Index>(n_test));
  const Vector test_y = all.y.tail(static_cast<Index>(n_test));

  GpModel model = model_from_config(ctx.config);
  const auto segments = split(train, segmentation_from_config(ctx.config));

  Json results = results_header(ctx);
  results["data"] = {{"points", total},
                     {"dropped", ingested.dropped},
                     {"n_train", n_train},
                     {"n_test", n_test},
                     {"transform", to_string(transform)}};
  model = maybe_learn(ctx, model, segments, true, results);

  MethodPlan plan;
  plan.inducing_count = inducing_count(ctx, 128);
  const std::size_t gp_max = opt_count(d, "gp_max_points", 4096, "/data");
  plan.gp = static_cast<std::size_t>(n_train) <= gp_max;
  if (!plan.gp) results["skipped"] = {"GP"};
  const Methods m = run_methods(ctx, model, train, segments, test_X, plan);
  results["segments"] = segments.size();
  results["inducing_count"] = plan.inducing_count;

  Truth truth;
  truth.observed = transform == Transform::Log ? Vector(test_y.array().exp()) : test_y;
  std::vector<MethodSummary> summaries;
  write_posteriors(ctx, test_X, m.posts, truth, results, summaries, transform);
  write_cgp_extras(ctx, m, segments);
  return finish(ctx, std::move(results), std::move(summaries));
}

}  // namespace cgpkit::tools
