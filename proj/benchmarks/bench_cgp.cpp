#include <benchmark/benchmark.h>

#include "cgpkit/cgp.hpp"
#include "cgpkit/data.hpp"
#include "cgpkit/fitc.hpp"
#include "cgpkit/gp.hpp"

namespace {

using namespace cgpkit;

GpModel series_model() {
  GpModel m;
  m.kernel = make_periodic_plus_se(1.0, 1.0, 1.0, 32.0, 128.0, 0.01);
  m.mean = {MeanFamily::Linear, 1e-3, 0.0};
  return m;
}

struct Series {
  DataSegment train;
  Inputs test_X;
};

Series make_series(std::size_t n_train, std::size_t n_test) {
  SeriesConfig cfg;
  cfg.model = series_model();
  cfg.n_train = n_train;
  cfg.n_test = n_test;
  cfg.seed = 42;
  const SimulatedSeries sim = simulate_gp_series(cfg);
  return {sim.train.as_segment(), sim.test.t};
}

// Composite run over K segments of 256 points each.
void BM_cgp_run(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Series s = make_series(256 * k, 64);
  const auto segments = segment_contiguous(s.train, {k, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(cgp_run(segments, series_model(), s.test_X).state.current().mean);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_cgp_run)->Arg(2)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond)->Complexity();

void BM_gp_posterior(benchmark::State& state) {
  const Series s = make_series(static_cast<std::size_t>(state.range(0)), 64);
  const GpModel m = series_model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp_posterior(prior_belief(m, s.test_X), m, s.train, s.test_X).mean);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_gp_posterior)->Arg(512)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond)->Complexity();

void BM_fitc_posterior(benchmark::State& state) {
  const Series s = make_series(2048, 64);
  const GpModel m = series_model();
  const InducingSet u = place_uniform({s.train.X.colwise().minCoeff().transpose(),
                                       s.train.X.colwise().maxCoeff().transpose()},
                                      static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fitc_posterior(m, s.train, u, s.test_X).mean);
}
BENCHMARK(BM_fitc_posterior)->Arg(32)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_fisher_information(benchmark::State& state) {
  const Series s = make_series(static_cast<std::size_t>(state.range(0)), 1);
  const GpModel m = series_model();
  for (auto _ : state) benchmark::DoNotOptimize(fisher_information(m, s.train).matrix.matrix());
}
BENCHMARK(BM_fisher_information)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
