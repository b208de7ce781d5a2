// Serial vs OpenMP kernels: robustness traces over a reach rollout and PI
// scoring of the acquisition candidates. The recursive reference evaluator
// is timed too, on a short signal, since it is quadratic in the window size.

#include <benchmark/benchmark.h>

#include <omp.h>

#include "tlsf/bayes_opt.hpp"
#include "tlsf/sim.hpp"

using namespace tlsf;

namespace {

struct ReachCase {
  Formula formula;
  Signal signal;
};

const ReachCase& reach_case() {
  static const ReachCase c = [] {
    const Experiment e = build_phi1();
    const Formula f = e.formula();
    return ReachCase{f, rollout(e, f, e.initial_parameters().values).signal};
  }();
  return c;
}

// Signal repeated end to end `times` times.
Signal stretched(const Signal& s, int times) {
  Signal out(s.dt());
  for (const auto& name : s.channel_names()) {
    std::vector<double> v;
    for (int i = 0; i < times; ++i) v.insert(v.end(), s.channel(name).begin(), s.channel(name).end());
    out.add_channel(name, std::move(v));
  }
  return out;
}

void robustness_trace_bench(benchmark::State& state, Execution exec, Semantics sem) {
  const ReachCase& c = reach_case();
  const Signal s = stretched(c.signal, static_cast<int>(state.range(0)));
  const RobustnessConfig cfg{sem, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(robustness_trace(c.formula, s, cfg, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.size()));
  state.counters["threads"] = exec == Execution::kParallel ? omp_get_max_threads() : 1;
}

void BM_TraceSerial(benchmark::State& st) { robustness_trace_bench(st, Execution::kSerial, Semantics::kNew); }
void BM_TraceParallel(benchmark::State& st) { robustness_trace_bench(st, Execution::kParallel, Semantics::kNew); }
void BM_TraceSpaceSerial(benchmark::State& st) { robustness_trace_bench(st, Execution::kSerial, Semantics::kSpace); }
void BM_TraceSpaceParallel(benchmark::State& st) {
  robustness_trace_bench(st, Execution::kParallel, Semantics::kSpace);
}

void BM_ReferenceAtZero(benchmark::State& state) {
  const ReachCase& c = reach_case();
  const RobustnessConfig cfg{Semantics::kNew, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(reference::robustness_at(c.formula, c.signal, 0, cfg));
}

GpModel surrogate(std::size_t dim, std::size_t n) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  const Bounds unit{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = random_point(unit, 1, i);
    double v = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = p[d];
      v += (p[d] - 0.4) * (p[d] - 0.4);
    }
    y[static_cast<Eigen::Index>(i)] = v;
  }
  return gp_fit(x, y);
}

void score_bench(benchmark::State& state, Execution exec) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const GpModel g = surrogate(dim, n);
  const RowMatrix cand = acquisition_candidates(4096, dim, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(score_candidates(g, cand, g.best_standardized(), 0.01, exec));
  state.SetItemsProcessed(state.iterations() * 4096);
  state.counters["threads"] = exec == Execution::kParallel ? omp_get_max_threads() : 1;
}

void BM_ScoreSerial(benchmark::State& st) { score_bench(st, Execution::kSerial); }
void BM_ScoreParallel(benchmark::State& st) { score_bench(st, Execution::kParallel); }

}  // namespace

BENCHMARK(BM_TraceSerial)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TraceParallel)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TraceSpaceSerial)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TraceSpaceParallel)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ReferenceAtZero)->Unit(benchmark::kMillisecond)->UseRealTime();
// wall time: CPU time only counts the calling thread
// 12 and 21 parameters as in the reach layouts; 32 observations = a full run
BENCHMARK(BM_ScoreSerial)->Args({12, 32})->Args({21, 32})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScoreParallel)->Args({12, 32})->Args({21, 32})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
