#pragma once

// Bayesian optimization with a GP surrogate and probability of improvement.
// Rewards are maximized; internally the GP models the negated reward so the
// acquisition reads as a minimization.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tlsf/error.hpp"
#include "tlsf/gp.hpp"
#include "tlsf/robustness.hpp"
#include "tlsf/skill.hpp"

namespace tlsf {

struct BoConfig {
  std::size_t iterations = 32;   // N
  std::size_t random_init = 5;   // M
  double xi = 0.01;              // on standardized outputs
  std::size_t acquisition_samples = 4096;
  std::size_t refine_steps = 20;
  std::uint64_t seed = 0;

  // 1 <= M <= N, xi >= 0, at least one candidate. M == N is plain random search.
  void validate() const;
};

double standard_normal_cdf(double z);

// PI for a minimization: Phi((f_best - mean - xi) / sd). With sd == 0 the
// result is 1 when mean < f_best - xi and 0 otherwise.
double pi_from_moments(double mean, double sd, double f_best, double xi);

// `x` in the unit cube; `f_best` in the GP's standardized output units.
double pi_acquisition(const GpModel& g, std::span<const double> x, double f_best, double xi);

// `count` low-discrepancy points in [0,1)^dim: a Sobol sequence with a random
// shift (mod 1) drawn from (seed, round). Row i is candidate i.
RowMatrix acquisition_candidates(std::size_t count, std::size_t dim, std::uint64_t seed, std::uint64_t round);

// PI at each candidate row.
std::vector<double> score_candidates(const GpModel& g, const RowMatrix& candidates, double f_best, double xi,
                                     Execution exec = Execution::kParallel);

// First index holding the maximum.
std::size_t argmax_first(std::span<const double> v);

// Best candidate followed by coordinate-wise refinement, in unit-cube
// coordinates. `round` keys the candidate shift.
std::vector<double> propose_unit(const GpModel& g, const BoConfig& cfg, std::uint64_t round,
                                 Execution exec = Execution::kParallel);
// Same, mapped into `bounds`.
std::vector<double> propose_next(const GpModel& g, const BoConfig& cfg, const Bounds& bounds, std::uint64_t round,
                                 Execution exec = Execution::kParallel);

std::vector<double> to_unit(std::span<const double> x, const Bounds& bounds);
std::vector<double> from_unit(std::span<const double> u, const Bounds& bounds);

// Uniform point in bounds; dimension d of draw i uses counter i * P + d.
std::vector<double> random_point(const Bounds& bounds, std::uint64_t seed, std::uint64_t draw);

struct Observation {
  std::vector<double> x;
  double reward = 0.0;
  double wall_ms = 0.0;
};

struct OptimizationTrace {
  std::vector<Observation> observations;
  std::size_t best = 0;  // index of the largest reward (first on ties)
  std::uint64_t seed = 0;

  bool empty() const noexcept { return observations.empty(); }
  const Observation& best_observation() const { return observations.at(best); }
  std::vector<double> best_so_far() const;
};

// Executor failure mid-run; carries what was evaluated so far.
class OptimizationAborted : public Error {
 public:
  OptimizationAborted(const std::string& what, OptimizationTrace partial)
      : Error(what), partial_(std::move(partial)) {}
  const OptimizationTrace& partial() const noexcept { return partial_; }

 private:
  OptimizationTrace partial_;
};

using Objective = std::function<double(std::span<const double>)>;
// Called after every evaluation with the trace so far.
using Observer = std::function<void(const OptimizationTrace&)>;

OptimizationTrace optimize(const Bounds& bounds, const Objective& objective, const BoConfig& cfg,
                           const Observer& observer = {});

// The surrogate optimize() would fit after the given observations
// (unit-cube inputs, negated rewards).
GpModel fit_surrogate(std::span<const Observation> observations, const Bounds& bounds);

// FNV-1a over (iteration, reward bits, parameter bits); wall time excluded.
std::uint64_t trace_digest(const OptimizationTrace& trace);

}  // namespace tlsf
