#pragma once

// Quantitative STL semantics: classical space robustness (min/max) and the
// smooth, sign-preserving "new robustness" conjunction.

#include <span>
#include <string>
#include <vector>

#include "tlsf/stl.hpp"

namespace tlsf {

enum class Semantics { kSpace, kNew };

struct RobustnessConfig {
  Semantics semantics = Semantics::kNew;
  double nu = 1.0;  // sharpness; conj -> min as nu -> inf

  void validate() const;
};

Semantics parse_semantics(const std::string& name);
std::string to_string(Semantics s);

struct RobustnessValue {
  double value = 0.0;
  bool boundary = false;  // value == 0 exactly

  static RobustnessValue of(double v) { return {v, v == 0.0}; }
};

enum class Execution { kSerial, kParallel };

// Smooth conjunction over a set of robustness values:
//   rho_min < 0: sum(rho_min e^{rt_i} e^{nu rt_i}) / sum(e^{nu rt_i})
//   rho_min > 0: sum(rho_i e^{-nu rt_i}) / sum(e^{-nu rt_i})
//   rho_min = 0: 0
// with rt_i = (rho_i - rho_min) / rho_min. Exponents are shifted by their
// maximum before exponentiation.
double new_robustness_conj(std::span<const double> rho, double nu);

// -conj(-rho): the dual disjunction.
double new_robustness_disj(std::span<const double> rho, double nu);

// Robustness of `f` at every sample index of `s`. Entries where some temporal
// window is empty after clamping hold NaN. Each formula node is evaluated
// bottom-up; with Execution::kParallel the per-sample loop of each node runs
// under OpenMP. Results are bit-identical across execution modes.
std::vector<double> robustness_trace(const Formula& f, const Signal& s, const RobustnessConfig& cfg,
                                     Execution exec = Execution::kParallel);

RobustnessValue space_robustness(const Formula& f, const Signal& s, double t = 0.0);
RobustnessValue new_robustness(const Formula& f, const Signal& s, double t = 0.0, double nu = 1.0);
RobustnessValue robustness(const Formula& f, const Signal& s, const RobustnessConfig& cfg, double t = 0.0);

// Direct recursive evaluation of the definitions at a single time index,
// with no caching and no threading. Kept as the reference for the trace
// kernel and for the benchmarks.
namespace reference {
double robustness_at(const Formula& f, const Signal& s, std::size_t index, const RobustnessConfig& cfg);
}  // namespace reference

// Robustness of each top-level conjunct (the formula itself when it is not
// an And), labelled with its printed form.
struct ClauseRobustness {
  std::string clause;
  RobustnessValue value;
};
std::vector<ClauseRobustness> clause_breakdown(const Formula& f, const Signal& s, const RobustnessConfig& cfg,
                                               double t = 0.0);

}  // namespace tlsf
