#include "tlsf/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "tlsf/error.hpp"

namespace tlsf {

void RobustnessConfig::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ValidationError("robustness nu must be > 0");
}

Semantics parse_semantics(const std::string& name) {
  if (name == "space") return Semantics::kSpace;
  if (name == "new") return Semantics::kNew;
  throw ValidationError("unknown semantics '" + name + "' (expected space|new)");
}

std::string to_string(Semantics s) { return s == Semantics::kSpace ? "space" : "new"; }

double new_robustness_conj(std::span<const double> rho, double nu) {
  if (rho.empty()) throw ValidationError("conjunction over an empty set");
  if (!(nu > 0.0)) throw ValidationError("nu must be > 0");
  double rmin = std::numeric_limits<double>::infinity();
  for (double r : rho) {
    if (!std::isfinite(r)) throw ValidationError("non-finite robustness value");
    rmin = std::min(rmin, r);
  }
  if (rmin == 0.0) return 0.0;

  // rt_i <= 0 when rmin < 0 and >= 0 when rmin > 0, so the largest exponent
  // is the one of rmin itself; the shift is kept general.
  const double sign = rmin < 0.0 ? 1.0 : -1.0;
  double shift = -std::numeric_limits<double>::infinity();
  for (double r : rho) shift = std::max(shift, sign * nu * (r - rmin) / rmin);

  double num = 0.0;
  double den = 0.0;
  for (double r : rho) {
    const double rt = (r - rmin) / rmin;
    const double w = std::exp(sign * nu * rt - shift);
    num += (rmin < 0.0 ? rmin * std::exp(rt) : r) * w;
    den += w;
  }
  return num / den;
}

double new_robustness_disj(std::span<const double> rho, double nu) {
  std::vector<double> neg(rho.size());
  std::transform(rho.begin(), rho.end(), neg.begin(), [](double r) { return -r; });
  return -new_robustness_conj(neg, nu);
}

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

double combine_and(std::span<const double> v, const RobustnessConfig& cfg) {
  if (cfg.semantics == Semantics::kSpace) return *std::min_element(v.begin(), v.end());
  return new_robustness_conj(v, cfg.nu);
}

double combine_or(std::span<const double> v, const RobustnessConfig& cfg) {
  if (cfg.semantics == Semantics::kSpace) return *std::max_element(v.begin(), v.end());
  return new_robustness_disj(v, cfg.nu);
}

// Until at one index given the child traces. Space: max over j of
// min(rhs(j), min lhs[i, j)). New: the same shape with conj/disj; each
// candidate set is ordered rhs(j), lhs(i), ..., lhs(j-1).
double until_at(std::size_t i, const Window& w, std::span<const double> lhs, std::span<const double> rhs,
                const RobustnessConfig& cfg) {
  std::vector<double> per_j;
  per_j.reserve(w.last - w.first + 1);
  std::vector<double> set;
  for (std::size_t j = w.first; j <= w.last; ++j) {
    if (std::isnan(rhs[j])) return kUndefined;
    set.clear();
    set.push_back(rhs[j]);
    for (std::size_t m = i; m < j; ++m) {
      if (std::isnan(lhs[m])) return kUndefined;
      set.push_back(lhs[m]);
    }
    per_j.push_back(combine_and(set, cfg));
  }
  return combine_or(per_j, cfg);
}

// Value of a window operator at index i from its child trace.
double window_at(const Formula& f, std::size_t i, std::span<const double> child, std::span<const double> child2,
                 std::size_t last, double dt, const RobustnessConfig& cfg) {
  const auto w = discretize(f.interval, i, last, dt);
  if (!w) return kUndefined;
  if (f.op == Op::kUntil) return until_at(i, *w, child, child2, cfg);
  const auto slice = child.subspan(w->first, w->last - w->first + 1);
  for (double v : slice) {
    if (std::isnan(v)) return kUndefined;
  }
  return f.op == Op::kGlobally ? combine_and(slice, cfg) : combine_or(slice, cfg);
}

std::vector<double> trace(const Formula& f, const Signal& s, const RobustnessConfig& cfg, Execution exec) {
  const std::size_t n = s.size();
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(n);
  std::vector<double> out(n);
  const bool par = exec == Execution::kParallel;

  switch (f.op) {
    case Op::kPred: {
      const auto& x = s.channel(f.pred.channel);
#pragma omp parallel for schedule(static) if (par)
      for (std::ptrdiff_t i = 0; i < count; ++i) out[i] = f.pred.margin(x[i]);
      return out;
    }
    case Op::kNot: {
      out = trace(f.children[0], s, cfg, exec);
      for (double& v : out) v = -v;
      return out;
    }
    case Op::kAnd:
    case Op::kOr: {
      std::vector<std::vector<double>> kids;
      kids.reserve(f.children.size());
      for (const auto& c : f.children) kids.push_back(trace(c, s, cfg, exec));
      const bool is_and = f.op == Op::kAnd;
#pragma omp parallel for schedule(static) if (par)
      for (std::ptrdiff_t i = 0; i < count; ++i) {
        std::vector<double> v(kids.size());
        bool undefined = false;
        for (std::size_t k = 0; k < kids.size(); ++k) {
          v[k] = kids[k][i];
          undefined = undefined || std::isnan(v[k]);
        }
        out[i] = undefined ? kUndefined : (is_and ? combine_and(v, cfg) : combine_or(v, cfg));
      }
      return out;
    }
    case Op::kGlobally:
    case Op::kEventually:
    case Op::kUntil: {
      const auto child = trace(f.children[0], s, cfg, exec);
      const auto child2 = f.op == Op::kUntil ? trace(f.children[1], s, cfg, exec) : std::vector<double>{};
      const std::size_t last = s.last_index();
      const double dt = s.dt();
      // Window sizes vary near the horizon; dynamic keeps threads busy.
#pragma omp parallel for schedule(dynamic, 16) if (par)
      for (std::ptrdiff_t i = 0; i < count; ++i) {
        out[i] = window_at(f, static_cast<std::size_t>(i), child, child2, last, dt, cfg);
      }
      return out;
    }
  }
  return out;
}

RobustnessValue pick(const std::vector<double>& tr, const Signal& s, double t) {
  const double v = tr[time_to_index(s, t)];
  if (std::isnan(v)) throw HorizonError("temporal interval lies outside the signal horizon");
  return RobustnessValue::of(v);
}

}  // namespace

std::vector<double> robustness_trace(const Formula& f, const Signal& s, const RobustnessConfig& cfg,
                                     Execution exec) {
  cfg.validate();
  s.validate();
  return trace(f, s, cfg, exec);
}

RobustnessValue robustness(const Formula& f, const Signal& s, const RobustnessConfig& cfg, double t) {
  const auto tr = robustness_trace(f, s, cfg);
  return pick(tr, s, t);
}

RobustnessValue space_robustness(const Formula& f, const Signal& s, double t) {
  return robustness(f, s, {Semantics::kSpace, 1.0}, t);
}

RobustnessValue new_robustness(const Formula& f, const Signal& s, double t, double nu) {
  return robustness(f, s, {Semantics::kNew, nu}, t);
}

namespace reference {

double robustness_at(const Formula& f, const Signal& s, std::size_t i, const RobustnessConfig& cfg) {
  switch (f.op) {
    case Op::kPred:
      return f.pred.margin(s.channel(f.pred.channel)[i]);
    case Op::kNot:
      return -robustness_at(f.children[0], s, i, cfg);
    case Op::kAnd:
    case Op::kOr: {
      std::vector<double> v;
      for (const auto& c : f.children) v.push_back(robustness_at(c, s, i, cfg));
      return f.op == Op::kAnd ? combine_and(v, cfg) : combine_or(v, cfg);
    }
    default:
      break;
  }
  const auto w = discretize(f.interval, i, s.last_index(), s.dt());
  if (!w) throw HorizonError("temporal interval lies outside the signal horizon");
  if (f.op == Op::kUntil) {
    std::vector<double> per_j;
    for (std::size_t j = w->first; j <= w->last; ++j) {
      std::vector<double> set{robustness_at(f.children[1], s, j, cfg)};
      for (std::size_t m = i; m < j; ++m) set.push_back(robustness_at(f.children[0], s, m, cfg));
      per_j.push_back(combine_and(set, cfg));
    }
    return combine_or(per_j, cfg);
  }
  std::vector<double> v;
  for (std::size_t j = w->first; j <= w->last; ++j) v.push_back(robustness_at(f.children[0], s, j, cfg));
  return f.op == Op::kGlobally ? combine_and(v, cfg) : combine_or(v, cfg);
}

}  // namespace reference

std::vector<ClauseRobustness> clause_breakdown(const Formula& f, const Signal& s, const RobustnessConfig& cfg,
                                               double t) {
  std::vector<ClauseRobustness> out;
  if (f.op != Op::kAnd) {
    out.push_back({to_string(f), robustness(f, s, cfg, t)});
    return out;
  }
  for (const auto& c : f.children) out.push_back({to_string(c), robustness(c, s, cfg, t)});
  return out;
}

}  // namespace tlsf
