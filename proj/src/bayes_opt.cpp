#include "tlsf/bayes_opt.hpp"

#include <algorithm>
#include <bit>
#include <boost/random/sobol.hpp>
#include <chrono>
#include <cmath>
#include <fmt/format.h>

#include "tlsf/rng.hpp"

namespace tlsf {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShiftStream = 2;

void fnv(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

void BoConfig::validate() const {
  if (iterations < 1) throw ValidationError("BO needs at least one iteration");
  if (random_init < 1 || random_init > iterations) {
    throw ValidationError(fmt::format("random initialization count must be in [1, {}], got {}", iterations, random_init));
  }
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw ValidationError("xi must be a finite value >= 0");
  if (acquisition_samples < 1) throw ValidationError("acquisition needs at least one candidate");
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double pi_from_moments(double mean, double sd, double f_best, double xi) {
  const double gap = f_best - mean - xi;
  if (!(sd > 0.0)) return mean < f_best - xi ? 1.0 : 0.0;
  return standard_normal_cdf(gap / sd);
}

double pi_acquisition(const GpModel& g, std::span<const double> x, double f_best, double xi) {
  const GpPrediction p = g.predict_standardized(x);
  return pi_from_moments(p.mean, std::sqrt(p.variance), f_best, xi);
}

RowMatrix acquisition_candidates(std::size_t count, std::size_t dim, std::uint64_t seed, std::uint64_t round) {
  if (dim < 1) throw ValidationError("candidate dimension must be positive");
  boost::random::sobol engine(dim);
  const CounterRng rng(seed, kShiftStream);
  std::vector<double> shift(dim);
  for (std::size_t d = 0; d < dim; ++d) shift[d] = rng.uniform(round * dim + d);

  RowMatrix c(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = static_cast<double>(engine()) * 0x1.0p-64 + shift[d];
      c(i, static_cast<Eigen::Index>(d)) = v - std::floor(v);
    }
  }
  return c;
}

std::vector<double> score_candidates(const GpModel& g, const RowMatrix& candidates, double f_best, double xi,
                                     Execution exec) {
  const auto n = static_cast<std::ptrdiff_t>(candidates.rows());
  const auto dim = static_cast<std::size_t>(candidates.cols());
  std::vector<double> score(static_cast<std::size_t>(n));
  const bool par = exec == Execution::kParallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    score[static_cast<std::size_t>(i)] =
        pi_acquisition(g, std::span<const double>(candidates.row(i).data(), dim), f_best, xi);
  }
  return score;
}

std::size_t argmax_first(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::vector<double> propose_unit(const GpModel& g, const BoConfig& cfg, std::uint64_t round, Execution exec) {
  const std::size_t dim = g.dimension();
  const double f_best = g.best_standardized();
  const RowMatrix cand = acquisition_candidates(cfg.acquisition_samples, dim, cfg.seed, round);
  const std::vector<double> score = score_candidates(g, cand, f_best, cfg.xi, exec);
  const std::size_t pick = argmax_first(score);

  std::vector<double> x(cand.row(static_cast<Eigen::Index>(pick)).data(),
                        cand.row(static_cast<Eigen::Index>(pick)).data() + dim);
  double fx = score[pick];
  double h = 0.05;
  for (std::size_t sweep = 0; sweep < cfg.refine_steps; ++sweep) {
    bool moved = false;
    for (std::size_t d = 0; d < dim; ++d) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> y = x;
        y[d] = std::clamp(x[d] + sign * h, 0.0, 1.0);
        if (y[d] == x[d]) continue;
        const double fy = pi_acquisition(g, y, f_best, cfg.xi);
        if (fy > fx) {
          x = std::move(y);
          fx = fy;
          moved = true;
          break;
        }
      }
    }
    if (!moved) h *= 0.5;
  }
  return x;
}

std::vector<double> propose_next(const GpModel& g, const BoConfig& cfg, const Bounds& bounds, std::uint64_t round,
                                 Execution exec) {
  if (bounds.size() != g.dimension()) throw ValidationError("bounds and surrogate dimension differ");
  return from_unit(propose_unit(g, cfg, round, exec), bounds);
}

std::vector<double> to_unit(std::span<const double> x, const Bounds& bounds) {
  std::vector<double> u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = bounds.upper[i] - bounds.lower[i];
    u[i] = w > 0.0 ? std::clamp((x[i] - bounds.lower[i]) / w, 0.0, 1.0) : 0.0;
  }
  return u;
}

std::vector<double> from_unit(std::span<const double> u, const Bounds& bounds) {
  std::vector<double> x(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double w = bounds.upper[i] - bounds.lower[i];
    x[i] = std::clamp(bounds.lower[i] + std::clamp(u[i], 0.0, 1.0) * w, bounds.lower[i], bounds.upper[i]);
  }
  return x;
}

std::vector<double> random_point(const Bounds& bounds, std::uint64_t seed, std::uint64_t draw) {
  const CounterRng rng(seed, kInitStream);
  const std::size_t p = bounds.size();
  std::vector<double> u(p);
  for (std::size_t d = 0; d < p; ++d) u[d] = rng.uniform(draw * p + d);
  return from_unit(u, bounds);
}

std::vector<double> OptimizationTrace::best_so_far() const {
  std::vector<double> out;
  out.reserve(observations.size());
  for (const Observation& o : observations) {
    out.push_back(out.empty() ? o.reward : std::max(out.back(), o.reward));
  }
  return out;
}

GpModel fit_surrogate(std::span<const Observation> observations, const Bounds& bounds) {
  const auto n = static_cast<Eigen::Index>(observations.size());
  const auto p = static_cast<Eigen::Index>(bounds.size());
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<double> u = to_unit(observations[static_cast<std::size_t>(i)].x, bounds);
    for (Eigen::Index d = 0; d < p; ++d) x(i, d) = u[static_cast<std::size_t>(d)];
    y[i] = -observations[static_cast<std::size_t>(i)].reward;
  }
  return gp_fit(x, y);
}

OptimizationTrace optimize(const Bounds& bounds, const Objective& objective, const BoConfig& cfg,
                           const Observer& observer) {
  cfg.validate();
  if (bounds.size() < 1) throw ValidationError("empty parameter space");
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (!(bounds.lower[i] <= bounds.upper[i])) throw ValidationError(fmt::format("bound {} has lower > upper", i));
  }

  OptimizationTrace trace;
  trace.seed = cfg.seed;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::vector<double> x;
    if (it < cfg.random_init) {
      x = random_point(bounds, cfg.seed, it);
    } else {
      x = propose_next(fit_surrogate(trace.observations, bounds), cfg, bounds, it);
    }

    const auto t0 = std::chrono::steady_clock::now();
    double reward = 0.0;
    try {
      reward = objective(x);
    } catch (const std::exception& e) {
      throw OptimizationAborted(fmt::format("evaluation {} failed: {}", it, e.what()), trace);
    }
    if (!std::isfinite(reward)) {
      throw OptimizationAborted(fmt::format("evaluation {} returned a non-finite reward", it), trace);
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    trace.observations.push_back({std::move(x), reward, ms});
    if (reward > trace.observations[trace.best].reward) trace.best = trace.observations.size() - 1;
    if (observer) observer(trace);
  }
  return trace;
}

std::uint64_t trace_digest(const OptimizationTrace& trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < trace.observations.size(); ++i) {
    const Observation& o = trace.observations[i];
    fnv(h, i);
    fnv(h, std::bit_cast<std::uint64_t>(o.reward));
    for (double v : o.x) fnv(h, std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

}  // namespace tlsf
