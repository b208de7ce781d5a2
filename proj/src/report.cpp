#include "tlsf/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>

#include "tlsf/error.hpp"

namespace fs = std::filesystem;

namespace tlsf {
namespace {

Json matrix_json(const Eigen::MatrixXd& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) r.push_back(a(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Json vector_json(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

std::vector<std::string> labels_of(const ParameterLayout& layout) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < layout.size(); ++i) out.push_back(layout.label(i));
  return out;
}

// Cost-to-reward: the surrogate models -reward.
Json posterior_point(const GpModel& g, std::span<const double> unit) {
  const GpPrediction p = g.predict(unit);
  return Json{{"mean", -p.mean}, {"sd", std::sqrt(std::max(p.variance, 0.0))}};
}

// Sample window of the first top-level F/G clause whose operand is the
// region (or its negation).
std::optional<Window> region_window(const Formula& f, const Formula& region, const Signal& s) {
  std::vector<const Formula*> clauses;
  if (f.op == Op::kAnd) {
    for (const auto& c : f.children) clauses.push_back(&c);
  } else {
    clauses.push_back(&f);
  }
  for (const Formula* c : clauses) {
    if (c->op != Op::kEventually && c->op != Op::kGlobally) continue;
    const Formula& arg = c->children.front();
    const bool hit = arg == region || (arg.op == Op::kNot && arg.children.front() == region);
    if (hit) return discretize(c->interval, 0, s.last_index(), s.dt());
  }
  return Window{0, s.last_index()};
}

}  // namespace

std::string hex_digest(std::uint64_t h) { return fmt::format("{:016x}", h); }

Json RunReport::to_json(const OptimizationTrace& trace) const {
  Json j;
  j["experiment"] = experiment;
  j["config_digest"] = hex_digest(config_digest);
  j["seed"] = seed;
  j["evaluations"] = evaluations;
  j["aborted"] = aborted.has_value();
  if (aborted) j["abort_reason"] = *aborted;
  j["trace_digest"] = hex_digest(trace_digest);
  j["initial_reward"] = initial_reward;
  if (!trace.empty()) {
    j["best_reward"] = best_reward;
    j["best_iteration"] = best_iteration;
    j["satisfied"] = best_reward > 0.0;
    Json params = Json::array();
    for (std::size_t i = 0; i < labels.size() && i < best.size(); ++i) {
      params.push_back(Json{{"param", labels[i]}, {"initial", initial[i]}, {"best", best[i]},
                            {"change", best[i] - initial[i]}});
    }
    j["parameters"] = std::move(params);
  }
  Json iters = Json::array();
  const auto bsf = trace.best_so_far();
  for (std::size_t i = 0; i < trace.observations.size(); ++i) {
    const auto& o = trace.observations[i];
    iters.push_back(Json{{"iter", i}, {"reward", o.reward}, {"best_reward", bsf[i]}, {"wall_ms", o.wall_ms}});
  }
  j["iterations"] = std::move(iters);
  j["artifacts"] = artifacts;
  return j;
}

Json gp_snapshot_json(const GpModel& g, const Bounds& bounds, const ParameterLayout& layout) {
  Json j;
  j["kernel"] = "squared_exponential";
  j["length_scale"] = g.hyper().length_scale;
  j["signal_variance"] = g.hyper().signal_variance;
  j["noise_variance"] = g.hyper().noise_variance;
  j["jitter"] = g.jitter();
  j["log_marginal_likelihood"] = g.log_marginal_likelihood();
  j["output_mean"] = g.output_mean();
  j["output_scale"] = g.output_scale();
  j["target"] = "negated reward";
  j["params"] = labels_of(layout);
  j["lower"] = bounds.lower;
  j["upper"] = bounds.upper;
  Json xs = Json::array();
  const RowMatrix& x = g.inputs();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    xs.push_back(vector_json(std::span<const double>(x.row(i).data(), static_cast<std::size_t>(x.cols()))));
  }
  j["inputs_unit"] = std::move(xs);
  j["outputs"] = vector_json(std::span<const double>(g.outputs().data(), static_cast<std::size_t>(g.outputs().size())));
  return j;
}

Json gp_slices_json(const GpModel& g, const OptimizationTrace& trace, const Bounds& bounds,
                    const ParameterLayout& layout, std::size_t line_points, std::size_t grid_points) {
  if (trace.empty()) throw ValidationError("surrogate slices need at least one observation");
  line_points = std::max<std::size_t>(line_points, 2);
  grid_points = std::max<std::size_t>(grid_points, 2);
  const std::vector<double> anchor = to_unit(trace.best_observation().x, bounds);
  const std::size_t dim = anchor.size();

  Json j;
  j["anchor"] = trace.best_observation().x;
  j["values"] = "posterior reward mean and sd";
  Json lines = Json::array();
  for (std::size_t d = 0; d < dim; ++d) {
    Json line;
    line["param"] = layout.label(d);
    Json pts = Json::array();
    std::vector<double> u = anchor;
    for (std::size_t k = 0; k < line_points; ++k) {
      u[d] = static_cast<double>(k) / static_cast<double>(line_points - 1);
      Json p = posterior_point(g, u);
      p["x"] = bounds.lower[d] + u[d] * (bounds.upper[d] - bounds.lower[d]);
      pts.push_back(std::move(p));
    }
    line["points"] = std::move(pts);
    Json obs = Json::array();
    for (const auto& o : trace.observations) obs.push_back(Json{{"x", o.x[d]}, {"reward", o.reward}});
    line["observations"] = std::move(obs);
    lines.push_back(std::move(line));
  }
  j["lines"] = std::move(lines);

  // first x/y pair of one mean
  for (std::size_t d = 0; d + 1 < dim; ++d) {
    const ParamSlot& a = layout[d];
    const ParamSlot& b = layout[d + 1];
    if (a.kind != ParamKind::kMeanCoordinate || b.kind != ParamKind::kMeanCoordinate || a.index != 0 ||
        b.index != 1 || a.component != b.component || a.skill != b.skill) {
      continue;
    }
    Json grid;
    grid["params"] = {layout.label(d), layout.label(d + 1)};
    std::vector<double> ax(grid_points), ay(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(grid_points - 1);
      ax[k] = bounds.lower[d] + t * (bounds.upper[d] - bounds.lower[d]);
      ay[k] = bounds.lower[d + 1] + t * (bounds.upper[d + 1] - bounds.lower[d + 1]);
    }
    grid["x"] = ax;
    grid["y"] = ay;
    Json mean = Json::array(), sd = Json::array();
    std::vector<double> u = anchor;
    for (std::size_t r = 0; r < grid_points; ++r) {
      Json mr = Json::array(), sr = Json::array();
      u[d + 1] = static_cast<double>(r) / static_cast<double>(grid_points - 1);
      for (std::size_t c = 0; c < grid_points; ++c) {
        u[d] = static_cast<double>(c) / static_cast<double>(grid_points - 1);
        const GpPrediction p = g.predict(u);
        mr.push_back(-p.mean);
        sr.push_back(std::sqrt(std::max(p.variance, 0.0)));
      }
      mean.push_back(std::move(mr));
      sd.push_back(std::move(sr));
    }
    grid["mean"] = std::move(mean);  // rows follow y
    grid["sd"] = std::move(sd);
    j["grid"] = std::move(grid);
    break;
  }
  return j;
}

Json transition_graph_json(std::span<const SkillModel> skills) {
  Json out = Json::array();
  for (const SkillModel& m : skills) {
    Json s;
    s["transition"] = matrix_json(normalize_transitions(m.transition));
    try {
      Json seq = Json::array();
      for (const Segment& g : state_sequence(m)) seq.push_back(Json{{"component", g.component}, {"steps", g.steps}});
      s["sequence"] = std::move(seq);
    } catch (const ValidationError& e) {
      s["sequence"] = nullptr;
      s["sequence_error"] = e.what();
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_signed_distance_csv(const fs::path& p, const Experiment& e, const OptimizationTrace& trace) {
  const Formula f = e.formula();
  std::ofstream out(p);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", p.string()));
  out << "iter";
  for (const auto& r : e.scene.regions) out << ',' << r.name << "_min," << r.name << "_max";
  out << '\n';
  for (std::size_t i = 0; i < trace.observations.size(); ++i) {
    const Rollout ro = rollout(e, f, trace.observations[i].x);
    const auto& xs = ro.signal.channel("x");
    const auto& ys = ro.signal.channel("y");
    const auto& zs = ro.signal.channel("z");
    out << i;
    for (const auto& r : e.scene.regions) {
      const Box box = box_of(r);
      const auto w = region_window(f, region_to_formula(r), ro.signal);
      double lo = std::numeric_limits<double>::quiet_NaN(), hi = lo;
      if (w) {
        lo = std::numeric_limits<double>::infinity();
        hi = -lo;
        for (std::size_t k = w->first; k <= w->last; ++k) {
          const double d = box.signed_distance(Eigen::Vector3d(xs[k], ys[k], zs[k]));
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
      }
      out << ',' << fmt::format("{:.17g}", lo) << ',' << fmt::format("{:.17g}", hi);
    }
    out << '\n';
  }
}

RunReport write_run(const Experiment& e, const OptimizationTrace& trace, const fs::path& dir,
                    const std::optional<std::string>& aborted) {
  fs::create_directories(dir);
  RunReport rep;
  rep.experiment = e.name;
  rep.config_digest = config_digest(e);
  rep.trace_digest = trace_digest(trace);
  rep.seed = e.bo.seed;
  rep.evaluations = trace.observations.size();
  rep.aborted = aborted;

  const Formula f = e.formula();
  const ParameterVector init = e.initial_parameters();
  rep.labels = labels_of(init.layout);
  rep.initial = init.values;
  const Rollout r0 = rollout(e, f, init.values);
  rep.initial_reward = r0.reward;

  auto add = [&](const std::string& name) {
    rep.artifacts.push_back(name);
    return dir / name;
  };
  save_experiment(add("experiment.json"), e);
  write_trace_csv(add("trace.csv"), trace);
  write_trajectory_csv(add("initial_trajectory.csv"), r0.trajectories);

  if (!trace.empty()) {
    rep.best_iteration = trace.best;
    rep.best_reward = trace.best_observation().reward;
    rep.best = trace.best_observation().x;
    const Rollout rb = rollout(e, f, rep.best);
    write_params_csv(add("best_params.csv"), init.layout, rep.best);
    write_trajectory_csv(add("best_trajectory.csv"), rb.trajectories);
    write_signal_csv(add("best_signal.csv"), rb.signal);

    // every iteration's executed signal, stacked
    {
      std::ofstream out(add("signals.csv"));
      out << "iter,t,x,y,z,f\n";
      for (std::size_t i = 0; i < trace.observations.size(); ++i) {
        const Rollout ri = rollout(e, f, trace.observations[i].x);
        const Signal& s = ri.signal;
        const auto &x = s.channel("x"), &y = s.channel("y"), &z = s.channel("z"), &fc = s.channel("f");
        for (std::size_t k = 0; k < s.size(); ++k) {
          out << i << ',' << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.dt() * static_cast<double>(k),
                                         x[k], y[k], z[k], fc[k]);
        }
      }
    }
    write_signed_distance_csv(add("signed_distance.csv"), e, trace);

    Json clauses = Json::array();
    for (const auto& c : clause_breakdown(f, rb.signal, e.robustness)) {
      clauses.push_back(Json{{"clause", c.clause}, {"robustness", c.value.value}});
    }
    write_text(add("clauses.json"), clauses.dump(2) + "\n");

    const Bounds& bounds = init.bounds;
    const GpModel g = fit_surrogate(trace.observations, bounds);
    write_text(add("gp_snapshot.json"), gp_snapshot_json(g, bounds, init.layout).dump(2) + "\n");
    write_text(add("gp_slices.json"), gp_slices_json(g, trace, bounds, init.layout).dump() + "\n");

    Json tg;
    tg["before"] = transition_graph_json(e.skills);
    tg["after"] = transition_graph_json(rb.skills);
    write_text(add("transitions.json"), tg.dump(2) + "\n");
  }
  rep.artifacts.push_back("report.json");
  write_text(dir / "report.json", rep.to_json(trace).dump(2) + "\n");
  return rep;
}

}  // namespace tlsf
