// tlsf: command-line front end.
//
//   tlsf eval <spec.json> <signal.csv> [--semantics space|new] [--nu v]
//   tlsf optimize <experiment.json> [--seed s] [--out dir] [--replicates k]
//   tlsf retrieve <model-or-experiment.json> [--params csv] [--out csv]
//   tlsf fit <demo.csv> --k K [--out model.json]
//   tlsf report <run-dir>
//
// Exit status: 0 ok, 2 bad input or config, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>
#include <omp.h>
#include <optional>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <string>
#include <vector>

#include "tlsf/error.hpp"
#include "tlsf/io.hpp"
#include "tlsf/report.hpp"
#include "tlsf/sim.hpp"

namespace fs = std::filesystem;
using namespace tlsf;

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 2;
constexpr int kNumericalError = 3;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("tlsf");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TLSF_LOG")) {
    const std::string v = env;
    if (v == "error") spdlog::set_level(spdlog::level::err);
    else if (v == "info") spdlog::set_level(spdlog::level::info);
    else if (v == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("TLSF_LOG='{}' not understood (error, info, debug)", v);
  }
}

std::string sig9(double v) { return fmt::format("{:#.9g}", v); }

// ------------------------------------------------------------------ eval

struct EvalArgs {
  std::string spec;
  std::string signal;
  std::string semantics = "space";
  double nu = 1.0;
};

int cmd_eval(const EvalArgs& a) {
  const StlSpec spec = load_stl_spec(a.spec);
  const Formula f = spec.formula();
  f.validate();
  const Signal s = read_signal_csv(a.signal);
  RobustnessConfig cfg;
  cfg.semantics = parse_semantics(a.semantics);
  cfg.nu = a.nu;
  cfg.validate();
  spdlog::info("{} samples, dt {}, formula {}", s.size(), s.dt(), to_string(f));

  const RobustnessValue r = robustness(f, s, cfg);
  const bool sat = sat_bool(f, s);
  fmt::print("{} {}\n", sig9(r.value), sat ? "SAT" : "UNSAT");
  const auto clauses = clause_breakdown(f, s, cfg);
  if (clauses.size() > 1) {
    for (const auto& c : clauses) fmt::print("  {}  {}\n", sig9(c.value.value), c.clause);
  }
  if ((r.value > 0.0) != sat && r.value != 0.0) {
    spdlog::warn("robustness sign disagrees with boolean satisfaction");
  }
  return kOk;
}

// -------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "run";
  std::size_t replicates = 1;
  std::optional<std::string> semantics;
  std::optional<double> nu;
};

void print_summary(const RunReport& rep, const fs::path& dir) {
  fmt::print("{}: seed {}  {} {} evaluations  trace {}\n", rep.experiment, rep.seed,
             rep.aborted ? "aborted after" : "finished", rep.evaluations, hex_digest(rep.trace_digest));
  if (rep.best.empty()) return;
  fmt::print("best reward {} at iter {} ({})  initial {}\n", sig9(rep.best_reward), rep.best_iteration,
             rep.best_reward > 0.0 ? "satisfied" : "violated", sig9(rep.initial_reward));
  for (std::size_t i = 0; i < rep.labels.size(); ++i) {
    fmt::print("  {:<10} {:>12.6f} -> {:>12.6f}  ({:+.6f})\n", rep.labels[i], rep.initial[i], rep.best[i],
               rep.best[i] - rep.initial[i]);
  }
  fmt::print("artifacts in {}\n", dir.string());
}

// Runs one seed into `dir`. Returns the exit code.
int optimize_one(Experiment e, const fs::path& dir, bool quiet) {
  spdlog::info("{}: seed {}, N={}, M={}, {} parameters -> {}", e.name, e.bo.seed, e.bo.iterations,
               e.bo.random_init, e.parameter_layout().size(), dir.string());
  const Observer observer = [&](const OptimizationTrace& t) {
    const auto& o = t.observations.back();
    spdlog::debug("iter {:>3} reward {:+.6f} best {:+.6f} ({:.1f} ms)", t.observations.size() - 1, o.reward,
                  t.best_observation().reward, o.wall_ms);
  };
  try {
    const OptimizationTrace trace = run_experiment(e, observer);
    const RunReport rep = write_run(e, trace, dir);
    if (!quiet) print_summary(rep, dir);
    return kOk;
  } catch (const OptimizationAborted& ab) {
    spdlog::error("{}: {}", e.name, ab.what());
    const RunReport rep = write_run(e, ab.partial(), dir, std::string(ab.what()));
    if (!quiet) print_summary(rep, dir);
    return kNumericalError;
  }
}

int cmd_optimize(const OptimizeArgs& a) {
  Experiment e = load_experiment(a.config);
  if (a.seed) e.bo.seed = *a.seed;
  if (a.semantics) e.robustness.semantics = parse_semantics(*a.semantics);
  if (a.nu) e.robustness.nu = *a.nu;
  e.validate();
  if (a.replicates == 0) throw ValidationError("--replicates must be >= 1");
  if (a.replicates == 1) return optimize_one(e, a.out, false);

  // replicate r uses seed + r; each writes only its own directory
  const auto n = static_cast<long>(a.replicates);
  std::vector<int> codes(a.replicates, kOk);
  std::vector<std::string> errors(a.replicates);
#pragma omp parallel for schedule(dynamic)
  for (long r = 0; r < n; ++r) {
    Experiment er = e;
    er.bo.seed = e.bo.seed + static_cast<std::uint64_t>(r);
    try {
      codes[r] = optimize_one(er, fs::path(a.out) / fmt::format("rep_{}", r), true);
    } catch (const std::exception& ex) {
      codes[r] = kNumericalError;
      errors[r] = ex.what();
    }
  }
  int worst = kOk;
  for (long r = 0; r < n; ++r) {
    const fs::path dir = fs::path(a.out) / fmt::format("rep_{}", r);
    if (!errors[r].empty()) {
      fmt::print("rep_{}: failed: {}\n", r, errors[r]);
    } else {
      const Json j = Json::parse(read_text(dir / "report.json"));
      fmt::print("rep_{}: seed {} best {} {}\n", r, j["seed"].get<std::uint64_t>(),
                 j.contains("best_reward") ? sig9(j["best_reward"].get<double>()) : std::string("-"),
                 j["trace_digest"].get<std::string>());
    }
    worst = std::max(worst, codes[r]);
  }
  return worst;
}

// -------------------------------------------------------------- retrieve

struct RetrieveArgs {
  std::string input;
  std::string params;
  std::string out = "trajectory.csv";
};

void check_overlay(const ParameterVector& pv) {
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (!(pv.values[i] >= pv.bounds.lower[i] - 1e-12 && pv.values[i] <= pv.bounds.upper[i] + 1e-12)) {
      throw ValidationError(fmt::format("{} = {} outside [{}, {}]", pv.layout.label(i), pv.values[i],
                                        pv.bounds.lower[i], pv.bounds.upper[i]));
    }
  }
}

int cmd_retrieve(const RetrieveArgs& a) {
  const Json j = Json::parse(read_text(a.input));
  std::vector<Trajectory> chain;
  if (j.is_object() && j.contains("stl")) {
    const Experiment e = load_experiment(a.input);
    ParameterVector pv = e.initial_parameters();
    if (!a.params.empty()) {
      pv.values = read_params_csv(a.params, pv.layout);
      check_overlay(pv);
    }
    chain = retrieve_chain(apply_parameters(e.skills, pv));
  } else {
    SkillModel m = load_model(a.input);
    if (!a.params.empty()) {
      const ParameterVector overlay = read_labeled_params(a.params);
      overlay.layout.check_against(std::span<const SkillModel>(&m, 1));
      ParameterVector pv = initial_parameters(std::span<const SkillModel>(&m, 1), overlay.layout);
      pv.values = overlay.values;
      check_overlay(pv);
      m = apply_parameters(m, pv);
    }
    chain.push_back(retrieve(m));
  }
  write_trajectory_csv(a.out, chain);
  std::size_t n = 0;
  for (const auto& t : chain) n += t.size();
  fmt::print("{} samples -> {}\n", n, a.out);
  return kOk;
}

// ------------------------------------------------------------------- fit

struct FitArgs {
  std::string demo;
  std::size_t k = 0;
  std::string out = "model.json";
  double min_variance = 1e-4;
};

int cmd_fit(const FitArgs& a) {
  const Demonstration d = read_demo_csv(a.demo);
  const SkillModel m = fit_from_demo(d, a.k, a.min_variance);
  save_model(a.out, m);
  fmt::print("K={} dt={} horizon={} -> {}\n", m.size(), m.dt, m.horizon, a.out);
  for (std::size_t i = 0; i < m.size(); ++i) {
    fmt::print("  {}: mean ({:.4f}, {:.4f}, {:.4f})  duration {:.3f} s\n", i, m.means[i].x(), m.means[i].y(),
               m.means[i].z(), m.duration_means[i]);
  }
  return kOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const std::string& dir) {
  const fs::path d = dir;
  const Experiment e = load_experiment(d / "experiment.json");
  const OptimizationTrace trace = read_trace_csv(d / "trace.csv");
  std::optional<std::string> aborted;
  if (fs::exists(d / "report.json")) {
    const Json old = Json::parse(read_text(d / "report.json"));
    if (old.value("aborted", false)) aborted = old.value("abort_reason", std::string("aborted"));
  }
  OptimizationTrace t = trace;
  t.seed = e.bo.seed;
  const RunReport rep = write_run(e, t, d, aborted);
  print_summary(rep, d);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Refine skill models against STL specifications with Bayesian optimization"};
  app.require_subcommand(1);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Robustness of a signal CSV against an STL spec");
  eval->add_option("spec", ev.spec, "STL spec JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("signal", ev.signal, "signal CSV (t column first)")->required()->check(CLI::ExistingFile);
  eval->add_option("--semantics", ev.semantics)->check(CLI::IsMember({"space", "new"}))->capture_default_str();
  eval->add_option("--nu", ev.nu, "New Robustness sharpness")->capture_default_str();

  OptimizeArgs op;
  std::uint64_t seed = 0;
  std::string osem;
  double onu = 1.0;
  auto* opt = app.add_subcommand("optimize", "Run Bayesian optimization for an experiment");
  opt->add_option("config", op.config, "experiment JSON")->required()->check(CLI::ExistingFile);
  auto* seed_opt = opt->add_option("--seed", seed, "overrides the config's seed");
  opt->add_option("--out", op.out, "output directory")->capture_default_str();
  opt->add_option("--replicates", op.replicates, "independent seeds seed..seed+k-1")->capture_default_str();
  auto* sem_opt = opt->add_option("--semantics", osem)->check(CLI::IsMember({"space", "new"}));
  auto* nu_opt = opt->add_option("--nu", onu);

  RetrieveArgs rt;
  auto* ret = app.add_subcommand("retrieve", "Retrieve a trajectory from a model or experiment");
  ret->add_option("input", rt.input, "model or experiment JSON")->required()->check(CLI::ExistingFile);
  ret->add_option("--params", rt.params, "param,value CSV or a trace CSV (best row)")->check(CLI::ExistingFile);
  ret->add_option("--out", rt.out, "trajectory CSV")->capture_default_str();

  FitArgs ft;
  auto* fit = app.add_subcommand("fit", "Fit a skill model to a demonstration");
  fit->add_option("demo", ft.demo, "demo CSV (t,x,y,z)")->required()->check(CLI::ExistingFile);
  fit->add_option("--k", ft.k, "number of components")->required();
  fit->add_option("--out", ft.out, "model JSON")->capture_default_str();
  fit->add_option("--min-variance", ft.min_variance)->capture_default_str();

  std::string run_dir;
  auto* rep = app.add_subcommand("report", "Rebuild the artifacts of a run directory");
  rep->add_option("dir", run_dir, "directory written by optimize")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUserError;
  }

  try {
    if (*eval) return cmd_eval(ev);
    if (*opt) {
      if (*seed_opt) op.seed = seed;
      if (*sem_opt) op.semantics = osem;
      if (*nu_opt) op.nu = onu;
      return cmd_optimize(op);
    }
    if (*ret) return cmd_retrieve(rt);
    if (*fit) return cmd_fit(ft);
    if (*rep) return cmd_report(run_dir);
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kUserError;
  } catch (const Json::exception& e) {
    spdlog::error("{}", e.what());
    return kUserError;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return kNumericalError;
  }
  return kOk;
}
