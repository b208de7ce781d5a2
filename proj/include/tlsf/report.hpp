#pragma once

// Per-run artifacts of an optimization: trace, best model/trajectory, the
// data behind the distance, surrogate and transition-graph plots, and a
// JSON summary.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tlsf/bayes_opt.hpp"
#include "tlsf/io.hpp"
#include "tlsf/sim.hpp"

namespace tlsf {

struct RunReport {
  std::string experiment;
  std::uint64_t config_digest = 0;
  std::uint64_t trace_digest = 0;
  std::uint64_t seed = 0;
  std::size_t evaluations = 0;
  double initial_reward = 0.0;
  double best_reward = 0.0;
  std::size_t best_iteration = 0;
  std::vector<std::string> labels;
  std::vector<double> initial;
  std::vector<double> best;
  std::vector<std::string> artifacts;  // file names inside the run directory
  std::optional<std::string> aborted;

  Json to_json(const OptimizationTrace& trace) const;
};

// Hyperparameters and training set of the final surrogate.
Json gp_snapshot_json(const GpModel& g, const Bounds& bounds, const ParameterLayout& layout);

// Posterior cost (negated reward) along every parameter axis through the
// best point, plus one 2-D grid over the first mean pair (x, y of one
// component) when the layout has one. Axis values are in model units.
Json gp_slices_json(const GpModel& g, const OptimizationTrace& trace, const Bounds& bounds,
                    const ParameterLayout& layout, std::size_t line_points = 41, std::size_t grid_points = 21);

// Normalized transition matrix and greedy state sequence per skill.
Json transition_graph_json(std::span<const SkillModel> skills);

// For every region and iteration, min and max signed distance over the
// time window of the top-level clause that mentions it (whole horizon
// otherwise). Negative means inside.
void write_signed_distance_csv(const std::filesystem::path& p, const Experiment& e, const OptimizationTrace& trace);

// Writes everything into `dir` and returns the summary (also saved as
// report.json).
RunReport write_run(const Experiment& e, const OptimizationTrace& trace, const std::filesystem::path& dir,
                    const std::optional<std::string>& aborted = std::nullopt);

std::string hex_digest(std::uint64_t h);

}  // namespace tlsf
