#pragma once

// File formats: JSON for models, experiments and STL specs; CSV for
// signals, trajectories, demonstrations and optimization traces. Numbers
// are written with 17 significant digits so files re-read bit-exactly.

#include <filesystem>
#include <iosfwd>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "tlsf/bayes_opt.hpp"
#include "tlsf/sim.hpp"
#include "tlsf/skill.hpp"
#include "tlsf/stl.hpp"

namespace tlsf {

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);

Json to_json(const SkillModel& m);
SkillModel model_from_json(const Json& j);
SkillModel load_model(const std::filesystem::path& p);
void save_model(const std::filesystem::path& p, const SkillModel& m);

Json to_json(const Predicate& p);
Predicate predicate_from_json(const std::string& name, const Json& j);
Json to_json(const RegionSpec& r);
RegionSpec region_from_json(const Json& j);
Json to_json(const Scene& s);
Scene scene_from_json(const Json& j);
Json to_json(const LayoutSpec& l);
LayoutSpec layout_from_json(const Json& j, std::size_t k);

// STL text with its predicate table and optional regions usable as names.
struct StlSpec {
  std::string stl;
  PredicateTable predicates;
  std::vector<RegionSpec> regions;

  Formula formula() const;
};
StlSpec stl_spec_from_json(const Json& j);
Json to_json(const StlSpec& s);
StlSpec load_stl_spec(const std::filesystem::path& p);

// Model entries may be embedded objects or paths relative to `base_dir`.
Experiment experiment_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const Experiment& e);
Experiment load_experiment(const std::filesystem::path& p);
void save_experiment(const std::filesystem::path& p, const Experiment& e);

// Stable digest of an experiment (FNV-1a over its canonical JSON).
std::uint64_t config_digest(const Experiment& e);

// Header `t,<ch>...`; time column must advance by a constant dt.
Signal parse_signal_csv(std::istream& in);
Signal read_signal_csv(const std::filesystem::path& p);
void write_signal_csv(std::ostream& out, const Signal& s);
void write_signal_csv(const std::filesystem::path& p, const Signal& s);

// `t,x,y,z,vx,vy,vz,state`; a chain is written back to back on one time axis.
void write_trajectory_csv(const std::filesystem::path& p, std::span<const Trajectory> chain);
std::vector<Trajectory> read_trajectory_csv(const std::filesystem::path& p);

// `t,x,y,z` sampled at a constant dt.
Demonstration read_demo_csv(const std::filesystem::path& p);
void write_demo_csv(const std::filesystem::path& p, const Demonstration& d);

// `iter,reward,best_reward,wall_ms,delta_0..delta_{P-1}`.
void write_trace_csv(const std::filesystem::path& p, const OptimizationTrace& t);
OptimizationTrace read_trace_csv(const std::filesystem::path& p);

// `param,value` rows in layout order.
void write_params_csv(const std::filesystem::path& p, const ParameterLayout& layout, std::span<const double> values);
// Accepts a `param,value` file (labels must match the layout) or a trace
// CSV, from which the best row is taken.
std::vector<double> read_params_csv(const std::filesystem::path& p, const ParameterLayout& layout);
// A `param,value` file on its own: the layout is rebuilt from the labels.
ParameterVector read_labeled_params(const std::filesystem::path& p);

}  // namespace tlsf
