#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "support.hpp"
#include "tlsf/error.hpp"
#include "tlsf/io.hpp"
#include "tlsf/sim.hpp"

namespace fs = std::filesystem;
using namespace tlsf;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tlsf_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("model json round trip is exact") {
  const SkillModel m = reach_model();
  const fs::path p = scratch("model.json");
  save_model(p, m);
  CHECK(load_model(p) == m);

  Json j = to_json(m);
  j["extra"] = 1;
  CHECK_THROWS_AS(model_from_json(j), ValidationError);
  j = to_json(m);
  j["duration_means"][0] = -1.0;
  CHECK_THROWS_AS(model_from_json(j), ValidationError);
}

TEST_CASE("experiment round trip keeps the digest") {
  for (const Experiment& e : {build_phi1(), build_phi2(), build_phi3()}) {
    const fs::path p = scratch(e.name + ".json");
    save_experiment(p, e);
    const Experiment back = load_experiment(p);
    CHECK(config_digest(back) == config_digest(e));
    CHECK(back.parameter_layout() == e.parameter_layout());
  }
  Json j = to_json(build_phi1());
  j["bo"]["Q"] = 3;
  CHECK_THROWS_AS(experiment_from_json(j), ValidationError);
  j = to_json(build_phi1());
  j["layout"] = Json{{"means", "all"}, {"transitions", "reduced"}};
  const Experiment e = experiment_from_json(j);
  CHECK(e.parameter_layout().size() == 18 + 9);
}

TEST_CASE("signal csv") {
  std::istringstream in("t,x,f\n0,1,0\n0.5,2,0.25\n1.0,3,0\n");
  const Signal s = parse_signal_csv(in);
  CHECK(s.dt() == 0.5);
  CHECK(s.channel("f")[1] == 0.25);
  std::ostringstream out;
  write_signal_csv(out, s);
  std::istringstream again(out.str());
  CHECK(parse_signal_csv(again) == s);

  std::istringstream empty("");
  CHECK_THROWS_AS(parse_signal_csv(empty), ValidationError);
  std::istringstream header_only("t,x\n");
  CHECK_THROWS_AS(parse_signal_csv(header_only), ValidationError);
  std::istringstream uneven("t,x\n0,1\n0.5,2\n1.5,3\n");
  CHECK_THROWS_AS(parse_signal_csv(uneven), ValidationError);
  std::istringstream ragged("t,x\n0,1\n0.5\n");
  CHECK_THROWS_AS(parse_signal_csv(ragged), ValidationError);
  std::istringstream words("t,x\n0,abc\n");
  CHECK_THROWS_AS(parse_signal_csv(words), ValidationError);
  std::istringstream no_t("x,y\n0,1\n");
  CHECK_THROWS_AS(parse_signal_csv(no_t), ValidationError);
}

TEST_CASE("bundled example signals have the documented shape") {
  const Signal s1 = read_signal_csv(testing::kDataDir / "S1.csv");
  CHECK(s1.dt() == doctest::Approx(0.1));
  CHECK(s1.size() == 86);
}

TEST_CASE("trajectory csv round trip") {
  const auto chain = retrieve_chain(build_phi3().skills);
  const fs::path p = scratch("traj.csv");
  write_trajectory_csv(p, chain);
  const auto back = read_trajectory_csv(p);
  REQUIRE(back.size() == 1);
  CHECK(back[0].size() == chain[0].size() + chain[1].size());
  CHECK(back[0].positions[chain[0].size()] == chain[1].positions[0]);
  CHECK(back[0].states.back() == chain[1].states.back());
}

TEST_CASE("demo csv round trip") {
  const Demonstration d = reach_demo();
  const fs::path p = scratch("demo.csv");
  write_demo_csv(p, d);
  const Demonstration back = read_demo_csv(p);
  CHECK(back.dt == d.dt);
  CHECK(back.positions == d.positions);
}

TEST_CASE("trace and params csv") {
  OptimizationTrace t;
  t.observations.push_back({{0.1, 0.2}, -1.0, 3.0});
  t.observations.push_back({{0.3, 1.0 / 3.0}, 0.5, 2.0});
  t.observations.push_back({{0.0, 0.0}, 0.25, 1.0});
  t.best = 1;
  const fs::path p = scratch("trace.csv");
  write_trace_csv(p, t);
  const OptimizationTrace back = read_trace_csv(p);
  REQUIRE(back.observations.size() == 3);
  CHECK(back.best == 1);
  CHECK(back.observations[1].x[1] == 1.0 / 3.0);
  CHECK(trace_digest(back) == trace_digest(t));

  const ParameterLayout l(LayoutSpec{{}, {0, 1}, {}});
  CHECK(read_params_csv(p, l) == t.observations[1].x);

  const fs::path q = scratch("params.csv");
  write_params_csv(q, l, std::vector<double>{1.5, 2.5});
  CHECK(read_params_csv(q, l) == std::vector<double>{1.5, 2.5});
  const ParameterVector pv = read_labeled_params(q);
  CHECK(pv.layout == l);
  CHECK(pv.values == std::vector<double>{1.5, 2.5});

  const ParameterLayout other(LayoutSpec{{}, {0, 2}, {}});
  CHECK_THROWS_AS(read_params_csv(q, other), ValidationError);
  CHECK_THROWS_AS(read_params_csv(p, ParameterLayout(LayoutSpec{{}, {0}, {}})), ValidationError);
}

TEST_CASE("stl spec json") {
  const StlSpec s = load_stl_spec(testing::kDataDir / "two_predicates.json");
  CHECK(s.stl == "F[2,4](A) and G[2,8](not B)");
  CHECK(s.predicates.at("B").ub == 0.35);
  const StlSpec back = stl_spec_from_json(to_json(s));
  CHECK(back.formula() == s.formula());
  Json bad = to_json(s);
  bad["predicates"]["A"]["kind"] = "sideways";
  CHECK_THROWS_AS(stl_spec_from_json(bad), ValidationError);
}
