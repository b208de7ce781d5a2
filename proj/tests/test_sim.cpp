#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "tlsf/error.hpp"
#include "tlsf/io.hpp"
#include "tlsf/sim.hpp"

using namespace tlsf;

namespace {

Box unit_box() { return Box{Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1)}; }

double max_force(const Signal& s) {
  const auto& f = s.channel("f");
  return *std::max_element(f.begin(), f.end());
}

}  // namespace

TEST_CASE("box distances") {
  const Box b = unit_box();
  CHECK(b.signed_distance(Eigen::Vector3d(2, 0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(b.signed_distance(Eigen::Vector3d(2, 2, 0.5)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(b.signed_distance(Eigen::Vector3d(0.5, 0.5, 0.9)) == doctest::Approx(-0.1));
  CHECK(b.penetration(Eigen::Vector3d(0.5, 0.5, 0.9)) == doctest::Approx(0.1));
  CHECK(b.penetration(Eigen::Vector3d(1.5, 0.5, 0.5)) == 0.0);
  CHECK(b.contains(Eigen::Vector3d(1, 1, 1)));
  CHECK_THROWS_AS((Box{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 1)}.validate()), ValidationError);
  const RegionSpec r = region_of("R", b);
  CHECK(r.x_ub == 1.0);
  CHECK(box_of(r).upper == b.upper);
}

TEST_CASE("contact force is stiffness times penetration") {
  Scene s;
  s.obstacles.push_back({"wall", unit_box(), 500.0});
  // 1 cm inside the top face
  CHECK(contact_force(s, Eigen::Vector3d(0.5, 0.5, 0.99)) == doctest::Approx(5.0));
  CHECK(contact_force(s, Eigen::Vector3d(0.5, 0.5, 1.01)) == 0.0);
  // overlapping obstacles: the deeper one wins
  s.obstacles.push_back({"stiff", Box{Eigen::Vector3d(0, 0, 0.9), Eigen::Vector3d(1, 1, 1)}, 2000.0});
  CHECK(contact_force(s, Eigen::Vector3d(0.5, 0.5, 0.95)) == doctest::Approx(100.0));
}

TEST_CASE("execute produces position and force channels") {
  Trajectory t;
  t.dt = 0.1;
  for (int i = 0; i < 5; ++i) {
    t.positions.emplace_back(0.5, 0.5, 1.2 - 0.05 * i);
    t.velocities.emplace_back(0, 0, -0.5);
    t.states.push_back(0);
  }
  Scene s;
  s.obstacles.push_back({"table", unit_box(), 500.0});
  const Signal sig = execute(t, s);
  CHECK(sig.channel_names() == std::vector<std::string>{"x", "y", "z", "f"});
  CHECK(sig.size() == 5);
  CHECK(sig.dt() == 0.1);
  CHECK(sig.channel("f")[4] == doctest::Approx(500.0 * 0.0));  // z = 1.0 sits on the face
  CHECK(sig.channel("f")[3] == 0.0);
  const std::vector<Trajectory> two{t, t};
  CHECK(execute(two, s).size() == 10);
}

TEST_CASE("bundled experiments validate and match their data files") {
  const Experiment p1 = build_phi1();
  const Experiment p2 = build_phi2();
  const Experiment p3 = build_phi3();
  CHECK_NOTHROW(p1.validate());
  CHECK_NOTHROW(p2.validate());
  CHECK_NOTHROW(p3.validate());
  CHECK(p1.bo.iterations == 32);
  CHECK(p1.bo.random_init == 5);
  CHECK(p3.bo.iterations == 16);
  CHECK(config_digest(load_experiment(testing::kDataDir / "phi1.json")) == config_digest(p1));
  CHECK(config_digest(load_experiment(testing::kDataDir / "phi2.json")) == config_digest(p2));
  CHECK(config_digest(load_experiment(testing::kDataDir / "phi3.json")) == config_digest(p3));
  CHECK(config_digest(p1) != config_digest(p2));
}

TEST_CASE("nominal models: reach violates its spec, insertion scrapes the holder") {
  const Experiment p1 = build_phi1();
  const Rollout r1 = rollout(p1, p1.formula(), p1.initial_parameters().values);
  CHECK(r1.reward < 0.0);
  CHECK(r1.signal.duration() == doctest::Approx(36.0 - 0.05));

  const Experiment p3 = build_phi3();
  const Rollout r3 = rollout(p3, p3.formula(), p3.initial_parameters().values);
  CHECK(r3.trajectories.size() == 2);
  CHECK(max_force(r3.signal) > 2.0);
  CHECK(r3.reward < 0.0);
}

TEST_CASE("rollout checks the parameter vector") {
  const Experiment p1 = build_phi1();
  const Formula f = p1.formula();
  std::vector<double> x = p1.initial_parameters().values;
  x.pop_back();
  CHECK_THROWS_AS(rollout(p1, f, x), ValidationError);
  x = p1.initial_parameters().values;
  x[0] = 10.0;
  CHECK_THROWS_AS(rollout(p1, f, x), ValidationError);
}

TEST_CASE("experiment validation catches dangling names") {
  Experiment e = build_phi1();
  e.stl = "F(L9)";
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e = build_phi1();
  e.layout.front().means.push_back(6);
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e = build_phi1();
  e.bo.random_init = 0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  e = build_phi1();
  e.scene.regions.push_back(e.scene.regions.front());
  CHECK_THROWS_AS(e.validate(), ValidationError);
}

TEST_CASE("a short run is reproducible") {
  Experiment e = build_phi1();
  e.bo.iterations = 6;
  e.bo.random_init = 3;
  e.bo.seed = 5;
  const auto a = run_experiment(e);
  const auto b = run_experiment(e);
  REQUIRE(a.observations.size() == 6);
  CHECK(trace_digest(a) == trace_digest(b));
}

TEST_CASE("demo from knots") {
  const std::pair<double, Eigen::Vector3d> k[] = {{0.0, Eigen::Vector3d(0, 0, 0)},
                                                  {1.0, Eigen::Vector3d(1, 0, 0)}};
  const Demonstration d = demo_from_knots(k, 0.25);
  REQUIRE(d.positions.size() == 5);
  CHECK(d.positions[2].x() == doctest::Approx(0.5));
  const std::pair<double, Eigen::Vector3d> bad[] = {{0.0, Eigen::Vector3d::Zero()}, {0.0, Eigen::Vector3d::Ones()}};
  CHECK_THROWS_AS(demo_from_knots(bad, 0.1), ValidationError);
}
