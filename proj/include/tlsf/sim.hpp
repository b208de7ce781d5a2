#pragma once

// Kinematic stand-in for the robot: turns trajectories into signals with
// positions and a synthetic contact force, and defines the bundled
// experiments.

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tlsf/bayes_opt.hpp"
#include "tlsf/robustness.hpp"
#include "tlsf/skill.hpp"
#include "tlsf/stl.hpp"

namespace tlsf {

struct Box {
  Eigen::Vector3d lower = Eigen::Vector3d::Zero();
  Eigen::Vector3d upper = Eigen::Vector3d::Zero();

  void validate() const;
  bool contains(const Eigen::Vector3d& p) const;
  // Euclidean distance to the box when outside, minus the distance to the
  // nearest face when inside.
  double signed_distance(const Eigen::Vector3d& p) const;
  // Distance to the nearest face when inside, else 0.
  double penetration(const Eigen::Vector3d& p) const;
};

Box box_of(const RegionSpec& r);
RegionSpec region_of(std::string name, const Box& b);

struct Obstacle {
  std::string name;
  Box box;
  double stiffness = 500.0;  // N/m
};

struct Scene {
  std::vector<RegionSpec> regions;
  std::vector<Obstacle> obstacles;

  void validate() const;
  const RegionSpec& region(const std::string& name) const;
};

// Largest k_c * penetration over all obstacles; 0 in free space.
double contact_force(const Scene& scene, const Eigen::Vector3d& p);

// Channels x, y, z, f. A chain of trajectories is concatenated in order on
// one time axis; all pieces must share dt.
Signal execute(const Trajectory& traj, const Scene& scene);
Signal execute(std::span<const Trajectory> chain, const Scene& scene);

struct Experiment {
  std::string name;
  std::vector<SkillModel> skills;  // executed back to back
  Scene scene;
  std::string stl;
  PredicateTable predicates;
  std::vector<LayoutSpec> layout;  // one entry per skill (may be empty)
  BoConfig bo;
  RobustnessConfig robustness;
  double mean_sigmas = 2.0;
  std::map<std::string, double> events;  // gripper timestamps, s; not simulated

  // Region names usable in the STL text.
  FormulaTable aliases() const;
  Formula formula() const;
  ParameterLayout parameter_layout() const;
  ParameterVector initial_parameters() const;
  // Models, scene, layout, formula and BO settings are consistent and every
  // name resolves; throws ValidationError otherwise.
  void validate() const;
};

struct Rollout {
  std::vector<SkillModel> skills;
  std::vector<Trajectory> trajectories;
  Signal signal;
  double reward = 0.0;
};

// Applies delta, retrieves, executes and scores one candidate.
Rollout rollout(const Experiment& e, const Formula& f, std::span<const double> delta);

// Algorithm loop over the experiment's parameter space with its own BO
// settings (seed included).
OptimizationTrace run_experiment(const Experiment& e, const Observer& observer = {});

// Bundled setups. The reach scene holds regions L1..L4; the assembly scene
// holds the pick box and the holder walls.
Scene reach_scene();
Scene assembly_scene();
Demonstration reach_demo();
SkillModel reach_model();
SkillModel pick_model();
SkillModel insert_model();
Experiment build_phi1();
Experiment build_phi2();
Experiment build_phi3();

// Piecewise-linear path through timed knots (seconds, strictly increasing
// from 0), sampled every dt.
Demonstration demo_from_knots(std::span<const std::pair<double, Eigen::Vector3d>> knots, double dt);

}  // namespace tlsf
