#include "tlsf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <set>

#include "tlsf/error.hpp"

namespace tlsf {

void Box::validate() const {
  if (!lower.allFinite() || !upper.allFinite()) throw ValidationError("box corners must be finite");
  if ((lower.array() >= upper.array()).any()) throw ValidationError("box needs lower < upper on every axis");
}

bool Box::contains(const Eigen::Vector3d& p) const {
  return (p.array() >= lower.array()).all() && (p.array() <= upper.array()).all();
}

double Box::signed_distance(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d out = (lower - p).cwiseMax(p - upper).cwiseMax(0.0);
  if (out.squaredNorm() > 0.0) return out.norm();
  return -penetration(p);
}

double Box::penetration(const Eigen::Vector3d& p) const {
  if (!contains(p)) return 0.0;
  return std::min((p - lower).minCoeff(), (upper - p).minCoeff());
}

Box box_of(const RegionSpec& r) {
  return {Eigen::Vector3d(r.x_lb, r.y_lb, r.z_lb), Eigen::Vector3d(r.x_ub, r.y_ub, r.z_ub)};
}

RegionSpec region_of(std::string name, const Box& b) {
  RegionSpec r;
  r.name = std::move(name);
  r.x_lb = b.lower.x();
  r.x_ub = b.upper.x();
  r.y_lb = b.lower.y();
  r.y_ub = b.upper.y();
  r.z_lb = b.lower.z();
  r.z_ub = b.upper.z();
  return r;
}

void Scene::validate() const {
  std::set<std::string> names;
  for (const RegionSpec& r : regions) {
    r.validate();
    if (!names.insert(r.name).second) throw ValidationError(fmt::format("duplicate region '{}'", r.name));
  }
  for (const Obstacle& o : obstacles) {
    try {
      o.box.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("obstacle '{}': {}", o.name, e.what()));
    }
    if (!(o.stiffness >= 0.0) || !std::isfinite(o.stiffness)) {
      throw ValidationError(fmt::format("obstacle '{}': stiffness must be >= 0", o.name));
    }
  }
}

const RegionSpec& Scene::region(const std::string& name) const {
  for (const RegionSpec& r : regions) {
    if (r.name == name) return r;
  }
  throw ValidationError(fmt::format("unknown region '{}'", name));
}

double contact_force(const Scene& scene, const Eigen::Vector3d& p) {
  double f = 0.0;
  for (const Obstacle& o : scene.obstacles) f = std::max(f, o.stiffness * o.box.penetration(p));
  return f;
}

Signal execute(const Trajectory& traj, const Scene& scene) { return execute(std::span(&traj, 1), scene); }

Signal execute(std::span<const Trajectory> chain, const Scene& scene) {
  if (chain.empty()) throw ValidationError("nothing to execute");
  const double dt = chain.front().dt;
  std::vector<double> x, y, z, f;
  for (const Trajectory& t : chain) {
    if (t.dt != dt) throw ValidationError("chained trajectories must share dt");
    for (const Eigen::Vector3d& p : t.positions) {
      x.push_back(p.x());
      y.push_back(p.y());
      z.push_back(p.z());
      f.push_back(contact_force(scene, p));
    }
  }
  Signal s(dt);
  s.add_channel("x", std::move(x));
  s.add_channel("y", std::move(y));
  s.add_channel("z", std::move(z));
  s.add_channel("f", std::move(f));
  return s;
}

FormulaTable Experiment::aliases() const {
  FormulaTable t;
  for (const RegionSpec& r : scene.regions) t.emplace(r.name, region_to_formula(r));
  return t;
}

Formula Experiment::formula() const { return parse_stl(stl, predicates, aliases()); }

ParameterLayout Experiment::parameter_layout() const {
  ParameterLayout l;
  for (std::size_t s = 0; s < layout.size(); ++s) l.append(layout[s], s);
  return l;
}

ParameterVector Experiment::initial_parameters() const {
  return tlsf::initial_parameters(skills, parameter_layout(), mean_sigmas);
}

void Experiment::validate() const {
  if (skills.empty()) throw ValidationError("experiment has no skill model");
  for (std::size_t i = 0; i < skills.size(); ++i) {
    try {
      skills[i].validate(true);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("skill {}: {}", i, e.what()));
    }
    if (skills[i].dt != skills.front().dt) throw ValidationError("chained skills must share dt");
  }
  if (layout.size() > skills.size()) throw ValidationError("layout names more skills than the experiment has");
  scene.validate();
  for (const auto& [name, p] : predicates) {
    if (p.channel != "x" && p.channel != "y" && p.channel != "z" && p.channel != "f") {
      throw ValidationError(fmt::format("predicate '{}' reads unknown channel '{}'", name, p.channel));
    }
    if (aliases().contains(name)) throw ValidationError(fmt::format("'{}' is both a predicate and a region", name));
  }
  const ParameterLayout l = parameter_layout();
  if (l.size() == 0) throw ValidationError("layout selects no parameters");
  l.check_against(skills);
  if (!(mean_sigmas > 0.0)) throw ValidationError("mean bound width must be > 0");
  bo.validate();
  robustness.validate();
  formula().validate();
}

Rollout rollout(const Experiment& e, const Formula& f, std::span<const double> delta) {
  ParameterVector pv = e.initial_parameters();
  if (delta.size() != pv.size()) {
    throw ValidationError(fmt::format("expected {} parameters, got {}", pv.size(), delta.size()));
  }
  pv.values.assign(delta.begin(), delta.end());
  pv.validate();
  Rollout r;
  r.skills = apply_parameters(e.skills, pv);
  r.trajectories = retrieve_chain(r.skills);
  r.signal = execute(r.trajectories, e.scene);
  r.reward = robustness(f, r.signal, e.robustness).value;
  return r;
}

OptimizationTrace run_experiment(const Experiment& e, const Observer& observer) {
  e.validate();
  const Formula f = e.formula();
  const ParameterVector pv = e.initial_parameters();
  const Objective objective = [&](std::span<const double> x) { return rollout(e, f, x).reward; };
  return optimize(pv.bounds, objective, e.bo, observer);
}

Demonstration demo_from_knots(std::span<const std::pair<double, Eigen::Vector3d>> knots, double dt) {
  if (knots.size() < 2) throw ValidationError("a path needs at least two knots");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (knots.front().first != 0.0) throw ValidationError("the first knot must be at t = 0");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].first > knots[i - 1].first)) throw ValidationError("knot times must increase");
  }
  Demonstration d;
  d.dt = dt;
  const auto n = static_cast<std::size_t>(std::floor(knots.back().first / dt + 1e-9)) + 1;
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    while (seg + 2 < knots.size() && t > knots[seg + 1].first) ++seg;
    const auto& [t0, p0] = knots[seg];
    const auto& [t1, p1] = knots[seg + 1];
    const double a = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
    d.positions.push_back(p0 + a * (p1 - p0));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Bundled geometry. Coordinates in meters, robot base frame; every region is
// a 6 cm cube at working height z = 0.30 unless stated otherwise.

namespace {

using V = Eigen::Vector3d;

constexpr double kHalf = 0.03;
constexpr double kDt = 0.05;

const V kStart{-0.22, 0.20, 0.30};
const V kL1{-0.30, 0.20, 0.30};
const V kL2{0.40, 0.20, 0.30};
const V kL3{0.00, 0.45, 0.30};
const V kL4{0.15, 0.30, 0.30};
// Where the demonstrator paused between L1 and L2.
const V kPause{0.05, 0.30, 0.30};

// Assembly cell.
const V kHome{0.00, 0.30, 0.45};
const V kObject{0.10, 0.20, 0.30};
const V kHole{0.30, 0.35, 0.20};  // hole axis point at the holder top
constexpr double kHoleHalf = 0.004;
constexpr double kHolderHalf = 0.05;
constexpr double kHolderDepth = 0.10;
// The demonstration was recorded against a holder placed 12 mm further in -x.
const V kDemoInsert{0.312, 0.35, 0.17};

RegionSpec cube(std::string name, const V& c, double half = kHalf) {
  return region_of(std::move(name), {c.array() - half, c.array() + half});
}

using Knots = std::vector<std::pair<double, V>>;

}  // namespace

Scene reach_scene() {
  Scene s;
  s.regions = {cube("L1", kL1), cube("L2", kL2), cube("L3", kL3), cube("L4", kL4)};
  return s;
}

Scene assembly_scene() {
  Scene s;
  s.regions = {cube("obj", kObject)};
  const double top = kHole.z();
  const double bottom = top - kHolderDepth;
  const double cx = kHole.x(), cy = kHole.y();
  const double a = kHoleHalf, b = kHolderHalf;
  auto wall = [&](std::string name, double x0, double x1, double y0, double y1) {
    s.obstacles.push_back({std::move(name), Box{V(x0, y0, bottom), V(x1, y1, top)}, 500.0});
  };
  wall("holder_xm", cx - b, cx - a, cy - b, cy + b);
  wall("holder_xp", cx + a, cx + b, cy - b, cy + b);
  wall("holder_ym", cx - b, cx + b, cy - b, cy - a);
  wall("holder_yp", cx - b, cx + b, cy + a, cy + b);
  s.regions.push_back(cube("holder", V(cx, cy, top - 0.5 * kHolderDepth), kHolderHalf));
  return s;
}

Demonstration reach_demo() {
  const Knots k{{0.0, kStart},   {0.5, kL1},   {6.0, kL1},   {6.5, kPause},
                {11.5, kPause},  {12.0, kL2},  {18.0, kL2},  {23.5, kL3},
                {35.95, kL3}};
  return demo_from_knots(k, kDt);
}

SkillModel reach_model() { return fit_from_demo(reach_demo(), 6); }

SkillModel pick_model() {
  const V above = kObject + V(0, 0, 0.10);
  const Knots k{{0.0, kHome},
                {5.0, V(-0.20, 0.35, 0.45)},
                {10.0, V(-0.20, 0.15, 0.40)},
                {15.0, V(-0.05, 0.10, 0.40)},
                {20.0, V(0.05, 0.15, 0.40)},
                {25.0, above},
                {26.5, kObject},
                {29.95, kObject}};
  return fit_from_demo(demo_from_knots(k, kDt), 6);
}

SkillModel insert_model() {
  const V lift = kObject + V(0, 0, 0.15);
  const V over = kDemoInsert + V(0, 0, 0.18);
  const V hover = kDemoInsert + V(0, 0, 0.11);
  const Knots k{{0.0, kObject}, {3.0, lift},         {8.0, over},          {12.5, hover},
                {16.4, hover},  {17.0, kDemoInsert}, {19.95, kDemoInsert}};
  return fit_from_demo(demo_from_knots(k, kDt), 6);
}

namespace {

Experiment reach_experiment(std::string name, std::string stl) {
  Experiment e;
  e.name = std::move(name);
  e.skills = {reach_model()};
  e.scene = reach_scene();
  e.stl = std::move(stl);
  LayoutSpec l;
  l.means = {0, 1};
  l.durations = {0, 1, 2, 3, 4, 5};
  e.layout = {l};
  e.bo.iterations = 32;
  return e;
}

}  // namespace

Experiment build_phi1() {
  return reach_experiment("phi1", "F(L1) and G[12,17](L2) and F(L3) and F[8,12](L4)");
}

Experiment build_phi2() {
  Experiment e = reach_experiment("phi2", "F(L1) and G[12,17](not L2) and F(L3) and F[8,12](L4)");
  e.layout[0].transitions = reduced_transition_layout(6).transitions;
  return e;
}

Experiment build_phi3() {
  Experiment e;
  e.name = "phi3";
  e.skills = {pick_model(), insert_model()};
  e.scene = assembly_scene();
  e.predicates.emplace("force", Predicate::threshold("force", "f", 2.0));
  e.stl = "F[0,20](obj) and G(force)";
  LayoutSpec pick;
  pick.durations = {0, 1, 2, 3, 4, 5};
  pick.transitions = reduced_transition_layout(6).transitions;
  LayoutSpec insert;
  insert.means = {5};
  e.layout = {pick, insert};
  e.bo.iterations = 16;
  e.events = {{"gripper_close", 27.0}, {"gripper_open", 49.5}};
  return e;
}

}  // namespace tlsf
