#include "tlsf/skill.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "tlsf/error.hpp"
#include "tlsf/lqt.hpp"

namespace tlsf {

bool operator==(const SkillModel& a, const SkillModel& b) {
  return a.means == b.means && a.covariances == b.covariances && a.duration_means == b.duration_means &&
         a.duration_stds == b.duration_stds && a.transition.rows() == b.transition.rows() &&
         a.transition.cols() == b.transition.cols() && a.transition == b.transition && a.start == b.start &&
         a.dt == b.dt && a.horizon == b.horizon && a.control_cost == b.control_cost;
}

void SkillModel::validate(bool loading) const {
  const std::size_t k = size();
  if (k == 0) throw ValidationError("skill model has no components");
  if (covariances.size() != k || duration_means.size() != k || duration_stds.size() != k) {
    throw ValidationError("skill model component arrays differ in length");
  }
  if (transition.rows() != static_cast<Eigen::Index>(k) || transition.cols() != static_cast<Eigen::Index>(k)) {
    throw ValidationError(fmt::format("transition matrix must be {}x{}", k, k));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("skill model dt must be > 0");
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw ValidationError("skill model horizon must be >= dt");
  if (!(control_cost > 0.0)) throw ValidationError("control cost must be > 0");
  if (!start.allFinite()) throw ValidationError("start position must be finite");
  for (std::size_t i = 0; i < k; ++i) {
    if (!means[i].allFinite()) throw ValidationError(fmt::format("mean {} is not finite", i));
    const Eigen::Matrix3d& s = covariances[i];
    if (!s.allFinite() || !s.isApprox(s.transpose(), 1e-12)) {
      throw ValidationError(fmt::format("covariance {} is not symmetric", i));
    }
    Eigen::LLT<Eigen::Matrix3d> llt(s);
    if (llt.info() != Eigen::Success) throw ValidationError(fmt::format("covariance {} is not positive definite", i));
    if (!(duration_means[i] > 0.0) || !std::isfinite(duration_means[i])) {
      throw ValidationError(fmt::format("duration mean {} must be > 0", i));
    }
    if (!(duration_stds[i] >= 0.0) || !std::isfinite(duration_stds[i])) {
      throw ValidationError(fmt::format("duration std {} must be >= 0", i));
    }
  }
  if (!transition.allFinite() || (transition.array() < 0.0).any()) {
    throw ValidationError("transition entries must be finite and >= 0");
  }
  if (loading) {
    const double total = std::accumulate(duration_means.begin(), duration_means.end(), 0.0);
    if (total > horizon + 1e-9) {
      throw ValidationError(fmt::format("duration means sum to {} s, beyond the {} s horizon", total, horizon));
    }
  }
}

std::size_t sample_count(const SkillModel& m) {
  return static_cast<std::size_t>(std::ceil(m.horizon / m.dt - 1e-9));
}

LayoutSpec full_means_layout(std::size_t k) {
  LayoutSpec spec;
  for (std::size_t i = 0; i < k; ++i) spec.means.push_back(i);
  return spec;
}

LayoutSpec full_transition_layout(std::size_t k) {
  LayoutSpec spec;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) spec.transitions.emplace_back(i, j);
  }
  return spec;
}

LayoutSpec reduced_transition_layout(std::size_t k) {
  LayoutSpec spec;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    spec.transitions.emplace_back(i, i + 1);
    if (i + 2 < k) spec.transitions.emplace_back(i, i + 2);
  }
  return spec;
}

void ParameterLayout::append(const LayoutSpec& spec, std::size_t skill) {
  for (std::size_t c : spec.means) {
    for (std::size_t axis = 0; axis < 3; ++axis) slots_.push_back({ParamKind::kMeanCoordinate, skill, c, axis});
  }
  for (std::size_t c : spec.durations) slots_.push_back({ParamKind::kDurationMean, skill, c, 0});
  for (const auto& [i, j] : spec.transitions) slots_.push_back({ParamKind::kTransition, skill, i, j});
}

std::string ParameterLayout::label(std::size_t i) const {
  const ParamSlot& s = slots_.at(i);
  const std::string prefix = s.skill == 0 ? "" : fmt::format("s{}.", s.skill);
  switch (s.kind) {
    case ParamKind::kMeanCoordinate:
      return fmt::format("{}mu{}.{}", prefix, s.component, "xyz"[s.index]);
    case ParamKind::kDurationMean:
      return fmt::format("{}muS{}", prefix, s.component);
    case ParamKind::kTransition:
      if (s.component < 10 && s.index < 10) return fmt::format("{}A{}{}", prefix, s.component, s.index);
      return fmt::format("{}A{}_{}", prefix, s.component, s.index);
  }
  return "?";
}

namespace {

std::size_t parse_index(std::string_view text, std::string_view whole) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(fmt::format("malformed parameter label '{}'", whole));
  }
  return v;
}

ParamSlot parse_label(std::string_view whole) {
  std::string_view s = whole;
  ParamSlot slot;
  if (s.starts_with("s")) {
    const auto dot = s.find('.');
    if (dot == std::string_view::npos) throw ValidationError(fmt::format("malformed parameter label '{}'", whole));
    slot.skill = parse_index(s.substr(1, dot - 1), whole);
    s.remove_prefix(dot + 1);
  }
  if (s.starts_with("muS")) {
    slot.kind = ParamKind::kDurationMean;
    slot.component = parse_index(s.substr(3), whole);
  } else if (s.starts_with("mu")) {
    slot.kind = ParamKind::kMeanCoordinate;
    const auto dot = s.find('.');
    if (dot == std::string_view::npos || dot + 2 != s.size() || std::string_view("xyz").find(s.back()) == std::string_view::npos) {
      throw ValidationError(fmt::format("malformed parameter label '{}'", whole));
    }
    slot.component = parse_index(s.substr(2, dot - 2), whole);
    slot.index = std::string_view("xyz").find(s.back());
  } else if (s.starts_with("A")) {
    slot.kind = ParamKind::kTransition;
    s.remove_prefix(1);
    if (const auto u = s.find('_'); u != std::string_view::npos) {
      slot.component = parse_index(s.substr(0, u), whole);
      slot.index = parse_index(s.substr(u + 1), whole);
    } else {
      if (s.size() != 2) throw ValidationError(fmt::format("malformed parameter label '{}'", whole));
      slot.component = parse_index(s.substr(0, 1), whole);
      slot.index = parse_index(s.substr(1, 1), whole);
    }
  } else {
    throw ValidationError(fmt::format("malformed parameter label '{}'", whole));
  }
  return slot;
}

}  // namespace

ParameterLayout ParameterLayout::from_labels(std::span<const std::string> labels) {
  ParameterLayout l;
  for (const std::string& text : labels) {
    const ParamSlot slot = parse_label(text);
    if (std::find(l.slots_.begin(), l.slots_.end(), slot) != l.slots_.end()) {
      throw ValidationError(fmt::format("parameter '{}' listed twice", text));
    }
    l.slots_.push_back(slot);
  }
  return l;
}

void ParameterLayout::check_against(std::span<const SkillModel> skills) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const ParamSlot& s = slots_[i];
    if (s.skill >= skills.size()) throw ValidationError(fmt::format("parameter {} refers to a missing skill", label(i)));
    const std::size_t k = skills[s.skill].size();
    const bool bad = s.component >= k || (s.kind == ParamKind::kMeanCoordinate && s.index >= 3) ||
                     (s.kind == ParamKind::kTransition && s.index >= k);
    if (bad) throw ValidationError(fmt::format("parameter {} does not exist in a {}-component model", label(i), k));
  }
}

std::size_t parameter_count(const ParameterLayout& layout) { return layout.size(); }

bool Bounds::contains(std::span<const double> x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] - slack && x[i] <= upper[i] + slack)) return false;
  }
  return true;
}

Bounds default_bounds(std::span<const SkillModel> skills, const ParameterLayout& layout, double mean_sigmas) {
  layout.check_against(skills);
  Bounds b;
  for (const ParamSlot& s : layout.slots()) {
    const SkillModel& m = skills[s.skill];
    double lo = 0.0;
    double hi = 1.0;
    switch (s.kind) {
      case ParamKind::kMeanCoordinate: {
        const double mu = m.means[s.component][static_cast<Eigen::Index>(s.index)];
        const double half = mean_sigmas * std::sqrt(m.covariances[s.component](s.index, s.index));
        lo = mu - half;
        hi = mu + half;
        break;
      }
      case ParamKind::kDurationMean: {
        const double mu = m.duration_means[s.component];
        const double sd = m.duration_stds[s.component];
        lo = std::max(mu - sd, m.dt);
        hi = std::max(mu + sd, lo);
        break;
      }
      case ParamKind::kTransition:
        break;
    }
    b.lower.push_back(lo);
    b.upper.push_back(hi);
  }
  return b;
}

Bounds default_bounds(const SkillModel& m, const ParameterLayout& layout, double mean_sigmas) {
  return default_bounds(std::span<const SkillModel>(&m, 1), layout, mean_sigmas);
}

void ParameterVector::validate() const {
  if (values.size() != layout.size() || bounds.lower.size() != layout.size() || bounds.upper.size() != layout.size()) {
    throw ValidationError("parameter vector, bounds and layout differ in length");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(bounds.lower[i] <= bounds.upper[i])) throw ValidationError(fmt::format("bounds of {} are inverted", layout.label(i)));
    if (!std::isfinite(values[i]) || values[i] < bounds.lower[i] - 1e-12 || values[i] > bounds.upper[i] + 1e-12) {
      throw ValidationError(fmt::format("parameter {} = {} is outside [{}, {}]", layout.label(i), values[i],
                                        bounds.lower[i], bounds.upper[i]));
    }
  }
}

std::vector<double> read_parameters(std::span<const SkillModel> skills, const ParameterLayout& layout) {
  layout.check_against(skills);
  std::vector<double> out;
  out.reserve(layout.size());
  for (const ParamSlot& s : layout.slots()) {
    const SkillModel& m = skills[s.skill];
    switch (s.kind) {
      case ParamKind::kMeanCoordinate:
        out.push_back(m.means[s.component][static_cast<Eigen::Index>(s.index)]);
        break;
      case ParamKind::kDurationMean:
        out.push_back(m.duration_means[s.component]);
        break;
      case ParamKind::kTransition:
        out.push_back(m.transition(s.component, s.index));
        break;
    }
  }
  return out;
}

ParameterVector initial_parameters(std::span<const SkillModel> skills, const ParameterLayout& layout,
                                   double mean_sigmas) {
  ParameterVector pv{layout, read_parameters(skills, layout), default_bounds(skills, layout, mean_sigmas)};
  pv.validate();
  return pv;
}

std::vector<SkillModel> apply_parameters(std::span<const SkillModel> skills, const ParameterVector& delta) {
  delta.validate();
  delta.layout.check_against(skills);
  std::vector<SkillModel> out(skills.begin(), skills.end());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const ParamSlot& s = delta.layout[i];
    SkillModel& m = out[s.skill];
    switch (s.kind) {
      case ParamKind::kMeanCoordinate:
        m.means[s.component][static_cast<Eigen::Index>(s.index)] = delta.values[i];
        break;
      case ParamKind::kDurationMean:
        m.duration_means[s.component] = delta.values[i];
        break;
      case ParamKind::kTransition:
        m.transition(s.component, s.index) = delta.values[i];
        break;
    }
  }
  return out;
}

SkillModel apply_parameters(const SkillModel& m, const ParameterVector& delta) {
  return apply_parameters(std::span<const SkillModel>(&m, 1), delta).front();
}

Eigen::MatrixXd normalize_transitions(const Eigen::MatrixXd& a) {
  if ((a.array() < 0.0).any()) throw ValidationError("transition matrix has a negative entry");
  Eigen::MatrixXd out = a;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double sum = out.row(i).sum();
    if (sum > 0.0) out.row(i) /= sum;
  }
  return out;
}

std::vector<Segment> state_sequence(const SkillModel& m) {
  const std::size_t k = m.size();
  const Eigen::MatrixXd a = normalize_transitions(m.transition);
  const std::size_t budget = sample_count(m);
  std::vector<Segment> seq;
  std::vector<bool> visited(k, false);
  std::size_t used = 0;
  std::size_t cur = 0;
  while (true) {
    if (visited[cur]) throw ValidationError(fmt::format("transition walk revisits component {}", cur));
    visited[cur] = true;
    // round half up, at least one step
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(m.duration_means[cur] / m.dt + 0.5)));
    const std::size_t take = std::min(steps, budget - used);
    seq.push_back({cur, take});
    used += take;
    if (used >= budget) break;
    Eigen::Index next = 0;
    const double best = a.row(static_cast<Eigen::Index>(cur)).maxCoeff(&next);
    if (!(best > 0.0)) break;
    cur = static_cast<std::size_t>(next);
  }
  return seq;
}

Trajectory retrieve(const SkillModel& m) { return retrieve(m, m.start); }

Trajectory retrieve(const SkillModel& m, const Eigen::Vector3d& start) {
  m.validate();
  const std::size_t n = sample_count(m);
  if (n < 2) throw ValidationError("skill horizon covers fewer than two samples");

  const auto seq = state_sequence(m);
  std::vector<std::size_t> labels;
  labels.reserve(n);
  labels.push_back(seq.front().component);
  for (const Segment& s : seq) labels.insert(labels.end(), s.steps, s.component);
  labels.resize(n, labels.back());  // hold the last state; drops the overflow step

  std::vector<Eigen::Matrix3d> precision(m.size());
  for (std::size_t c = 0; c < m.size(); ++c) precision[c] = m.covariances[c].inverse();

  TrackingProblem p;
  p.system = double_integrator(3, m.dt);
  p.control_cost = m.control_cost * Eigen::MatrixXd::Identity(3, 3);
  p.initial_state = Eigen::VectorXd::Zero(6);
  p.initial_state.head<3>() = start;
  p.references.reserve(n);
  p.state_costs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(6);
    r.head<3>() = i == 0 ? start : m.means[labels[i]];
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(6, 6);
    q.topLeftCorner<3, 3>() = precision[labels[i]];
    p.references.push_back(std::move(r));
    p.state_costs.push_back(std::move(q));
  }

  const TrackingSolution sol = solve_tracking(p);
  Trajectory traj;
  traj.dt = m.dt;
  traj.positions.reserve(n);
  traj.velocities.reserve(n);
  for (const auto& x : sol.states) {
    traj.positions.emplace_back(x.head<3>());
    traj.velocities.emplace_back(x.tail<3>());
  }
  traj.states = std::move(labels);
  return traj;
}

std::vector<Trajectory> retrieve_chain(std::span<const SkillModel> skills) {
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < skills.size(); ++i) {
    out.push_back(i == 0 ? retrieve(skills[i]) : retrieve(skills[i], out.back().positions.back()));
  }
  return out;
}

SkillModel fit_from_demo(const Demonstration& demo, std::size_t k, double min_variance) {
  const std::size_t n = demo.positions.size();
  if (k < 1) throw ValidationError("need at least one component");
  if (n < k) throw ValidationError(fmt::format("demonstration has {} samples, fewer than K = {}", n, k));
  if (!(demo.dt > 0.0)) throw ValidationError("demonstration dt must be > 0");
  if (!(min_variance > 0.0)) throw ValidationError("minimum variance must be > 0");

  SkillModel m;
  m.dt = demo.dt;
  m.start = demo.positions.front();
  m.transition = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t first = c * n / k;
    const std::size_t last = (c + 1) * n / k;  // exclusive
    const auto count = static_cast<double>(last - first);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t i = first; i < last; ++i) mean += demo.positions[i];
    mean /= count;
    Eigen::Vector3d var = Eigen::Vector3d::Zero();
    for (std::size_t i = first; i < last; ++i) var += (demo.positions[i] - mean).cwiseAbs2();
    var /= count;
    m.means.push_back(mean);
    m.covariances.push_back((var.array() + min_variance).matrix().asDiagonal());
    const double duration = count * demo.dt;
    m.duration_means.push_back(duration);
    m.duration_stds.push_back(0.25 * duration);
    const auto ci = static_cast<Eigen::Index>(c);
    if (c + 1 < k) m.transition(ci, ci + 1) = 0.8;
    if (c + 2 < k) m.transition(ci, ci + 2) = 0.2;
  }
  m.horizon = static_cast<double>(n) * demo.dt;
  return m;
}

}  // namespace tlsf
