#pragma once

// Hidden semi-Markov skill model, its optimization parameter space and
// deterministic trajectory retrieval.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tlsf {

struct SkillModel {
  std::vector<Eigen::Vector3d> means;        // component positions, m
  std::vector<Eigen::Matrix3d> covariances;  // SPD, m^2
  std::vector<double> duration_means;        // s, > 0
  std::vector<double> duration_stds;         // s, >= 0
  Eigen::MatrixXd transition;                // K x K, entries >= 0
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  double dt = 0.05;
  double horizon = 0.0;
  double control_cost = 1e-2;

  std::size_t size() const noexcept { return means.size(); }

  // Structural validity. With `loading`, additionally sum(duration_means) <= horizon.
  void validate(bool loading = false) const;

  friend bool operator==(const SkillModel& a, const SkillModel& b);
};

// Number of trajectory samples, ceil(horizon / dt).
std::size_t sample_count(const SkillModel& m);

enum class ParamKind { kMeanCoordinate, kDurationMean, kTransition };

// One optimized scalar. `index` is the axis for means and the column for
// transitions; `skill` selects the model in a chain of skills.
struct ParamSlot {
  ParamKind kind = ParamKind::kMeanCoordinate;
  std::size_t skill = 0;
  std::size_t component = 0;
  std::size_t index = 0;

  friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};

// Which parameters of one skill are optimized (0-based component ids).
struct LayoutSpec {
  std::vector<std::size_t> means;
  std::vector<std::size_t> durations;
  std::vector<std::pair<std::size_t, std::size_t>> transitions;

  friend bool operator==(const LayoutSpec&, const LayoutSpec&) = default;
};

// Every mean coordinate of a K-component model (3K entries).
LayoutSpec full_means_layout(std::size_t k);
// Every strictly upper-triangular transition entry (K(K-1)/2 entries).
LayoutSpec full_transition_layout(std::size_t k);
// Banded reduction: A(i,i+1) and A(i,i+2), which forbids skipping two
// components in a row. 2K-3 entries for K >= 2.
LayoutSpec reduced_transition_layout(std::size_t k);

class ParameterLayout {
 public:
  ParameterLayout() = default;
  explicit ParameterLayout(const LayoutSpec& spec, std::size_t skill = 0) { append(spec, skill); }

  // Means expand to three slots (x, y, z) each, then durations, then transitions.
  void append(const LayoutSpec& spec, std::size_t skill);

  std::size_t size() const noexcept { return slots_.size(); }
  const std::vector<ParamSlot>& slots() const noexcept { return slots_; }
  const ParamSlot& operator[](std::size_t i) const { return slots_[i]; }
  // "mu1.x", "muS3", "A24" (or "A10_12" past one digit); "s1." prefix for skill 1.
  std::string label(std::size_t i) const;
  // Inverse of label(); throws ValidationError on malformed or repeated labels.
  static ParameterLayout from_labels(std::span<const std::string> labels);

  // Throws ValidationError when a slot refers past the end of a model.
  void check_against(std::span<const SkillModel> skills) const;

  friend bool operator==(const ParameterLayout&, const ParameterLayout&) = default;

 private:
  std::vector<ParamSlot> slots_;
};

std::size_t parameter_count(const ParameterLayout& layout);

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  bool contains(std::span<const double> x, double slack = 1e-12) const;
};

// Durations: [mu - sigma, mu + sigma] clipped below at dt. Transitions: [0, 1].
// Mean coordinates: mu +- mean_sigmas * sqrt(diag(Sigma)).
Bounds default_bounds(std::span<const SkillModel> skills, const ParameterLayout& layout, double mean_sigmas = 2.0);
Bounds default_bounds(const SkillModel& m, const ParameterLayout& layout, double mean_sigmas = 2.0);

struct ParameterVector {
  ParameterLayout layout;
  std::vector<double> values;
  Bounds bounds;

  std::size_t size() const noexcept { return values.size(); }
  void validate() const;
};

// Values currently held by the models at each slot.
std::vector<double> read_parameters(std::span<const SkillModel> skills, const ParameterLayout& layout);

// The models' own values with default bounds.
ParameterVector initial_parameters(std::span<const SkillModel> skills, const ParameterLayout& layout,
                                   double mean_sigmas = 2.0);

// Copies of the models with every slot replaced by its value. Transition
// rows are stored raw; normalization happens at retrieval.
std::vector<SkillModel> apply_parameters(std::span<const SkillModel> skills, const ParameterVector& delta);
SkillModel apply_parameters(const SkillModel& m, const ParameterVector& delta);

// Rows with a positive sum are scaled to sum 1; all-zero rows stay zero.
Eigen::MatrixXd normalize_transitions(const Eigen::MatrixXd& a);

struct Segment {
  std::size_t component = 0;
  std::size_t steps = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Greedy walk from component 0 along the row argmax (ties to the lowest
// column). Each component dwells round(mu_S / dt) steps (at least one). The
// walk stops at an all-zero row or once the horizon is filled; the last
// segment is truncated to fit. Revisiting a component throws ValidationError.
std::vector<Segment> state_sequence(const SkillModel& m);

struct Trajectory {
  double dt = 0.05;
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> velocities;
  std::vector<std::size_t> states;

  std::size_t size() const noexcept { return positions.size(); }
};

// Tracks the stepwise component-mean reference (start position first, last
// component held to the horizon) with a 3-axis double integrator. The state
// cost is blockdiag(Sigma_k^-1, 0) during component k and the control cost
// is control_cost * I. Output has sample_count(m) samples.
Trajectory retrieve(const SkillModel& m);
Trajectory retrieve(const SkillModel& m, const Eigen::Vector3d& start);

// Retrieves a chain of skills; each skill after the first starts where the
// previous trajectory ended.
std::vector<Trajectory> retrieve_chain(std::span<const SkillModel> skills);

struct Demonstration {
  double dt = 0.05;
  std::vector<Eigen::Vector3d> positions;
};

// Uniform segmentation of a demonstration into k parts: per-part mean and
// diagonal covariance (plus min_variance), mu_S = part duration,
// sigma_S = 0.25 mu_S, left-to-right transitions A(i,i+1) = 0.8,
// A(i,i+2) = 0.2.
SkillModel fit_from_demo(const Demonstration& demo, std::size_t k, double min_variance = 1e-4);

}  // namespace tlsf
