#pragma once

// Signal Temporal Logic: formulas, signals and boolean satisfaction.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace tlsf {

enum class MarginKind {
  kLower,      // x - lb
  kUpper,      // ub - x
  kBand,       // (ub - lb)/2 - |x - (ub + lb)/2|
  kThreshold,  // c - |x|
};

// Atomic proposition f(x(t)) > 0 over one signal channel.
struct Predicate {
  std::string name;
  std::string channel;
  MarginKind kind = MarginKind::kLower;
  double lb = 0.0;
  double ub = 0.0;
  double limit = 0.0;  // c of the threshold form

  static Predicate lower(std::string name, std::string channel, double lb);
  static Predicate upper(std::string name, std::string channel, double ub);
  static Predicate band(std::string name, std::string channel, double lb, double ub);
  static Predicate threshold(std::string name, std::string channel, double c);

  double margin(double x) const noexcept;
  void validate() const;

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

using PredicateTable = std::map<std::string, Predicate>;

// Closed time interval [lo, hi] in seconds, relative to the evaluation time.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class Op { kPred, kNot, kAnd, kOr, kGlobally, kEventually, kUntil };

// STL abstract syntax tree. Temporal nodes without an interval range over
// the remaining signal horizon.
struct Formula {
  Op op = Op::kPred;
  Predicate pred;
  std::optional<Interval> interval;
  std::vector<Formula> children;

  static Formula atom(Predicate p);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> fs);
  static Formula disjunction(std::vector<Formula> fs);
  static Formula globally(std::optional<Interval> i, Formula f);
  static Formula eventually(std::optional<Interval> i, Formula f);
  static Formula until(Interval i, Formula lhs, Formula rhs);

  bool is_temporal() const noexcept {
    return op == Op::kGlobally || op == Op::kEventually || op == Op::kUntil;
  }

  // Structural checks: interval ordering, arity, predicate parameters.
  void validate() const;

  friend bool operator==(const Formula&, const Formula&) = default;
};

// Named sub-formulas (e.g. regions) that the parser expands in place.
using FormulaTable = std::map<std::string, Formula>;

Formula parse_stl(std::string_view text, const PredicateTable& predicates);
Formula parse_stl(std::string_view text, const PredicateTable& predicates,
                  const FormulaTable& aliases);

// Prints in the grammar accepted by parse_stl; parse(to_string(f)) == f.
std::string to_string(const Formula& f);

// Every predicate referenced by the formula, in first-visit order.
std::vector<Predicate> predicates_of(const Formula& f);

// Uniformly sampled multi-channel trace.
class Signal {
 public:
  Signal() = default;
  explicit Signal(double dt) : dt_(dt) {}

  void add_channel(std::string name, std::vector<double> values);

  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept;  // samples per channel
  std::size_t last_index() const { return size() - 1; }
  double duration() const noexcept { return dt_ * static_cast<double>(size() == 0 ? 0 : size() - 1); }

  bool has_channel(std::string_view name) const;
  const std::vector<double>& channel(std::string_view name) const;
  const std::vector<std::string>& channel_names() const noexcept { return order_; }

  // dt > 0, at least one sample, equal lengths, finite values.
  void validate() const;

  friend bool operator==(const Signal&, const Signal&) = default;

 private:
  double dt_ = 0.0;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<double>, std::less<>> channels_;
};

// Axis-aligned Cartesian box, meters.
struct RegionSpec {
  std::string name;
  double x_lb = 0, x_ub = 0;
  double y_lb = 0, y_ub = 0;
  double z_lb = 0, z_ub = 0;

  void validate() const;
  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

using ChannelTriple = std::tuple<std::string, std::string, std::string>;

// And of one band predicate per axis, named "<region>_x" etc.
Formula region_to_formula(const RegionSpec& r, const ChannelTriple& channels = {"x", "y", "z"});

// Inclusive range of sample indices.
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;
};

// [t+a, t+b] -> ceil((t+a)/dt) .. floor((t+b)/dt) clamped to [0, last].
// Unbounded intervals cover [t, last]. Empty -> nullopt.
std::optional<Window> discretize(const std::optional<Interval>& interval, std::size_t index,
                                 std::size_t last, double dt) noexcept;

// Sample index for time t (seconds); throws HorizonError if off-grid or outside.
std::size_t time_to_index(const Signal& s, double t);

// Exact boolean semantics; predicates hold when f > 0.
bool sat_bool(const Formula& f, const Signal& s, double t = 0.0);

}  // namespace tlsf
