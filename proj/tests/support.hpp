#pragma once

// Random formulas and signals for the property tests.

#include <filesystem>
#include <random>
#include <string>

#include "tlsf/stl.hpp"

namespace tlsf::testing {

inline const std::filesystem::path kDataDir = TLSF_DATA_DIR;

// Two channels a, b with values in [-1, 1], `n` samples at dt.
inline Signal random_signal(std::mt19937_64& rng, std::size_t n, double dt) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Signal s(dt);
  for (const char* ch : {"a", "b"}) {
    std::vector<double> v(n);
    // random walk keeps neighbouring samples correlated
    double x = u(rng);
    for (auto& e : v) {
      x = std::clamp(x + 0.3 * u(rng), -1.0, 1.0);
      e = x;
    }
    s.add_channel(ch, std::move(v));
  }
  return s;
}

inline Predicate random_predicate(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  std::uniform_int_distribution<int> kind(0, 3);
  const std::string ch = (rng() & 1) ? "a" : "b";
  const double c = u(rng);
  switch (kind(rng)) {
    case 0: return Predicate::lower("p", ch, c);
    case 1: return Predicate::upper("p", ch, c);
    case 2: return Predicate::band("p", ch, c - 0.3, c + 0.3);
    default: return Predicate::threshold("p", ch, std::abs(c) + 0.1);
  }
}

// Whole multiples of dt, at most 8 steps long, so nested windows stay inside
// a signal of more than 8 * depth samples. Unbounded operators are left out:
// nested under another operator they can run off the end of the signal.
inline std::optional<Interval> random_interval(std::mt19937_64& rng, double dt) {
  std::uniform_int_distribution<int> lo(0, 4), len(0, 4);
  const int a = lo(rng);
  const int b = a + len(rng);
  return Interval{a * dt, b * dt};
}

inline Formula random_formula(std::mt19937_64& rng, int depth, double dt) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 6);
  switch (pick(rng)) {
    case 0: return Formula::atom(random_predicate(rng));
    case 1: return Formula::negation(random_formula(rng, depth - 1, dt));
    case 2:
      return Formula::conjunction({random_formula(rng, depth - 1, dt), random_formula(rng, depth - 1, dt)});
    case 3:
      return Formula::disjunction({random_formula(rng, depth - 1, dt), random_formula(rng, depth - 1, dt)});
    case 4: return Formula::globally(random_interval(rng, dt), random_formula(rng, depth - 1, dt));
    case 5: return Formula::eventually(random_interval(rng, dt), random_formula(rng, depth - 1, dt));
    default:
      return Formula::until(*random_interval(rng, dt), random_formula(rng, depth - 1, dt),
                            random_formula(rng, depth - 1, dt));
  }
}

}  // namespace tlsf::testing
