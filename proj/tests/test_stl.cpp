#include <doctest.h>

#include "support.hpp"
#include "tlsf/error.hpp"
#include "tlsf/io.hpp"
#include "tlsf/stl.hpp"

using namespace tlsf;

namespace {

PredicateTable ab_table() {
  PredicateTable t;
  t.emplace("A", Predicate::band("A", "x", 0.4, 0.6));
  t.emplace("B", Predicate::band("B", "x", 0.15, 0.35));
  t.emplace("hi", Predicate::lower("hi", "y", 1.0));
  return t;
}

Signal ramp(std::size_t n, double dt) {
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = 0.1 * static_cast<double>(i);
    y[i] = 2.0 - 0.1 * static_cast<double>(i);
  }
  Signal s(dt);
  s.add_channel("x", x);
  s.add_channel("y", y);
  return s;
}

// Random formulas all use the name "p"; give each leaf its own name.
void rename_predicates(Formula& f, PredicateTable& t, int& k) {
  if (f.op == Op::kPred) {
    f.pred.name = "p" + std::to_string(k++);
    t.emplace(f.pred.name, f.pred);
  }
  for (auto& c : f.children) rename_predicates(c, t, k);
}

}  // namespace

TEST_CASE("predicate margins") {
  CHECK(Predicate::lower("p", "x", 1.0).margin(1.5) == doctest::Approx(0.5));
  CHECK(Predicate::upper("p", "x", 1.0).margin(1.5) == doctest::Approx(-0.5));
  CHECK(Predicate::band("p", "x", 0.4, 0.6).margin(0.5) == doctest::Approx(0.1));
  CHECK(Predicate::band("p", "x", 0.4, 0.6).margin(0.7) == doctest::Approx(-0.1));
  CHECK(Predicate::threshold("p", "f", 2.0).margin(-3.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(Predicate::band("p", "x", 0.6, 0.4).validate(), ValidationError);
  CHECK_THROWS_AS(Predicate::threshold("p", "f", -1.0).validate(), ValidationError);
}

TEST_CASE("parser builds the expected tree") {
  const auto t = ab_table();
  const Formula f = parse_stl("F[2,4](A) and G[2,8](not B)", t);
  REQUIRE(f.op == Op::kAnd);
  REQUIRE(f.children.size() == 2);
  CHECK(f.children[0].op == Op::kEventually);
  CHECK(f.children[0].interval == Interval{2, 4});
  CHECK(f.children[1].op == Op::kGlobally);
  CHECK(f.children[1].children[0].op == Op::kNot);
  CHECK(f.children[1].children[0].children[0].pred.name == "B");

  const Formula u = parse_stl("U[0,3](A, hi or B)", t);
  CHECK(u.op == Op::kUntil);
  CHECK(u.children[1].op == Op::kOr);

  // and binds tighter than or
  const Formula p = parse_stl("A or B and hi", t);
  REQUIRE(p.op == Op::kOr);
  CHECK(p.children[1].op == Op::kAnd);
}

TEST_CASE("parser errors carry positions") {
  const auto t = ab_table();
  CHECK_THROWS_AS(parse_stl("F A", t), ParseError);
  CHECK_THROWS_AS(parse_stl("F[2,4](A", t), ParseError);
  CHECK_THROWS_AS(parse_stl("A and", t), ParseError);
  CHECK_THROWS_AS(parse_stl("A B", t), ParseError);
  CHECK_THROWS_AS(parse_stl("nope", t), ValidationError);
  CHECK_THROWS_AS(parse_stl("F[4,2](A)", t), ValidationError);
  try {
    parse_stl("A and\n  F[1,2](", t);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("region aliases expand to three bands") {
  RegionSpec r{"L1", 0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  FormulaTable aliases{{"L1", region_to_formula(r)}};
  const Formula f = parse_stl("F(L1)", {}, aliases);
  REQUIRE(f.children[0].op == Op::kAnd);
  CHECK(f.children[0].children.size() == 3);
  CHECK(f.children[0].children[1].pred.name == "L1_y");
  CHECK(f.children[0].children[2].pred.lb == doctest::Approx(0.4));
}

TEST_CASE("print/parse round trip on random formulas") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    Formula f = testing::random_formula(rng, 4, 0.5);
    PredicateTable t;
    int k = 0;
    rename_predicates(f, t, k);
    CHECK(parse_stl(to_string(f), t) == f);
  }
  const auto t = ab_table();
  for (const char* s : {"F[2,4](A) and G[2,8](not B)", "not (A or B)", "G(F[0,1](A) or U[0.5,2](B, hi))"}) {
    const Formula f = parse_stl(s, t);
    CHECK(parse_stl(to_string(f), t) == f);
  }
}

TEST_CASE("discretize maps intervals to sample windows") {
  const auto w = discretize(Interval{2, 4}, 0, 85, 0.1);
  REQUIRE(w);
  CHECK(w->first == 20);
  CHECK(w->last == 40);
  const auto c = discretize(Interval{2, 40}, 10, 85, 0.1);
  REQUIRE(c);
  CHECK(c->first == 30);
  CHECK(c->last == 85);
  CHECK_FALSE(discretize(Interval{9, 10}, 0, 85, 0.1));
  const auto open = discretize(std::nullopt, 5, 85, 0.1);
  CHECK(open->first == 5);
  CHECK(open->last == 85);
  // interior point between samples
  const auto mid = discretize(Interval{0.05, 0.15}, 0, 10, 0.1);
  CHECK(mid->first == 1);
  CHECK(mid->last == 1);
}

TEST_CASE("time_to_index") {
  const Signal s = ramp(11, 0.1);
  CHECK(time_to_index(s, 0.3) == 3);
  CHECK_THROWS_AS(time_to_index(s, 0.35), HorizonError);
  CHECK_THROWS_AS(time_to_index(s, 2.0), HorizonError);
}

TEST_CASE("boolean semantics on the two bundled signals") {
  const StlSpec spec = load_stl_spec(testing::kDataDir / "two_predicates.json");
  const Formula f = spec.formula();
  CHECK(sat_bool(f, read_signal_csv(testing::kDataDir / "S1.csv")));
  CHECK_FALSE(sat_bool(f, read_signal_csv(testing::kDataDir / "S2.csv")));
}

TEST_CASE("boolean operators by hand") {
  const auto t = ab_table();
  const Signal s = ramp(21, 0.5);  // x = 0.1 i, y = 2 - 0.1 i
  CHECK(sat_bool(parse_stl("F(A)", t), s));
  CHECK_FALSE(sat_bool(parse_stl("G(A)", t), s));
  CHECK(sat_bool(parse_stl("G[0,4](hi)", t), s));       // y > 1 for i < 10
  CHECK_FALSE(sat_bool(parse_stl("G[0,5](hi)", t), s));  // i = 10 gives y = 1
  CHECK(sat_bool(parse_stl("U[0,10](hi, A)", t), s));   // A at i = 5, hi holds before
  CHECK(sat_bool(parse_stl("F[2,2](A)", t), s, 0.5));   // index 5
  CHECK_FALSE(sat_bool(parse_stl("A", t), s));
}

TEST_CASE("signal validation") {
  Signal s(0.1);
  s.add_channel("x", {1, 2, 3});
  CHECK_THROWS_AS(s.add_channel("x", {1, 2, 3}), ValidationError);
  s.add_channel("y", {1, 2});
  CHECK_THROWS_AS(s.validate(), ValidationError);
  Signal bad(0.1);
  bad.add_channel("x", {1, std::nan(""), 3});
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  CHECK_THROWS_AS(Signal(0.0).validate(), ValidationError);
}
