#include <doctest.h>

#include <random>

#include "tlsf/error.hpp"
#include "tlsf/gp.hpp"

using namespace tlsf;

namespace {

Eigen::MatrixXd five_points() {
  Eigen::MatrixXd x(5, 2);
  x << 0.1, 0.2, 0.4, 0.9, 0.7, 0.3, 0.2, 0.6, 0.9, 0.8;
  return x;
}

Eigen::VectorXd five_values() {
  Eigen::VectorXd y(5);
  y << 1.0, -0.5, 0.3, 2.0, 0.0;
  return y;
}

}  // namespace

TEST_CASE("posterior against a direct matrix-inverse computation") {
  // numbers from an explicit K^-1 evaluation on population-standardized y
  const GpModel g = gp_fit_fixed(five_points(), five_values(), {0.4, 1.0, 1e-4});
  const std::vector<double> q{0.5, 0.5};
  const GpPrediction p = g.predict(q);
  CHECK(p.mean == doctest::Approx(0.8926904849759166).epsilon(1e-10));
  CHECK(p.variance == doctest::Approx(0.09740243168540796).epsilon(1e-8));
  CHECK(g.log_marginal_likelihood() == doctest::Approx(-12.292252807752732).epsilon(1e-10));
  CHECK(g.jitter() == 0.0);
  CHECK(g.output_mean() == doctest::Approx(0.56));
}

TEST_CASE("noise-free posterior interpolates the data") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(12, 3);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) {
    for (int d = 0; d < 3; ++d) x(i, d) = u(rng);
    y[i] = std::sin(4 * x(i, 0)) + x(i, 1) * x(i, 2);
  }
  const GpModel g = gp_fit_fixed(x, y, {0.3, 1.0, 1e-10});
  for (int i = 0; i < 12; ++i) {
    const std::vector<double> xi{x(i, 0), x(i, 1), x(i, 2)};
    const GpPrediction p = g.predict(xi);
    CHECK(std::abs(p.mean - y[i]) <= 1e-6);
    CHECK(p.variance <= 1e-6);
  }
}

TEST_CASE("grid search keeps the largest marginal likelihood") {
  const GpGrid grid;
  const GpModel best = gp_fit(five_points(), five_values(), grid);
  for (double ell : grid.length_scales) {
    for (double noise : grid.noise_variances) {
      const GpModel m = gp_fit_fixed(five_points(), five_values(), {ell, 1.0, noise});
      CHECK(m.log_marginal_likelihood() <= best.log_marginal_likelihood());
    }
  }
}

TEST_CASE("duplicate inputs fall back on jitter") {
  Eigen::MatrixXd x(3, 1);
  x << 0.5, 0.5, 0.5;
  Eigen::VectorXd y(3);
  y << 1.0, 1.0, 1.0;
  // identical rows make K singular; tiny noise alone is not enough
  const GpModel g = gp_fit_fixed(x, y, {0.2, 1.0, 1e-10});
  CHECK(g.jitter() >= 0.0);
  const std::vector<double> q{0.5};
  CHECK(g.predict(q).mean == doctest::Approx(1.0));
}

TEST_CASE("far from data the posterior reverts to the prior") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 0.05;
  Eigen::VectorXd y(2);
  y << 1.0, 3.0;
  const GpModel g = gp_fit_fixed(x, y, {0.05, 1.0, 1e-6});
  const std::vector<double> far{1.0};
  const GpPrediction p = g.predict(far);
  CHECK(p.mean == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(p.variance == doctest::Approx(1.0).epsilon(1e-6));  // scale 1, unit prior
}

TEST_CASE("input checks") {
  Eigen::MatrixXd x(2, 1);
  x << 0.2, 1.5;
  Eigen::VectorXd y(2);
  y << 0, 1;
  CHECK_THROWS_AS(gp_fit_fixed(x, y, {}), ValidationError);
  x(1, 0) = 0.3;
  CHECK_THROWS_AS(gp_fit_fixed(x, y, {0.0, 1.0, 1e-6}), ValidationError);
  Eigen::VectorXd short_y(1);
  short_y << 0;
  CHECK_THROWS_AS(gp_fit_fixed(x, short_y, {}), ValidationError);
  const GpModel g = gp_fit_fixed(x, y, {});
  const std::vector<double> wrong{0.1, 0.2};
  CHECK_THROWS_AS(g.predict(wrong), ValidationError);
}
