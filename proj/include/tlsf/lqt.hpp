#pragma once

// Finite-horizon discrete-time linear-quadratic tracking.

#include <Eigen/Dense>
#include <vector>

namespace tlsf {

struct LinearSystem {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x m
};

// Zero-order-hold double integrator per axis, state (p_1..p_d, v_1..v_d).
LinearSystem double_integrator(int axes, double dt);

struct TrackingProblem {
  LinearSystem system;
  std::vector<Eigen::MatrixXd> state_costs;  // Q_t, t = 0..T
  std::vector<Eigen::VectorXd> references;   // r_t, t = 0..T
  Eigen::MatrixXd control_cost;              // R
  Eigen::VectorXd initial_state;             // x_0
};

struct TrackingSolution {
  std::vector<Eigen::VectorXd> states;    // x_0..x_T
  std::vector<Eigen::VectorXd> controls;  // u_0..u_{T-1}
};

// Minimizes sum_{t=1..T} (x_t - r_t)' Q_t (x_t - r_t) + sum_{t=0..T-1} u_t' R u_t
// by a backward Riccati sweep and a forward rollout. Throws NumericalError
// if R + B' P B is not positive definite at some step.
TrackingSolution solve_tracking(const TrackingProblem& p);

}  // namespace tlsf
