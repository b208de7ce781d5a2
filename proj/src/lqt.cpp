#include "tlsf/lqt.hpp"

#include "tlsf/error.hpp"

namespace tlsf {

LinearSystem double_integrator(int axes, double dt) {
  const int n = 2 * axes;
  LinearSystem sys{Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Zero(n, axes)};
  for (int a = 0; a < axes; ++a) {
    sys.A(a, axes + a) = dt;
    sys.B(a, a) = 0.5 * dt * dt;
    sys.B(axes + a, a) = dt;
  }
  return sys;
}

TrackingSolution solve_tracking(const TrackingProblem& p) {
  const auto& A = p.system.A;
  const auto& B = p.system.B;
  if (p.references.empty() || p.state_costs.size() != p.references.size()) {
    throw ValidationError("tracking problem needs one state cost per reference sample");
  }
  const std::size_t horizon = p.references.size() - 1;

  // Value function V_t(x) = x' P_t x + 2 s_t' x + const.
  std::vector<Eigen::MatrixXd> gains(horizon);
  std::vector<Eigen::VectorXd> offsets(horizon);
  Eigen::MatrixXd P = p.state_costs[horizon];
  Eigen::VectorXd s = -p.state_costs[horizon] * p.references[horizon];

  for (std::size_t k = horizon; k-- > 0;) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd H = p.control_cost + BtP * B;
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) throw NumericalError("tracking: R + B'PB is not positive definite");
    gains[k] = llt.solve(BtP * A);
    offsets[k] = llt.solve(B.transpose() * s);

    const Eigen::MatrixXd AtPB = A.transpose() * BtP.transpose();
    Eigen::MatrixXd P_next = p.state_costs[k] + A.transpose() * P * A - AtPB * gains[k];
    s = -p.state_costs[k] * p.references[k] + A.transpose() * s - AtPB * offsets[k];
    P = 0.5 * (P_next + P_next.transpose());
  }

  TrackingSolution sol;
  sol.states.reserve(horizon + 1);
  sol.controls.reserve(horizon);
  Eigen::VectorXd x = p.initial_state;
  sol.states.push_back(x);
  for (std::size_t k = 0; k < horizon; ++k) {
    Eigen::VectorXd u = -gains[k] * x - offsets[k];
    x = A * x + B * u;
    sol.controls.push_back(std::move(u));
    sol.states.push_back(x);
  }
  return sol;
}

}  // namespace tlsf
