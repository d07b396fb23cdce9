#include "qqr/simulate.hpp"

#include <cmath>

namespace qqr {

namespace {

struct ClosedLoop {
  const QuadraticSystem& sys;
  const PolyFeedbackLaw& law;

  // Returns the state derivative and writes the running-cost rate.
  Vector operator()(const Vector& x, double& cost_rate) const {
    const Vector u = law(x);
    cost_rate = x.dot(sys.Q2 * x) + u.dot(sys.R2 * u);
    return sys.A * x + sys.B * u + sys.N * lift(x, 2);
  }
};

}  // namespace

Trajectory integrate_closed_loop(const QuadraticSystem& sys, const PolyFeedbackLaw& law,
                                 const Vector& x0, double horizon, double dt) {
  sys.validate();
  if (x0.size() != sys.n() || law.base_dim() != sys.n() || law.input_dim() != sys.m()) {
    throw ContractViolation("integrate_closed_loop: dimension mismatch");
  }
  if (!(horizon > 0.0) || !(dt > 0.0)) {
    throw ContractViolation("integrate_closed_loop: T and dt must be positive");
  }
  const double ratio = horizon / dt;
  const long steps = std::lround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
    throw ContractViolation("integrate_closed_loop: T/dt must be an integer");
  }

  const ClosedLoop f{sys, law};
  const double limit = 1e6 * x0.norm();

  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.controls.reserve(static_cast<std::size_t>(steps) + 1);
  traj.cost_to_t.reserve(static_cast<std::size_t>(steps) + 1);

  Vector x = x0;
  double cost = 0.0;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  traj.controls.push_back(law(x));
  traj.cost_to_t.push_back(0.0);

  for (long k = 0; k < steps; ++k) {
    double c1, c2, c3, c4;
    const Vector k1 = f(x, c1);
    const Vector k2 = f(x + 0.5 * dt * k1, c2);
    const Vector k3 = f(x + 0.5 * dt * k2, c3);
    const Vector k4 = f(x + dt * k3, c4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    cost += (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);

    traj.times.push_back(static_cast<double>(k + 1) * dt);
    traj.states.push_back(x);
    traj.controls.push_back(law(x));
    traj.cost_to_t.push_back(cost);

    if (!x.allFinite() || !std::isfinite(cost) || x.norm() > limit) {
      traj.diverged = true;
      break;
    }
  }
  return traj;
}

ValueComparison compare_value(const PolyValueFunction& value, const Trajectory& traj) {
  ValueComparison cmp;
  const Vector& x0 = traj.states.front();
  cmp.v_poly = value(x0);
  if (traj.diverged) {
    cmp.valid = false;
    cmp.J_sim = traj.cost_to_t.back();
    cmp.gap = std::abs(cmp.J_sim - cmp.v_poly);
    return cmp;
  }
  const Index n = value.base_dim();
  const Eigen::Map<const Matrix> V2(value.coeff(2).values().data(), n, n);
  const Vector& xT = traj.states.back();
  cmp.J_sim = traj.cost_to_t.back();
  cmp.gap = std::abs(cmp.J_sim - cmp.v_poly);
  cmp.tail_estimate = xT.dot(V2 * xT);
  cmp.horizon_limited = cmp.tail_estimate > 1e-3 * cmp.J_sim;
  return cmp;
}

ValueComparison compare_value(const QuadraticSystem& sys, const PolyValueFunction& value,
                              const PolyFeedbackLaw& law, const Vector& x0, double horizon,
                              double dt) {
  return compare_value(value, integrate_closed_loop(sys, law, x0, horizon, dt));
}

}  // namespace qqr
