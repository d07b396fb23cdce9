#pragma once

#include <vector>

#include "qqr/albrekht.hpp"

namespace qqr {

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> controls;
  std::vector<double> cost_to_t;  // int_0^t x'Q2 x + u'R2 u
  bool diverged = false;
};

/// Fixed-step classical RK4 on xdot = A x + B K(x) + N (x kron x).
///
/// The running cost is integrated as an extra state, so on each step it
/// reduces to Simpson's rule over the stage values. Integration stops early
/// (diverged = true) once ||x|| exceeds 1e6 ||x0||.
Trajectory integrate_closed_loop(const QuadraticSystem& sys, const PolyFeedbackLaw& law,
                                 const Vector& x0, double horizon, double dt);

struct ValueComparison {
  double J_sim = 0.0;           // realized cost on [0, T]
  double v_poly = 0.0;          // polynomial value at x0
  double gap = 0.0;             // |J_sim - v_poly|
  double tail_estimate = 0.0;   // x(T)' V2 x(T)
  bool horizon_limited = false; // tail_estimate > 1e-3 J_sim
  bool valid = true;            // false when the trajectory diverged
};

ValueComparison compare_value(const QuadraticSystem& sys, const PolyValueFunction& value,
                              const PolyFeedbackLaw& law, const Vector& x0, double horizon,
                              double dt);

/// Same, reusing an already integrated trajectory.
ValueComparison compare_value(const PolyValueFunction& value, const Trajectory& traj);

}  // namespace qqr
