#pragma once

#include <functional>

#include <Eigen/Dense>

namespace gdix {

using State = Eigen::VectorXd;
using Rhs = std::function<void(double r, const State& y, State& dy)>;

struct AdaptiveOptions {
  double atol = 1e-10;
  double rtol = 1e-10;
  double h_min = 1e-13;
  int max_steps = 200000;
};

// Dormand-Prince 5(4) with standard error control. Integrates from r0 to
// r1 (either direction) and returns y(r1). `h_hint`, when given, seeds the
// first step and receives the last accepted step size.
State integrate_dopri5(const Rhs& f, State y, double r0, double r1,
                       const AdaptiveOptions& opts = {}, double* h_hint = nullptr);

// One classical RK4 step for callers that need a fixed step.
template <class T, class F>
T rk4_step(const F& f, double r, const T& y, double h) {
  const T k1 = f(r, y);
  const T k2 = f(r + 0.5 * h, y + (0.5 * h) * k1);
  const T k3 = f(r + 0.5 * h, y + (0.5 * h) * k2);
  const T k4 = f(r + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace gdix
