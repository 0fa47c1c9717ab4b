#include "gdix/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gdix/errors.hpp"

namespace gdix {

namespace {

// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b* (difference between 5th and 4th order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

State integrate_dopri5(const Rhs& f, State y, double r0, double r1, const AdaptiveOptions& opts,
                       double* h_hint) {
  const double span = r1 - r0;
  if (span == 0.0) return y;
  const double dir = span > 0 ? 1.0 : -1.0;
  const Eigen::Index n = y.size();

  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  f(r0, y, k1);

  double h = std::abs(span);
  if (h_hint != nullptr && *h_hint > 0) h = std::min(h, *h_hint);

  double r = r0;
  int steps = 0;
  while (dir * (r1 - r) > 0) {
    if (++steps > opts.max_steps) {
      std::ostringstream msg;
      msg << "step budget exhausted at r = " << r;
      throw Error(ErrorKind::Step, msg.str());
    }
    const double remaining = std::abs(r1 - r);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double hs = dir * h;

    ytmp = y + hs * (a21 * k1);
    f(r + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    f(r + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    f(r + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(r + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(r + hs, ytmp, k6);
    ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(r + hs, ynew, k7);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double q = err[i] / sc;
      norm += q * q;
    }
    norm = std::sqrt(norm / static_cast<double>(n));
    if (!std::isfinite(norm)) norm = 1e10;

    if (norm <= 1.0) {
      r = last ? r1 : r + hs;
      y = ynew;
      k1 = k7;
      const double fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      if (h_hint != nullptr) *h_hint = h;
      h *= fac;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
      if (h < opts.h_min) {
        std::ostringstream msg;
        msg << "step size underflow at r = " << r;
        throw Error(ErrorKind::Step, msg.str());
      }
    }
  }
  return y;
}

}  // namespace gdix
