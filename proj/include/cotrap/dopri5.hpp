#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta with FSAL and PI-free
// elementary step-size control. Generic over Eigen column vectors
// (real or complex); the observer sees every accepted step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cotrap {

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-12;
  double dt_max = 0.0;       // 0 = unbounded
  double dt_initial = 0.0;   // 0 = automatic
  std::size_t max_steps = 50'000'000;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

namespace detail {

template <class V>
double scaled_error(const V& err, const V& y0, const V& y1, const StepControl& c) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = c.atol + c.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    e = std::max(e, std::abs(err[i]) / sc);
  }
  return e;
}

}  // namespace detail

/**
 * Integrates y' = rhs(t, y) from t0 to t1 (t1 > t0) in place.
 * rhs(t, y, dydt) writes the derivative; obs(t, y, dydt) is called at t0
 * and after each accepted step.
 */
template <class V, class Rhs, class Obs>
IntegrationStats integrate_dopri5(Rhs&& rhs, V& y, double t0, double t1,
                                  const StepControl& ctl, Obs&& obs) {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  IntegrationStats st;
  if (!(t1 > t0)) {
    if (t1 == t0) return st;
    throw std::invalid_argument("integrate_dopri5: t1 < t0");
  }
  const double span = t1 - t0;
  V k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y, err = y;
  rhs(t0, y, k1);
  ++st.rhs_evals;
  obs(t0, y, k1);

  double h = ctl.dt_initial;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic, simplified.
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = ctl.atol + ctl.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::min(h, 1e-3 * span);
  }
  if (ctl.dt_max > 0.0) h = std::min(h, ctl.dt_max);
  h = std::min(h, span);

  double t = t0;
  while (t < t1) {
    if (st.accepted + st.rejected >= ctl.max_steps)
      throw IntegrationError("integrate_dopri5: step budget exhausted", t);
    bool last = false;
    if (t + h >= t1 || (t1 - (t + h)) < 1e-12 * span) {
      h = t1 - t;
      last = true;
    }
    ytmp = y + h * a21 * k1;
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double tnew = last ? t1 : t + h;
    rhs(tnew, ynew, k7);
    st.rhs_evals += 6;
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = detail::scaled_error(err, y, ynew, ctl);
    if (!std::isfinite(en)) throw IntegrationError("integrate_dopri5: non-finite state", t);

    if (en <= 1.0) {
      t = tnew;
      y = ynew;
      k1 = k7;
      ++st.accepted;
      obs(t, y, k1);
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++st.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      if (h < 1e-15 * span) throw IntegrationError("integrate_dopri5: step size underflow", t);
    }
    if (ctl.dt_max > 0.0) h = std::min(h, ctl.dt_max);
  }
  return st;
}

}  // namespace cotrap
