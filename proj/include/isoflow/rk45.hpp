#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "isoflow/common.hpp"

// Embedded Dormand-Prince 5(4) stepper on small fixed-size states.  The
// propagated solution is the 5th-order one; the 4th-order companion supplies
// the error estimate.

namespace isoflow::numerics {

template <std::size_t N, typename Real = double>
using State = std::array<Real, N>;

template <std::size_t N, typename Real = double>
struct StepResult {
  State<N, Real> y;     // 5th-order solution at t + h
  State<N, Real> dydt;  // derivative at the step start (stage 1)
  double err = 0.0;     // scaled error estimate; accept when err <= 1
};

/// One trial step t -> t + h.  f(t, y) -> State.  Non-finite stage values are
/// reported as err = +inf so the caller can shrink the step.
template <std::size_t N, typename Real = double, typename F>
StepResult<N, Real> dopri5_step(F&& f, Real t, const State<N, Real>& y, Real h,
                                double rel_tol, double abs_tol) {
  using S = State<N, Real>;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                   e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                   e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  const auto axpy = [](const S& base, std::initializer_list<std::pair<double, const S*>> terms,
                       Real h) {
    S out = base;
    for (std::size_t i = 0; i < N; ++i) {
      Real acc = 0;
      for (const auto& [c, k] : terms) acc += Real(c) * (*k)[i];
      out[i] += h * acc;
    }
    return out;
  };

  StepResult<N, Real> r;
  const S k1 = f(t, y);
  r.dydt = k1;
  const S k2 = f(t + c2 * h, axpy(y, {{a21, &k1}}, h));
  const S k3 = f(t + c3 * h, axpy(y, {{a31, &k1}, {a32, &k2}}, h));
  const S k4 = f(t + c4 * h, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, h));
  const S k5 = f(t + c5 * h, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, h));
  const S k6 =
      f(t + h, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, h));
  r.y = axpy(y, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}}, h);
  const S k7 = f(t + h, r.y);

  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double diff =
        double(h) * (e1 * double(k1[i]) + e3 * double(k3[i]) + e4 * double(k4[i]) +
                     e5 * double(k5[i]) + e6 * double(k6[i]) + e7 * double(k7[i]));
    const double scale =
        abs_tol + rel_tol * std::max(std::abs(double(y[i])), std::abs(double(r.y[i])));
    const double e = std::abs(diff) / scale;
    if (!std::isfinite(e) || !std::isfinite(double(r.y[i])))
      err = std::numeric_limits<double>::infinity();
    else
      err = std::max(err, e);
  }
  r.err = err;
  return r;
}

inline double next_step_factor(double err) {
  if (err <= 0.0) return 5.0;
  const double f = 0.9 * std::pow(err, -0.2);
  return std::min(5.0, std::max(0.2, f));
}

/// Adaptive integration from t0 to t1 (t1 > t0).  The observer is called with
/// (t, y, dydt) after the initial point and every accepted step.
template <std::size_t N, typename F, typename Obs>
State<N> integrate_adaptive(F&& f, double t0, State<N> y0, double t1, double rel_tol,
                            double abs_tol, double max_step, Obs&& observer) {
  double t = t0;
  State<N> y = y0;
  observer(t, y, f(t, y));
  double h = std::min(max_step, (t1 - t0) / 16.0);
  while (t < t1) {
    h = std::min({h, max_step, t1 - t});
    if (!(t + h > t)) throw StepUnderflowError("adaptive step size underflow", t, y[0]);
    const auto step = dopri5_step<N>(f, t, y, h, rel_tol, abs_tol);
    if (step.err > 1.0) {
      h *= std::isfinite(step.err) ? next_step_factor(step.err) : 0.5;
      continue;
    }
    t += h;
    y = step.y;
    observer(t, y, f(t, y));
    h *= next_step_factor(step.err);
  }
  return y;
}

}  // namespace isoflow::numerics
