#include "isoflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "isoflow/rk45.hpp"

namespace isoflow::flow {

using catalog::FoliationModel;
using catalog::ModelKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ratio by which the squared distance may shrink per step near the endpoint;
// keeps the tail log-uniformly sampled for the fit and rate statistics.
constexpr double kTailShrink = 0.9;

double interval_scale(const FoliationModel& model, double theta0) {
  return std::isfinite(model.theta_max()) ? model.theta_max() : theta0;
}

struct SampleWriter {
  const FoliationModel& model;
  bool toward_upper;
  double theta0;
  double log_v0;
  FlowTrace& trace;

  void emit(double t, double rho) {
    FlowSample s;
    s.t = t;
    s.theta = toward_upper ? model.theta_max() - rho : rho;
    s.r = rho;
    // computed from rho so that r == r_sigma exactly once the flow commits
    s.r_sigma = std::isfinite(model.theta_max())
                    ? std::min(rho, model.theta_max() - rho)
                    : rho;
    s.trace_H = catalog::mean_curvature_trace(model, s.theta);
    s.sup_A = catalog::spectrum_at(model, s.theta).sup_norm();
    s.log_vol_rel = catalog::log_volume_density(model, s.theta) - log_v0;
    trace.samples.push_back(s);
  }
};

}  // namespace

void FlowOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
    throw std::invalid_argument("flow options: tolerances must be positive");
  if (theta_stop == 0.0 || std::isnan(theta_stop))
    throw std::invalid_argument("flow options: theta_stop must be positive (or < 0 for auto)");
  if (!(t_max > 0.0)) throw std::invalid_argument("flow options: t_max must be positive");
  if (sample_stride < 1)
    throw std::invalid_argument("flow options: sample_stride must be a positive integer");
  if (!(max_step > 0.0)) throw std::invalid_argument("flow options: max_step must be positive");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::ReachedSingularSet: return "reached_singular_set";
    case Termination::ReachedTMax: return "reached_t_max";
    case Termination::ConvergedToMinimal: return "converged_to_minimal";
  }
  return "unknown";
}

FlowTrace integrate(const FoliationModel& model, double theta0, const FlowOptions& opts) {
  opts.validate();
  model.require_interior(theta0);

  const double scale = interval_scale(model, theta0);
  const double stop = opts.theta_stop > 0.0 ? opts.theta_stop : 1e-6 * scale;
  const double theta_max = model.theta_max();
  if (!(stop > 0.0) || !(stop < theta0) ||
      (std::isfinite(theta_max) && !(stop < theta_max - theta0)))
    throw DomainError("theta_stop must be positive and strictly between theta0 and both endpoints");

  FlowTrace trace;
  trace.theta0 = theta0;
  trace.theta_stop = stop;

  const double f0 = catalog::mean_curvature_trace(model, theta0);
  if (std::abs(f0) < opts.abs_tol) {
    // Minimal leaf: the flow is stationary.
    trace.termination = Termination::ConvergedToMinimal;
    SampleWriter w{model, false, theta0, catalog::log_volume_density(model, theta0), trace};
    const double h = std::min(opts.t_max, 1.0) / 2.0;
    w.emit(0.0, theta0);
    w.emit(h, theta0);
    w.emit(2.0 * h, theta0);
    return trace;
  }

  const bool toward_upper = f0 > 0.0;
  if (toward_upper && !std::isfinite(theta_max))
    throw ConsistencyError("flow moving outward on an unbounded quotient interval");

  // rho = distance to the limit-side endpoint; u = rho^2 has a bounded
  // derivative through the blow-up.
  const auto g_of_rho = [&](double rho) -> double {
    const double theta = toward_upper ? theta_max - rho : rho;
    const double f = catalog::mean_curvature_trace(model, theta);
    return toward_upper ? -f : f;
  };
  // Trial stages of a rejected step may leave the quotient interval; report
  // NaN there so the step controller backs off instead of faulting.
  const auto rhs = [&](long double /*t*/, const numerics::State<1, long double>& y)
      -> numerics::State<1, long double> {
    const long double u = y[0];
    if (!(u > 0.0L)) return {std::numeric_limits<long double>::quiet_NaN()};
    const double rho = double(std::sqrt(u));
    const double theta = toward_upper ? theta_max - rho : rho;
    if (!(theta > 0.0) || (std::isfinite(theta_max) && !(theta < theta_max)))
      return {std::numeric_limits<long double>::quiet_NaN()};
    return {2.0L * (long double)rho * (long double)g_of_rho(rho)};
  };

  const double rho0 = toward_upper ? theta_max - theta0 : theta0;
  const long double u_stop = (long double)stop * (long double)stop;
  long double t = 0.0L;
  long double u = (long double)rho0 * (long double)rho0;

  // Per-step shrink bound on u.  Short runs (start close to the stopping
  // distance) and strided traces get a gentler factor so the recorded tail
  // still carries enough samples for the singular-time fit.
  double shrink = kTailShrink;
  const double span = double(u / u_stop);
  if (span > 1.0)
    shrink = std::min(0.999,
                      std::max(shrink, std::pow(span, -1.0 / (220.0 * opts.sample_stride))));

  SampleWriter w{model, toward_upper, theta0, catalog::log_volume_density(model, theta0), trace};
  w.emit(0.0, rho0);

  long double h = 0.01L * u / std::max(std::abs(rhs(t, {u})[0]), 1e-300L);
  h = std::min({h, (long double)opts.max_step, 1.0L});
  std::size_t accepted = 0;
  bool done = false;

  while (!done) {
    if (double(t) >= opts.t_max) {
      trace.termination = Termination::ReachedTMax;
      break;
    }
    // Geometric cap: do not let u shrink by more than the shrink factor per step.
    const long double du = std::abs(rhs(t, {u})[0]);
    if (du > 0.0L) h = std::min(h, (1.0L - (long double)shrink) * u / du);
    h = std::min({h, (long double)opts.max_step, (long double)opts.t_max - t});
    if (!(h > std::abs(t) * 1e-18L + 1e-300L))
      throw StepUnderflowError("flow integrator step underflow", double(t),
                               toward_upper ? theta_max - double(std::sqrt(u))
                                            : double(std::sqrt(u)));

    auto step = numerics::dopri5_step<1, long double>(rhs, t, {u}, h, opts.rel_tol, opts.abs_tol);
    if (step.err > 1.0) {
      h *= std::isfinite(step.err) ? (long double)numerics::next_step_factor(step.err) : 0.5L;
      continue;
    }

    if (step.y[0] <= u_stop) {
      // Land the final step on u_stop by false position on the step map.
      long double h_lo = 0.0L, h_hi = h;
      long double g_lo = u - u_stop, g_hi = step.y[0] - u_stop;
      long double h_land = h;
      auto landed = step;
      for (int it = 0; it < 80 && std::abs(g_hi) > 1e-6L * u_stop; ++it) {
        long double h_try = h_lo + (h_hi - h_lo) * g_lo / (g_lo - g_hi);
        if (!(h_try > h_lo) || !(h_try < h_hi)) h_try = 0.5L * (h_lo + h_hi);
        auto trial = numerics::dopri5_step<1, long double>(rhs, t, {u}, h_try, opts.rel_tol,
                                                           opts.abs_tol);
        const long double g_try = trial.y[0] - u_stop;
        if (g_try > 0.0L) {
          h_lo = h_try;
          g_lo = g_try;
        } else {
          h_hi = h_try;
          g_hi = g_try;
          h_land = h_try;
          landed = trial;
        }
      }
      t += h_land;
      u = landed.y[0];
      trace.termination = Termination::ReachedSingularSet;
      done = true;
    } else {
      t += h;
      u = step.y[0];
      h *= (long double)numerics::next_step_factor(step.err);
    }

    ++accepted;
    if (done || accepted % std::size_t(opts.sample_stride) == 0)
      w.emit(double(t), double(std::sqrt(std::max(u, 0.0L))));
  }

  if (trace.termination == Termination::ReachedTMax &&
      trace.samples.back().t < double(t))
    w.emit(double(t), double(std::sqrt(std::max(u, 0.0L))));
  return trace;
}

std::optional<double> closed_form_singular_time(const FoliationModel& model, double theta0) {
  model.require_interior(theta0);
  switch (model.kind()) {
    case ModelKind::ConcentricSpheres:
      return theta0 * theta0 / (2.0 * (model.n() - 1));
    case ModelKind::SphericalCylinders:
      return theta0 * theta0 / (2.0 * model.k());
    case ModelKind::IsoparametricSphere: {
      const int m = model.m0();
      if (model.g() == 1) {
        const double c = std::cos(theta0);
        if (c == 0.0) return std::nullopt;  // minimal leaf, no singularity
        return -std::log(std::abs(c)) / m;
      }
      if (model.g() == 2 && model.m0() == model.m1()) {
        const double c = std::cos(2.0 * theta0);
        if (c == 0.0) return std::nullopt;
        return -std::log(std::abs(c)) / (4.0 * m);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<double> closed_form(const FoliationModel& model, double theta0, double t) {
  model.require_interior(theta0);
  const auto T = closed_form_singular_time(model, theta0);
  switch (model.kind()) {
    case ModelKind::ConcentricSpheres:
    case ModelKind::SphericalCylinders: {
      if (T && t >= *T)
        throw SingularTimeError("closed form queried at t >= singular time", *T);
      const int d = model.kind() == ModelKind::ConcentricSpheres ? model.n() - 1 : model.k();
      return std::sqrt(theta0 * theta0 - 2.0 * d * t);
    }
    case ModelKind::IsoparametricSphere: {
      const int m = model.m0();
      if (model.g() == 1) {
        if (T && t >= *T)
          throw SingularTimeError("closed form queried at t >= singular time", *T);
        return std::acos(std::cos(theta0) * std::exp(m * t));
      }
      if (model.g() == 2 && model.m0() == model.m1()) {
        if (T && t >= *T)
          throw SingularTimeError("closed form queried at t >= singular time", *T);
        return 0.5 * std::acos(std::cos(2.0 * theta0) * std::exp(4.0 * m * t));
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

SingularTimeEstimate singular_time(const FlowTrace& trace) {
  if (trace.termination != Termination::ReachedSingularSet)
    throw InsufficientDataError("singular_time requires a trace that reached the singular set");
  const auto& s = trace.samples;
  const std::size_t n = s.size();
  const std::size_t window = std::max<std::size_t>(1, (n + 9) / 10);
  if (window < 20)
    throw InsufficientDataError("singular_time: fewer than 20 samples in the fit window");
  const std::size_t begin = n - window;

  long double t_mean = 0.0L, u_mean = 0.0L;
  for (std::size_t i = begin; i < n; ++i) {
    t_mean += s[i].t;
    u_mean += (long double)s[i].r * s[i].r;
  }
  t_mean /= window;
  u_mean /= window;

  long double stt = 0.0L, stu = 0.0L;
  for (std::size_t i = begin; i < n; ++i) {
    const long double dt = s[i].t - t_mean;
    const long double du = (long double)s[i].r * s[i].r - u_mean;
    stt += dt * dt;
    stu += dt * du;
  }
  if (!(stt > 0.0L)) throw InsufficientDataError("singular_time: degenerate fit window");
  const long double slope = stu / stt;
  if (!(slope < 0.0L))
    throw ConsistencyError("singular_time: r^2 is not decreasing over the fit window");

  long double ss_res = 0.0L;
  for (std::size_t i = begin; i < n; ++i) {
    const long double e =
        ((long double)s[i].r * s[i].r - u_mean) - slope * (s[i].t - t_mean);
    ss_res += e * e;
  }
  const long double sigma2 = window > 2 ? ss_res / (window - 2) : 0.0L;
  const long double var_mean = sigma2 / window;
  const long double var_slope = sigma2 / stt;

  const long double T = t_mean - u_mean / slope;
  // T = t_mean - u_mean/slope with independent (centered) estimates.
  const long double var_T = var_mean / (slope * slope) +
                            (u_mean * u_mean) / (slope * slope * slope * slope) * var_slope;
  SingularTimeEstimate out{double(T), 2.0 * double(std::sqrt(std::max(var_T, 0.0L)))};
  if (!(out.T > s.back().t))
    throw ConsistencyError("singular_time: estimate does not exceed the last sample time");
  return out;
}

void write_csv(std::ostream& os, const FlowTrace& trace) {
  os << "t,theta,r,r_sigma,trace_H,sup_A,log_vol_rel\n";
  char buf[512];
  for (const auto& s : trace.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.theta,
                  s.r, s.r_sigma, s.trace_H, s.sup_A, s.log_vol_rel);
    os << buf;
  }
}

}  // namespace isoflow::flow
