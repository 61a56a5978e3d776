#include "isoflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace isoflow::diagnostics {

using catalog::AmbientKind;
using catalog::FoliationModel;
using catalog::SingularEndpoint;
using flow::FlowTrace;
using flow::Termination;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cert_theta_stop(const FoliationModel& model, double requested) {
  if (requested > 0.0) return requested;
  const double scale = std::isfinite(model.theta_max()) ? model.theta_max() : 1.0;
  return 1e-6 * scale;
}

/// Radial trace seen from the given endpoint: the trace of the shape operator
/// with respect to the unit normal pointing away from that endpoint, as a
/// function of the distance rho to it.
double endpoint_trace(const FoliationModel& model, const SingularEndpoint& ep, double rho) {
  if (ep.coordinate == 0.0) return catalog::mean_curvature_trace(model, rho);
  return -catalog::mean_curvature_trace(model, model.theta_max() - rho);
}

struct FitOutcome {
  bool feasible = false;
  double delta = 0.0;
  double c = 0.0;
};

FitOutcome try_fit(const FoliationModel& model, const SingularEndpoint& ep, double epsilon,
                   double stop) {
  constexpr int kGrid = 1000;
  const int D = ep.dimension_drop;
  std::vector<double> trace_vals(kGrid), rho_vals(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    const double rho = stop + (epsilon - stop) * i / (kGrid - 1);
    rho_vals[i] = rho;
    trace_vals[i] = endpoint_trace(model, ep, rho);
  }
  for (int di = 0; di < 1000; ++di) {
    const double delta = di * 0.001;
    double need = 0.0;
    for (int i = 0; i < kGrid; ++i) {
      const double rho = rho_vals[i], tr = trace_vals[i];
      need = std::max(need, tr + (1.0 - delta) * D / rho);   // upper side
      need = std::max(need, -tr - (1.0 + delta) * D / rho);  // lower side
    }
    if ((1.0 - delta) * D - need * epsilon > 0.0) return {true, delta, need};
  }
  return {};
}

}  // namespace

BoundCertificate fit_bound_certificate(const FoliationModel& model,
                                       const SingularEndpoint& endpoint, double epsilon,
                                       double theta_stop) {
  const double stop = cert_theta_stop(model, theta_stop);
  const double limit = std::isfinite(model.theta_max()) ? model.theta_max() : kInf;
  if (!(epsilon > stop) || !(epsilon < limit))
    throw DomainError("certificate radius must satisfy theta_stop < epsilon < theta_max");
  if (endpoint.coordinate != 0.0 && endpoint.coordinate != model.theta_max())
    throw DomainError("endpoint does not belong to the model");

  const FitOutcome fit = try_fit(model, endpoint, epsilon, stop);
  if (!fit.feasible) {
    // Locate the largest feasible radius for the error payload.
    double lo = stop * 2.0, hi = epsilon;
    if (!try_fit(model, endpoint, lo, stop).feasible) {
      throw CertificateInfeasibleError("no feasible certificate even at epsilon ~ theta_stop",
                                       0.0);
    }
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (try_fit(model, endpoint, mid, stop).feasible)
        lo = mid;
      else
        hi = mid;
    }
    throw CertificateInfeasibleError(
        "certificate infeasible at requested epsilon; largest feasible radius is " +
            std::to_string(lo),
        lo);
  }

  BoundCertificate cert;
  cert.epsilon = epsilon;
  cert.delta = fit.delta;
  cert.c = fit.c;
  cert.C1 = std::sqrt(2.0 * ((1.0 - fit.delta) * endpoint.dimension_drop - fit.c * epsilon));
  cert.C2 = std::sqrt(2.0 * ((1.0 + fit.delta) * endpoint.dimension_drop + fit.c * epsilon));
  cert.endpoint = endpoint;
  return cert;
}

Type1Result type1_statistic(const FlowTrace& trace, double T) {
  if (trace.termination != Termination::ReachedSingularSet)
    throw InsufficientDataError("type1_statistic requires a singular trace");
  const auto& s = trace.samples;
  if (!(T > s.back().t))
    throw ConsistencyError("type1_statistic: T does not exceed the last sample time");

  const double s0 = T - s.front().t;
  const double tail_hi = 0.1 * s0;

  Type1Result out{0.0, 0.0};
  std::vector<std::pair<double, double>> tail;  // (T - t, sup_A^2 (T - t))
  for (const auto& smp : s) {
    const double rem = T - smp.t;
    if (rem <= tail_hi) {
      const double y = smp.sup_A * smp.sup_A * rem;
      out.stat = std::max(out.stat, y);
      tail.push_back({rem, y});
    }
  }
  if (tail.size() < 3)
    throw InsufficientDataError("type1_statistic: too few samples in the tail");

  // Linear extrapolation in rem = T - t from two mesh levels.  Levels are
  // chosen away from the very last samples, where T - t is dominated by the
  // uncertainty of T itself.
  const double rem_last = tail.back().first;
  const double target1 = std::max(4.0 * rem_last, 1e-4 * s0);
  const auto nearest = [&](double target) {
    std::size_t best = 0;
    double bd = kInf;
    for (std::size_t i = 0; i < tail.size(); ++i) {
      const double d = std::abs(std::log(tail[i].first / target));
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  };
  const std::size_t i1 = nearest(target1);
  std::size_t i2 = nearest(2.0 * target1);
  if (i2 == i1) i2 = i1 > 0 ? i1 - 1 : i1 + 1;
  if (i2 >= tail.size())
    throw InsufficientDataError("type1_statistic: tail too short for extrapolation");
  const auto [s1, y1] = tail[i1];
  const auto [s2, y2] = tail[i2];
  out.limit = (s2 * y1 - s1 * y2) / (s2 - s1);
  return out;
}

RateWindow rate_window(const FlowTrace& trace, double T, const BoundCertificate& cert) {
  if (trace.termination != Termination::ReachedSingularSet)
    throw InsufficientDataError("rate_window requires a singular trace");
  if (!(T > trace.samples.back().t))
    throw ConsistencyError("rate_window: T does not exceed the last sample time");
  const double s0 = T - trace.samples.front().t;
  RateWindow out{kInf, 0.0, false};
  // T itself is only known to a few ulps; deep-tail samples see that as a
  // relative error in T - t, which the bound comparison must tolerate.
  const double t_noise = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(T);
  bool within = true;
  std::size_t used = 0;
  for (const auto& smp : trace.samples) {
    const double rem = T - smp.t;
    if (rem <= 0.1 * s0 && smp.r <= cert.epsilon) {
      const double ratio = smp.r / std::sqrt(rem);
      out.C_low = std::min(out.C_low, ratio);
      out.C_high = std::max(out.C_high, ratio);
      const double tol = std::min(0.5, t_noise / rem);
      if (smp.r / std::sqrt(rem * (1.0 - tol)) < cert.C1) within = false;
      if (smp.r / std::sqrt(rem * (1.0 + tol)) > cert.C2) within = false;
      ++used;
    }
  }
  if (used == 0) throw InsufficientDataError("rate_window: no tail samples inside the tube");
  out.within_bounds = within;
  return out;
}

SingularEndpoint limit_leaf(const FoliationModel& model, const FlowTrace& trace) {
  if (trace.termination != Termination::ReachedSingularSet)
    throw InsufficientDataError("limit_leaf requires a singular trace");
  const auto& s = trace.samples;
  const double theta_last = s.back().theta;
  const double scale = std::isfinite(model.theta_max()) ? model.theta_max() : trace.theta0;

  SingularEndpoint ep;
  if (theta_last <= 2.0 * trace.theta_stop) {
    ep = model.lower_endpoint();
  } else if (std::isfinite(model.theta_max()) &&
             model.theta_max() - theta_last <= 2.0 * trace.theta_stop) {
    ep = *model.upper_endpoint();
  } else {
    throw ConsistencyError("limit_leaf: trace did not approach a singular endpoint");
  }
  (void)scale;

  // Once committed to one endpoint the limit leaf is also the nearest stratum.
  const double s0 = s.back().t - s.front().t;
  for (const auto& smp : s)
    if (smp.t >= s.back().t - 0.1 * s0 && smp.r != smp.r_sigma)
      throw ConsistencyError("limit_leaf: tail distance to limit leaf differs from strata distance");
  return ep;
}

double gradient_flow_check(const FoliationModel& model, const FlowTrace& trace) {
  const auto& s = trace.samples;
  if (s.size() < 3) throw InsufficientDataError("gradient_flow_check needs at least 3 samples");
  double worst = 0.0;
  const double eps3 = std::cbrt(std::numeric_limits<double>::epsilon());
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const double hp = s[i + 1].t - s[i].t;
    const double hm = s[i].t - s[i - 1].t;
    // A degenerate landing step makes the stencil ill-conditioned; skip it.
    if (std::min(hp, hm) < 1e-9 * std::max(1.0, s.back().t)) continue;
    // Second-order derivative on a non-uniform stencil.
    const double dlv = (hm / (hp * (hp + hm))) * s[i + 1].log_vol_rel +
                       ((hp - hm) / (hp * hm)) * s[i].log_vol_rel -
                       (hp / (hm * (hp + hm))) * s[i - 1].log_vol_rel;
    worst = std::max(worst, std::abs(dlv + s[i].trace_H * s[i].trace_H));

    const double theta = s[i].theta;
    const double room = std::isfinite(model.theta_max())
                            ? std::min(theta, model.theta_max() - theta)
                            : theta;
    const double d = eps3 * room;
    const double dlv_theta = (catalog::log_volume_density(model, theta + d) -
                              catalog::log_volume_density(model, theta - d)) /
                             (2.0 * d);
    worst = std::max(worst, std::abs(s[i].trace_H + dlv_theta));
  }
  return worst;
}

SweepResult finite_time_sweep(const FoliationModel& model, int grid_size,
                              const flow::FlowOptions& opts, int threads) {
  if (model.ambient().kind != AmbientKind::UnitSphere)
    throw NotApplicableError("finite_time_sweep requires a sphere-ambient model");
  if (grid_size < 1) throw std::invalid_argument("finite_time_sweep: grid_size must be >= 1");

  const double theta_max = model.theta_max();
  const double theta_star = *catalog::minimal_leaf_theta(model);
  std::vector<double> starts;
  for (int i = 1; i <= grid_size; ++i) {
    const double th = theta_max * i / (grid_size + 1);
    if (std::abs(th - theta_star) < 1e-9 * theta_max) continue;  // exclude the minimal leaf
    if (std::abs(catalog::mean_curvature_trace(model, th)) < opts.abs_tol) continue;
    starts.push_back(th);
  }

  int n_workers = threads;
  if (n_workers <= 0) {
    n_workers = int(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ISOFLOW_THREADS")) {
      const int cap = std::atoi(env);
      if (cap > 0) n_workers = std::min(n_workers, cap);
    }
  }
  n_workers = std::max(1, std::min<int>(n_workers, int(starts.size())));

  std::vector<std::optional<double>> times(starts.size());
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (int w = 0; w < n_workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= starts.size()) return;
        try {
          const auto trace = flow::integrate(model, starts[i], opts);
          if (trace.termination == Termination::ReachedSingularSet)
            times[i] = flow::singular_time(trace).T;
        } catch (const Error&) {
          // leave the slot empty; reported as a failure below
        }
      }
    });
  }
  for (auto& th : pool) th.join();

  SweepResult out;
  out.all_finite = true;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (times[i]) {
      out.table.push_back({starts[i], *times[i]});
    } else {
      out.all_finite = false;
      out.failed_theta0.push_back(starts[i]);
    }
  }
  return out;
}

double pairwise_rate_violation(const FlowTrace& trace, const BoundCertificate& cert) {
  std::vector<std::pair<double, double>> tube;  // (t, r^2)
  for (const auto& smp : trace.samples)
    if (smp.r <= cert.epsilon) tube.push_back({smp.t, smp.r * smp.r});
  double worst = -kInf;
  const double c1 = cert.C1 * cert.C1, c2 = cert.C2 * cert.C2;
  for (std::size_t i = 0; i < tube.size(); ++i)
    for (std::size_t j = i + 1; j < tube.size(); ++j) {
      const double dt = tube[j].first - tube[i].first;
      const double drop = tube[i].second - tube[j].second;
      worst = std::max(worst, c1 * dt - drop);
      worst = std::max(worst, drop - c2 * dt);
    }
  return worst;
}

}  // namespace isoflow::diagnostics
