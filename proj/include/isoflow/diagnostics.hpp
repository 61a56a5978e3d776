#pragma once

#include <optional>
#include <vector>

#include "isoflow/catalog.hpp"
#include "isoflow/flow.hpp"

namespace isoflow::diagnostics {

/// Empirical constants witnessing the two-sided radial trace bound on the tube
/// of radius epsilon around a singular endpoint:
///   -(1+delta) D/rho - c <= tr A <= -(1-delta) D/rho + c   for rho in (theta_stop, epsilon),
/// with the derived decay constants C1^2 = 2((1-delta) D - c epsilon) > 0 and
/// C2^2 = 2((1+delta) D + c epsilon).
struct BoundCertificate {
  double epsilon;
  double delta;
  double c;
  double C1;
  double C2;
  catalog::SingularEndpoint endpoint;
};

/// Smallest (delta, c) in lexicographic order such that the bound holds on a
/// 1000-point grid over (theta_stop, epsilon).  Throws
/// CertificateInfeasibleError (carrying the largest feasible epsilon, located
/// by bisection) when no delta < 1 yields C1^2 > 0.
BoundCertificate fit_bound_certificate(const catalog::FoliationModel& model,
                                       const catalog::SingularEndpoint& endpoint,
                                       double epsilon, double theta_stop = -1.0);

struct Type1Result {
  double stat;   // max over the tail of sup_A^2 (T - t)
  double limit;  // linear extrapolation of the same quantity to t -> T
};

/// Type-I statistic over the tail (last decade of T - t) of a singular trace.
Type1Result type1_statistic(const flow::FlowTrace& trace, double T);

struct RateWindow {
  double C_low;
  double C_high;
  bool within_bounds;
};

/// Observed range of r(t)/sqrt(T-t) over tail samples inside the certified
/// tube; within_bounds checks it against [C1, C2].
RateWindow rate_window(const flow::FlowTrace& trace, double T, const BoundCertificate& cert);

/// Endpoint the trace converged to.  Also verifies that the distance to the
/// limit leaf equals the strata distance over the tail.
catalog::SingularEndpoint limit_leaf(const catalog::FoliationModel& model,
                                     const flow::FlowTrace& trace);

/// Max over interior samples of the two gradient-flow residuals:
///   (i)  |d/dt log_vol_rel + trace_H^2|   (non-uniform centered differences in t)
///   (ii) |trace_H + d/dtheta log V|       (centered differences in theta)
double gradient_flow_check(const catalog::FoliationModel& model, const flow::FlowTrace& trace);

struct SweepResult {
  bool all_finite;
  std::vector<std::pair<double, double>> table;  // (theta0, T)
  std::vector<double> failed_theta0;
};

/// Integrates from grid_size equispaced non-minimal starting leaves and
/// verifies every run reaches the singular set in finite time.  Sphere-ambient
/// models only.  threads = 0 picks hardware concurrency (capped by the
/// ISOFLOW_THREADS environment variable).
SweepResult finite_time_sweep(const catalog::FoliationModel& model, int grid_size,
                              const flow::FlowOptions& opts = {}, int threads = 0);

/// Discrete two-sided decay bound over all in-tube sample pairs:
///   C1^2 (tj - ti) - slack <= r^2(ti) - r^2(tj) <= C2^2 (tj - ti) + slack.
/// Returns the worst signed violation (<= 0 when the bound holds).
double pairwise_rate_violation(const flow::FlowTrace& trace, const BoundCertificate& cert);

struct SingularityReport {
  double T = 0.0;
  double ci = 0.0;
  catalog::SingularEndpoint limit_endpoint{};
  double type1_stat = 0.0;
  double type1_limit = 0.0;
  double rate_low = 0.0;
  double rate_high = 0.0;
  bool rate_within_bounds = false;
  std::optional<BoundCertificate> certificate;
};

}  // namespace isoflow::diagnostics
