#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "isoflow/catalog.hpp"

namespace isoflow::flow {

/// Integration controls.  theta_stop < 0 selects the default 1e-6 times the
/// interval scale (theta_max when finite, theta0 otherwise).  max_step bounds
/// the time step, which also lower-bounds the sample count.
struct FlowOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double theta_stop = -1.0;
  double t_max = 1e6;
  int sample_stride = 1;
  double max_step = std::numeric_limits<double>::infinity();

  void validate() const;
};

enum class Termination { ReachedSingularSet, ReachedTMax, ConvergedToMinimal };

struct FlowSample {
  double t;            // flow time
  double theta;        // quotient coordinate
  double r;            // distance to the limit-side singular leaf
  double r_sigma;      // distance to the nearest singular leaf
  double trace_H;      // tr A_{grad r} = d theta/dt
  double sup_A;        // sup norm of the shape operator
  double log_vol_rel;  // log V(theta) - log V(theta0)
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  Termination termination = Termination::ReachedTMax;
  double theta0 = 0.0;
  double theta_stop = 0.0;  // resolved stopping distance
};

const char* termination_name(Termination t);

/// Reduced mean curvature flow theta' = tr A_{grad r}(theta).  Integrates the
/// squared distance to the limit-side endpoint (whose derivative stays bounded
/// through the blow-up) with an adaptive embedded 5(4) pair, and stops when
/// the distance to a singular leaf falls below theta_stop.
FlowTrace integrate(const catalog::FoliationModel& model, double theta0,
                    const FlowOptions& opts = {});

/// Analytic solution where one exists (concentric spheres, cylinders,
/// isoparametric g=1 and g=2 with equal multiplicities); std::nullopt
/// otherwise.  Throws SingularTimeError when t is at or past the singular time.
std::optional<double> closed_form(const catalog::FoliationModel& model, double theta0,
                                  double t);

/// Singular time of the closed-form solution; std::nullopt when unsupported.
std::optional<double> closed_form_singular_time(const catalog::FoliationModel& model,
                                                double theta0);

struct SingularTimeEstimate {
  double T;
  double ci;  // two-sigma half width propagated from the fit residuals
};

/// Affine fit of r^2(t) over the final tenth of the samples; the root of the
/// fit estimates the singular time.
SingularTimeEstimate singular_time(const FlowTrace& trace);

/// CSV with header t,theta,r,r_sigma,trace_H,sup_A,log_vol_rel; values at 17
/// significant digits.  Deterministic for identical traces.
void write_csv(std::ostream& os, const FlowTrace& trace);

}  // namespace isoflow::flow
