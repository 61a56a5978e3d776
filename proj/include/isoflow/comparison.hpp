#pragma once

#include <functional>
#include <optional>

#include "isoflow/catalog.hpp"

namespace isoflow::comparison {

/// Lower bound sigma for the ratio (focal distance)/(strata distance) derived
/// from the conjugate-point equation g'' = -K/(1-s)^2 g, g(0)=0, g'(0)=1:
/// sigma is the first zero of g in (0,1) when one exists, and 1 otherwise.
struct SigmaResult {
  double K;
  double sigma;
  std::optional<double> first_zero;
};

/// Closed-form solution of the conjugate-point equation, confirmed against
/// adaptive numerical integration with sign-change bisection (the two routes
/// must agree to 1e-9).  For K > 1/4 the first zero is 1 - exp(-pi/omega)
/// with omega = sqrt(K - 1/4); for K <= 1/4 there is no zero in (0,1).
SigmaResult sigma_lower_bound(double K);

/// Closed-form value only (no numerical confirmation).
double sigma_closed_form(double K);

/// Numerical route only: integrate the equation and bisect the first sign
/// change; returns 1 when no zero is found in (0, 1 - 1e-8).
double sigma_numeric(double K);

/// min over an interior grid of (first focal distance)/(strata distance);
/// throws ConsistencyError if the minimum falls below sigma_lower_bound(K).
double focal_strata_check(const catalog::FoliationModel& model, double K, int grid = 1000);

/// Flat-space comparison determinant jbar(s) = prod_i (1 - lambda_i s)^{m_i}
/// for the given radial spectrum; its domain ends at the first positive zero.
struct JacobiComparison {
  catalog::ShapeSpectrum spectrum;
  double s_max;  // 1 / (largest positive eigenvalue), +inf when none

  explicit JacobiComparison(catalog::ShapeSpectrum spec);
  double jbar(double s) const;
};

double jbar_s_max(const catalog::ShapeSpectrum& spectrum);
double jbar_product(const catalog::ShapeSpectrum& spectrum, double s);

/// Integrates d/ds log jbar = tr Sbar(s), where each eigenvalue evolves by the
/// flat Riccati flow Sbar_i(s) = -lambda_i / (1 - lambda_i s).
double jbar_riccati_ode(const catalog::ShapeSpectrum& spectrum, double s);

/// Product formula cross-checked against the Riccati route (agreement 1e-9).
/// Throws DomainError (carrying s_max in the message) when s > s_max.
double riccati_jbar(const catalog::ShapeSpectrum& spectrum, double s);

struct VolumeCheck {
  bool passed;
  double margin;  // min over the grid of (jbar - j); 0 is attained at s = 0
};

/// At the minimal leaf, checks the comparison chain
///   j(s) = V(theta* +/- s)/V(theta*) <= jbar(s) <= 1
/// on a grid of s in both normal directions, stopping at the first focal
/// point (the comparison does not extend past it).
VolumeCheck volume_local_max_check(const catalog::FoliationModel& model, int grid = 1000);

}  // namespace isoflow::comparison
