#include "isoflow/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "isoflow/rk45.hpp"

namespace isoflow::comparison {

using catalog::AmbientKind;
using catalog::FoliationModel;
using catalog::ShapeSpectrum;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// The substitution tau = log(1/(1-s)) turns g'' = -K/(1-s)^2 g into the
// constant-coefficient equation g_tt + g_t + K g = 0, removing the stiffness
// at s -> 1.  Zeros in s and in tau correspond one-to-one.
struct SigmaOde {
  double K;
  numerics::State<2> operator()(double /*tau*/, const numerics::State<2>& y) const {
    return {y[1], -y[1] - K * y[0]};
  }
};

constexpr double kTauEnd = 45.0;  // covers s up to 1 - e^-45, past double resolution of 1 - s

}  // namespace

double sigma_closed_form(double K) {
  if (K < 0.0) throw DomainError("sigma_lower_bound: K must be nonnegative");
  if (K <= 0.25) return 1.0;
  const double omega = std::sqrt(K - 0.25);
  return 1.0 - std::exp(-kPi / omega);
}

double sigma_numeric(double K) {
  if (K < 0.0) throw DomainError("sigma_lower_bound: K must be nonnegative");
  const SigmaOde ode{K};
  std::vector<std::array<double, 3>> nodes;  // (tau, g, g')
  numerics::integrate_adaptive<2>(
      ode, 0.0, {0.0, 1.0}, kTauEnd, 1e-12, 1e-14, 0.05,
      [&](double tau, const numerics::State<2>& y, const numerics::State<2>&) {
        nodes.push_back({tau, y[0], y[1]});
      });

  // First sign change of g after leaving the origin.
  std::size_t hit = 0;
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    if (nodes[i][1] > 0.0 && nodes[i + 1][1] <= 0.0) {
      hit = i;
      break;
    }
  }
  if (hit == 0) return 1.0;

  double lo = nodes[hit][0], hi = nodes[hit + 1][0];
  numerics::State<2> y_lo = {nodes[hit][1], nodes[hit][2]};
  for (int it = 0; it < 100 && hi - lo > 1e-13 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    numerics::State<2> y_mid = numerics::integrate_adaptive<2>(
        ode, lo, y_lo, mid, 1e-13, 1e-16, 0.05,
        [](double, const numerics::State<2>&, const numerics::State<2>&) {});
    if (y_mid[0] > 0.0) {
      lo = mid;
      y_lo = y_mid;
    } else {
      hi = mid;
    }
  }
  const double tau0 = 0.5 * (lo + hi);
  return 1.0 - std::exp(-tau0);
}

SigmaResult sigma_lower_bound(double K) {
  const double closed = sigma_closed_form(K);
  const double numeric = sigma_numeric(K);
  if (std::abs(closed - numeric) > 1e-9)
    throw ConsistencyError("sigma_lower_bound: closed form and numerical integration disagree");
  SigmaResult out;
  out.K = K;
  out.sigma = closed;
  if (K > 0.25) out.first_zero = closed;
  return out;
}

double focal_strata_check(const FoliationModel& model, double K, int grid) {
  const double sigma = sigma_lower_bound(K).sigma;
  double worst = kInf;
  if (model.ambient().kind == AmbientKind::UnitSphere) {
    for (int i = 1; i <= grid; ++i) {
      const double theta = model.theta_max() * i / (grid + 1);
      worst = std::min(worst, catalog::first_focal_distance(model, theta) /
                                  catalog::strata_distance(model, theta));
    }
  } else {
    for (int i = 1; i <= grid; ++i) {
      const double theta = 10.0 * i / grid;
      worst = std::min(worst, catalog::first_focal_distance(model, theta) /
                                  catalog::strata_distance(model, theta));
    }
  }
  if (worst < sigma - 1e-12)
    throw ConsistencyError("focal_strata_check: focal/strata ratio fell below sigma");
  return worst;
}

double jbar_s_max(const ShapeSpectrum& spectrum) {
  double lam_pos = 0.0;
  for (const auto& [lam, m] : spectrum.eigenpairs) lam_pos = std::max(lam_pos, lam);
  return lam_pos > 0.0 ? 1.0 / lam_pos : kInf;
}

double jbar_product(const ShapeSpectrum& spectrum, double s) {
  double v = 1.0;
  for (const auto& [lam, m] : spectrum.eigenpairs) v *= std::pow(1.0 - lam * s, m);
  return v;
}

double jbar_riccati_ode(const ShapeSpectrum& spectrum, double s) {
  if (s == 0.0) return 1.0;
  const auto rhs = [&](double x, const numerics::State<1>& /*y*/) -> numerics::State<1> {
    double tr = 0.0;
    for (const auto& [lam, m] : spectrum.eigenpairs) tr += m * (-lam) / (1.0 - lam * x);
    return {tr};
  };
  const auto y = numerics::integrate_adaptive<1>(
      rhs, 0.0, {0.0}, s, 1e-12, 1e-14, s / 8.0,
      [](double, const numerics::State<1>&, const numerics::State<1>&) {});
  return std::exp(y[0]);
}

double riccati_jbar(const ShapeSpectrum& spectrum, double s) {
  const double s_max = jbar_s_max(spectrum);
  if (s < 0.0 || s > s_max)
    throw DomainError("riccati_jbar: s outside [0, s_max], s_max = " + std::to_string(s_max));
  const double prod = jbar_product(spectrum, s);
  const double ode = jbar_riccati_ode(spectrum, s);
  if (std::abs(prod - ode) > 1e-9 * std::max(1.0, std::abs(prod)))
    throw ConsistencyError("riccati_jbar: product and Riccati routes disagree");
  return prod;
}

JacobiComparison::JacobiComparison(ShapeSpectrum spec)
    : spectrum(std::move(spec)), s_max(jbar_s_max(spectrum)) {}

double JacobiComparison::jbar(double s) const { return jbar_product(spectrum, s); }

VolumeCheck volume_local_max_check(const FoliationModel& model, int grid) {
  if (model.ambient().kind != AmbientKind::UnitSphere)
    throw NotApplicableError("volume_local_max_check requires an interior minimal leaf");
  const double theta_star = *catalog::minimal_leaf_theta(model);
  const double v_star = catalog::volume_density(model, theta_star);
  const ShapeSpectrum spec_up = catalog::spectrum_at(model, theta_star);

  VolumeCheck out{true, kInf};
  for (int dir = 0; dir < 2; ++dir) {
    const ShapeSpectrum spec = dir == 0 ? spec_up : spec_up.negated();
    const double focal = dir == 0 ? model.theta_max() - theta_star : theta_star;
    const double s_hi = std::min(jbar_s_max(spec), focal) * (1.0 - 1e-6);
    for (int i = 0; i <= grid; ++i) {
      const double s = s_hi * i / grid;
      const double theta = dir == 0 ? theta_star + s : theta_star - s;
      const double j = catalog::volume_density(model, theta) / v_star;
      const double jb = jbar_product(spec, s);
      if (j > jb + 1e-12 || jb > 1.0 + 1e-12) out.passed = false;
      out.margin = std::min(out.margin, jb - j);
    }
  }
  return out;
}

}  // namespace isoflow::comparison
