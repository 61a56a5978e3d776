#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "isoflow/diagnostics.hpp"
#include "isoflow/rk45.hpp"
#include "isoflow/verify.hpp"

using namespace isoflow;
using catalog::FoliationModel;
using flow::Termination;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent quadrature oracle for the singular time: T = -int dtheta / trace
// along the flow direction, integrated as an ODE in theta.
double quadrature_singular_time(const FoliationModel& model, double theta0) {
  const double f0 = catalog::mean_curvature_trace(model, theta0);
  const bool down = f0 < 0.0;
  const double target = down ? 1e-9 * model.theta_max()
                             : model.theta_max() * (1.0 - 1e-9);
  const auto rhs = [&](double theta, const numerics::State<1>& /*y*/) -> numerics::State<1> {
    return {1.0 / catalog::mean_curvature_trace(model, theta)};
  };
  // integrate dT/dtheta = 1/trace from theta0 to the endpoint (orientation-aware)
  double T = 0.0;
  if (down) {
    const auto rhs_rev = [&](double s, const numerics::State<1>&) -> numerics::State<1> {
      return {-1.0 / catalog::mean_curvature_trace(model, theta0 - s)};
    };
    T = numerics::integrate_adaptive<1>(rhs_rev, 0.0, {0.0}, theta0 - target, 1e-12, 1e-14,
                                        (theta0 - target) / 8,
                                        [](double, const auto&, const auto&) {})[0];
  } else {
    T = numerics::integrate_adaptive<1>(rhs, theta0, {0.0}, target, 1e-12, 1e-14,
                                        (target - theta0) / 8,
                                        [](double, const auto&, const auto&) {})[0];
  }
  return T;
}

}  // namespace

TEST_CASE("certificates for concentric spheres are exact") {
  for (int n : {2, 3, 5}) {
    const auto m = FoliationModel::concentric_spheres(n);
    for (double eps : {0.3, 1.0, 5.0}) {
      const auto cert = diagnostics::fit_bound_certificate(m, m.lower_endpoint(), eps);
      CHECK(cert.delta == 0.0);
      CHECK(cert.c == 0.0);
      CHECK(cert.C1 * cert.C1 == doctest::Approx(2.0 * (n - 1)).epsilon(1e-14));
      CHECK(cert.C2 * cert.C2 == doctest::Approx(2.0 * (n - 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("certificate for the geodesic-sphere family matches the analytic deficit") {
  const auto m = FoliationModel::isoparametric_sphere(1, 1);
  const auto cert = diagnostics::fit_bound_certificate(m, m.lower_endpoint(), 0.3);
  CHECK(cert.delta == 0.0);
  // the deficit 1/theta - cot(theta) is increasing, so its grid max sits at eps
  const double expect = 1.0 / 0.3 - std::cos(0.3) / std::sin(0.3);
  CHECK(cert.c == doctest::Approx(expect).epsilon(1e-12));
  CHECK(cert.C1 * cert.C1 == doctest::Approx(2.0 * (1.0 - cert.c * 0.3)).epsilon(1e-12));
}

TEST_CASE("delta and c refine monotonically as the tube shrinks") {
  for (const auto& model : catalog::default_catalog()) {
    const auto ep = model.lower_endpoint();
    double prev_c = std::numeric_limits<double>::infinity();
    for (double eps : {0.3, 0.1, 0.03, 0.01}) {
      const auto cert = diagnostics::fit_bound_certificate(model, ep, eps);
      CHECK(cert.delta == 0.0);  // exact models need no relative slack
      CHECK(cert.c <= prev_c + 1e-15);
      prev_c = cert.c;
    }
  }
}

TEST_CASE("oversized tubes are rejected with the largest feasible radius") {
  const auto m = FoliationModel::isoparametric_sphere(1, 1);
  CHECK_THROWS_AS(diagnostics::fit_bound_certificate(m, m.lower_endpoint(), 3.0),
                  CertificateInfeasibleError);
  try {
    diagnostics::fit_bound_certificate(m, m.lower_endpoint(), 3.0);
  } catch (const CertificateInfeasibleError& e) {
    CHECK(e.max_feasible_epsilon > 0.3);
    CHECK(e.max_feasible_epsilon < 3.0);
    // the reported radius is in fact feasible
    CHECK_NOTHROW(diagnostics::fit_bound_certificate(m, m.lower_endpoint(),
                                                     e.max_feasible_epsilon * 0.999));
  }
}

TEST_CASE("type-I statistic") {
  const auto c3 = FoliationModel::concentric_spheres(3);
  auto trace = flow::integrate(c3, 1.0);
  auto T = flow::singular_time(trace).T;
  auto t1 = diagnostics::type1_statistic(trace, T);
  CHECK(std::isfinite(t1.stat));
  CHECK(t1.limit == doctest::Approx(0.25).epsilon(1e-4));  // 1/(2(n-1))

  const auto g1 = FoliationModel::isoparametric_sphere(1, 1);
  trace = flow::integrate(g1, kPi / 3);
  T = flow::singular_time(trace).T;
  t1 = diagnostics::type1_statistic(trace, T);
  CHECK(std::abs(t1.limit - 0.5) <= 0.005);

  const auto g2 = FoliationModel::isoparametric_sphere(2, 1, 1);
  trace = flow::integrate(g2, kPi / 6);
  T = flow::singular_time(trace).T;
  t1 = diagnostics::type1_statistic(trace, T);
  CHECK(std::abs(t1.limit - 0.5) <= 0.005);

  CHECK_THROWS_AS(diagnostics::type1_statistic(trace, trace.samples.back().t * 0.5),
                  ConsistencyError);
}

TEST_CASE("rate window sits inside the certificate bounds") {
  const auto c2 = FoliationModel::concentric_spheres(2);
  auto trace = flow::integrate(c2, 1.0);
  auto T = flow::singular_time(trace).T;
  auto cert = diagnostics::fit_bound_certificate(c2, c2.lower_endpoint(), 0.1);
  auto window = diagnostics::rate_window(trace, T, cert);
  CHECK(window.within_bounds);
  CHECK(window.C_low == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  CHECK(window.C_high == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));

  // falsification control: an artificially shrunk C2 must fail
  auto bad = cert;
  bad.C2 = std::sqrt(2.0) * 0.999;
  CHECK(!diagnostics::rate_window(trace, T, bad).within_bounds);

  const auto g1 = FoliationModel::isoparametric_sphere(1, 1);
  trace = flow::integrate(g1, kPi / 3);
  T = flow::singular_time(trace).T;
  cert = diagnostics::fit_bound_certificate(g1, g1.lower_endpoint(), 0.1);
  window = diagnostics::rate_window(trace, T, cert);
  CHECK(window.within_bounds);
}

TEST_CASE("pairwise discrete decay bound") {
  const auto g1 = FoliationModel::isoparametric_sphere(1, 1);
  const auto trace = flow::integrate(g1, kPi / 3);
  const auto cert = diagnostics::fit_bound_certificate(g1, g1.lower_endpoint(), 0.1);
  CHECK(diagnostics::pairwise_rate_violation(trace, cert) <= 1e-6);
}

TEST_CASE("finite-time bound: T <= t + r(t)^2 / C1^2 throughout the tube") {
  for (const auto& [model, theta0] :
       std::vector<std::pair<FoliationModel, double>>{
           {FoliationModel::concentric_spheres(3), 1.0},
           {FoliationModel::isoparametric_sphere(1, 1), kPi / 3},
           {FoliationModel::isoparametric_sphere(3, 2), 0.3},
       }) {
    const auto trace = flow::integrate(model, theta0);
    const double T = flow::singular_time(trace).T;
    const auto ep = diagnostics::limit_leaf(model, trace);
    const auto cert = diagnostics::fit_bound_certificate(model, ep, 0.1);
    for (const auto& s : trace.samples) {
      if (s.r > cert.epsilon) continue;
      // equality is attained for concentric spheres, hence the rounding slack
      CHECK(T <= s.t + s.r * s.r / (cert.C1 * cert.C1) + 1e-9);
    }
  }
}

TEST_CASE("limit leaf classification") {
  const auto g2 = FoliationModel::isoparametric_sphere(2, 1, 1);
  auto trace = flow::integrate(g2, kPi / 6);
  CHECK(diagnostics::limit_leaf(g2, trace).coordinate == 0.0);
  trace = flow::integrate(g2, kPi / 3);
  CHECK(diagnostics::limit_leaf(g2, trace).coordinate ==
        doctest::Approx(kPi / 2).epsilon(1e-15));

  const auto c5 = FoliationModel::concentric_spheres(5);
  trace = flow::integrate(c5, 2.0);
  CHECK(diagnostics::limit_leaf(c5, trace).coordinate == 0.0);
  CHECK(diagnostics::limit_leaf(c5, trace).dimension_drop == 4);

  flow::FlowOptions capped;
  capped.t_max = 0.01;
  trace = flow::integrate(c5, 2.0, capped);
  CHECK_THROWS_AS(diagnostics::limit_leaf(c5, trace), Error);
}

TEST_CASE("basin dichotomy: the start-side sign decides the limit") {
  for (const auto& model : catalog::default_catalog()) {
    if (!std::isfinite(model.theta_max())) continue;
    const double ts = *catalog::minimal_leaf_theta(model);
    for (double frac : {0.35, 0.75}) {
      const double theta0 = frac * model.theta_max();
      if (std::abs(theta0 - ts) < 0.02) continue;
      const auto trace = flow::integrate(model, theta0);
      const auto ep = diagnostics::limit_leaf(model, trace);
      const double sign = catalog::mean_curvature_trace(model, theta0);
      CHECK(ep.coordinate == (sign < 0 ? 0.0 : model.theta_max()));
      // the flow never crosses the minimal leaf
      for (const auto& s : trace.samples)
        CHECK((theta0 < ts ? s.theta <= ts : s.theta >= ts));
    }
  }
}

TEST_CASE("gradient flow residuals") {
  const auto g1 = FoliationModel::isoparametric_sphere(1, 1);
  const auto trace = verify::gradient_suite_trace(g1);
  CHECK(trace.samples.size() >= 10000);
  CHECK(diagnostics::gradient_flow_check(g1, trace) <= 1e-6);

  // stationary trace at the minimal leaf has zero residual
  const auto g2 = FoliationModel::isoparametric_sphere(2, 1, 1);
  const auto still = flow::integrate(g2, kPi / 4);
  CHECK(diagnostics::gradient_flow_check(g2, still) <= 1e-10);
}

TEST_CASE("finite time sweep") {
  const auto g1 = FoliationModel::isoparametric_sphere(1, 1);
  const auto sweep = diagnostics::finite_time_sweep(g1, 50);
  CHECK(sweep.all_finite);
  CHECK(sweep.table.size() == 50);
  for (const auto& [theta0, T] : sweep.table)
    CHECK(std::abs(T - (-std::log(std::abs(std::cos(theta0))))) <= 1e-6);

  const auto g2 = FoliationModel::isoparametric_sphere(2, 1, 1);
  const auto sweep2 = diagnostics::finite_time_sweep(g2, 50);
  CHECK(sweep2.all_finite);
  // symmetry about the minimal leaf
  const auto& tab = sweep2.table;
  for (std::size_t i = 0; i < tab.size() / 2; ++i)
    CHECK(std::abs(tab[i].second - tab[tab.size() - 1 - i].second) <= 2e-6);

  // quadrature oracle for a family without closed form
  const auto g3 = FoliationModel::isoparametric_sphere(3, 1);
  const auto sweep3 = diagnostics::finite_time_sweep(g3, 10);
  CHECK(sweep3.all_finite);
  for (const auto& [theta0, T] : sweep3.table)
    CHECK(std::abs(T - quadrature_singular_time(g3, theta0)) <= 1e-6);

  CHECK_THROWS_AS(diagnostics::finite_time_sweep(FoliationModel::concentric_spheres(2), 10),
                  NotApplicableError);
}
