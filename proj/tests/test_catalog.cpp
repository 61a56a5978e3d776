#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "isoflow/catalog.hpp"

using namespace isoflow;
using catalog::AmbientKind;
using catalog::FoliationModel;

namespace {
constexpr double kPi = std::numbers::pi;
double cot(double x) { return std::cos(x) / std::sin(x); }
}  // namespace

TEST_CASE("spectrum of concentric spheres") {
  const auto m = FoliationModel::concentric_spheres(3);
  const auto s = catalog::spectrum_at(m, 0.5);
  REQUIRE(s.eigenpairs.size() == 1);
  CHECK(s.eigenpairs[0].first == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(s.eigenpairs[0].second == 2);
  CHECK(s.trace() == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(catalog::mean_curvature_trace(FoliationModel::concentric_spheres(2), 1.0) ==
        doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("spectrum of the Clifford torus family") {
  const auto m = FoliationModel::isoparametric_sphere(2, 1, 1);
  const auto s = catalog::spectrum_at(m, kPi / 4);
  REQUIRE(s.eigenpairs.size() == 2);
  CHECK(s.eigenpairs[0].first == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(s.eigenpairs[1].first == doctest::Approx(+1.0).epsilon(1e-12));
  CHECK(s.trace() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(catalog::mean_curvature_trace(m, kPi / 6) ==
        doctest::Approx(-2.0 * cot(kPi / 3)).epsilon(1e-13));
}

TEST_CASE("equator of the geodesic-sphere family is minimal") {
  for (int m0 : {1, 2, 4}) {
    const auto m = FoliationModel::isoparametric_sphere(1, m0);
    const auto s = catalog::spectrum_at(m, kPi / 2);
    REQUIRE(s.eigenpairs.size() == 1);
    CHECK(std::abs(s.eigenpairs[0].first) < 1e-15);
    CHECK(s.eigenpairs[0].second == m0);
    CHECK(std::abs(s.trace()) < 1e-14);
  }
  CHECK(catalog::mean_curvature_trace(FoliationModel::isoparametric_sphere(1, 1), kPi / 3) ==
        doctest::Approx(-cot(kPi / 3)).epsilon(1e-14));
}

TEST_CASE("cylinder spectrum has a flat block") {
  const auto m = FoliationModel::spherical_cylinders(2, 4);
  const auto s = catalog::spectrum_at(m, 0.25);
  REQUIRE(s.eigenpairs.size() == 2);
  CHECK(s.eigenpairs[0].first == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(s.eigenpairs[0].second == 2);
  CHECK(s.eigenpairs[1].first == 0.0);
  CHECK(s.eigenpairs[1].second == 1);
  CHECK(s.trace() == doctest::Approx(-8.0).epsilon(1e-14));
}

TEST_CASE("volume densities") {
  const auto g1 = FoliationModel::isoparametric_sphere(1, 1);
  CHECK(catalog::volume_density(g1, 0.37) == doctest::Approx(std::sin(0.37)).epsilon(1e-15));

  const auto g2 = FoliationModel::isoparametric_sphere(2, 1, 1);
  CHECK(catalog::volume_density(g2, kPi / 4) == doctest::Approx(0.5).epsilon(1e-14));
  // pi/4 is the maximizer (the minimal leaf)
  CHECK(catalog::volume_density(g2, kPi / 4 - 0.05) < 0.5);
  CHECK(catalog::volume_density(g2, kPi / 4 + 0.05) < 0.5);

  const auto c3 = FoliationModel::concentric_spheres(3);
  CHECK(catalog::volume_density(c3, 2.0) / catalog::volume_density(c3, 1.0) ==
        doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("quotient intervals and endpoint data") {
  const auto g2 = catalog::quotient_interval(FoliationModel::isoparametric_sphere(2, 1, 1));
  CHECK(g2.theta_max == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(g2.lower.dimension_drop == 1);
  REQUIRE(g2.upper.has_value());
  CHECK(g2.upper->dimension_drop == 1);
  CHECK(g2.lower.minimal);
  CHECK(g2.upper->minimal);

  const auto c4 = catalog::quotient_interval(FoliationModel::concentric_spheres(4));
  CHECK(std::isinf(c4.theta_max));
  CHECK(c4.lower.dimension_drop == 3);
  CHECK(!c4.upper.has_value());

  const auto g3 = catalog::quotient_interval(FoliationModel::isoparametric_sphere(3, 1));
  CHECK(g3.theta_max == doctest::Approx(kPi / 3).epsilon(1e-15));
  CHECK(g3.lower.dimension_drop == 1);
  REQUIRE(g3.upper.has_value());
  CHECK(g3.upper->dimension_drop == 1);
  // ambient is the 4-sphere
  CHECK(FoliationModel::isoparametric_sphere(3, 1).ambient().dim == 4);
}

TEST_CASE("asymmetric multiplicities place the right drop at each endpoint") {
  const auto m = FoliationModel::isoparametric_sphere(2, 1, 2);
  CHECK(m.lower_endpoint().dimension_drop == 1);
  CHECK(m.upper_endpoint()->dimension_drop == 2);
  CHECK(m.ambient().dim == 4);
}

TEST_CASE("domain errors identify the violated endpoint") {
  const auto m = FoliationModel::isoparametric_sphere(2, 1, 1);
  CHECK_THROWS_AS(catalog::spectrum_at(m, 0.0), DomainError);
  CHECK_THROWS_AS(catalog::spectrum_at(m, -0.3), DomainError);
  CHECK_THROWS_AS(catalog::spectrum_at(m, kPi / 2), DomainError);
  CHECK_THROWS_WITH_AS(catalog::volume_density(m, 2.0),
                       doctest::Contains("upper singular endpoint"), DomainError);
  CHECK_THROWS_WITH_AS(catalog::volume_density(m, -1.0),
                       doctest::Contains("lower singular endpoint"), DomainError);
  // Euclidean models have no upper endpoint
  CHECK_NOTHROW(catalog::spectrum_at(FoliationModel::concentric_spheres(2), 1e9));
}

TEST_CASE("admissibility is a warning-level flag, not an error") {
  CHECK(FoliationModel::isoparametric_sphere(3, 2).admissible());
  CHECK(!FoliationModel::isoparametric_sphere(3, 3).admissible());  // hypothetical spectrum
  CHECK(FoliationModel::isoparametric_sphere(2, 3, 5).admissible());
  CHECK_THROWS_AS(FoliationModel::isoparametric_sphere(4, 1), std::invalid_argument);
  CHECK_THROWS_AS(FoliationModel::isoparametric_sphere(6, 1), std::invalid_argument);
  CHECK_THROWS_AS(FoliationModel::concentric_spheres(1), std::invalid_argument);
}

TEST_CASE("trace equals the log-volume derivative") {
  for (const auto& model : catalog::default_catalog()) {
    const double hi = std::isfinite(model.theta_max()) ? model.theta_max() : 4.0;
    const double eps3 = std::cbrt(std::numeric_limits<double>::epsilon());
    for (int i = 0; i <= 400; ++i) {
      const double theta = hi * (0.02 + 0.96 * i / 400.0);
      const double tr = catalog::mean_curvature_trace(model, theta);
      CHECK(std::abs(tr + catalog::dlog_volume_density(model, theta)) <= 1e-10);
      // step proportional to the distance to the singular set keeps the
      // truncation error of the difference quotient bounded near endpoints
      const double room =
          std::isfinite(model.theta_max()) ? std::min(theta, hi - theta) : theta;
      const double d = eps3 * room;
      const double fd = (catalog::log_volume_density(model, theta + d) -
                         catalog::log_volume_density(model, theta - d)) /
                        (2.0 * d);
      CHECK(std::abs(tr + fd) <= 1e-6);
    }
  }
}

TEST_CASE("focal consistency") {
  for (const auto& model : catalog::default_catalog()) {
    const bool sphere = model.ambient().kind == AmbientKind::UnitSphere;
    const double hi = sphere ? model.theta_max() : 3.0;
    for (int i = 1; i <= 500; ++i) {
      const double theta = hi * i / 501.0;
      const double focal = catalog::first_focal_distance(model, theta);
      const double expect =
          sphere ? std::min(theta, model.theta_max() - theta) : theta;
      CHECK(std::abs(focal - expect) <= 1e-10);
      CHECK(catalog::strata_distance(model, theta) == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("limit law: theta * trace -> -D0 at the lower endpoint") {
  for (const auto& model : catalog::default_catalog()) {
    const double scale = std::isfinite(model.theta_max()) ? model.theta_max() : 1.0;
    const double theta = 1e-4 * scale;
    const double v = theta * catalog::mean_curvature_trace(model, theta);
    CHECK(std::abs(v + model.lower_endpoint().dimension_drop) <= 1e-3);
  }
}

TEST_CASE("homothety invariance of Euclidean traces") {
  std::mt19937_64 rng(kDefaultSeed);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (const auto& model : catalog::default_catalog()) {
    if (model.ambient().kind != AmbientKind::Euclidean) continue;
    for (int i = 0; i < 100; ++i) {
      const double theta = u(rng), lambda = u(rng);
      const double lhs = catalog::mean_curvature_trace(model, lambda * theta);
      const double rhs = catalog::mean_curvature_trace(model, theta) / lambda;
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
    }
  }
}

TEST_CASE("each sphere model has a unique minimal leaf at the volume maximum") {
  for (const auto& model : catalog::default_catalog()) {
    if (model.ambient().kind != AmbientKind::UnitSphere) {
      CHECK(!catalog::minimal_leaf_theta(model).has_value());
      continue;
    }
    const auto ts = catalog::minimal_leaf_theta(model);
    REQUIRE(ts.has_value());
    CHECK(std::abs(catalog::mean_curvature_trace(model, *ts)) < 1e-9);
    // the trace is strictly increasing, so this zero is unique; volume peaks there
    const double h = model.theta_max() * 1e-4;
    CHECK(catalog::mean_curvature_trace(model, *ts - h) < 0.0);
    CHECK(catalog::mean_curvature_trace(model, *ts + h) > 0.0);
    CHECK(catalog::volume_density(model, *ts) >= catalog::volume_density(model, *ts - h));
    CHECK(catalog::volume_density(model, *ts) >= catalog::volume_density(model, *ts + h));
    // symmetric families have the minimal leaf at the midpoint
    if (model.m0() == model.m1())
      CHECK(*ts == doctest::Approx(model.theta_max() / 2).epsilon(1e-10));
  }
}

TEST_CASE("signed focal distances and sup norm") {
  const auto m = FoliationModel::isoparametric_sphere(2, 1, 1);
  const auto s = catalog::spectrum_at(m, kPi / 6);
  const auto fd = s.focal_distances();
  REQUIRE(fd.size() == 2);
  CHECK(fd[0] == doctest::Approx(-std::tan(kPi / 6)).epsilon(1e-13));
  CHECK(fd[1] == doctest::Approx(1.0 / std::tan(kPi / 6)).epsilon(1e-13));
  CHECK(s.sup_norm() == doctest::Approx(cot(kPi / 6)).epsilon(1e-13));
  CHECK(s.leaf_dim() == 2);
}
