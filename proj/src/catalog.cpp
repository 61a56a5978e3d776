#include "isoflow/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace isoflow::catalog {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double cot(double x) { return std::cos(x) / std::sin(x); }

/// arccot into (0, pi); this is the sphere focal distance for eigenvalue x.
double acot_principal(double x) { return std::atan2(1.0, x); }

}  // namespace

double ShapeSpectrum::trace() const {
  double s = 0.0;
  for (const auto& [lam, m] : eigenpairs) s += m * lam;
  return s;
}

double ShapeSpectrum::sup_norm() const {
  double s = 0.0;
  for (const auto& [lam, m] : eigenpairs) s = std::max(s, std::abs(lam));
  return s;
}

int ShapeSpectrum::leaf_dim() const {
  int d = 0;
  for (const auto& [lam, m] : eigenpairs) d += m;
  return d;
}

std::vector<double> ShapeSpectrum::focal_distances() const {
  std::vector<double> out;
  for (const auto& [lam, m] : eigenpairs)
    if (lam != 0.0) out.push_back(1.0 / lam);
  return out;
}

ShapeSpectrum ShapeSpectrum::negated() const {
  ShapeSpectrum s = *this;
  for (auto& [lam, m] : s.eigenpairs) lam = -lam;
  return s;
}

FoliationModel FoliationModel::concentric_spheres(int n) {
  if (n < 2) throw std::invalid_argument("concentric_spheres: ambient dimension must be >= 2");
  FoliationModel m;
  m.kind_ = ModelKind::ConcentricSpheres;
  m.ambient_ = {AmbientKind::Euclidean, n};
  m.n_ = n;
  m.theta_max_ = kInf;
  m.lower_ = {0.0, n - 1, true};
  return m;
}

FoliationModel FoliationModel::spherical_cylinders(int k, int n) {
  if (n < 3 || k < 1 || k > n - 2)
    throw std::invalid_argument("spherical_cylinders: need n >= 3 and 1 <= k <= n-2");
  FoliationModel m;
  m.kind_ = ModelKind::SphericalCylinders;
  m.ambient_ = {AmbientKind::Euclidean, n};
  m.n_ = n;
  m.k_ = k;
  m.theta_max_ = kInf;
  m.lower_ = {0.0, k, true};
  return m;
}

FoliationModel FoliationModel::isoparametric_sphere(int g, int m0, int m1) {
  if (g != 1 && g != 2 && g != 3)
    throw std::invalid_argument("isoparametric_sphere: supported g are 1, 2, 3");
  if (m0 < 1) throw std::invalid_argument("isoparametric_sphere: m0 must be >= 1");
  if (m1 < 0) m1 = m0;
  if (g % 2 == 1 && m1 != m0)
    throw std::invalid_argument("isoparametric_sphere: odd g forces m1 = m0");
  if (m1 < 1) throw std::invalid_argument("isoparametric_sphere: m1 must be >= 1");
  FoliationModel m;
  m.kind_ = ModelKind::IsoparametricSphere;
  m.g_ = g;
  m.m0_ = m0;
  m.m1_ = m1;
  const int leaf_dim = (g % 2 == 0) ? (g / 2) * (m0 + m1) : g * m0;
  m.n_ = leaf_dim + 1;
  m.ambient_ = {AmbientKind::UnitSphere, m.n_};
  m.theta_max_ = kPi / g;
  m.lower_ = {0.0, m0, true};
  // The block collapsing at theta_max is k = g-1, multiplicity m_{(g-1) mod 2}.
  m.upper_ = SingularEndpoint{m.theta_max_, (g - 1) % 2 == 0 ? m0 : m1, true};
  return m;
}

bool FoliationModel::admissible() const {
  if (kind_ != ModelKind::IsoparametricSphere) return true;
  switch (g_) {
    case 1:
      return m1_ == m0_;
    case 2:
      return true;
    case 3:
      return m1_ == m0_ && (m0_ == 1 || m0_ == 2 || m0_ == 4 || m0_ == 8);
    default:
      return false;
  }
}

std::string FoliationModel::kind_slug() const {
  switch (kind_) {
    case ModelKind::ConcentricSpheres: return "concentric_spheres";
    case ModelKind::SphericalCylinders: return "spherical_cylinders";
    case ModelKind::IsoparametricSphere: return "isoparametric_sphere";
  }
  return "unknown";
}

std::string FoliationModel::name() const {
  std::ostringstream os;
  switch (kind_) {
    case ModelKind::ConcentricSpheres:
      os << "concentric_spheres(n=" << n_ << ")";
      break;
    case ModelKind::SphericalCylinders:
      os << "spherical_cylinders(k=" << k_ << ",n=" << n_ << ")";
      break;
    case ModelKind::IsoparametricSphere:
      os << "isoparametric_sphere(g=" << g_ << ",m0=" << m0_ << ",m1=" << m1_ << ")";
      break;
  }
  return os.str();
}

void FoliationModel::require_interior(double theta) const {
  if (!(theta > 0.0))
    throw DomainError(name() + ": theta = " + std::to_string(theta) +
                      " violates the lower singular endpoint theta = 0");
  if (theta_max_ < kInf && !(theta < theta_max_))
    throw DomainError(name() + ": theta = " + std::to_string(theta) +
                      " violates the upper singular endpoint theta_max = " +
                      std::to_string(theta_max_));
}

ShapeSpectrum spectrum_at(const FoliationModel& model, double theta) {
  model.require_interior(theta);
  ShapeSpectrum s;
  switch (model.kind()) {
    case ModelKind::ConcentricSpheres:
      s.eigenpairs = {{-1.0 / theta, model.n() - 1}};
      break;
    case ModelKind::SphericalCylinders:
      s.eigenpairs = {{-1.0 / theta, model.k()}};
      if (model.n() - model.k() - 1 > 0)
        s.eigenpairs.push_back({0.0, model.n() - model.k() - 1});
      break;
    case ModelKind::IsoparametricSphere:
      for (int b = 0; b < model.g(); ++b)
        s.eigenpairs.push_back(
            {-cot(theta + b * kPi / model.g()), model.block_multiplicity(b)});
      break;
  }
  return s;
}

double mean_curvature_trace(const FoliationModel& model, double theta) {
  model.require_interior(theta);
  switch (model.kind()) {
    case ModelKind::ConcentricSpheres:
      return -(model.n() - 1) / theta;
    case ModelKind::SphericalCylinders:
      return -model.k() / theta;
    case ModelKind::IsoparametricSphere: {
      double t = 0.0;
      for (int b = 0; b < model.g(); ++b)
        t -= model.block_multiplicity(b) * cot(theta + b * kPi / model.g());
      return t;
    }
  }
  return 0.0;
}

double volume_density(const FoliationModel& model, double theta) {
  model.require_interior(theta);
  switch (model.kind()) {
    case ModelKind::ConcentricSpheres:
      return std::pow(theta, model.n() - 1);
    case ModelKind::SphericalCylinders:
      return std::pow(theta, model.k());
    case ModelKind::IsoparametricSphere: {
      double v = 1.0;
      for (int b = 0; b < model.g(); ++b)
        v *= std::pow(std::sin(theta + b * kPi / model.g()), model.block_multiplicity(b));
      return v;
    }
  }
  return 0.0;
}

double log_volume_density(const FoliationModel& model, double theta) {
  model.require_interior(theta);
  switch (model.kind()) {
    case ModelKind::ConcentricSpheres:
      return (model.n() - 1) * std::log(theta);
    case ModelKind::SphericalCylinders:
      return model.k() * std::log(theta);
    case ModelKind::IsoparametricSphere: {
      double v = 0.0;
      for (int b = 0; b < model.g(); ++b)
        v += model.block_multiplicity(b) * std::log(std::sin(theta + b * kPi / model.g()));
      return v;
    }
  }
  return 0.0;
}

double dlog_volume_density(const FoliationModel& model, double theta) {
  // Exact identity with the trace; same kernel, opposite sign.
  return -mean_curvature_trace(model, theta);
}

QuotientInterval quotient_interval(const FoliationModel& model) {
  return {model.theta_max(), model.lower_endpoint(), model.upper_endpoint()};
}

std::optional<double> minimal_leaf_theta(const FoliationModel& model) {
  if (model.ambient().kind != AmbientKind::UnitSphere) return std::nullopt;
  // The trace is strictly increasing from -inf to +inf on (0, theta_max);
  // bisect its unique zero.
  double lo = model.theta_max() * 1e-12;
  double hi = model.theta_max() * (1.0 - 1e-12);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mean_curvature_trace(model, mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double strata_distance(const FoliationModel& model, double theta) {
  model.require_interior(theta);
  if (model.ambient().kind == AmbientKind::UnitSphere)
    return std::min(theta, model.theta_max() - theta);
  return theta;
}

double first_focal_distance(const FoliationModel& model, double theta) {
  const ShapeSpectrum spec = spectrum_at(model, theta);
  double best = kInf;
  if (model.ambient().kind == AmbientKind::UnitSphere) {
    // First focal point along +grad r solves cot(s) = lambda; along -grad r,
    // cot(s) = -lambda.
    for (const auto& [lam, m] : spec.eigenpairs) {
      best = std::min(best, acot_principal(lam));
      best = std::min(best, acot_principal(-lam));
    }
  } else {
    for (const auto& [lam, m] : spec.eigenpairs)
      if (lam != 0.0) best = std::min(best, 1.0 / std::abs(lam));
  }
  return best;
}

std::vector<FoliationModel> default_catalog() {
  std::vector<FoliationModel> v;
  v.push_back(FoliationModel::concentric_spheres(2));
  v.push_back(FoliationModel::concentric_spheres(3));
  v.push_back(FoliationModel::concentric_spheres(5));
  v.push_back(FoliationModel::spherical_cylinders(1, 3));
  v.push_back(FoliationModel::spherical_cylinders(2, 4));
  v.push_back(FoliationModel::isoparametric_sphere(1, 1));
  v.push_back(FoliationModel::isoparametric_sphere(1, 2));
  v.push_back(FoliationModel::isoparametric_sphere(2, 1, 1));
  v.push_back(FoliationModel::isoparametric_sphere(2, 1, 2));
  v.push_back(FoliationModel::isoparametric_sphere(2, 2, 2));
  v.push_back(FoliationModel::isoparametric_sphere(3, 1));
  v.push_back(FoliationModel::isoparametric_sphere(3, 2));
  return v;
}

}  // namespace isoflow::catalog
