#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isoflow/common.hpp"

namespace isoflow::catalog {

enum class AmbientKind { Euclidean, UnitSphere };

/// Ambient manifold: flat R^n or the round unit sphere S^n (n = manifold dimension).
struct AmbientSpace {
  AmbientKind kind = AmbientKind::Euclidean;
  int dim = 2;
};

/// One singular end of the quotient interval.
///   coordinate      - its theta value (0 or theta_max)
///   dimension_drop  - regular leaf dimension minus singular leaf dimension
///   minimal         - whether the singular leaf is a minimal submanifold
struct SingularEndpoint {
  double coordinate = 0.0;
  int dimension_drop = 1;
  bool minimal = true;
};

/// Eigenvalues (with multiplicity) of the radial shape operator A_{grad r},
/// oriented so that trace = <H, grad r> with grad r pointing away from the
/// theta = 0 endpoint.  For a shrinking round leaf the trace is negative.
struct ShapeSpectrum {
  std::vector<std::pair<double, int>> eigenpairs;

  double trace() const;
  double sup_norm() const;
  int leaf_dim() const;
  /// Signed flat-geometry focal distances 1/lambda (lambda != 0 only); a
  /// positive value is a focal point in the +grad r direction.
  std::vector<double> focal_distances() const;
  /// Spectrum of the shape operator with the opposite normal orientation.
  ShapeSpectrum negated() const;
};

enum class ModelKind { ConcentricSpheres, SphericalCylinders, IsoparametricSphere };

/// A closed codimension-one foliation with one-dimensional leaf space,
/// parametrized by arc length theta in (0, theta_max) measured from the lower
/// singular leaf.  Three families:
///   ConcentricSpheres(n)      - spheres S^{n-1}(theta) in R^n
///   SphericalCylinders(k, n)  - S^k(theta) x R^{n-k-1} in R^n
///   IsoparametricSphere(g,m0,m1) - cohomogeneity-one isoparametric family on
///       the unit sphere; principal curvatures -cot(theta + k pi/g) with
///       multiplicities alternating m0, m1; theta_max = pi/g.
class FoliationModel {
 public:
  static FoliationModel concentric_spheres(int n);
  static FoliationModel spherical_cylinders(int k, int n);
  static FoliationModel isoparametric_sphere(int g, int m0, int m1 = -1);

  ModelKind kind() const { return kind_; }
  AmbientSpace ambient() const { return ambient_; }
  /// +infinity for Euclidean models.
  double theta_max() const { return theta_max_; }
  SingularEndpoint lower_endpoint() const { return lower_; }
  std::optional<SingularEndpoint> upper_endpoint() const { return upper_; }

  int n() const { return n_; }
  int k() const { return k_; }
  int g() const { return g_; }
  int m0() const { return m0_; }
  int m1() const { return m1_; }

  /// Multiplicity of the k-th curvature block, m_{k mod 2}.
  int block_multiplicity(int block) const { return block % 2 == 0 ? m0_ : m1_; }

  /// True when the parameters correspond to a classically realizable family.
  /// Inadmissible triples are constructible (hypothetical spectra) but flagged.
  bool admissible() const;

  std::string kind_slug() const;
  std::string name() const;

  /// Throws DomainError naming the violated endpoint if theta is not interior.
  void require_interior(double theta) const;

 private:
  FoliationModel() = default;
  ModelKind kind_ = ModelKind::ConcentricSpheres;
  AmbientSpace ambient_{};
  double theta_max_ = 0.0;
  SingularEndpoint lower_{};
  std::optional<SingularEndpoint> upper_;
  int n_ = 0, k_ = 0, g_ = 0, m0_ = 0, m1_ = 0;
};

struct QuotientInterval {
  double theta_max;  // +infinity for Euclidean models
  SingularEndpoint lower;
  std::optional<SingularEndpoint> upper;
};

/// Analytic radial shape-operator spectrum at quotient coordinate theta.
ShapeSpectrum spectrum_at(const FoliationModel& model, double theta);

/// tr A_{grad r} = <H, grad r>; the reduced flow velocity d theta/dt.
double mean_curvature_trace(const FoliationModel& model, double theta);

/// Leaf volume density V(theta) up to a model-wide constant; consumers must
/// use only ratios or log-derivatives.
double volume_density(const FoliationModel& model, double theta);

/// log V(theta) up to an additive constant.
double log_volume_density(const FoliationModel& model, double theta);

/// d/d theta log V(theta) = -mean_curvature_trace (exact identity).
double dlog_volume_density(const FoliationModel& model, double theta);

QuotientInterval quotient_interval(const FoliationModel& model);

/// Quotient coordinate of the unique minimal regular leaf (sphere models only).
std::optional<double> minimal_leaf_theta(const FoliationModel& model);

/// Distance from the leaf at theta to the singular strata: min(theta,
/// theta_max - theta) on spheres, theta in Euclidean models.
double strata_distance(const FoliationModel& model, double theta);

/// Distance from the leaf at theta to its first focal point, in the ambient
/// geometry (arccot-based on spheres, reciprocal eigenvalues in flat space).
double first_focal_distance(const FoliationModel& model, double theta);

/// The models every verification suite runs over.
std::vector<FoliationModel> default_catalog();

}  // namespace isoflow::catalog
