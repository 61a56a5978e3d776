#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>
#include <vector>

#include "isoflow/catalog.hpp"

namespace isoflow::extrinsic {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A foliation realized as level sets of an ambient function F.  For sphere
/// ambients F lives on R^{n+1} and leaves are F^{-1}(c) intersected with S^n.
/// Instances supply analytic gradients and Hessians; finite-difference
/// fallbacks are available for cross-checks.
class LevelSetFunction {
 public:
  virtual ~LevelSetFunction() = default;

  virtual double evaluate(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
  virtual catalog::AmbientSpace ambient() const = 0;
  virtual const catalog::FoliationModel& model_link() const = 0;
  /// Quotient coordinate of the leaf through x.
  virtual double theta(const Vec& x) const = 0;
  /// A point on the leaf at quotient coordinate theta (randomized position).
  virtual Vec point_at(double theta, std::mt19937_64& rng) const = 0;
  /// +1 when grad F points away from the theta = 0 leaf, -1 otherwise.
  virtual int orientation() const = 0;

  /// Embedding dimension of the ambient chart (n, or n+1 for sphere models).
  int space_dim() const;

  Vec gradient_fd(const Vec& x) const;
  Mat hessian_fd(const Vec& x) const;

  /// Gradient and Hessian agree with central differences of evaluate at
  /// relative tolerance 1e-5 on randomly sampled leaf points.
  bool self_test(std::mt19937_64& rng, int samples = 20, double* worst = nullptr) const;
};

/// Level-set realization for the model, when one is implemented (all Euclidean
/// models, g = 1, 2 for any multiplicities, g = 3 for m in {1, 2}).
std::unique_ptr<LevelSetFunction> make_level_set(const catalog::FoliationModel& model);

/// Unit normal of the leaf through x, oriented away from the theta = 0 leaf.
/// Throws SingularPointError when the tangential gradient is below 1e-10.
Vec unit_normal(const LevelSetFunction& f, const Vec& x);

struct ShapeOperatorResult {
  Mat matrix;          // in the tangent_basis columns
  Vec eigenvalues;     // ascending
  Mat tangent_basis;   // space_dim x leaf_dim, orthonormal
  double symmetry_residual;
};

/// Shape operator of the leaf through x with respect to unit_normal, as a
/// symmetric operator on the leaf tangent space (sphere ambients include the
/// second-fundamental-form correction of the sphere).
ShapeOperatorResult shape_operator(const LevelSetFunction& f, const Vec& x);

/// Trace of the shape operator = <H, grad r>; computed without the
/// eigendecomposition.
double trace_radial(const LevelSetFunction& f, const Vec& x);

enum class PathTermination { Completed, SingularSet };

struct ParticlePath {
  std::vector<double> times;
  std::vector<Vec> points;
  PathTermination termination = PathTermination::Completed;
};

/// Fixed-step RK4 integration of dx/dt = trace_radial(x) unit_normal(x);
/// sphere ambients are re-projected to the sphere after every step.  The path
/// is truncated (termination = SingularSet) when the leaf comes within either
/// 1e-6 of the singular set (interval scale units) or one overshoot length
/// 2 dt |trace| of it.
ParticlePath particle_mcf_flow(const LevelSetFunction& f, const Vec& x0, double t_end,
                               double dt);

}  // namespace isoflow::extrinsic
