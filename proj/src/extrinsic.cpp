#include "isoflow/extrinsic.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace isoflow::extrinsic {

using catalog::AmbientKind;
using catalog::FoliationModel;
using catalog::ModelKind;

namespace {

constexpr double kTangentialGradientFloor = 1e-10;

Vec random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  return v / v.norm();
}

double clamp1(double x) { return std::min(1.0, std::max(-1.0, x)); }

// ---------------------------------------------------------------------------
// Euclidean families

class ConcentricLevelSet final : public LevelSetFunction {
 public:
  explicit ConcentricLevelSet(FoliationModel m) : model_(std::move(m)) {}
  double evaluate(const Vec& x) const override { return x.squaredNorm(); }
  Vec gradient(const Vec& x) const override { return 2.0 * x; }
  Mat hessian(const Vec& x) const override {
    return 2.0 * Mat::Identity(x.size(), x.size());
  }
  catalog::AmbientSpace ambient() const override { return model_.ambient(); }
  const FoliationModel& model_link() const override { return model_; }
  double theta(const Vec& x) const override { return x.norm(); }
  Vec point_at(double th, std::mt19937_64& rng) const override {
    return th * random_unit(model_.n(), rng);
  }
  int orientation() const override { return +1; }

 private:
  FoliationModel model_;
};

class CylinderLevelSet final : public LevelSetFunction {
 public:
  explicit CylinderLevelSet(FoliationModel m) : model_(std::move(m)) {}
  double evaluate(const Vec& x) const override {
    return x.head(model_.k() + 1).squaredNorm();
  }
  Vec gradient(const Vec& x) const override {
    Vec g = Vec::Zero(x.size());
    g.head(model_.k() + 1) = 2.0 * x.head(model_.k() + 1);
    return g;
  }
  Mat hessian(const Vec& x) const override {
    Mat h = Mat::Zero(x.size(), x.size());
    for (int i = 0; i <= model_.k(); ++i) h(i, i) = 2.0;
    return h;
  }
  catalog::AmbientSpace ambient() const override { return model_.ambient(); }
  const FoliationModel& model_link() const override { return model_; }
  double theta(const Vec& x) const override {
    return x.head(model_.k() + 1).norm();
  }
  Vec point_at(double th, std::mt19937_64& rng) const override {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec x = Vec::Zero(model_.n());
    x.head(model_.k() + 1) = th * random_unit(model_.k() + 1, rng);
    for (int i = model_.k() + 1; i < model_.n(); ++i) x[i] = gauss(rng);
    return x;
  }
  int orientation() const override { return +1; }

 private:
  FoliationModel model_;
};

// ---------------------------------------------------------------------------
// Sphere families.  All use the normalization F = cos(g theta) |x|^g, so the
// gradient points toward decreasing theta.

class HeightLevelSet final : public LevelSetFunction {  // g = 1
 public:
  explicit HeightLevelSet(FoliationModel m) : model_(std::move(m)) {}
  double evaluate(const Vec& x) const override { return x[x.size() - 1]; }
  Vec gradient(const Vec& x) const override {
    Vec g = Vec::Zero(x.size());
    g[x.size() - 1] = 1.0;
    return g;
  }
  Mat hessian(const Vec& x) const override { return Mat::Zero(x.size(), x.size()); }
  catalog::AmbientSpace ambient() const override { return model_.ambient(); }
  const FoliationModel& model_link() const override { return model_; }
  double theta(const Vec& x) const override {
    return std::acos(clamp1(x[x.size() - 1] / x.norm()));
  }
  Vec point_at(double th, std::mt19937_64& rng) const override {
    const int n = model_.n();
    Vec x(n + 1);
    x.head(n) = std::sin(th) * random_unit(n, rng);
    x[n] = std::cos(th);
    return x;
  }
  int orientation() const override { return -1; }

 private:
  FoliationModel model_;
};

class BlockQuadricLevelSet final : public LevelSetFunction {  // g = 2
 public:
  explicit BlockQuadricLevelSet(FoliationModel m)
      : model_(std::move(m)), p_(model_.m0() + 1), q_(model_.m1() + 1) {}
  double evaluate(const Vec& x) const override {
    return x.tail(q_).squaredNorm() - x.head(p_).squaredNorm();
  }
  Vec gradient(const Vec& x) const override {
    Vec g(x.size());
    g.head(p_) = -2.0 * x.head(p_);
    g.tail(q_) = 2.0 * x.tail(q_);
    return g;
  }
  Mat hessian(const Vec& x) const override {
    Mat h = Mat::Zero(x.size(), x.size());
    for (int i = 0; i < p_; ++i) h(i, i) = -2.0;
    for (int i = p_; i < p_ + q_; ++i) h(i, i) = 2.0;
    return h;
  }
  catalog::AmbientSpace ambient() const override { return model_.ambient(); }
  const FoliationModel& model_link() const override { return model_; }
  double theta(const Vec& x) const override {
    return 0.5 * std::acos(clamp1(evaluate(x) / x.squaredNorm()));
  }
  Vec point_at(double th, std::mt19937_64& rng) const override {
    Vec x(p_ + q_);
    x.head(p_) = std::sin(th) * random_unit(p_, rng);
    x.tail(q_) = std::cos(th) * random_unit(q_, rng);
    return x;
  }
  int orientation() const override { return -1; }

 private:
  FoliationModel model_;
  int p_, q_;
};

// g = 3: F = sqrt(6) tr(X^3) on the space of traceless self-adjoint 3x3
// matrices over R (m = 1, dim 5) or C (m = 2, dim 8), with the inner product
// Re tr(AB).  The leaves are the isospectral orbits, F = cos(3 theta) on the
// unit sphere.
template <typename Scalar>
struct JordanBasis {
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
  static std::vector<Mat3> make();
};

template <>
std::vector<Eigen::Matrix3d> JordanBasis<double>::make() {
  std::vector<Eigen::Matrix3d> b;
  Eigen::Matrix3d e;
  e.setZero();
  e(0, 0) = 1, e(1, 1) = -1;
  b.push_back(e / std::sqrt(2.0));
  e.setZero();
  e(0, 0) = 1, e(1, 1) = 1, e(2, 2) = -2;
  b.push_back(e / std::sqrt(6.0));
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (auto& pq : pairs) {
    e.setZero();
    e(pq[0], pq[1]) = 1, e(pq[1], pq[0]) = 1;
    b.push_back(e / std::sqrt(2.0));
  }
  return b;
}

template <>
std::vector<Eigen::Matrix3cd> JordanBasis<std::complex<double>>::make() {
  using C = std::complex<double>;
  std::vector<Eigen::Matrix3cd> b;
  for (const auto& re : JordanBasis<double>::make()) b.push_back(re.cast<C>());
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (auto& pq : pairs) {
    Eigen::Matrix3cd e = Eigen::Matrix3cd::Zero();
    e(pq[0], pq[1]) = C(0, 1), e(pq[1], pq[0]) = C(0, -1);
    b.push_back(e / std::sqrt(2.0));
  }
  return b;
}

template <typename Scalar>
class CartanCubicLevelSet final : public LevelSetFunction {
 public:
  using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

  explicit CartanCubicLevelSet(FoliationModel m)
      : model_(std::move(m)), basis_(JordanBasis<Scalar>::make()) {}

  Mat3 assemble(const Vec& x) const {
    Mat3 X = Mat3::Zero();
    for (std::size_t i = 0; i < basis_.size(); ++i) X += Scalar(x[int(i)]) * basis_[i];
    return X;
  }

  double evaluate(const Vec& x) const override {
    const Mat3 X = assemble(x);
    return kSqrt6 * std::real((X * X * X).trace());
  }
  Vec gradient(const Vec& x) const override {
    const Mat3 X2 = [&] {
      const Mat3 X = assemble(x);
      return Mat3(X * X);
    }();
    Vec g(int(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      g[int(i)] = 3.0 * kSqrt6 * std::real((X2 * basis_[i]).trace());
    return g;
  }
  Mat hessian(const Vec& x) const override {
    const Mat3 X = assemble(x);
    const int d = int(basis_.size());
    Mat h(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const double v = 3.0 * kSqrt6 *
                         std::real((X * (basis_[i] * basis_[j] + basis_[j] * basis_[i])).trace());
        h(i, j) = v;
        h(j, i) = v;
      }
    return h;
  }
  catalog::AmbientSpace ambient() const override { return model_.ambient(); }
  const FoliationModel& model_link() const override { return model_; }
  double theta(const Vec& x) const override {
    const double r = x.norm();
    return std::acos(clamp1(evaluate(x) / (r * r * r))) / 3.0;
  }
  Vec point_at(double th, std::mt19937_64& rng) const override {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat3 G;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if constexpr (std::is_same_v<Scalar, double>)
          G(i, j) = gauss(rng);
        else
          G(i, j) = Scalar(gauss(rng), gauss(rng));
      }
    const Mat3 Q = Eigen::HouseholderQR<Mat3>(G).householderQ();
    Mat3 D = Mat3::Zero();
    for (int k = 0; k < 3; ++k)
      D(k, k) = std::sqrt(2.0 / 3.0) *
                std::cos(th + 2.0 * std::numbers::pi * k / 3.0);
    const Mat3 X = Q * D * Q.adjoint();
    Vec x(int(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      x[int(i)] = std::real((X * basis_[i]).trace());
    return x;
  }
  int orientation() const override { return -1; }

 private:
  static inline const double kSqrt6 = std::sqrt(6.0);
  FoliationModel model_;
  std::vector<Mat3> basis_;
};

}  // namespace

int LevelSetFunction::space_dim() const {
  const auto amb = ambient();
  return amb.kind == AmbientKind::UnitSphere ? amb.dim + 1 : amb.dim;
}

Vec LevelSetFunction::gradient_fd(const Vec& x) const {
  const double eps3 = std::cbrt(std::numeric_limits<double>::epsilon());
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double h = eps3 * (1.0 + std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (evaluate(xp) - evaluate(xm)) / (2.0 * h);
  }
  return g;
}

Mat LevelSetFunction::hessian_fd(const Vec& x) const {
  const double eps3 = std::cbrt(std::numeric_limits<double>::epsilon());
  const double h = eps3 * (1.0 + x.norm());
  const int n = int(x.size());
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h, xpp[j] += h;
      xpm[i] += h, xpm[j] -= h;
      xmp[i] -= h, xmp[j] += h;
      xmm[i] -= h, xmm[j] -= h;
      const double v = (evaluate(xpp) - evaluate(xpm) - evaluate(xmp) + evaluate(xmm)) /
                       (4.0 * h * h);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

bool LevelSetFunction::self_test(std::mt19937_64& rng, int samples, double* worst) const {
  const auto& model = model_link();
  const double hi = std::isfinite(model.theta_max()) ? model.theta_max() : 3.0;
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double w = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Vec x = point_at(u(rng) * hi, rng);
    const Vec ga = gradient(x), gf = gradient_fd(x);
    const Mat ha = hessian(x), hf = hessian_fd(x);
    w = std::max(w, (ga - gf).cwiseAbs().maxCoeff() / (1.0 + ga.cwiseAbs().maxCoeff()));
    w = std::max(w, (ha - hf).cwiseAbs().maxCoeff() / (1.0 + ha.cwiseAbs().maxCoeff()));
  }
  if (worst) *worst = w;
  return w <= 1e-5;
}

std::unique_ptr<LevelSetFunction> make_level_set(const FoliationModel& model) {
  switch (model.kind()) {
    case ModelKind::ConcentricSpheres:
      return std::make_unique<ConcentricLevelSet>(model);
    case ModelKind::SphericalCylinders:
      return std::make_unique<CylinderLevelSet>(model);
    case ModelKind::IsoparametricSphere:
      if (model.g() == 1) return std::make_unique<HeightLevelSet>(model);
      if (model.g() == 2) return std::make_unique<BlockQuadricLevelSet>(model);
      if (model.g() == 3 && model.m0() == 1)
        return std::make_unique<CartanCubicLevelSet<double>>(model);
      if (model.g() == 3 && model.m0() == 2)
        return std::make_unique<CartanCubicLevelSet<std::complex<double>>>(model);
      return nullptr;
  }
  return nullptr;
}

namespace {

struct Frame {
  Vec grad;           // ambient gradient
  Vec nu_raw;         // unit normal in the +gradient direction (tangential on spheres)
  double gnorm;       // norm of the (tangential) gradient
  double grad_dot_x;  // <grad F, x>, sphere ambients only
  bool sphere;
};

Frame leaf_frame(const LevelSetFunction& f, const Vec& x) {
  Frame fr;
  fr.sphere = f.ambient().kind == AmbientKind::UnitSphere;
  fr.grad = f.gradient(x);
  if (fr.sphere) {
    const Vec xhat = x / x.norm();
    fr.grad_dot_x = fr.grad.dot(xhat);
    Vec gt = fr.grad - fr.grad_dot_x * xhat;
    fr.gnorm = gt.norm();
    if (fr.gnorm < kTangentialGradientFloor)
      throw SingularPointError("singular point: tangential gradient below threshold");
    fr.nu_raw = gt / fr.gnorm;
  } else {
    fr.grad_dot_x = 0.0;
    fr.gnorm = fr.grad.norm();
    if (fr.gnorm < kTangentialGradientFloor)
      throw SingularPointError("singular point: gradient below threshold");
    fr.nu_raw = fr.grad / fr.gnorm;
  }
  return fr;
}

}  // namespace

Vec unit_normal(const LevelSetFunction& f, const Vec& x) {
  return double(f.orientation()) * leaf_frame(f, x).nu_raw;
}

ShapeOperatorResult shape_operator(const LevelSetFunction& f, const Vec& x) {
  const Frame fr = leaf_frame(f, x);
  const int n = int(x.size());
  const int n_normals = fr.sphere ? 2 : 1;

  Mat normals(n, n_normals);
  if (fr.sphere) {
    normals.col(0) = x / x.norm();
    normals.col(1) = fr.nu_raw;
  } else {
    normals.col(0) = fr.nu_raw;
  }
  const Mat Q = Eigen::HouseholderQR<Mat>(normals).householderQ();
  const Mat T = Q.rightCols(n - n_normals);

  const Mat H = f.hessian(x);
  Mat M = -(T.transpose() * H * T) / fr.gnorm;
  if (fr.sphere)
    M += (fr.grad_dot_x / fr.gnorm) * Mat::Identity(n - n_normals, n - n_normals);
  M *= double(f.orientation());

  ShapeOperatorResult out;
  out.symmetry_residual = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (out.symmetry_residual > 1e-8)
    throw ConsistencyError("shape_operator: non-symmetric result beyond tolerance");
  const Mat Ms = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(Ms);
  out.matrix = Ms;
  out.eigenvalues = es.eigenvalues();
  out.tangent_basis = T;
  return out;
}

double trace_radial(const LevelSetFunction& f, const Vec& x) {
  const Frame fr = leaf_frame(f, x);
  const Mat H = f.hessian(x);
  double tr_tangent = H.trace() - fr.nu_raw.dot(H * fr.nu_raw);
  if (fr.sphere) {
    const Vec xhat = x / x.norm();
    tr_tangent -= xhat.dot(H * xhat);
  }
  const int leaf_dim = int(x.size()) - (fr.sphere ? 2 : 1);
  double tr = -tr_tangent / fr.gnorm;
  if (fr.sphere) tr += fr.grad_dot_x / fr.gnorm * leaf_dim;
  return double(f.orientation()) * tr;
}

ParticlePath particle_mcf_flow(const LevelSetFunction& f, const Vec& x0, double t_end,
                               double dt) {
  if (!(dt > 0.0) || t_end < 0.0)
    throw std::invalid_argument("particle_mcf_flow: need dt > 0 and t_end >= 0");
  const auto& model = f.model_link();
  const double scale = std::isfinite(model.theta_max()) ? model.theta_max() : f.theta(x0);
  const bool sphere = f.ambient().kind == AmbientKind::UnitSphere;

  const auto velocity = [&](const Vec& x) -> Vec {
    return trace_radial(f, x) * unit_normal(f, x);
  };

  ParticlePath path;
  Vec x = x0;
  double t = 0.0;
  path.times.push_back(t);
  path.points.push_back(x);

  while (t < t_end) {
    const double h = std::min(dt, t_end - t);
    try {
      const double tr = trace_radial(f, x);
      const double rho = catalog::strata_distance(model, f.theta(x));
      // Stop when the leaf is within the resolution floor of the singular set
      // or the next step could overshoot it.
      if (rho <= std::max(1e-6 * scale, 2.0 * h * std::abs(tr))) {
        path.termination = PathTermination::SingularSet;
        return path;
      }
      const Vec k1 = velocity(x);
      const Vec k2 = velocity(x + 0.5 * h * k1);
      const Vec k3 = velocity(x + 0.5 * h * k2);
      const Vec k4 = velocity(x + h * k3);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (sphere) x /= x.norm();
      if (!x.allFinite()) {
        path.termination = PathTermination::SingularSet;
        return path;
      }
    } catch (const SingularPointError&) {
      path.termination = PathTermination::SingularSet;
      return path;
    } catch (const DomainError&) {
      path.termination = PathTermination::SingularSet;
      return path;
    }
    t += h;
    path.times.push_back(t);
    path.points.push_back(x);
  }
  return path;
}

}  // namespace isoflow::extrinsic
