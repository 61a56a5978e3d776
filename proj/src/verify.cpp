#include "isoflow/verify.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "isoflow/comparison.hpp"
#include "isoflow/diagnostics.hpp"
#include "isoflow/extrinsic.hpp"

namespace isoflow::verify {

using catalog::AmbientKind;
using catalog::FoliationModel;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

CheckResult make(const std::string& name, bool ok, const std::string& detail) {
  return {name, ok, detail};
}

}  // namespace

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

double representative_theta0(const FoliationModel& model) {
  if (model.ambient().kind == AmbientKind::UnitSphere)
    return 0.6 * *catalog::minimal_leaf_theta(model);
  return 1.0;
}

std::vector<CheckResult> suite_bounds(const Models& models) {
  std::vector<CheckResult> out;
  const std::vector<double> ladder = {0.3, 0.1, 0.03, 0.01};
  for (const auto& model : models) {
    std::vector<catalog::SingularEndpoint> endpoints = {model.lower_endpoint()};
    if (model.upper_endpoint()) endpoints.push_back(*model.upper_endpoint());
    for (const auto& ep : endpoints) {
      bool ok = true;
      std::ostringstream detail;
      double prev_delta = 1.0, prev_c = std::numeric_limits<double>::infinity();
      double delta_last = 0.0;
      try {
        for (double eps : ladder) {
          const auto cert = diagnostics::fit_bound_certificate(model, ep, eps);
          if (cert.delta > prev_delta + 1e-12 || cert.c > prev_c + 1e-12) ok = false;
          prev_delta = cert.delta;
          prev_c = cert.c;
          delta_last = cert.delta;
          detail << "eps=" << eps << " delta=" << fmt(cert.delta) << " c=" << fmt(cert.c)
                 << "; ";
          if (model.ambient().kind == AmbientKind::Euclidean &&
              (cert.delta != 0.0 || cert.c != 0.0))
            ok = false;
        }
        if (delta_last > 0.01) ok = false;
      } catch (const Error& e) {
        ok = false;
        detail << e.what();
      }
      out.push_back(make(model.name() + " endpoint@" + fmt(ep.coordinate), ok, detail.str()));
    }
  }
  return out;
}

std::vector<CheckResult> suite_sweep(const Models& models, int grid) {
  std::vector<CheckResult> out;
  for (const auto& model : models) {
    if (model.ambient().kind != AmbientKind::UnitSphere) continue;
    try {
      const auto sweep = diagnostics::finite_time_sweep(model, grid);
      bool ok = sweep.all_finite;
      std::ostringstream detail;
      detail << sweep.table.size() << " runs, all finite: " << (ok ? "yes" : "no");
      if (model.kind() == catalog::ModelKind::IsoparametricSphere && model.g() == 1 &&
          model.m0() == 1) {
        double worst = 0.0;
        for (const auto& [theta0, T] : sweep.table)
          worst = std::max(worst, std::abs(T - (-std::log(std::abs(std::cos(theta0))))));
        detail << ", |T + log cos theta0| <= " << fmt(worst);
        if (worst > 1e-6) ok = false;
      }
      out.push_back(make(model.name() + " finite-time sweep", ok, detail.str()));
    } catch (const Error& e) {
      out.push_back(make(model.name() + " finite-time sweep", false, e.what()));
    }
  }
  return out;
}

std::vector<CheckResult> suite_sigma(const Models& models, double K) {
  std::vector<CheckResult> out;
  const std::vector<double> ks = {0.0, 0.1, 0.25, 0.3, 1.25, 10.0};
  bool ok = true;
  std::ostringstream detail;
  try {
    for (double k : ks) {
      const auto s = comparison::sigma_lower_bound(k);  // throws if routes disagree
      detail << "K=" << k << " sigma=" << fmt(s.sigma) << "; ";
    }
    const double ref = 1.0 - std::exp(-std::numbers::pi);
    if (std::abs(comparison::sigma_lower_bound(1.25).sigma - ref) > 1e-9) ok = false;
    if (comparison::sigma_lower_bound(0.0).sigma != 1.0) ok = false;
    if (comparison::sigma_lower_bound(0.25).sigma != 1.0) ok = false;
  } catch (const Error& e) {
    ok = false;
    detail << e.what();
  }
  out.push_back(make("sigma closed-form vs numeric", ok, detail.str()));

  for (const auto& model : models) {
    try {
      const double ratio = comparison::focal_strata_check(model, K);
      const double sigma = comparison::sigma_lower_bound(K).sigma;
      out.push_back(make(model.name() + " focal/strata ratio", ratio >= sigma - 1e-12,
                         "worst ratio " + fmt(ratio) + " vs sigma " + fmt(sigma)));
    } catch (const Error& e) {
      out.push_back(make(model.name() + " focal/strata ratio", false, e.what()));
    }
  }
  return out;
}

std::vector<CheckResult> suite_volume(const Models& models, unsigned long long seed) {
  std::vector<CheckResult> out;
  for (const auto& model : models) {
    if (model.ambient().kind != AmbientKind::UnitSphere) continue;
    try {
      const auto check = comparison::volume_local_max_check(model);
      out.push_back(make(model.name() + " volume local max", check.passed,
                         "margin " + fmt(check.margin)));
    } catch (const Error& e) {
      out.push_back(make(model.name() + " volume local max", false, e.what()));
    }
  }

  // Product-formula vs Riccati-integration identity on random spectra with
  // eigenvalues in [-1, 1], so the comparison interval reaches s = 1.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lam(-1.0, 1.0);
  std::uniform_int_distribution<int> count(1, 4), mult(1, 3);
  bool ok = true;
  std::string err;
  for (int trial = 0; trial < 100 && ok; ++trial) {
    catalog::ShapeSpectrum spec;
    const int k = count(rng);
    for (int i = 0; i < k; ++i) spec.eigenpairs.push_back({lam(rng), mult(rng)});
    const double s_hi = 0.9 * std::min(comparison::jbar_s_max(spec), 1.2);
    try {
      for (int i = 1; i <= 8; ++i) comparison::riccati_jbar(spec, s_hi * i / 8.0);
    } catch (const Error& e) {
      ok = false;
      err = e.what();
    }
  }
  out.push_back(make("riccati vs product jbar (100 random spectra)", ok, err));
  return out;
}

flow::FlowTrace gradient_suite_trace(const FoliationModel& model, int min_samples) {
  const double theta0 = representative_theta0(model);
  flow::FlowOptions coarse;
  // Time differencing cannot certify 1e-6 near the blow-up (the third
  // derivative of log vol grows like (T-t)^-3), so the run stops well outside.
  coarse.theta_stop = 0.65 * theta0;
  const auto pre = flow::integrate(model, theta0, coarse);
  flow::FlowOptions fine = coarse;
  fine.max_step = pre.samples.back().t / (1.2 * min_samples);
  return flow::integrate(model, theta0, fine);
}

std::vector<CheckResult> suite_gradient(const Models& models) {
  std::vector<CheckResult> out;
  for (const auto& model : models) {
    try {
      const auto trace = gradient_suite_trace(model);
      const double res = diagnostics::gradient_flow_check(model, trace);
      const bool enough = trace.samples.size() >= 10000;
      out.push_back(make(model.name() + " gradient-flow residual",
                         res <= 1e-6 && enough,
                         "max residual " + fmt(res) + " over " +
                             std::to_string(trace.samples.size()) + " samples"));
    } catch (const Error& e) {
      out.push_back(make(model.name() + " gradient-flow residual", false, e.what()));
    }

    // trace = -d/dtheta log V: exact identity plus central differences.
    const double hi =
        std::isfinite(model.theta_max()) ? model.theta_max() * (1 - 1e-9) : 4.0;
    double worst_exact = 0.0, worst_fd = 0.0;
    const double eps3 = std::cbrt(std::numeric_limits<double>::epsilon());
    for (int i = 0; i <= 200; ++i) {
      const double theta = hi * (0.02 + 0.96 * i / 200.0);
      worst_exact = std::max(worst_exact,
                             std::abs(catalog::mean_curvature_trace(model, theta) +
                                      catalog::dlog_volume_density(model, theta)));
      const double room =
          std::isfinite(model.theta_max()) ? std::min(theta, hi - theta) : theta;
      const double d = eps3 * room;
      if (!(d > 0)) continue;
      const double fd = (catalog::log_volume_density(model, theta + d) -
                         catalog::log_volume_density(model, theta - d)) /
                        (2.0 * d);
      worst_fd = std::max(worst_fd,
                          std::abs(catalog::mean_curvature_trace(model, theta) + fd));
    }
    out.push_back(make(model.name() + " trace = -dlogV identity",
                       worst_exact <= 1e-10 && worst_fd <= 1e-6,
                       "analytic " + fmt(worst_exact) + ", fd " + fmt(worst_fd)));
  }
  return out;
}

std::vector<CheckResult> suite_extrinsic(const Models& models, unsigned long long seed) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  for (const auto& model : models) {
    const auto ls = extrinsic::make_level_set(model);
    if (!ls) continue;
    const double hi = std::isfinite(model.theta_max()) ? model.theta_max() : 3.0;
    std::uniform_real_distribution<double> u(0.05, 0.95);

    double worst_self = 0.0;
    bool self_ok = ls->self_test(rng, 20, &worst_self);
    out.push_back(make(model.name() + " level-set derivative self-test", self_ok,
                       "worst rel err " + fmt(worst_self)));

    double worst_an = 0.0, worst_fd = 0.0, worst_focal = 0.0;
    bool ok = true;
    std::string err;
    try {
      for (int i = 0; i < 200; ++i) {
        const double theta = u(rng) * hi;
        const extrinsic::Vec x = ls->point_at(theta, rng);
        const double want = catalog::mean_curvature_trace(model, theta);
        worst_an = std::max(worst_an, std::abs(extrinsic::trace_radial(*ls, x) - want));
        {
          // Finite-difference Hessian route.
          const auto op = extrinsic::shape_operator(*ls, x);
          double tr_fd = 0.0;
          const extrinsic::Mat hf = ls->hessian_fd(x);
          const extrinsic::Mat T = op.tangent_basis;
          const extrinsic::Vec g = ls->gradient(x);
          if (model.ambient().kind == AmbientKind::UnitSphere) {
            const extrinsic::Vec xh = x / x.norm();
            const extrinsic::Vec gt = g - g.dot(xh) * xh;
            tr_fd = -( (T.transpose() * hf * T).trace() - g.dot(xh) * T.cols() ) / gt.norm();
            tr_fd *= ls->orientation();
          } else {
            tr_fd = -(T.transpose() * hf * T).trace() / g.norm() * ls->orientation();
          }
          worst_fd = std::max(worst_fd, std::abs(tr_fd - want));

          // Focal distance reconstructed from the eigenvalues.
          double focal = std::numeric_limits<double>::infinity();
          for (int e = 0; e < op.eigenvalues.size(); ++e) {
            const double lam = op.eigenvalues[e];
            if (model.ambient().kind == AmbientKind::UnitSphere) {
              focal = std::min(focal, std::atan2(1.0, lam));
              focal = std::min(focal, std::atan2(1.0, -lam));
            } else if (std::abs(lam) > 1e-9) {
              focal = std::min(focal, 1.0 / std::abs(lam));
            }
          }
          worst_focal =
              std::max(worst_focal, std::abs(focal - catalog::first_focal_distance(model, theta)));
        }
      }
    } catch (const Error& e) {
      ok = false;
      err = e.what();
    }
    out.push_back(make(model.name() + " trace oracle agreement",
                       ok && worst_an <= 1e-6 && worst_fd <= 1e-4 && worst_focal <= 1e-6,
                       err.empty() ? "analytic " + fmt(worst_an) + ", fd " + fmt(worst_fd) +
                                         ", focal " + fmt(worst_focal)
                                   : err));

    // Leaf invariance: the particle flow reproduces the reduced flow.
    if (model.ambient().kind == AmbientKind::UnitSphere ||
        model.kind() == catalog::ModelKind::ConcentricSpheres ||
        model.kind() == catalog::ModelKind::SphericalCylinders) {
      double worst_path = 0.0;
      bool path_ok = true;
      std::string path_err;
      try {
        for (int i = 1; i <= 10; ++i) {
          double theta0 = hi * i / 11.0;
          if (model.ambient().kind == AmbientKind::UnitSphere) {
            const double ts = *catalog::minimal_leaf_theta(model);
            if (std::abs(theta0 - ts) < 0.05 * hi) continue;  // skip near-minimal starts
          }
          flow::FlowOptions opts;
          const auto reduced = flow::integrate(model, theta0, opts);
          if (reduced.termination != flow::Termination::ReachedSingularSet) continue;
          const double T = flow::singular_time(reduced).T;
          const double t_end = 0.9 * T;
          const extrinsic::Vec x0 = ls->point_at(theta0, rng);
          const auto path = extrinsic::particle_mcf_flow(*ls, x0, t_end, t_end / 4000.0);
          if (path.termination != extrinsic::PathTermination::Completed) continue;
          flow::FlowOptions to_t;
          to_t.t_max = t_end;
          const auto ref = flow::integrate(model, theta0, to_t);
          worst_path = std::max(
              worst_path, std::abs(ls->theta(path.points.back()) - ref.samples.back().theta));
        }
      } catch (const Error& e) {
        path_ok = false;
        path_err = e.what();
      }
      out.push_back(make(model.name() + " particle vs reduced flow",
                         path_ok && worst_path <= 1e-6,
                         path_err.empty() ? "worst |theta diff| " + fmt(worst_path) : path_err));
    }
  }
  return out;
}

}  // namespace isoflow::verify
