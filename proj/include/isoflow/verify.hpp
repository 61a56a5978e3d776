#pragma once

#include <string>
#include <vector>

#include "isoflow/catalog.hpp"
#include "isoflow/flow.hpp"

namespace isoflow::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using Models = std::vector<catalog::FoliationModel>;

/// Certificate ladder at epsilon in {0.3, 0.1, 0.03, 0.01} per model/endpoint:
/// delta and c non-increasing as epsilon shrinks, delta(0.01) <= 0.01, and
/// delta = c = 0 exactly for Euclidean models.
std::vector<CheckResult> suite_bounds(const Models& models);

/// Finite-time sweep over sphere models; for the g=1, m=1 family the
/// singular-time table is compared with -log|cos theta0| at 1e-6.
std::vector<CheckResult> suite_sweep(const Models& models, int grid = 50);

/// Conjugate-point solver: closed form vs numerical integration at 1e-9 on a
/// K ladder, the reference value at K = 1.25, and the focal/strata ratio
/// against sigma on every model.
std::vector<CheckResult> suite_sigma(const Models& models, double K = 1.0);

/// Volume comparison at minimal leaves plus the product-vs-Riccati identity on
/// randomly generated spectra.
std::vector<CheckResult> suite_volume(const Models& models,
                                      unsigned long long seed = kDefaultSeed);

/// Gradient-flow identities: flow runs sampled densely away from the blow-up
/// (finite differencing in t loses all accuracy as the singular time is
/// approached), with max residual 1e-6, plus the analytic and
/// finite-difference forms of trace = -d/dtheta log V on a theta grid.
std::vector<CheckResult> suite_gradient(const Models& models);

/// Extrinsic oracle: derivative self-tests, trace agreement against the
/// catalog (analytic Hessians 1e-6, finite-difference 1e-4), focal distances
/// from eigenvalues, and particle flows matched to the reduced flow.
std::vector<CheckResult> suite_extrinsic(const Models& models,
                                         unsigned long long seed = kDefaultSeed);

/// Flow options and start/stop geometry used by the gradient suite: the run
/// stops halfway to the singular set and is sampled with at least
/// min_samples points.
flow::FlowTrace gradient_suite_trace(const catalog::FoliationModel& model,
                                     int min_samples = 20000);

/// Non-minimal starting coordinate used by single-model suites.
double representative_theta0(const catalog::FoliationModel& model);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace isoflow::verify
