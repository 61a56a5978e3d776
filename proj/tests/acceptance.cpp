// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria.  Run via ctest or directly (ISOFLOW_BIN must point at the
// CLI binary for the robustness criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "isoflow/comparison.hpp"
#include "isoflow/diagnostics.hpp"
#include "isoflow/extrinsic.hpp"
#include "isoflow/verify.hpp"

using namespace isoflow;
using catalog::AmbientKind;
using catalog::FoliationModel;

namespace {

constexpr double kPi = std::numbers::pi;
int g_failures = 0;

void report(int criterion, const std::string& title, bool passed, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", passed ? "PASS" : "FAIL", criterion,
              title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!passed) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct SingularRun {
  FoliationModel model;
  double theta0;
  flow::FlowTrace trace;
  double T;
  catalog::SingularEndpoint endpoint;
};

std::vector<FoliationModel> sphere_models() {
  std::vector<FoliationModel> out;
  for (const auto& m : catalog::default_catalog())
    if (m.ambient().kind == AmbientKind::UnitSphere) out.push_back(m);
  return out;
}

// --------------------------------------------------------------------------

void criterion1() {
  struct Case {
    FoliationModel model;
    double theta0;
  };
  std::vector<Case> cases;
  for (int n : {2, 3, 5})
    for (double theta0 : {0.5, 1.0, 2.0})
      cases.push_back({FoliationModel::concentric_spheres(n), theta0});
  for (double theta0 : {0.5, 1.0, 2.0})
    cases.push_back({FoliationModel::isoparametric_sphere(1, 1), theta0});
  for (double theta0 : {0.5, 1.0})  // theta_max = pi/2 excludes theta0 = 2
    cases.push_back({FoliationModel::isoparametric_sphere(2, 1, 1), theta0});

  bool ok = true;
  double worst_theta = 0.0, worst_T = 0.0, worst_time = 0.0;
  for (const auto& c : cases) {
    const auto start = std::chrono::steady_clock::now();
    const auto trace = flow::integrate(c.model, c.theta0);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    worst_time = std::max(worst_time, elapsed);
    if (elapsed >= 1.0) ok = false;
    if (trace.termination != flow::Termination::ReachedSingularSet) {
      ok = false;
      continue;
    }
    const double scale =
        std::isfinite(c.model.theta_max()) ? c.model.theta_max() : c.theta0;
    double worst = 0.0;
    for (const auto& s : trace.samples) {
      if (s.r < 10.0 * trace.theta_stop) break;
      worst = std::max(worst,
                       std::abs(s.theta - *flow::closed_form(c.model, c.theta0, s.t)));
    }
    worst_theta = std::max(worst_theta, worst / scale);
    if (worst > 1e-8 * scale) ok = false;
    const double T_err =
        std::abs(flow::singular_time(trace).T - *flow::closed_form_singular_time(c.model, c.theta0));
    worst_T = std::max(worst_T, T_err);
    if (T_err > 1e-6) ok = false;
  }
  report(1, "closed-form flow reproduction", ok,
         "max theta err " + fmt(worst_theta) + " of scale, max T err " + fmt(worst_T) +
             ", slowest run " + fmt(worst_time) + " s");
}

std::vector<SingularRun> criterion2() {
  std::vector<SingularRun> runs;
  bool ok = true;
  double worst = 0.0;
  int n_runs = 0;
  for (const auto& model : sphere_models()) {
    const double theta_star = *catalog::minimal_leaf_theta(model);
    for (int i = 1; i <= 11 && n_runs < 1000; ++i) {
      const double theta0 = model.theta_max() * i / 12.0;
      if (std::abs(theta0 - theta_star) < 0.02 * model.theta_max()) continue;
      auto trace = flow::integrate(model, theta0);
      if (trace.termination != flow::Termination::ReachedSingularSet) {
        ok = false;
        continue;
      }
      const double T = flow::singular_time(trace).T;
      const auto ep = diagnostics::limit_leaf(model, trace);
      const auto t1 = diagnostics::type1_statistic(trace, T);
      const double predicted = 1.0 / (2.0 * ep.dimension_drop);
      if (!std::isfinite(t1.stat) || !std::isfinite(t1.limit)) ok = false;
      const double rel = std::abs(t1.limit - predicted) / predicted;
      worst = std::max(worst, rel);
      if (rel > 0.01) ok = false;
      runs.push_back({model, theta0, std::move(trace), T, ep});
      ++n_runs;
    }
  }
  report(2, "type-I statistic = 1/(2D) for every sphere model and limit leaf", ok,
         std::to_string(runs.size()) + " runs, worst rel dev " + fmt(worst));
  return runs;
}

void criterion3(const std::vector<SingularRun>& runs) {
  bool ok = true;
  double worst_pairwise = -1e300;
  int within = 0;
  for (const auto& run : runs) {
    try {
      const auto cert = diagnostics::fit_bound_certificate(run.model, run.endpoint, 0.1);
      const auto window = diagnostics::rate_window(run.trace, run.T, cert);
      if (window.within_bounds) ++within;
      else ok = false;
      const double viol = diagnostics::pairwise_rate_violation(run.trace, cert);
      worst_pairwise = std::max(worst_pairwise, viol);
      if (viol > 1e-6) ok = false;
    } catch (const Error&) {
      ok = false;
    }
  }
  report(3, "two-sided rate bounds C1 sqrt(T-t) <= r <= C2 sqrt(T-t) at eps = 0.1", ok,
         std::to_string(within) + "/" + std::to_string(runs.size()) +
             " windows inside bounds, worst pairwise slack " + fmt(worst_pairwise));
}

void criterion4() {
  const auto results = verify::suite_bounds(catalog::default_catalog());
  int passed = 0;
  for (const auto& r : results) passed += r.passed;
  report(4, "certificate ladder: delta non-increasing, delta(0.01) <= 0.01, exact for flat",
         verify::all_passed(results),
         std::to_string(passed) + "/" + std::to_string(results.size()) + " model endpoints");
}

void criterion5() {
  const auto results = verify::suite_gradient(catalog::default_catalog());
  int passed = 0;
  for (const auto& r : results) passed += r.passed;
  report(5, "gradient-flow identities: residual <= 1e-6 on 1e4-sample flows, exact catalog identity",
         verify::all_passed(results),
         std::to_string(passed) + "/" + std::to_string(results.size()) + " checks");
}

void criterion6() {
  const auto results = verify::suite_sweep(sphere_models(), 50);
  int passed = 0;
  for (const auto& r : results) passed += r.passed;
  report(6, "finite-time singularity sweep on every sphere model (grid 50)",
         verify::all_passed(results),
         std::to_string(passed) + "/" + std::to_string(results.size()) + " models");
}

void criterion7() {
  bool ok = true;
  std::string detail;
  try {
    const double ref = 1.0 - std::exp(-kPi);
    if (std::abs(comparison::sigma_closed_form(1.25) - ref) > 1e-9) ok = false;
    if (std::abs(comparison::sigma_numeric(1.25) - ref) > 1e-9) ok = false;
    if (comparison::sigma_lower_bound(0.0).sigma != 1.0) ok = false;
    if (comparison::sigma_lower_bound(0.25).sigma != 1.0) ok = false;
    double worst = 1.0;
    for (const auto& model : sphere_models()) {
      const double ratio = comparison::focal_strata_check(model, 1.0);
      worst = std::min(worst, ratio);
      if (ratio < comparison::sigma_lower_bound(1.0).sigma - 1e-12) ok = false;
    }
    detail = "sigma(1.25) two-route match, worst focal/strata ratio " + fmt(worst);
  } catch (const Error& e) {
    ok = false;
    detail = e.what();
  }
  report(7, "conjugate-point solver and focal/strata bound", ok, detail);
}

void criterion8() {
  const auto results = verify::suite_volume(catalog::default_catalog());
  int passed = 0;
  for (const auto& r : results) passed += r.passed;
  report(8, "volume comparison j <= jbar <= 1 at minimal leaves; Riccati/product identity",
         verify::all_passed(results),
         std::to_string(passed) + "/" + std::to_string(results.size()) + " checks");
}

void criterion9() {
  const auto results = verify::suite_extrinsic(catalog::default_catalog());
  int passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::string first_fail;
  for (const auto& r : results)
    if (!r.passed && first_fail.empty()) first_fail = r.name + ": " + r.detail;
  report(9, "extrinsic level-set oracle agreement and particle/reduced flow match",
         verify::all_passed(results),
         std::to_string(passed) + "/" + std::to_string(results.size()) + " checks" +
             (first_fail.empty() ? "" : "; first failure " + first_fail));
}

void criterion10() {
  const char* bin = std::getenv("ISOFLOW_BIN");
  if (!bin) {
    report(10, "CLI robustness", false, "ISOFLOW_BIN not set");
    return;
  }
  char tmpl[] = "/tmp/isoflow_acc_XXXXXX";
  const char* dir = mkdtemp(tmpl);
  if (!dir) {
    report(10, "CLI robustness", false, "cannot create temp dir");
    return;
  }
  const std::string devnull = std::string(dir) + "/sink.txt";

  std::mt19937_64 rng(kDefaultSeed);
  const std::vector<std::string> tokens = {
      "catalog", "list", "flow", "run", "sweep", "verify", "sigma", "--model", "--n",
      "--k", "--g", "--m0", "--theta0", "--check", "--grid", "--K", "--kind", "--suite",
      "concentric", "sphere-iso", "cylinders", "gibberish", "--bogus", "-1e99", "nan",
      "1.5", "0", "--trace", "--report", "--config", "/nonexistent/path.json",
  };
  std::uniform_int_distribution<std::size_t> pick(0, tokens.size() - 1);
  std::uniform_int_distribution<int> len(1, 6);
  bool ok = true;
  int bad_exit = -1;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::string cmd = std::string("'") + bin + "' 'garbage-subcommand'";
    const int n = len(rng);
    for (int i = 0; i < n; ++i) cmd += " '" + tokens[pick(rng)] + "'";
    cmd += " >" + devnull + " 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code != 2) {
      ok = false;
      bad_exit = code;
    }
  }

  // determinism: identical configs give byte-identical CSVs
  const std::string a = std::string(dir) + "/a.csv";
  const std::string b = std::string(dir) + "/b.csv";
  const std::string base = std::string("'") + bin +
                           "' flow run --model sphere-iso --g 1 --m0 2 --theta0 0.9 --trace ";
  if (std::system((base + a + " >" + devnull + " 2>&1").c_str()) != 0) ok = false;
  if (std::system((base + b + " >" + devnull + " 2>&1").c_str()) != 0) ok = false;
  const auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const std::string ta = slurp(a), tb = slurp(b);
  if (ta.empty() || ta != tb) ok = false;

  report(10, "CLI robustness: 1000 malformed invocations exit 2; byte-identical CSVs", ok,
         ok ? "all clean" : (bad_exit >= 0 ? "unexpected exit code " + std::to_string(bad_exit)
                                           : "determinism failure"));
}

}  // namespace

int main() {
  criterion1();
  const auto runs = criterion2();
  criterion3(runs);
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf("%s: %d/10 criteria passed\n", g_failures == 0 ? "OK" : "FAILED",
              10 - g_failures);
  return g_failures;
}
