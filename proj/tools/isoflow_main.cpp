// isoflow: reduced mean curvature flow on one-dimensional leaf spaces.
// Subcommands: catalog list | flow run | flow sweep | verify | sigma.
// Exit codes: 0 success, 1 a requested check failed, 2 usage/config error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "isoflow/comparison.hpp"
#include "isoflow/diagnostics.hpp"
#include "isoflow/extrinsic.hpp"
#include "isoflow/serialize.hpp"
#include "isoflow/verify.hpp"

namespace {

using isoflow::Error;
using isoflow::catalog::AmbientKind;
using isoflow::catalog::FoliationModel;
using json = isoflow::serialize::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct ModelSpec {
  std::string kind;
  int n = 0, k = 0, g = 0, m0 = 0, m1 = -1;
};

FoliationModel build_model(const ModelSpec& spec) {
  if (spec.kind == "concentric" || spec.kind == "concentric_spheres")
    return FoliationModel::concentric_spheres(spec.n);
  if (spec.kind == "cylinders" || spec.kind == "spherical_cylinders")
    return FoliationModel::spherical_cylinders(spec.k, spec.n);
  if (spec.kind == "sphere-iso" || spec.kind == "isoparametric_sphere")
    return FoliationModel::isoparametric_sphere(spec.g, spec.m0, spec.m1);
  throw std::invalid_argument("unknown model kind '" + spec.kind +
                              "' (expect concentric | cylinders | sphere-iso)");
}

const std::set<std::string> kKnownChecks = {"type1", "rate",  "bounds",   "gradient",
                                            "volume", "sigma", "extrinsic"};

struct RunConfig {
  ModelSpec model;
  bool has_model = false;
  double theta0 = std::numeric_limits<double>::quiet_NaN();
  isoflow::flow::FlowOptions opts;
  std::vector<std::string> checks;
  std::string trace_csv;
  std::string report_json;
  double epsilon = 0.1;  // certificate radius for the rate check
  double K = 1.0;        // curvature-bound constant for the sigma check
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  json doc = json::parse(in);  // throws nlohmann parse_error on bad JSON

  const std::set<std::string> known_top = {"model",     "theta0",      "options", "checks",
                                           "trace_csv", "report_json", "epsilon", "K"};
  for (const auto& [key, val] : doc.items())
    if (!known_top.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");

  if (doc.contains("model")) {
    const auto& m = doc["model"];
    const std::set<std::string> known = {"kind", "n", "k", "g", "m0", "m1"};
    for (const auto& [key, val] : m.items())
      if (!known.count(key)) throw std::invalid_argument("unknown config key 'model." + key + "'");
    cfg.model.kind = m.value("kind", std::string());
    cfg.model.n = m.value("n", 0);
    cfg.model.k = m.value("k", 0);
    cfg.model.g = m.value("g", 0);
    cfg.model.m0 = m.value("m0", 0);
    cfg.model.m1 = m.value("m1", -1);
    cfg.has_model = true;
  }
  if (doc.contains("theta0")) cfg.theta0 = doc["theta0"].get<double>();
  if (doc.contains("options")) {
    const auto& o = doc["options"];
    const std::set<std::string> known = {"rel_tol", "abs_tol",       "theta_stop",
                                         "t_max",   "sample_stride", "max_step"};
    for (const auto& [key, val] : o.items())
      if (!known.count(key))
        throw std::invalid_argument("unknown config key 'options." + key + "'");
    cfg.opts.rel_tol = o.value("rel_tol", cfg.opts.rel_tol);
    cfg.opts.abs_tol = o.value("abs_tol", cfg.opts.abs_tol);
    cfg.opts.theta_stop = o.value("theta_stop", cfg.opts.theta_stop);
    cfg.opts.t_max = o.value("t_max", cfg.opts.t_max);
    cfg.opts.sample_stride = o.value("sample_stride", cfg.opts.sample_stride);
    if (o.contains("max_step") && !o["max_step"].is_null())
      cfg.opts.max_step = o["max_step"].get<double>();
  }
  if (doc.contains("checks")) {
    cfg.checks.clear();
    for (const auto& c : doc["checks"]) {
      const std::string name = c.get<std::string>();
      if (!kKnownChecks.count(name))
        throw std::invalid_argument("unknown check '" + name + "'");
      cfg.checks.push_back(name);
    }
  }
  if (doc.contains("trace_csv")) cfg.trace_csv = doc["trace_csv"].get<std::string>();
  if (doc.contains("report_json")) cfg.report_json = doc["report_json"].get<std::string>();
  if (doc.contains("epsilon")) cfg.epsilon = doc["epsilon"].get<double>();
  if (doc.contains("K")) cfg.K = doc["K"].get<double>();
}

void emit_report(const json& doc, const std::string& path) {
  if (path.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
  }
}

int run_flow(const RunConfig& cfg) {
  const FoliationModel model = build_model(cfg.model);
  if (!model.admissible())
    std::cerr << "warning: " << model.name()
              << " is not a classically admissible multiplicity triple; treating as a "
                 "hypothetical spectrum\n";
  if (!(cfg.theta0 == cfg.theta0))
    throw std::invalid_argument("flow run requires --theta0 (or a config value)");

  json doc;
  std::map<std::string, bool> checks;
  isoflow::diagnostics::SingularityReport report;
  isoflow::flow::FlowTrace trace;
  std::string error_field;
  try {
    trace = isoflow::flow::integrate(model, cfg.theta0, cfg.opts);
  } catch (const isoflow::DomainError&) {
    throw;  // config-level error: exit 2
  } catch (const Error& e) {
    // integrator failure: still emit a report with a machine-readable error
    doc = isoflow::serialize::report_document(model, cfg.theta0, cfg.opts, trace, report, {});
    doc["error"] = e.what();
    emit_report(doc, cfg.report_json);
    return kExitCheckFailed;
  }

  if (!cfg.trace_csv.empty()) {
    std::ofstream out(cfg.trace_csv, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open trace output " + cfg.trace_csv);
    isoflow::flow::write_csv(out, trace);
  }

  const bool singular =
      trace.termination == isoflow::flow::Termination::ReachedSingularSet;

  bool report_ok = true;
  if (singular) {
    try {
      const auto est = isoflow::flow::singular_time(trace);
      report.T = est.T;
      report.ci = est.ci;
      report.limit_endpoint = isoflow::diagnostics::limit_leaf(model, trace);
      const auto t1 = isoflow::diagnostics::type1_statistic(trace, est.T);
      report.type1_stat = t1.stat;
      report.type1_limit = t1.limit;
    } catch (const Error& e) {
      report_ok = false;
      error_field = e.what();
    }
  }

  for (const auto& name : cfg.checks) {
    try {
      if (name == "type1") {
        if (!singular) throw Error(std::string(termination_name(trace.termination)));
        if (!report_ok) throw Error("singularity analysis unavailable");
        const double predicted = 1.0 / (2.0 * report.limit_endpoint.dimension_drop);
        checks[name] = std::isfinite(report.type1_stat) &&
                       std::abs(report.type1_limit - predicted) <= 0.01 * predicted;
      } else if (name == "rate") {
        if (!singular) throw Error(std::string(termination_name(trace.termination)));
        if (!report_ok) throw Error("singularity analysis unavailable");
        const auto cert = isoflow::diagnostics::fit_bound_certificate(
            model, report.limit_endpoint, cfg.epsilon);
        report.certificate = cert;
        const auto window = isoflow::diagnostics::rate_window(trace, report.T, cert);
        report.rate_low = window.C_low;
        report.rate_high = window.C_high;
        report.rate_within_bounds = window.within_bounds;
        const double viol = isoflow::diagnostics::pairwise_rate_violation(trace, cert);
        checks[name] = window.within_bounds && viol <= 1e-6;
      } else if (name == "bounds") {
        checks[name] = isoflow::verify::all_passed(isoflow::verify::suite_bounds({model}));
      } else if (name == "gradient") {
        checks[name] = isoflow::diagnostics::gradient_flow_check(model, trace) <= 1e-6;
      } else if (name == "volume") {
        checks[name] = isoflow::comparison::volume_local_max_check(model).passed;
      } else if (name == "sigma") {
        checks[name] = isoflow::comparison::sigma_lower_bound(cfg.K).sigma > 0.0;
      } else if (name == "extrinsic") {
        checks[name] = isoflow::verify::all_passed(isoflow::verify::suite_extrinsic({model}));
      }
    } catch (const Error& e) {
      checks[name] = false;
      if (error_field.empty()) error_field = e.what();
    }
  }

  doc = isoflow::serialize::report_document(model, cfg.theta0, cfg.opts, trace, report, checks);
  if (!report_ok)
    for (const char* key : {"T", "ci", "limit_endpoint", "type1_stat", "type1_limit",
                            "rate_window"})
      doc.erase(key);
  if (!error_field.empty()) doc["error"] = error_field;
  emit_report(doc, cfg.report_json);

  if (!error_field.empty()) return kExitCheckFailed;
  for (const auto& [name, ok] : checks)
    if (!ok) return kExitCheckFailed;
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, int grid) {
  const FoliationModel model = build_model(cfg.model);
  const auto sweep = isoflow::diagnostics::finite_time_sweep(model, grid, cfg.opts);
  json doc;
  doc["tool_version"] = isoflow::kToolVersion;
  doc["model"] = isoflow::serialize::to_json(model);
  doc["grid"] = grid;
  doc["all_finite"] = sweep.all_finite;
  json table = json::array();
  for (const auto& [theta0, T] : sweep.table) table.push_back({{"theta0", theta0}, {"T", T}});
  doc["table"] = table;
  if (!sweep.failed_theta0.empty()) doc["failed_theta0"] = sweep.failed_theta0;
  emit_report(doc, cfg.report_json);
  return sweep.all_finite ? kExitOk : kExitCheckFailed;
}

int run_verify(const std::string& suite, const RunConfig& cfg, bool model_given, int grid) {
  std::vector<FoliationModel> models;
  if (model_given)
    models.push_back(build_model(cfg.model));
  else
    models = isoflow::catalog::default_catalog();

  std::map<std::string, std::vector<isoflow::verify::CheckResult>> suites;
  const auto want = [&](const char* s) { return suite == s || suite == "all"; };
  if (want("bounds")) suites["bounds"] = isoflow::verify::suite_bounds(models);
  if (want("sweep")) suites["sweep"] = isoflow::verify::suite_sweep(models, grid);
  if (want("sigma")) suites["sigma"] = isoflow::verify::suite_sigma(models, cfg.K);
  if (want("volume")) suites["volume"] = isoflow::verify::suite_volume(models);
  if (want("gradient")) suites["gradient"] = isoflow::verify::suite_gradient(models);
  if (want("extrinsic")) suites["extrinsic"] = isoflow::verify::suite_extrinsic(models);
  if (suites.empty())
    throw std::invalid_argument(
        "unknown suite '" + suite +
        "' (expect bounds | sweep | sigma | volume | gradient | extrinsic | all)");

  json doc;
  doc["tool_version"] = isoflow::kToolVersion;
  bool all_ok = true;
  for (const auto& [name, results] : suites) {
    json arr = json::array();
    for (const auto& r : results) {
      arr.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
      all_ok = all_ok && r.passed;
    }
    doc[name] = arr;
  }
  doc["all_passed"] = all_ok;
  emit_report(doc, cfg.report_json);
  return all_ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reduced mean curvature flow laboratory for codimension-one foliations"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::string kind_filter;
  std::string suite = "all";
  int grid = 50;

  // catalog list
  auto* catalog_cmd = app.add_subcommand("catalog", "model catalog");
  auto* list_cmd = catalog_cmd->add_subcommand("list", "list models as JSON");
  list_cmd->add_option("--kind", kind_filter, "filter by kind slug");

  const auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--model", cfg.model.kind, "concentric | cylinders | sphere-iso");
    cmd->add_option("--n", cfg.model.n, "ambient dimension (Euclidean models)");
    cmd->add_option("--k", cfg.model.k, "sphere factor dimension (cylinders)");
    cmd->add_option("--g", cfg.model.g, "number of distinct principal curvatures");
    cmd->add_option("--m0", cfg.model.m0, "first multiplicity");
    cmd->add_option("--m1", cfg.model.m1, "second multiplicity (default m0)");
  };
  const auto add_flow_flags = [&](CLI::App* cmd) {
    cmd->add_option("--rel-tol", cfg.opts.rel_tol, "relative tolerance");
    cmd->add_option("--abs-tol", cfg.opts.abs_tol, "absolute tolerance");
    cmd->add_option("--theta-stop", cfg.opts.theta_stop, "stopping distance to the singular set");
    cmd->add_option("--t-max", cfg.opts.t_max, "safety time cap");
    cmd->add_option("--stride", cfg.opts.sample_stride, "record every n-th step");
    cmd->add_option("--max-step", cfg.opts.max_step, "maximum time step");
  };

  // flow run / flow sweep
  auto* flow_cmd = app.add_subcommand("flow", "reduced flow runs");
  auto* run_cmd = flow_cmd->add_subcommand("run", "integrate one flow and emit a report");
  add_model_flags(run_cmd);
  add_flow_flags(run_cmd);
  run_cmd->add_option("--config", config_path, "JSON config file (flags override)");
  run_cmd->add_option("--theta0", cfg.theta0, "starting quotient coordinate");
  std::vector<std::string> check_flags;
  run_cmd->add_option("--check", check_flags,
                      "checks: type1,rate,bounds,gradient,volume,sigma,extrinsic")
      ->delimiter(',');
  run_cmd->add_option("--trace", cfg.trace_csv, "trace CSV output path");
  run_cmd->add_option("--report", cfg.report_json, "report JSON output path (default stdout)");
  run_cmd->add_option("--epsilon", cfg.epsilon, "certificate tube radius for the rate check");
  run_cmd->add_option("--K", cfg.K, "curvature-bound constant for the sigma check");

  auto* sweep_cmd = flow_cmd->add_subcommand("sweep", "finite-time sweep over starting leaves");
  add_model_flags(sweep_cmd);
  add_flow_flags(sweep_cmd);
  sweep_cmd->add_option("--grid", grid, "number of equispaced starting leaves");
  sweep_cmd->add_option("--report", cfg.report_json, "report JSON output path");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "run verification suites");
  add_model_flags(verify_cmd);
  verify_cmd->add_option("--suite", suite,
                         "bounds | sweep | sigma | volume | gradient | extrinsic | all");
  verify_cmd->add_option("--grid", grid, "sweep grid size");
  verify_cmd->add_option("--K", cfg.K, "curvature-bound constant");
  verify_cmd->add_option("--report", cfg.report_json, "summary JSON output path");

  // sigma
  auto* sigma_cmd = app.add_subcommand("sigma", "conjugate-point lower bound");
  double sigma_K = 1.0;
  sigma_cmd->add_option("--K", sigma_K, "curvature-bound constant")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*list_cmd) {
      json arr = json::array();
      for (const auto& model : isoflow::catalog::default_catalog())
        if (kind_filter.empty() || model.kind_slug() == kind_filter)
          arr.push_back(isoflow::serialize::catalog_entry(model));
      std::cout << arr.dump(2) << "\n";
      return kExitOk;
    }
    if (*run_cmd) {
      if (!config_path.empty()) {
        RunConfig from_file;
        apply_config_file(from_file, config_path);
        // flags override file values
        if (cfg.model.kind.empty()) cfg.model = from_file.model;
        if (cfg.theta0 != cfg.theta0) cfg.theta0 = from_file.theta0;
        if (check_flags.empty()) check_flags = from_file.checks;
        if (cfg.trace_csv.empty()) cfg.trace_csv = from_file.trace_csv;
        if (cfg.report_json.empty()) cfg.report_json = from_file.report_json;
        if (!run_cmd->count("--rel-tol")) cfg.opts.rel_tol = from_file.opts.rel_tol;
        if (!run_cmd->count("--abs-tol")) cfg.opts.abs_tol = from_file.opts.abs_tol;
        if (!run_cmd->count("--theta-stop")) cfg.opts.theta_stop = from_file.opts.theta_stop;
        if (!run_cmd->count("--t-max")) cfg.opts.t_max = from_file.opts.t_max;
        if (!run_cmd->count("--stride")) cfg.opts.sample_stride = from_file.opts.sample_stride;
        if (!run_cmd->count("--max-step")) cfg.opts.max_step = from_file.opts.max_step;
        if (!run_cmd->count("--epsilon")) cfg.epsilon = from_file.epsilon;
        if (!run_cmd->count("--K")) cfg.K = from_file.K;
      }
      for (const auto& c : check_flags) {
        if (!kKnownChecks.count(c)) throw std::invalid_argument("unknown check '" + c + "'");
        cfg.checks.push_back(c);
      }
      return run_flow(cfg);
    }
    if (*sweep_cmd) return run_sweep(cfg, grid);
    if (*verify_cmd) return run_verify(suite, cfg, verify_cmd->count("--model") > 0, grid);
    if (*sigma_cmd) {
      const auto s = isoflow::comparison::sigma_lower_bound(sigma_K);
      json doc = {{"K", s.K}, {"sigma", s.sigma}};
      if (s.first_zero)
        doc["first_zero"] = *s.first_zero;
      else
        doc["first_zero"] = nullptr;
      std::cout << doc.dump(2) << "\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const isoflow::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const isoflow::NotApplicableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
