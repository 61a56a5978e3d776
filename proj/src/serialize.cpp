#include "isoflow/serialize.hpp"

#include <cmath>

namespace isoflow::serialize {

namespace {

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

json to_json(const catalog::SingularEndpoint& ep) {
  return {{"coordinate", ep.coordinate},
          {"dimension_drop", ep.dimension_drop},
          {"minimal", ep.minimal}};
}

json to_json(const catalog::FoliationModel& model) {
  json j;
  j["kind"] = model.kind_slug();
  switch (model.kind()) {
    case catalog::ModelKind::ConcentricSpheres:
      j["n"] = model.n();
      break;
    case catalog::ModelKind::SphericalCylinders:
      j["k"] = model.k();
      j["n"] = model.n();
      break;
    case catalog::ModelKind::IsoparametricSphere:
      j["g"] = model.g();
      j["m0"] = model.m0();
      j["m1"] = model.m1();
      break;
  }
  return j;
}

json catalog_entry(const catalog::FoliationModel& model) {
  json j = to_json(model);
  j["ambient_dim"] = model.ambient().dim;
  j["theta_max"] = finite_or_null(model.theta_max());
  j["D0"] = model.lower_endpoint().dimension_drop;
  if (model.upper_endpoint())
    j["D1"] = model.upper_endpoint()->dimension_drop;
  else
    j["D1"] = nullptr;
  if (const auto ts = catalog::minimal_leaf_theta(model))
    j["minimal_theta"] = *ts;
  else
    j["minimal_theta"] = nullptr;
  return j;
}

json to_json(const diagnostics::BoundCertificate& cert) {
  return {{"epsilon", cert.epsilon}, {"delta", cert.delta}, {"c", cert.c},
          {"C1", cert.C1},           {"C2", cert.C2},       {"endpoint", to_json(cert.endpoint)}};
}

json to_json(const flow::FlowOptions& opts) {
  return {{"rel_tol", opts.rel_tol},
          {"abs_tol", opts.abs_tol},
          {"theta_stop", opts.theta_stop},
          {"t_max", opts.t_max},
          {"sample_stride", opts.sample_stride},
          {"max_step", finite_or_null(opts.max_step)}};
}

json report_document(const catalog::FoliationModel& model, double theta0,
                     const flow::FlowOptions& opts, const flow::FlowTrace& trace,
                     const diagnostics::SingularityReport& report,
                     const std::map<std::string, bool>& checks) {
  json j;
  j["tool_version"] = kToolVersion;
  j["seed"] = kDefaultSeed;
  j["model"] = to_json(model);
  j["theta0"] = theta0;
  j["options"] = to_json(opts);
  j["termination"] = flow::termination_name(trace.termination);
  j["samples"] = trace.samples.size();
  if (trace.termination == flow::Termination::ReachedSingularSet) {
    j["T"] = report.T;
    j["ci"] = report.ci;
    j["limit_endpoint"] = to_json(report.limit_endpoint);
    j["type1_stat"] = report.type1_stat;
    j["type1_limit"] = report.type1_limit;
    j["rate_window"] = json::array({report.rate_low, report.rate_high});
  }
  if (report.certificate) j["certificate"] = to_json(*report.certificate);
  json passed = json::object();
  bool all = true;
  for (const auto& [name, ok] : checks) {
    passed[name] = ok;
    all = all && ok;
  }
  j["passed"] = passed;
  j["all_passed"] = all;
  return j;
}

}  // namespace isoflow::serialize
