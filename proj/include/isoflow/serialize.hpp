#pragma once

#include <json.hpp>
#include <map>

#include "isoflow/catalog.hpp"
#include "isoflow/diagnostics.hpp"
#include "isoflow/flow.hpp"

namespace isoflow::serialize {

using json = nlohmann::ordered_json;

json to_json(const catalog::SingularEndpoint& ep);
json to_json(const catalog::FoliationModel& model);
/// Catalog entry with {kind, params..., ambient_dim, theta_max, D0, D1, minimal_theta};
/// absent quantities (infinite theta_max, missing upper endpoint) are null.
json catalog_entry(const catalog::FoliationModel& model);
json to_json(const diagnostics::BoundCertificate& cert);
json to_json(const flow::FlowOptions& opts);

/// Singularity report document: type fields in snake_case plus model, theta0,
/// tool_version, seed and per-check pass flags.
json report_document(const catalog::FoliationModel& model, double theta0,
                     const flow::FlowOptions& opts, const flow::FlowTrace& trace,
                     const diagnostics::SingularityReport& report,
                     const std::map<std::string, bool>& checks);

}  // namespace isoflow::serialize
