#pragma once

// JSON forms of networks, instances, routings, solver reports and
// experiment configs.

#include <nlohmann/json.hpp>

#include "cachefair/agents.hpp"
#include "cachefair/experiment.hpp"
#include "cachefair/instance.hpp"
#include "cachefair/network.hpp"
#include "cachefair/solver.hpp"

namespace cachefair {

using Json = nlohmann::json;

/// {window:{width,height}, stations:[{id,x,y,radius,tier,cache}],
///  catalog:{files,zipf_s,popularity}}
Json network_to_json(const NetworkInstance& network);
/// Throws std::invalid_argument on schema or validation errors.
NetworkInstance network_from_json(const Json& j);

/// {stations:[{id,weight,soft_limit}],
///  region_files:[{id,region,file,demand,eligible}]}
Json instance_to_json(const CrpInstance& instance);
CrpInstance instance_from_json(const Json& j);

/// Triplets [station id, region-file id, y], in slot order.
Json routing_to_json(const CrpInstance& instance, const RoutingVector& y);
RoutingVector routing_from_json(const CrpInstance& instance, const Json& j);

Json config_to_json(const SolverConfig& config);
Json solve_report_to_json(const CrpInstance& instance, const SolveReport& report);
Json message_stats_to_json(const MessageStats& stats);

Json scenario_to_json(const ScenarioConfig& config);
/// Missing keys keep the defaults of the given kind.
ScenarioConfig scenario_from_json(const Json& j, ScenarioKind kind);

}  // namespace cachefair
