#pragma once

#include <json.hpp>

#include "cotile/agents.hpp"
#include "cotile/datasets.hpp"
#include "cotile/engine.hpp"
#include "cotile/online_linear.hpp"

namespace cotile {

using Json = nlohmann::ordered_json;

Json to_json(const LinearParams& p);
LinearParams linear_params_from_json(const Json& j);

Json to_json(const LinearModelState& m);
LinearModelState linear_model_from_json(const Json& j);

Json to_json(const Hypercube& h);
Hypercube hypercube_from_json(const Json& j);

Json to_json(const ContextAgent& a);
ContextAgent agent_from_json(const Json& j);

Json to_json(const EngineConfig& c);
EngineConfig engine_config_from_json(const Json& j);

Json to_json(const CycleReport& r);

/// {config, model_params, dim, cycle, next_agent_id, percepts, agents[]}
Json snapshot(const Engine& e);
Engine engine_from_snapshot(const Json& j);

Json to_json(const Scaler& s);

}  // namespace cotile
