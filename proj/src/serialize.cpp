#include "cotile/serialize.hpp"

#include <stdexcept>

namespace cotile {
namespace {

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing JSON field '") + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

Json to_json(const LinearParams& p) {
  return Json{{"kind", to_string(p.kind)},
              {"alpha", p.alpha_reg},
              {"penalty", to_string(p.penalty)},
              {"l1_ratio", p.l1_ratio},
              {"C", p.aggressiveness},
              {"learning_rate0", p.learning_rate0}};
}

LinearParams linear_params_from_json(const Json& j) {
  LinearParams p;
  p.kind = parse_linear_kind(get<std::string>(j, "kind"));
  if (j.contains("alpha")) p.alpha_reg = j.at("alpha").get<double>();
  if (j.contains("penalty")) p.penalty = parse_penalty(j.at("penalty").get<std::string>());
  if (j.contains("l1_ratio")) p.l1_ratio = j.at("l1_ratio").get<double>();
  if (j.contains("C")) p.aggressiveness = j.at("C").get<double>();
  if (j.contains("learning_rate0")) p.learning_rate0 = j.at("learning_rate0").get<double>();
  if (p.alpha_reg < 0.0) throw std::invalid_argument("alpha must be >= 0");
  if (!(p.l1_ratio >= 0.0 && p.l1_ratio <= 1.0)) throw std::invalid_argument("l1_ratio must lie in [0, 1]");
  if (!(p.aggressiveness > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(p.learning_rate0 > 0.0)) throw std::invalid_argument("learning_rate0 must be positive");
  return p;
}

Json to_json(const LinearModelState& m) {
  return Json{{"params", to_json(m.params)},
              {"weights", m.weights},
              {"bias", m.bias},
              {"step_count", m.step_count}};
}

LinearModelState linear_model_from_json(const Json& j) {
  LinearModelState m;
  m.params = linear_params_from_json(get<Json>(j, "params"));
  m.weights = get<std::vector<double>>(j, "weights");
  m.bias = get<double>(j, "bias");
  m.step_count = get<std::int64_t>(j, "step_count");
  if (m.weights.empty()) throw std::invalid_argument("model has no weights");
  return m;
}

Json to_json(const Hypercube& h) { return Json{{"lower", h.lower()}, {"upper", h.upper()}}; }

Hypercube hypercube_from_json(const Json& j) {
  return Hypercube(get<std::vector<double>>(j, "lower"), get<std::vector<double>>(j, "upper"));
}

Json to_json(const ContextAgent& a) {
  return Json{{"id", a.id},
              {"region", to_json(a.region)},
              {"confidence", a.confidence},
              {"model", to_json(a.model)},
              {"creation_cycle", a.creation_cycle},
              {"alive", a.alive}};
}

ContextAgent agent_from_json(const Json& j) {
  return ContextAgent{
      .id = get<std::int64_t>(j, "id"),
      .region = hypercube_from_json(get<Json>(j, "region")),
      .confidence = get<double>(j, "confidence"),
      .model = linear_model_from_json(get<Json>(j, "model")),
      .creation_cycle = get<std::int64_t>(j, "creation_cycle"),
      .alive = j.value("alive", true),
  };
}

Json to_json(const EngineConfig& c) {
  Json j{{"R", c.radius}};
  j["O"] = c.overlap_threshold ? Json(*c.overlap_threshold) : Json(nullptr);
  j["E"] = c.point_exclusion;
  j["Nc"] = "sigmoid";
  j["alpha"] = c.alpha;
  j["Fplus"] = c.feedback_plus;
  j["Fminus"] = c.feedback_minus;
  j["seed"] = c.seed;
  j["epsilon_scale"] = c.epsilon_scale;
  j["exploration_passes"] = c.exploration_passes;
  j["train_on_correct"] = c.train_on_correct;
  return j;
}

EngineConfig engine_config_from_json(const Json& j) {
  EngineConfig c;
  c.radius = get<double>(j, "R");
  if (j.contains("O") && !j.at("O").is_null()) c.overlap_threshold = j.at("O").get<double>();
  c.point_exclusion = get<bool>(j, "E");
  if (j.contains("Nc") && j.at("Nc").get<std::string>() != "sigmoid") {
    throw std::invalid_argument("only the sigmoid normalization is supported");
  }
  c.alpha = get<double>(j, "alpha");
  c.feedback_plus = get<double>(j, "Fplus");
  c.feedback_minus = get<double>(j, "Fminus");
  c.seed = j.value("seed", std::uint64_t{0});
  c.epsilon_scale = j.value("epsilon_scale", kDefaultEpsilonScale);
  c.exploration_passes = j.value("exploration_passes", 1);
  c.train_on_correct = j.value("train_on_correct", true);
  c.validate();
  return c;
}

Json to_json(const CycleReport& r) {
  Json events = Json::array();
  for (const NcsEvent& e : r.ncs_events) {
    events.push_back(Json{{"kind", to_string(e.kind)},
                          {"participants", e.participants},
                          {"resolution", to_string(e.resolution)}});
  }
  return Json{{"cycle", r.cycle},
              {"activated_ids", r.activated_ids},
              {"winner_id", r.winner_id ? Json(*r.winner_id) : Json(nullptr)},
              {"prediction", r.prediction},
              {"ncs_events", events}};
}

Json snapshot(const Engine& e) {
  Json agents = Json::array();
  for (const ContextAgent& a : e.agents()) agents.push_back(to_json(a));
  return Json{{"config", to_json(e.config())},
              {"model_params", to_json(e.model_params())},
              {"dim", e.dim()},
              {"cycle", e.cycle()},
              {"next_agent_id", e.next_agent_id()},
              {"percepts", Json{{"min", e.percepts().min},
                                {"max", e.percepts().max},
                                {"count", e.percepts().count}}},
              {"agents", agents}};
}

Engine engine_from_snapshot(const Json& j) {
  std::vector<ContextAgent> agents;
  for (const Json& a : get<Json>(j, "agents")) agents.push_back(agent_from_json(a));
  const Json& pj = get<Json>(j, "percepts");
  PerceptState ps{get<std::vector<double>>(pj, "min"), get<std::vector<double>>(pj, "max"),
                  get<std::int64_t>(pj, "count")};
  return Engine::restore(engine_config_from_json(get<Json>(j, "config")),
                         linear_params_from_json(get<Json>(j, "model_params")),
                         get<std::size_t>(j, "dim"), get<std::int64_t>(j, "cycle"),
                         get<std::int64_t>(j, "next_agent_id"), std::move(ps), std::move(agents));
}

Json to_json(const Scaler& s) { return Json{{"mean", s.mean}, {"std", s.std}}; }

}  // namespace cotile
