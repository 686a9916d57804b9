#include "cotile/engine.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "cotile/rng.hpp"

namespace cotile {
namespace {

void check_label(Label y) {
  if (y != 0 && y != 1) throw std::invalid_argument("label outside the class universe {0, 1}");
}

}  // namespace

std::string to_string(NcsKind kind) {
  switch (kind) {
    case NcsKind::kIncompetence: return "INCOMPETENCE";
    case NcsKind::kCompetition: return "COMPETITION";
    case NcsKind::kConflict: return "CONFLICT";
  }
  return "?";
}

std::string to_string(Resolution resolution) {
  switch (resolution) {
    case Resolution::kPush: return "PUSH";
    case Resolution::kAbsorb: return "ABSORB";
    case Resolution::kCreate: return "CREATE";
    case Resolution::kNearest: return "NEAREST";
  }
  return "?";
}

WinnerChoice select_winner(std::span<const ContextAgent* const> activated,
                           std::span<const double> x, const EngineConfig& cfg) {
  if (activated.empty()) throw std::invalid_argument("select_winner needs an activated agent");
  double best = -std::numeric_limits<double>::infinity();
  for (const ContextAgent* a : activated) best = std::max(best, score(*a, cfg));

  // Proposals of the agents tied on the best score, keyed by id.
  std::map<std::int64_t, Label> tied;
  for (const ContextAgent* a : activated) {
    if (best - score(*a, cfg) <= kScoreTieTolerance) tied.emplace(a->id, propose(*a, x));
  }
  int votes[2] = {0, 0};
  for (const auto& [id, label] : tied) ++votes[label];
  const Label chosen = votes[1] > votes[0] ? 1 : 0;
  for (const auto& [id, label] : tied) {
    if (label == chosen) return {id, chosen};
  }
  throw std::logic_error("select_winner: no tied agent proposes the chosen class");
}

Engine::Engine(EngineConfig cfg, LinearParams model_params, std::size_t dim)
    : cfg_(std::move(cfg)), model_params_(model_params), dim_(dim) {
  cfg_.validate();
  if (dim_ == 0) throw std::invalid_argument("engine dimension must be positive");
}

Engine Engine::restore(EngineConfig cfg, LinearParams model_params, std::size_t dim,
                       std::int64_t cycle, std::int64_t next_id, PerceptState percepts,
                       std::vector<ContextAgent> agents) {
  Engine e(std::move(cfg), model_params, dim);
  std::sort(agents.begin(), agents.end(),
            [](const ContextAgent& l, const ContextAgent& r) { return l.id < r.id; });
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].region.dim() != dim || agents[i].model.weights.size() != dim) {
      throw std::invalid_argument("restored agent has the wrong dimension");
    }
    if (i > 0 && agents[i].id == agents[i - 1].id) {
      throw std::invalid_argument("restored agents share an id");
    }
    if (agents[i].id >= next_id) throw std::invalid_argument("restored agent id >= next id");
  }
  e.cycle_ = cycle;
  e.next_id_ = next_id;
  e.percepts_ = std::move(percepts);
  e.agents_ = std::move(agents);
  return e;
}

ContextAgent* Engine::find(std::int64_t id) {
  auto it = std::lower_bound(agents_.begin(), agents_.end(), id,
                             [](const ContextAgent& a, std::int64_t v) { return a.id < v; });
  return it != agents_.end() && it->id == id ? &*it : nullptr;
}

const ContextAgent* Engine::find(std::int64_t id) const {
  return const_cast<Engine*>(this)->find(id);
}

std::int64_t Engine::create_agent(std::span<const double> x, Label y) {
  ContextAgent a{
      .id = next_id_++,
      .region = Hypercube::around(x, cfg_.radius),
      .confidence = 0.0,
      .model = LinearModelState::zeros(model_params_, dim_),
      .creation_cycle = cycle_,
      .alive = true,
  };
  partial_fit(a.model, x, y);
  agents_.push_back(std::move(a));
  return agents_.back().id;
}

void Engine::drop_dead() {
  std::erase_if(agents_, [](const ContextAgent& a) { return !a.alive; });
}

std::vector<NcsEvent> Engine::resolve_pairwise_ncs(std::span<const std::int64_t> participants,
                                                   std::span<const Label> proposals) {
  if (participants.size() != proposals.size()) {
    throw std::invalid_argument("one proposal per participant is required");
  }
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < participants.size(); ++i) {
    for (std::size_t k = i + 1; k < participants.size(); ++k) {
      pairs.push_back({participants[i], participants[k]});
    }
  }
  auto events = resolve_pairs(std::move(pairs), participants, proposals);
  drop_dead();
  return events;
}

std::vector<NcsEvent> Engine::resolve_pairs(std::vector<Pair> pairs,
                                            std::span<const std::int64_t> ids,
                                            std::span<const Label> proposals) {
  std::map<std::int64_t, Label> proposal_of;
  for (std::size_t i = 0; i < ids.size(); ++i) proposal_of[ids[i]] = proposals[i];

  auto score_of = [&](std::int64_t id) {
    const ContextAgent* a = find(id);
    if (a == nullptr) throw std::invalid_argument("unknown agent id in NCS resolution");
    return score(*a, cfg_);
  };
  // Stronger member: higher score, ties to the older (lower id) agent.
  auto stronger_first = [&](Pair p) {
    const double sa = score_of(p.a);
    const double sb = score_of(p.b);
    if (std::abs(sa - sb) <= kScoreTieTolerance) return p.a < p.b ? p : Pair{p.b, p.a};
    return sa > sb ? p : Pair{p.b, p.a};
  };

  struct Ranked {
    double best;
    std::int64_t lo;
    std::int64_t hi;
    Pair ordered;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(pairs.size());
  for (Pair p : pairs) {
    ranked.push_back({std::max(score_of(p.a), score_of(p.b)), std::min(p.a, p.b),
                      std::max(p.a, p.b), stronger_first(p)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& l, const Ranked& r) {
    if (l.best != r.best) return l.best > r.best;
    if (l.lo != r.lo) return l.lo < r.lo;
    return l.hi < r.hi;
  });

  // Pushes only shrink regions, but an absorption grows the absorber and may
  // re-open a pair settled earlier, so sweep until a pass absorbs nothing.
  std::vector<NcsEvent> events;
  bool absorbed = true;
  while (absorbed) {
    absorbed = false;
    for (const Ranked& r : ranked) {
      ContextAgent* strong = find(r.ordered.a);
      ContextAgent* weak = find(r.ordered.b);
      if (!strong->alive || !weak->alive) continue;
      if (intersection_volume(strong->region, weak->region) == 0.0) continue;

      const bool same = proposal_of.at(strong->id) == proposal_of.at(weak->id);
      const NcsKind kind = same ? NcsKind::kCompetition : NcsKind::kConflict;

      auto absorb = [&] {
        strong->region = enclosing(strong->region, weak->region);
        weak->alive = false;
        absorbed = true;
        events.push_back({kind, {strong->id, weak->id}, Resolution::kAbsorb});
      };

      if (same && cfg_.overlap_threshold &&
          overlap_index(strong->region, weak->region) > *cfg_.overlap_threshold) {
        absorb();
        continue;
      }
      PushResult pushed = push(strong->region, weak->region);
      if (pushed.status == PushStatus::kAnnihilate) {
        absorb();
      } else if (pushed.status == PushStatus::kRetracted) {
        weak->region = std::move(*pushed.region);
        events.push_back({kind, {strong->id, weak->id}, Resolution::kPush});
      }
    }
  }
  return events;
}

CycleReport Engine::explore_step(std::span<const double> x, Label y) {
  check_label(y);
  if (x.size() != dim_) throw std::invalid_argument("observation has the wrong dimension");
  update_extrema(percepts_, x);

  CycleReport report;
  report.cycle = cycle_;

  std::vector<const ContextAgent*> activated;
  for (const ContextAgent& a : agents_) {
    if (contains(a.region, x)) {
      activated.push_back(&a);
      report.activated_ids.push_back(a.id);
    }
  }

  if (activated.empty()) {
    // Incompetence: spawn an agent on the point, then settle its overlaps.
    const std::int64_t fresh = create_agent(x, y);
    report.ncs_events.push_back({NcsKind::kIncompetence, {fresh}, Resolution::kCreate});
    const ContextAgent& created = *find(fresh);
    report.prediction = propose(created, x);

    std::vector<std::int64_t> ids{fresh};
    std::vector<Label> proposals{report.prediction};
    std::vector<Pair> pairs;
    for (const ContextAgent& a : agents_) {
      if (a.id == fresh) continue;
      if (intersection_volume(a.region, created.region) > 0.0) {
        ids.push_back(a.id);
        proposals.push_back(propose(a, x));
        pairs.push_back({fresh, a.id});
      }
    }
    auto events = resolve_pairs(std::move(pairs), ids, proposals);
    report.ncs_events.insert(report.ncs_events.end(), events.begin(), events.end());
  } else {
    const WinnerChoice choice = select_winner(activated, x, cfg_);
    report.winner_id = choice.winner_id;
    report.prediction = choice.prediction;

    std::vector<Label> proposals;
    proposals.reserve(activated.size());
    for (const ContextAgent* a : activated) proposals.push_back(propose(*a, x));
    for (std::size_t i = 0; i < activated.size(); ++i) {
      apply_feedback(*find(activated[i]->id), proposals[i] == y, x, y, cfg_);
    }
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < report.activated_ids.size(); ++i) {
      for (std::size_t k = i + 1; k < report.activated_ids.size(); ++k) {
        pairs.push_back({report.activated_ids[i], report.activated_ids[k]});
      }
    }
    auto events = resolve_pairs(std::move(pairs), report.activated_ids, proposals);
    report.ncs_events.insert(report.ncs_events.end(), events.begin(), events.end());
  }

  drop_dead();
  ++cycle_;
  if (observer_) observer_(report);
  return report;
}

CycleReport Engine::exploit_step(std::span<const double> x) const {
  if (agents_.empty()) throw std::logic_error("engine has no agents; train it first");
  if (x.size() != dim_) throw std::invalid_argument("observation has the wrong dimension");

  CycleReport report;
  report.cycle = cycle_;
  std::vector<const ContextAgent*> activated;
  for (const ContextAgent& a : agents_) {
    if (contains(a.region, x)) {
      activated.push_back(&a);
      report.activated_ids.push_back(a.id);
    }
  }
  if (!activated.empty()) {
    const WinnerChoice choice = select_winner(activated, x, cfg_);
    report.winner_id = choice.winner_id;
    report.prediction = choice.prediction;
    return report;
  }

  // Nearest agent by distance to its boundary; agents_ is id-ordered so the
  // strict comparison keeps the lowest id on ties.
  const ContextAgent* nearest = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const ContextAgent& a : agents_) {
    const double d = distance_to_point(a.region, x);
    if (d < best) {
      best = d;
      nearest = &a;
    }
  }
  report.winner_id = nearest->id;
  report.prediction = propose(*nearest, x);
  report.ncs_events.push_back({NcsKind::kIncompetence, {nearest->id}, Resolution::kNearest});
  return report;
}

void Engine::train(const std::vector<std::vector<double>>& X, std::span<const Label> Y) {
  if (X.empty() || X.size() != Y.size()) {
    throw std::invalid_argument("train needs a non-empty sample set with one label per row");
  }
  Rng rng(cfg_.seed);
  auto order = iota_indices(X.size());
  for (int pass = 0; pass < cfg_.exploration_passes; ++pass) {
    rng.shuffle(order);
    for (std::size_t i : order) explore_step(X[i], Y[i]);
  }
}

std::vector<Label> Engine::predict_batch(const std::vector<std::vector<double>>& X) const {
  std::vector<Label> out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(exploit_step(x).prediction);
  return out;
}

}  // namespace cotile
