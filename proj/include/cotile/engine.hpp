#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cotile/agents.hpp"

namespace cotile {

enum class NcsKind { kIncompetence, kCompetition, kConflict };
enum class Resolution { kPush, kAbsorb, kCreate, kNearest };

std::string to_string(NcsKind kind);
std::string to_string(Resolution resolution);

/// One non-cooperative situation and how it was resolved. For pairwise
/// situations `participants` is {stronger, weaker}.
struct NcsEvent {
  NcsKind kind;
  std::vector<std::int64_t> participants;
  Resolution resolution;

  bool operator==(const NcsEvent&) const = default;
};

struct CycleReport {
  std::int64_t cycle = 0;
  std::vector<std::int64_t> activated_ids;
  std::optional<std::int64_t> winner_id;
  Label prediction = 0;
  std::vector<NcsEvent> ncs_events;
};

struct WinnerChoice {
  std::int64_t winner_id;
  Label prediction;
};

/// Scores within this distance are treated as tied.
inline constexpr double kScoreTieTolerance = 1e-12;

/// Highest-score agent wins. Among agents tied on the top score the
/// majority proposal is chosen (remaining tie -> smaller label), and the
/// winner is the lowest id proposing it. Throws on an empty set.
WinnerChoice select_winner(std::span<const ContextAgent* const> activated,
                           std::span<const double> x, const EngineConfig& cfg);

/// The Head agent: owns the Context agents and runs exploration and
/// exploitation cycles.
class Engine {
 public:
  using Observer = std::function<void(const CycleReport&)>;

  Engine(EngineConfig cfg, LinearParams model_params, std::size_t dim);

  /// One learning cycle on a labelled observation.
  CycleReport explore_step(std::span<const double> x, Label y);

  /// Prediction without touching any agent. Throws std::logic_error when no
  /// agent exists yet.
  CycleReport exploit_step(std::span<const double> x) const;

  /// `exploration_passes` shuffled passes of explore_step.
  void train(const std::vector<std::vector<double>>& X, std::span<const Label> Y);

  std::vector<Label> predict_batch(const std::vector<std::vector<double>>& X) const;

  /// Resolves competition / conflict for every unordered pair of
  /// `participants` (agent ids) given what each proposed. Pairs are visited
  /// by descending best score in the pair, then ascending ids.
  std::vector<NcsEvent> resolve_pairwise_ncs(std::span<const std::int64_t> participants,
                                             std::span<const Label> proposals);

  /// Called after every explore_step with its report.
  void set_observer(Observer obs) { observer_ = std::move(obs); }

  const EngineConfig& config() const { return cfg_; }
  const LinearParams& model_params() const { return model_params_; }
  std::size_t dim() const { return dim_; }
  std::int64_t cycle() const { return cycle_; }
  std::int64_t next_agent_id() const { return next_id_; }
  const PerceptState& percepts() const { return percepts_; }
  /// Alive agents in creation order.
  const std::vector<ContextAgent>& agents() const { return agents_; }

  /// Rebuilds an engine from a previously exported state.
  static Engine restore(EngineConfig cfg, LinearParams model_params, std::size_t dim,
                        std::int64_t cycle, std::int64_t next_id, PerceptState percepts,
                        std::vector<ContextAgent> agents);

 private:
  struct Pair {
    std::int64_t a;
    std::int64_t b;
  };

  ContextAgent* find(std::int64_t id);
  const ContextAgent* find(std::int64_t id) const;
  std::int64_t create_agent(std::span<const double> x, Label y);
  std::vector<NcsEvent> resolve_pairs(std::vector<Pair> pairs,
                                      std::span<const std::int64_t> ids,
                                      std::span<const Label> proposals);
  void drop_dead();

  EngineConfig cfg_;
  LinearParams model_params_;
  std::size_t dim_;
  std::vector<ContextAgent> agents_;
  PerceptState percepts_;
  std::int64_t cycle_ = 0;
  std::int64_t next_id_ = 0;
  Observer observer_;
};

}  // namespace cotile
