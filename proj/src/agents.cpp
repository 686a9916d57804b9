#include "cotile/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cotile {

void EngineConfig::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("R must be positive");
  if (overlap_threshold && !(*overlap_threshold >= 0.0 && *overlap_threshold <= 1.0)) {
    throw std::invalid_argument("O must lie in [0, 1]");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  if (!(feedback_plus >= 0.0)) throw std::invalid_argument("F+ must be >= 0");
  if (!(feedback_minus >= 0.0)) throw std::invalid_argument("F- must be >= 0");
  if (!(epsilon_scale > 0.0 && epsilon_scale < 0.5)) {
    throw std::invalid_argument("epsilon_scale must lie in (0, 0.5)");
  }
  if (exploration_passes < 1) throw std::invalid_argument("exploration_passes must be >= 1");
}

double score(const ContextAgent& a, const EngineConfig& cfg) {
  switch (cfg.normalization) {
    case Normalization::kSigmoid:
      return 1.0 / (1.0 + std::exp(-a.confidence));
  }
  return 0.0;
}

Label propose(const ContextAgent& a, std::span<const double> x) { return predict(a.model, x); }

void apply_feedback(ContextAgent& a, bool correct, std::span<const double> x, Label y,
                    const EngineConfig& cfg) {
  if (!a.alive) return;
  if (correct) {
    a.confidence += cfg.feedback_plus;
    a.region = expand(a.region, cfg.alpha);
    if (cfg.train_on_correct) partial_fit(a.model, x, y);
    return;
  }
  a.confidence -= cfg.feedback_minus;
  if (cfg.point_exclusion) {
    // A degenerate box with no valid cut keeps its region.
    if (auto carved = exclude_point(a.region, x, cfg.epsilon_scale)) a.region = std::move(*carved);
  } else {
    partial_fit(a.model, x, y);
    a.region = retract(a.region, cfg.alpha);
  }
}

void update_extrema(PerceptState& ps, std::span<const double> x) {
  if (ps.count == 0) {
    ps.min.assign(x.begin(), x.end());
    ps.max.assign(x.begin(), x.end());
  } else {
    if (x.size() != ps.min.size()) throw std::invalid_argument("percept dimension mismatch");
    for (std::size_t j = 0; j < x.size(); ++j) {
      ps.min[j] = std::min(ps.min[j], x[j]);
      ps.max[j] = std::max(ps.max[j], x[j]);
    }
  }
  ++ps.count;
}

}  // namespace cotile
