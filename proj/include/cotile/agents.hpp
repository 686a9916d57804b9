#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cotile/geometry.hpp"
#include "cotile/online_linear.hpp"

namespace cotile {

enum class Normalization { kSigmoid };

/// External parameters of the tiling system plus run seeds.
struct EngineConfig {
  double radius = 0.2;                       // R: half-width of a freshly created agent
  std::optional<double> overlap_threshold;   // O: absent means competition always pushes
  bool point_exclusion = true;               // E
  Normalization normalization = Normalization::kSigmoid;  // N_c
  double alpha = 0.1;                        // expansion / retraction factor
  double feedback_plus = 1.0;                // F+
  double feedback_minus = 1.0;               // F-
  std::uint64_t seed = 0;
  double epsilon_scale = kDefaultEpsilonScale;
  int exploration_passes = 1;
  bool train_on_correct = true;  // correct proposers also fine-tune their model

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;

  bool operator==(const EngineConfig&) const = default;
};

struct ContextAgent {
  std::int64_t id = 0;
  Hypercube region;
  double confidence = 0.0;  // F+ * #correct - F- * #wrong
  LinearModelState model;
  std::int64_t creation_cycle = 0;
  bool alive = true;

  bool operator==(const ContextAgent&) const = default;
};

/// Observed per-feature extrema.
struct PerceptState {
  std::vector<double> min;
  std::vector<double> max;
  std::int64_t count = 0;

  bool operator==(const PerceptState&) const = default;
};

double score(const ContextAgent& a, const EngineConfig& cfg);

Label propose(const ContextAgent& a, std::span<const double> x);

/// Head feedback for one activated agent:
///   correct          -> confidence += F+, expand, train (if train_on_correct)
///   wrong, E = true  -> confidence -= F-, exclude x from the region
///   wrong, E = false -> confidence -= F-, train, retract
void apply_feedback(ContextAgent& a, bool correct, std::span<const double> x, Label y,
                    const EngineConfig& cfg);

void update_extrema(PerceptState& ps, std::span<const double> x);

}  // namespace cotile
