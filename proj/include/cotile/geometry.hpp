#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cotile {

using Point = std::vector<double>;

/// Axis-aligned box in p-dimensional feature space with closed bounds.
///
/// Construction validates that both bound vectors have the same non-zero
/// length and that every dimension has strictly positive extent.
class Hypercube {
 public:
  Hypercube(std::vector<double> lower, std::vector<double> upper);

  /// Box of half-width `radius` on every axis around `center`.
  static Hypercube around(std::span<const double> center, double radius);

  std::size_t dim() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  double lower(std::size_t j) const { return lower_[j]; }
  double upper(std::size_t j) const { return upper_[j]; }
  double side(std::size_t j) const { return upper_[j] - lower_[j]; }
  double center(std::size_t j) const { return 0.5 * (lower_[j] + upper_[j]); }

  bool operator==(const Hypercube&) const = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

double volume(const Hypercube& h);

bool contains(const Hypercube& h, std::span<const double> x);

/// True when `inner` lies within `outer` (closed bounds).
bool contains(const Hypercube& outer, const Hypercube& inner);

/// Scales the volume by (1 + alpha), isotropically about the center.
Hypercube expand(const Hypercube& h, double alpha);

/// Scales the volume by (1 - alpha), isotropically about the center.
/// Throws std::invalid_argument unless 0 <= alpha < 1.
Hypercube retract(const Hypercube& h, double alpha);

/// Zero when the boxes are disjoint or only share a face.
double intersection_volume(const Hypercube& a, const Hypercube& b);

/// Intersection volume over the smaller of the two volumes, in [0, 1].
double overlap_index(const Hypercube& a, const Hypercube& b);

/// Smallest box containing both inputs.
Hypercube enclosing(const Hypercube& a, const Hypercube& b);

/// Euclidean distance from x to the closest point of h; zero inside.
double distance_to_point(const Hypercube& h, std::span<const double> x);

enum class PushStatus {
  kRetracted,   // `region` holds the pushee after the cut
  kAnnihilate,  // no single-bound cut separates them; absorb instead
  kNoOverlap,   // nothing to do
};

struct PushResult {
  PushStatus status;
  std::optional<Hypercube> region;
};

/// Retracts `pushee` out of `pusher` by moving a single bound onto the
/// facing side of `pusher`. Among all valid cuts the one removing the least
/// volume wins; ties go to the lowest dimension, then to the lower bound.
PushResult push(const Hypercube& pusher, const Hypercube& pushee);

inline constexpr double kDefaultEpsilonScale = 1e-6;

/// Moves one bound of h just past x so that x is no longer contained. The
/// bound lands at x[j] -/+ epsilon_scale * side(j). Same tie rules as push().
/// Returns nullopt when x is not inside h, or when no cut leaves a valid box.
std::optional<Hypercube> exclude_point(const Hypercube& h, std::span<const double> x,
                                       double epsilon_scale = kDefaultEpsilonScale);

}  // namespace cotile
