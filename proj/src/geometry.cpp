#include "cotile/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cotile {
namespace {

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

// Relative tolerance used when comparing removed volumes of candidate cuts.
constexpr double kTieTolerance = 1e-12;

struct Cut {
  std::size_t dim;
  bool move_lower;
  double new_bound;
  double removed;
};

// Picks the cut with the least removed volume. Candidates arrive ordered by
// (dimension, lower-before-upper), so keeping the first of equals applies the
// tie rule.
std::optional<Cut> cheapest(const std::vector<Cut>& cuts) {
  std::optional<Cut> best;
  for (const Cut& c : cuts) {
    if (!best) {
      best = c;
      continue;
    }
    const double scale = std::max(std::abs(best->removed), std::abs(c.removed));
    if (c.removed < best->removed - kTieTolerance * scale) best = c;
  }
  return best;
}

Hypercube apply_cut(const Hypercube& h, const Cut& cut) {
  std::vector<double> lo = h.lower();
  std::vector<double> hi = h.upper();
  if (cut.move_lower) {
    lo[cut.dim] = cut.new_bound;
  } else {
    hi[cut.dim] = cut.new_bound;
  }
  return Hypercube(std::move(lo), std::move(hi));
}

Hypercube scale_about_center(const Hypercube& h, double volume_factor) {
  const std::size_t p = h.dim();
  const double k = std::pow(volume_factor, 1.0 / static_cast<double>(p));
  std::vector<double> lo(p);
  std::vector<double> hi(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double c = h.center(j);
    const double half = 0.5 * h.side(j) * k;
    lo[j] = c - half;
    hi[j] = c + half;
  }
  return Hypercube(std::move(lo), std::move(hi));
}

}  // namespace

Hypercube::Hypercube(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty()) throw std::invalid_argument("hypercube needs at least one dimension");
  require_same_dim(lower_.size(), upper_.size());
  for (std::size_t j = 0; j < lower_.size(); ++j) {
    if (!(lower_[j] < upper_[j])) {
      throw std::invalid_argument("hypercube bound " + std::to_string(j) +
                                  " has non-positive extent");
    }
  }
}

Hypercube Hypercube::around(std::span<const double> center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::vector<double> lo(center.begin(), center.end());
  std::vector<double> hi(center.begin(), center.end());
  for (std::size_t j = 0; j < lo.size(); ++j) {
    lo[j] -= radius;
    hi[j] += radius;
  }
  return Hypercube(std::move(lo), std::move(hi));
}

double volume(const Hypercube& h) {
  double v = 1.0;
  for (std::size_t j = 0; j < h.dim(); ++j) v *= h.side(j);
  return v;
}

bool contains(const Hypercube& h, std::span<const double> x) {
  require_same_dim(h.dim(), x.size());
  for (std::size_t j = 0; j < h.dim(); ++j) {
    if (x[j] < h.lower(j) || x[j] > h.upper(j)) return false;
  }
  return true;
}

bool contains(const Hypercube& outer, const Hypercube& inner) {
  require_same_dim(outer.dim(), inner.dim());
  for (std::size_t j = 0; j < outer.dim(); ++j) {
    if (inner.lower(j) < outer.lower(j) || inner.upper(j) > outer.upper(j)) return false;
  }
  return true;
}

Hypercube expand(const Hypercube& h, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("expansion factor must be >= 0");
  if (alpha == 0.0) return h;
  return scale_about_center(h, 1.0 + alpha);
}

Hypercube retract(const Hypercube& h, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("retraction factor must lie in [0, 1)");
  }
  if (alpha == 0.0) return h;
  return scale_about_center(h, 1.0 - alpha);
}

double intersection_volume(const Hypercube& a, const Hypercube& b) {
  require_same_dim(a.dim(), b.dim());
  double v = 1.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const double w = std::min(a.upper(j), b.upper(j)) - std::max(a.lower(j), b.lower(j));
    if (w <= 0.0) return 0.0;
    v *= w;
  }
  return v;
}

double overlap_index(const Hypercube& a, const Hypercube& b) {
  const double inter = intersection_volume(a, b);
  if (inter == 0.0) return 0.0;
  return std::clamp(inter / std::min(volume(a), volume(b)), 0.0, 1.0);
}

Hypercube enclosing(const Hypercube& a, const Hypercube& b) {
  require_same_dim(a.dim(), b.dim());
  std::vector<double> lo(a.dim());
  std::vector<double> hi(a.dim());
  for (std::size_t j = 0; j < a.dim(); ++j) {
    lo[j] = std::min(a.lower(j), b.lower(j));
    hi[j] = std::max(a.upper(j), b.upper(j));
  }
  return Hypercube(std::move(lo), std::move(hi));
}

double distance_to_point(const Hypercube& h, std::span<const double> x) {
  require_same_dim(h.dim(), x.size());
  double sq = 0.0;
  for (std::size_t j = 0; j < h.dim(); ++j) {
    const double d = std::max({h.lower(j) - x[j], x[j] - h.upper(j), 0.0});
    sq += d * d;
  }
  return std::sqrt(sq);
}

PushResult push(const Hypercube& pusher, const Hypercube& pushee) {
  if (intersection_volume(pusher, pushee) == 0.0) {
    return {PushStatus::kNoOverlap, std::nullopt};
  }
  const double vol = volume(pushee);
  std::vector<Cut> cuts;
  for (std::size_t j = 0; j < pushee.dim(); ++j) {
    const double rest = vol / pushee.side(j);
    // Raise the pushee's lower bound to the pusher's upper face.
    if (pusher.upper(j) < pushee.upper(j)) {
      cuts.push_back({j, true, pusher.upper(j), (pusher.upper(j) - pushee.lower(j)) * rest});
    }
    // Drop the pushee's upper bound to the pusher's lower face.
    if (pusher.lower(j) > pushee.lower(j)) {
      cuts.push_back({j, false, pusher.lower(j), (pushee.upper(j) - pusher.lower(j)) * rest});
    }
  }
  const auto best = cheapest(cuts);
  if (!best) return {PushStatus::kAnnihilate, std::nullopt};
  return {PushStatus::kRetracted, apply_cut(pushee, *best)};
}

std::optional<Hypercube> exclude_point(const Hypercube& h, std::span<const double> x,
                                       double epsilon_scale) {
  if (!contains(h, x)) return std::nullopt;
  if (!(epsilon_scale > 0.0)) throw std::invalid_argument("epsilon_scale must be positive");
  const double vol = volume(h);
  std::vector<Cut> cuts;
  for (std::size_t j = 0; j < h.dim(); ++j) {
    const double eps = epsilon_scale * h.side(j);
    const double rest = vol / h.side(j);
    const double new_lower = x[j] + eps;
    if (new_lower < h.upper(j)) {
      cuts.push_back({j, true, new_lower, (new_lower - h.lower(j)) * rest});
    }
    const double new_upper = x[j] - eps;
    if (new_upper > h.lower(j)) {
      cuts.push_back({j, false, new_upper, (h.upper(j) - new_upper) * rest});
    }
  }
  const auto best = cheapest(cuts);
  if (!best) return std::nullopt;
  return apply_cut(h, *best);
}

}  // namespace cotile
