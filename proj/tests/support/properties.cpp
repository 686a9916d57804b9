#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cotile/bench.hpp"
#include "oracles.hpp"

using namespace cotile;

namespace props {
namespace {

using Gen = std::mt19937_64;

double uniform(Gen& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }
int integer(Gen& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

Hypercube random_box(Gen& g, std::size_t p) {
  std::vector<double> lo(p);
  std::vector<double> hi(p);
  for (std::size_t j = 0; j < p; ++j) {
    lo[j] = uniform(g, -2.0, 2.0);
    hi[j] = lo[j] + uniform(g, 0.05, 2.0);
  }
  return {lo, hi};
}

// A box placed so that it usually overlaps `h`.
Hypercube box_near(Gen& g, const Hypercube& h) {
  std::vector<double> lo(h.dim());
  std::vector<double> hi(h.dim());
  for (std::size_t j = 0; j < h.dim(); ++j) {
    const double c = uniform(g, h.lower(j) - 0.25 * h.side(j), h.upper(j) + 0.25 * h.side(j));
    const double half = uniform(g, 0.05, 1.0) * h.side(j);
    lo[j] = c - half;
    hi[j] = c + half;
  }
  return {lo, hi};
}

oracle::Box as_box(const Hypercube& h) { return {h.lower(), h.upper()}; }

bool subset(const Hypercube& inner, const Hypercube& outer) {
  for (std::size_t j = 0; j < inner.dim(); ++j) {
    if (inner.lower(j) < outer.lower(j) || inner.upper(j) > outer.upper(j)) return false;
  }
  return true;
}

std::string describe(const Hypercube& h) {
  std::ostringstream os;
  os.precision(17);
  os << "[";
  for (std::size_t j = 0; j < h.dim(); ++j) {
    os << (j ? " x " : "") << h.lower(j) << ".." << h.upper(j);
  }
  os << "]";
  return os.str();
}

void fail(Outcome& o, const std::string& why) {
  if (o.failures++ == 0) o.first_failure = why;
}

std::vector<double> random_point(Gen& g, std::size_t p, double scale) {
  std::vector<double> x(p);
  for (double& v : x) v = uniform(g, -scale, scale);
  return x;
}

LinearModelState random_model(Gen& g, LinearKind kind, std::size_t p) {
  LinearParams params;
  params.kind = kind;
  LinearModelState m = LinearModelState::zeros(params, p);
  for (double& w : m.weights) w = uniform(g, -2.0, 2.0);
  m.bias = uniform(g, -1.0, 1.0);
  m.step_count = integer(g, 0, 500);
  return m;
}

Dataset random_dataset(Gen& g) {
  const std::size_t n = static_cast<std::size_t>(integer(g, 10, 60)) * 2;
  const std::uint64_t seed = g();
  switch (integer(g, 0, 2)) {
    case 0: return standardize(gen_moons(n, 0.3, seed));
    case 1: return standardize(gen_circles(n, 0.2, 0.5, seed));
    default: return standardize(gen_linear(n, seed));
  }
}

// A random cell of the default tiling grid, with a random internal model.
std::pair<EngineConfig, LinearParams> random_setup(Gen& g) {
  const auto cells = smapy_cells(SmapyGrid{});
  EngineConfig cfg = cells[static_cast<std::size_t>(integer(g, 0, static_cast<int>(cells.size()) - 1))];
  cfg.seed = g();
  cfg.exploration_passes = integer(g, 1, 3);
  if (integer(g, 0, 3) == 0) cfg.overlap_threshold.reset();
  cfg.train_on_correct = integer(g, 0, 4) != 0;
  LinearParams model;
  model.kind = static_cast<LinearKind>(integer(g, 0, 3));
  model.penalty = static_cast<Penalty>(integer(g, 0, 2));
  model.alpha_reg = std::pow(10.0, integer(g, -4, -2));
  model.aggressiveness = 0.5 * integer(g, 1, 4);
  return {cfg, model};
}

std::vector<std::vector<double>> probe_points(Gen& g, std::size_t count) {
  std::vector<std::vector<double>> xs;
  for (std::size_t i = 0; i < count; ++i) xs.push_back(random_point(g, 2, 3.5));
  return xs;
}

}  // namespace

Outcome volume_ratios(std::uint64_t seed, std::size_t trials) {
  Outcome o{"geometry: expand/retract volume ratios (1e-9)"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const Hypercube h = random_box(g, static_cast<std::size_t>(integer(g, 1, 5)));
    const double a = uniform(g, 0.0, 0.9);
    const double v = volume(h);
    const double up = volume(expand(h, a)) / ((1.0 + a) * v) - 1.0;
    const double down = volume(retract(h, a)) / ((1.0 - a) * v) - 1.0;
    if (std::abs(up) >= 1e-9 || std::abs(down) >= 1e-9) {
      fail(o, describe(h) + " alpha=" + std::to_string(a));
    }
  }
  return o;
}

Outcome overlap_index_laws(std::uint64_t seed, std::size_t trials) {
  Outcome o{"geometry: overlap index symmetric, bounded, 0/1 cases"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const Hypercube a = random_box(g, static_cast<std::size_t>(integer(g, 1, 4)));
    const Hypercube b = box_near(g, a);
    const double ab = overlap_index(a, b);
    const double ba = overlap_index(b, a);
    const double inter = intersection_volume(a, b);
    const double expect = oracle::box_intersection(as_box(a), as_box(b)) /
                          std::min(oracle::box_volume(as_box(a)), oracle::box_volume(as_box(b)));
    bool ok = ab == ba && ab >= 0.0 && ab <= 1.0 && std::abs(ab - expect) <= 1e-9;
    ok = ok && ((ab == 0.0) == (inter == 0.0));
    if (contains(a, b) || contains(b, a)) ok = ok && std::abs(ab - 1.0) <= 1e-12;
    if (ab == 1.0) ok = ok && (contains(a, b) || contains(b, a));
    if (!ok) fail(o, describe(a) + " vs " + describe(b));
  }
  return o;
}

Outcome push_separates(std::uint64_t seed, std::size_t trials) {
  Outcome o{"geometry: push leaves zero overlap, cheapest single cut"};
  Gen g(seed);
  while (o.trials < trials) {
    const Hypercube pusher = random_box(g, static_cast<std::size_t>(integer(g, 1, 4)));
    const Hypercube pushee = box_near(g, pusher);
    if (intersection_volume(pusher, pushee) == 0.0) continue;
    ++o.trials;
    const PushResult r = push(pusher, pushee);
    const auto expect = oracle::best_separating_cut(as_box(pusher), as_box(pushee));
    if (r.status == PushStatus::kAnnihilate) {
      if (expect) fail(o, "annihilated but a cut exists: " + describe(pusher) + " / " + describe(pushee));
      continue;
    }
    if (r.status != PushStatus::kRetracted || !r.region) {
      fail(o, "overlapping pair reported no overlap");
      continue;
    }
    const Hypercube& out = *r.region;
    bool ok = intersection_volume(pusher, out) == 0.0 && subset(out, pushee) && expect &&
              out.lower() == expect->lo && out.upper() == expect->hi;
    if (!ok) fail(o, describe(pusher) + " pushes " + describe(pushee) + " -> " + describe(out));
  }
  return o;
}

Outcome exclusion_evicts(std::uint64_t seed, std::size_t trials) {
  Outcome o{"geometry: point exclusion evicts the point, cheapest cut"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const std::size_t p = static_cast<std::size_t>(integer(g, 1, 4));
    const Hypercube h = random_box(g, p);
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) {
      switch (integer(g, 0, 5)) {
        case 0: x[j] = h.lower(j); break;
        case 1: x[j] = h.upper(j); break;
        case 2: x[j] = h.center(j); break;
        default: x[j] = uniform(g, h.lower(j), h.upper(j));
      }
    }
    const auto out = exclude_point(h, x, kDefaultEpsilonScale);
    const auto expect = oracle::best_exclusion_cut(as_box(h), x, kDefaultEpsilonScale);
    if (!out || !expect) {
      fail(o, "no exclusion produced for " + describe(h));
      continue;
    }
    const bool ok = !contains(*out, x) && subset(*out, h) && out->lower() == expect->lo &&
                    out->upper() == expect->hi;
    if (!ok) fail(o, describe(h) + " -> " + describe(*out));
  }
  return o;
}

Outcome enclosing_laws(std::uint64_t seed, std::size_t trials) {
  Outcome o{"geometry: enclosing contains both, commutative, idempotent"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const Hypercube a = random_box(g, static_cast<std::size_t>(integer(g, 1, 4)));
    const Hypercube b = box_near(g, a);
    const Hypercube e = enclosing(a, b);
    const bool ok = contains(e, a) && contains(e, b) && e == enclosing(b, a) && enclosing(a, a) == a &&
                    enclosing(e, a) == e;
    if (!ok) fail(o, describe(a) + " + " + describe(b));
  }
  return o;
}

Outcome distance_matches_projection(std::uint64_t seed, std::size_t trials) {
  Outcome o{"geometry: distance to box matches projection oracle (1e-9)"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const std::size_t p = static_cast<std::size_t>(integer(g, 1, 4));
    const Hypercube h = random_box(g, p);
    const auto x = random_point(g, p, 4.0);
    const double d = distance_to_point(h, x);
    const double expect = oracle::projection_distance(as_box(h), x);
    const bool ok = std::abs(d - expect) <= 1e-9 && ((d == 0.0) == contains(h, x));
    if (!ok) fail(o, describe(h) + " d=" + std::to_string(d) + " oracle=" + std::to_string(expect));
  }
  return o;
}

Outcome pa_margin_identity(std::uint64_t seed, std::size_t trials) {
  Outcome o{"online_linear: PA post-update margin identity (1e-9)"};
  Gen g(seed);
  while (o.trials < trials) {
    const std::size_t p = static_cast<std::size_t>(integer(g, 1, 5));
    const auto kind = integer(g, 0, 1) ? LinearKind::kPassiveAggressiveI : LinearKind::kPassiveAggressiveII;
    LinearModelState m = random_model(g, kind, p);
    const auto x = random_point(g, p, 2.0);
    const Label y = integer(g, 0, 1);
    const double s = y == 1 ? 1.0 : -1.0;
    const double loss = std::max(0.0, 1.0 - s * decision_value(m, x));
    if (loss == 0.0) continue;
    ++o.trials;

    // Untruncated PA-I lands exactly on the margin.
    LinearModelState exact = m;
    exact.params.kind = LinearKind::kPassiveAggressiveI;
    exact.params.aggressiveness = 1e12;
    partial_fit(exact, x, y);
    const double margin = s * decision_value(exact, x);

    // Any update with a finite C strictly reduces the hinge loss.
    LinearModelState capped = m;
    capped.params.aggressiveness = uniform(g, 0.05, 2.0);
    partial_fit(capped, x, y);
    const double after = std::max(0.0, 1.0 - s * decision_value(capped, x));

    if (std::abs(margin - 1.0) > 1e-9 || !(after < loss)) {
      fail(o, "margin " + std::to_string(margin) + ", loss " + std::to_string(loss) + " -> " +
                  std::to_string(after));
    }
  }
  return o;
}

Outcome sgd_gradient_vs_finite_differences(std::uint64_t seed, std::size_t trials) {
  Outcome o{"online_linear: SGD gradient vs central differences (1e-5 rel)"};
  Gen g(seed);
  const double h = 1e-6;
  while (o.trials < trials) {
    const std::size_t p = static_cast<std::size_t>(integer(g, 1, 5));
    const bool logistic = integer(g, 0, 3) != 0;
    LinearModelState m = random_model(g, logistic ? LinearKind::kLogit : LinearKind::kLinearSvm, p);
    m.params.penalty = static_cast<Penalty>(integer(g, 0, 2));
    m.params.alpha_reg = std::pow(10.0, uniform(g, -4.0, -0.5));
    const auto x = random_point(g, p, 2.0);
    const Label y = integer(g, 0, 1);
    const double s = y == 1 ? 1.0 : -1.0;

    // Keep away from the kinks of |w| and of the hinge.
    bool near_kink = false;
    for (double w : m.weights) near_kink = near_kink || std::abs(w) < 1e-3;
    if (!logistic && std::abs(1.0 - s * decision_value(m, x)) < 1e-3) near_kink = true;
    if (near_kink) continue;
    ++o.trials;

    const double l1_ratio = m.params.penalty == Penalty::kL1   ? 1.0
                            : m.params.penalty == Penalty::kL2 ? 0.0
                                                               : m.params.l1_ratio;
    auto f = [&](const std::vector<double>& w, double b) {
      return oracle::objective(logistic, w, b, x, y, m.params.alpha_reg, l1_ratio);
    };
    std::vector<double> fd(p + 1);
    for (std::size_t j = 0; j <= p; ++j) {
      std::vector<double> wp = m.weights;
      std::vector<double> wm = m.weights;
      double bp = m.bias;
      double bm = m.bias;
      if (j < p) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      fd[j] = (f(wp, bp) - f(wm, bm)) / (2.0 * h);
    }
    const auto grad = loss_gradient(m, x, y);

    // The SGD step must move along -eta * gradient.
    LinearModelState stepped = m;
    const double eta = learning_rate(m);
    partial_fit(stepped, x, y);
    std::vector<double> implied(p + 1);
    for (std::size_t j = 0; j < p; ++j) implied[j] = (m.weights[j] - stepped.weights[j]) / eta;
    implied[p] = (m.bias - stepped.bias) / eta;

    double num = 0.0;
    double num_step = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j <= p; ++j) {
      num += (grad[j] - fd[j]) * (grad[j] - fd[j]);
      num_step += (implied[j] - fd[j]) * (implied[j] - fd[j]);
      den += fd[j] * fd[j];
    }
    const double rel = std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
    const double rel_step = std::sqrt(num_step) / std::max(std::sqrt(den), 1e-12);
    const double loss_gap = std::abs(regularized_loss(m, x, y) - f(m.weights, m.bias));
    if (rel > 1e-5 || rel_step > 1e-5 || loss_gap > 1e-12) {
      fail(o, std::string(logistic ? "logit" : "svm") + " rel=" + std::to_string(rel) +
                  " step_rel=" + std::to_string(rel_step) + " loss_gap=" + std::to_string(loss_gap));
    }
  }
  return o;
}

Outcome prediction_scale_invariance(std::uint64_t seed, std::size_t trials) {
  Outcome o{"online_linear: predictions invariant to positive rescaling"};
  Gen g(seed);
  while (o.trials < trials) {
    const std::size_t p = static_cast<std::size_t>(integer(g, 1, 5));
    LinearModelState m = random_model(g, LinearKind::kLogit, p);
    const auto x = random_point(g, p, 3.0);
    if (std::abs(decision_value(m, x)) < 1e-9) continue;
    ++o.trials;
    LinearModelState scaled = m;
    const double lambda = std::pow(10.0, uniform(g, -3.0, 3.0));
    for (double& w : scaled.weights) w *= lambda;
    scaled.bias *= lambda;
    if (predict(m, x) != predict(scaled, x)) fail(o, "lambda=" + std::to_string(lambda));
  }
  return o;
}

Outcome confidence_running_sum(std::uint64_t seed, std::size_t trials) {
  Outcome o{"agents: confidence equals F+ #correct - F- #wrong (exact)"};
  Gen g(seed);
  const double weights[] = {0.0, 0.5, 1.0, 2.0};
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    EngineConfig cfg;
    cfg.feedback_plus = weights[integer(g, 0, 3)];
    cfg.feedback_minus = weights[integer(g, 0, 3)];
    cfg.point_exclusion = integer(g, 0, 1) == 1;
    cfg.alpha = uniform(g, 0.0, 0.3);
    const std::vector<double> centre{0.0, 0.0};
    ContextAgent a{.id = 0,
                   .region = Hypercube::around(centre, 1.0),
                   .confidence = 0.0,
                   .model = LinearModelState::zeros({}, 2),
                   .creation_cycle = 0,
                   .alive = true};
    int correct = 0;
    int wrong = 0;
    const int steps = integer(g, 1, 60);
    for (int k = 0; k < steps; ++k) {
      std::vector<double> x(2);
      for (std::size_t j = 0; j < 2; ++j) x[j] = uniform(g, a.region.lower(j), a.region.upper(j));
      const bool ok = integer(g, 0, 1) == 1;
      apply_feedback(a, ok, x, integer(g, 0, 1), cfg);
      (ok ? correct : wrong) += 1;
    }
    const double expect = cfg.feedback_plus * correct - cfg.feedback_minus * wrong;
    if (a.confidence != expect) {
      fail(o, "got " + std::to_string(a.confidence) + " want " + std::to_string(expect));
    }
  }
  return o;
}

Outcome engine_determinism(std::uint64_t seed, std::size_t trials) {
  Outcome o{"engine: identical inputs give byte-identical runs"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const Dataset d = random_dataset(g);
    const auto [cfg, model] = random_setup(g);
    std::string traces[2];
    Engine runs[2] = {Engine(cfg, model, 2), Engine(cfg, model, 2)};
    for (int r = 0; r < 2; ++r) {
      runs[r].set_observer([&traces, r](const CycleReport& rep) { traces[r] += to_json(rep).dump() + "\n"; });
      runs[r].train(d.X, d.Y);
    }
    const auto probes = probe_points(g, 200);
    const Engine restored = engine_from_snapshot(snapshot(runs[0]));
    const bool ok = snapshot(runs[0]).dump() == snapshot(runs[1]).dump() && traces[0] == traces[1] &&
                    runs[0].predict_batch(probes) == runs[1].predict_batch(probes) &&
                    restored.predict_batch(probes) == runs[0].predict_batch(probes) &&
                    snapshot(restored).dump() == snapshot(runs[0]).dump();
    if (!ok) fail(o, "config " + to_json(cfg).dump());
  }
  return o;
}

Outcome exploitation_immutability(std::uint64_t seed, std::size_t trials) {
  Outcome o{"engine: exploitation leaves the snapshot unchanged"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const Dataset d = random_dataset(g);
    const auto [cfg, model] = random_setup(g);
    Engine e(cfg, model, 2);
    e.train(d.X, d.Y);
    const std::string before = snapshot(e).dump();
    auto probes = probe_points(g, 300);
    probes.insert(probes.end(), d.X.begin(), d.X.end());
    const auto first = e.predict_batch(probes);
    for (const auto& x : probes) (void)e.exploit_step(x);
    const auto second = e.predict_batch(probes);
    if (first != second || snapshot(e).dump() != before) fail(o, "config " + to_json(cfg).dump());
  }
  return o;
}

Outcome engine_step_invariants(std::uint64_t seed, std::size_t trials) {
  Outcome o{"engine: per-step NCS separation and population bookkeeping"};
  Gen g(seed);
  for (std::size_t t = 0; t < trials; ++t, ++o.trials) {
    const Dataset d = random_dataset(g);
    const auto [cfg, model] = random_setup(g);
    Engine e(cfg, model, 2);
    std::size_t observed = 0;
    std::string problem;
    for (int pass = 0; pass < cfg.exploration_passes && problem.empty(); ++pass) {
      for (std::size_t i = 0; i < d.size() && problem.empty(); ++i) {
        const auto& x = d.X[i];
        // Proposals at x of every agent before the step; models only change
        // for activated agents, and those propose before feedback.
        std::map<std::int64_t, Label> proposal;
        for (const auto& a : e.agents()) proposal[a.id] = propose(a, x);
        const std::size_t before = e.agents().size();
        const std::int64_t cycle = e.cycle();

        const CycleReport rep = e.explore_step(x, d.Y[i]);
        ++observed;

        // Pairs the step had to settle: all activated agents, or the new
        // agent against every agent it overlapped on creation.
        std::vector<std::pair<std::int64_t, std::int64_t>> settled;
        std::size_t created = 0;
        std::size_t absorbed = 0;
        for (const auto& ev : rep.ncs_events) {
          if (ev.resolution == Resolution::kCreate) ++created;
          if (ev.resolution == Resolution::kAbsorb) ++absorbed;
        }
        if (created == 1) {
          const std::int64_t fresh = rep.ncs_events.front().participants.front();
          proposal[fresh] = rep.prediction;
          for (const auto& ev : rep.ncs_events) {
            if (ev.kind != NcsKind::kIncompetence) {
              settled.emplace_back(ev.participants[0], ev.participants[1]);
            }
          }
        } else {
          for (std::size_t a = 0; a < rep.activated_ids.size(); ++a) {
            for (std::size_t b = a + 1; b < rep.activated_ids.size(); ++b) {
              settled.emplace_back(rep.activated_ids[a], rep.activated_ids[b]);
            }
          }
        }

        auto alive = [&](std::int64_t id) -> const ContextAgent* {
          for (const auto& a : e.agents()) {
            if (a.id == id) return &a;
          }
          return nullptr;
        };
        for (const auto& [ia, ib] : settled) {
          const ContextAgent* pa = alive(ia);
          const ContextAgent* pb = alive(ib);
          if (pa == nullptr || pb == nullptr) continue;
          if (intersection_volume(pa->region, pb->region) != 0.0) {
            problem = "agents " + std::to_string(ia) + "/" + std::to_string(ib) +
                      (proposal[ia] != proposal[ib] ? " (conflict)" : " (competition)") +
                      " still overlap at cycle " + std::to_string(cycle);
          }
        }
        std::set<std::int64_t> ids;
        for (const auto& a : e.agents()) {
          ids.insert(a.id);
          if (!a.alive) problem = "dead agent kept";
        }
        if (ids.size() != e.agents().size()) problem = "duplicate ids";
        if (e.agents().size() != before + created - absorbed) problem = "population bookkeeping";
        if (e.agents().size() > observed) problem = "more agents than observations";
        if (e.cycle() != cycle + 1) problem = "cycle did not advance by one";
      }
    }
    if (!problem.empty()) fail(o, problem + " with config " + to_json(cfg).dump());
  }
  return o;
}

std::vector<Outcome> all(std::uint64_t seed) {
  return {
      volume_ratios(seed, 5000),
      overlap_index_laws(seed + 1, 5000),
      push_separates(seed + 2, 5000),
      exclusion_evicts(seed + 3, 5000),
      enclosing_laws(seed + 4, 2000),
      distance_matches_projection(seed + 5, 5000),
      pa_margin_identity(seed + 6, 5000),
      sgd_gradient_vs_finite_differences(seed + 7, 5000),
      prediction_scale_invariance(seed + 8, 2000),
      confidence_running_sum(seed + 9, 2000),
      engine_determinism(seed + 10, 20),
      exploitation_immutability(seed + 11, 20),
      engine_step_invariants(seed + 12, 40),
  };
}

}  // namespace props
