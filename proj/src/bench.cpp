#include "cotile/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "cotile/rng.hpp"

namespace cotile {
namespace {

template <typename T>
std::vector<T> subset(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string display_name(LinearKind k) {
  switch (k) {
    case LinearKind::kLogit: return "Logit";
    case LinearKind::kLinearSvm: return "Linear SVM";
    case LinearKind::kPassiveAggressiveI: return "PA-I";
    case LinearKind::kPassiveAggressiveII: return "PA-II";
  }
  return "?";
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

// Index of the best mean; first wins on ties.
std::size_t argmax_mean(const std::vector<std::vector<double>>& per_cell) {
  std::size_t best = 0;
  double best_mean = -1.0;
  for (std::size_t c = 0; c < per_cell.size(); ++c) {
    const double m = mean_of(per_cell[c]);
    if (m > best_mean) {
      best_mean = m;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<std::vector<std::size_t>> kfold_split(std::span<const Label> labels, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
  if (k > labels.size()) throw std::invalid_argument("k exceeds the number of samples");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  for (const auto& members : by_class) {
    if (!members.empty() && members.size() < k) {
      throw std::invalid_argument("a class has fewer members than folds");
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t next = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t i : members) {
      folds[next].push_back(i);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

double accuracy(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions and labels differ in length");
  }
  if (labels.empty()) throw std::invalid_argument("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

std::vector<FoldRows> fold_rows(const std::vector<std::vector<std::size_t>>& folds) {
  std::vector<FoldRows> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    FoldRows rows;
    rows.validation = folds[f];
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) rows.train.insert(rows.train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(rows.train.begin(), rows.train.end());
    out.push_back(std::move(rows));
  }
  return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<LinearParams> linear_cells(LinearKind kind, const LinearGrid& grid,
                                       const LinearParams& base) {
  std::vector<LinearParams> cells;
  LinearParams p = base;
  p.kind = kind;
  if (kind == LinearKind::kLogit || kind == LinearKind::kLinearSvm) {
    for (double a : grid.alpha) {
      for (Penalty pen : grid.penalty) {
        p.alpha_reg = a;
        p.penalty = pen;
        cells.push_back(p);
      }
    }
  } else {
    for (double c : grid.C) {
      p.aggressiveness = c;
      cells.push_back(p);
    }
  }
  return cells;
}

std::vector<EngineConfig> smapy_cells(const SmapyGrid& grid, const EngineConfig& base) {
  std::vector<EngineConfig> cells;
  EngineConfig c = base;
  for (double r : grid.R)
    for (const auto& o : grid.O)
      for (bool e : grid.E)
        for (Normalization nc : grid.Nc)
          for (double a : grid.alpha)
            for (double fp : grid.Fplus)
              for (double fm : grid.Fminus) {
                c.radius = r;
                c.overlap_threshold = o;
                c.point_exclusion = e;
                c.normalization = nc;
                c.alpha = a;
                c.feedback_plus = fp;
                c.feedback_minus = fm;
                cells.push_back(c);
              }
  return cells;
}

std::string to_string(Stage s) { return s == Stage::kAlone ? "ALONE" : "MAS"; }

Json to_json(const ResultRecord& r) {
  return Json{{"dataset", r.dataset},
              {"kind", to_string(r.kind)},
              {"stage", to_string(r.stage)},
              {"best_params", r.best_params},
              {"fold_accuracies", r.fold_accuracies},
              {"mean_accuracy", r.mean_accuracy}};
}

std::vector<double> cross_validate_linear(const Dataset& d, const LinearParams& params,
                                          const std::vector<FoldRows>& folds,
                                          const CvOptions& cv) {
  std::vector<double> acc;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    LinearModelState m = LinearModelState::zeros(params, d.dim());
    fit(m, subset(d.X, folds[f].train), subset(d.Y, folds[f].train), cv.epochs,
        cv.model_seed + f);
    std::vector<Label> pred;
    for (std::size_t i : folds[f].validation) pred.push_back(predict(m, d.X[i]));
    acc.push_back(accuracy(pred, subset(d.Y, folds[f].validation)));
  }
  return acc;
}

std::vector<double> cross_validate_smapy(const Dataset& d, const LinearParams& model,
                                         const EngineConfig& cfg,
                                         const std::vector<FoldRows>& folds) {
  std::vector<double> acc;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    EngineConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + f;
    Engine engine(fold_cfg, model, d.dim());
    engine.train(subset(d.X, folds[f].train), subset(d.Y, folds[f].train));
    acc.push_back(accuracy(engine.predict_batch(subset(d.X, folds[f].validation)),
                           subset(d.Y, folds[f].validation)));
  }
  return acc;
}

LinearSearchResult grid_search_linear(const std::string& dataset_name, const Dataset& d,
                                      LinearKind kind, const LinearGrid& grid,
                                      const CvOptions& cv) {
  const auto cells = linear_cells(kind, grid);
  if (cells.empty()) throw std::invalid_argument("empty linear grid");
  const auto folds = fold_rows(kfold_split(d.Y, cv.folds, cv.seed));
  std::vector<std::vector<double>> scores(cells.size());
  parallel_for(cells.size(), cv.threads,
               [&](std::size_t c) { scores[c] = cross_validate_linear(d, cells[c], folds, cv); });
  const std::size_t best = argmax_mean(scores);
  ResultRecord rec{dataset_name, kind, Stage::kAlone, to_json(cells[best]), scores[best],
                   mean_of(scores[best])};
  return {std::move(rec), cells[best]};
}

SmapySearchResult grid_search_smapy(const std::string& dataset_name, const Dataset& d,
                                    const LinearParams& model, const SmapyGrid& grid,
                                    const CvOptions& cv) {
  EngineConfig base;
  base.seed = cv.model_seed;
  base.exploration_passes = cv.exploration_passes;
  const auto cells = smapy_cells(grid, base);
  if (cells.empty()) throw std::invalid_argument("empty smapy grid");
  const auto folds = fold_rows(kfold_split(d.Y, cv.folds, cv.seed));
  std::vector<std::vector<double>> scores(cells.size());
  parallel_for(cells.size(), cv.threads, [&](std::size_t c) {
    scores[c] = cross_validate_smapy(d, model, cells[c], folds);
  });
  const std::size_t best = argmax_mean(scores);
  Json params = to_json(cells[best]);
  params["model"] = to_json(model);
  ResultRecord rec{dataset_name, model.kind, Stage::kMas, std::move(params), scores[best],
                   mean_of(scores[best])};
  return {std::move(rec), cells[best]};
}

BoundaryGrid boundary_grid(const Classifier& classify, std::span<const double> lo,
                           std::span<const double> hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("boundary step must be positive");
  if (lo.size() != 2 || hi.size() != 2) {
    throw std::invalid_argument("boundary lattice is two-dimensional");
  }
  BoundaryGrid g;
  g.step = step;
  g.x0 = lo[0] - 0.5;
  g.y0 = lo[1] - 0.5;
  g.nx = static_cast<std::size_t>(std::floor((hi[0] - lo[0] + 1.0) / step + 1e-9)) + 1;
  g.ny = static_cast<std::size_t>(std::floor((hi[1] - lo[1] + 1.0) / step + 1e-9)) + 1;
  g.labels.resize(g.nx * g.ny);
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      const double pt[2] = {g.x(ix), g.y(iy)};
      g.labels[iy * g.nx + ix] = classify(pt);
    }
  }
  return g;
}

std::string boundary_csv(const BoundaryGrid& g) {
  std::string out = "x1,x2,yhat\n";
  char buf[96];
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%d\n", g.x(ix), g.y(iy), g.at(ix, iy));
      out += buf;
    }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> frontier_cells(const BoundaryGrid& g) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t iy = 0; iy < g.ny; ++iy) {
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      if (g.at(ix, iy) != 1) continue;
      const bool edge = (ix > 0 && g.at(ix - 1, iy) == 0) ||
                        (ix + 1 < g.nx && g.at(ix + 1, iy) == 0) ||
                        (iy > 0 && g.at(ix, iy - 1) == 0) ||
                        (iy + 1 < g.ny && g.at(ix, iy + 1) == 0);
      if (edge) cells.emplace_back(ix, iy);
    }
  }
  return cells;
}

LineFit fit_frontier_line(const BoundaryGrid& g) {
  const auto cells = frontier_cells(g);
  LineFit fit;
  fit.cells = cells.size();
  if (cells.size() < 2) {
    fit.straight = true;
    return fit;
  }
  double mx = 0.0;
  double my = 0.0;
  for (auto [ix, iy] : cells) {
    mx += g.x(ix);
    my += g.y(iy);
  }
  const double n = static_cast<double>(cells.size());
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (auto [ix, iy] : cells) {
    const double dx = g.x(ix) - mx;
    const double dy = g.y(iy) - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  // Direction of largest spread; the residual is measured along its normal.
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const double nxn = -std::sin(theta);
  const double nyn = std::cos(theta);
  for (auto [ix, iy] : cells) {
    const double r = std::abs((g.x(ix) - mx) * nxn + (g.y(iy) - my) * nyn);
    fit.max_residual = std::max(fit.max_residual, r);
  }
  fit.straight = fit.max_residual < g.step;
  return fit;
}

Enclosure enclosure_around(const BoundaryGrid& g, std::span<const double> probe) {
  if (probe.size() != 2) throw std::invalid_argument("probe must be two-dimensional");
  auto clamp_index = [](double v, double origin, double step, std::size_t n) {
    const double k = std::round((v - origin) / step);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
  };
  const std::size_t sx = clamp_index(probe[0], g.x0, g.step, g.nx);
  const std::size_t sy = clamp_index(probe[1], g.y0, g.step, g.ny);

  Enclosure out;
  out.label = g.at(sx, sy);
  out.touches_border = false;
  std::vector<char> seen(g.labels.size(), 0);
  std::deque<std::pair<std::size_t, std::size_t>> queue{{sx, sy}};
  seen[sy * g.nx + sx] = 1;
  while (!queue.empty()) {
    auto [ix, iy] = queue.front();
    queue.pop_front();
    ++out.component_size;
    if (ix == 0 || iy == 0 || ix + 1 == g.nx || iy + 1 == g.ny) out.touches_border = true;
    bool on_frontier = false;
    auto visit = [&](std::size_t jx, std::size_t jy) {
      if (g.at(jx, jy) != out.label) {
        on_frontier = true;
        return;
      }
      char& s = seen[jy * g.nx + jx];
      if (!s) {
        s = 1;
        queue.emplace_back(jx, jy);
      }
    };
    if (ix > 0) visit(ix - 1, iy);
    if (ix + 1 < g.nx) visit(ix + 1, iy);
    if (iy > 0) visit(ix, iy - 1);
    if (iy + 1 < g.ny) visit(ix, iy + 1);
    if (on_frontier) ++out.frontier_cells;
  }
  out.enclosed = !out.touches_border && out.frontier_cells > 0;
  return out;
}

Dataset make_dataset(const DatasetSpec& spec) {
  Dataset raw;
  if (spec.name == "moons") {
    raw = gen_moons(spec.n, spec.noise, spec.seed);
  } else if (spec.name == "circles") {
    raw = gen_circles(spec.n, spec.noise, spec.factor, spec.seed);
  } else if (spec.name == "linear") {
    raw = gen_linear(spec.n, spec.seed);
  } else {
    throw std::invalid_argument("unknown dataset '" + spec.name + "'");
  }
  return standardize(raw);
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.datasets = {
      {"moons", 100, 0.3, 0.5, 0},
      {"circles", 100, 0.2, 0.5, 0},
      {"linear", 100, 0.0, 0.5, 0},
  };
  c.kinds = {LinearKind::kLogit, LinearKind::kLinearSvm, LinearKind::kPassiveAggressiveI,
             LinearKind::kPassiveAggressiveII};
  return c;
}

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw std::invalid_argument("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
std::vector<T> nonempty_list(const Json& j, const char* key, const std::string& where) {
  auto v = j.at(key).get<std::vector<T>>();
  if (v.empty()) throw std::invalid_argument(where + "." + key + " must not be empty");
  return v;
}

}  // namespace

ExperimentConfig experiment_from_json(const Json& j) {
  ExperimentConfig c = default_experiment();
  reject_unknown(j, {"datasets", "kinds", "grid", "cv", "boundary_step", "write_boundaries"},
                 "config");
  try {
    if (j.contains("datasets")) {
      c.datasets.clear();
      for (const Json& dj : j.at("datasets")) {
        reject_unknown(dj, {"name", "n", "noise", "factor", "seed"}, "datasets[]");
        DatasetSpec s;
        s.name = dj.at("name").get<std::string>();
        s.n = dj.value("n", std::size_t{100});
        s.noise = dj.value("noise", s.name == "moons" ? 0.3 : s.name == "circles" ? 0.2 : 0.0);
        s.factor = dj.value("factor", 0.5);
        s.seed = dj.value("seed", std::uint64_t{0});
        if (s.name != "moons" && s.name != "circles" && s.name != "linear") {
          throw std::invalid_argument("unknown dataset '" + s.name + "'");
        }
        if (s.n < 10) throw std::invalid_argument("datasets[].n must be >= 10");
        if (s.noise < 0.0) throw std::invalid_argument("datasets[].noise must be >= 0");
        if (!(s.factor > 0.0 && s.factor < 1.0)) {
          throw std::invalid_argument("datasets[].factor must lie in (0, 1)");
        }
        c.datasets.push_back(s);
      }
      if (c.datasets.empty()) throw std::invalid_argument("datasets must not be empty");
    }
    if (j.contains("kinds")) {
      c.kinds.clear();
      for (const auto& k : nonempty_list<std::string>(j, "kinds", "config")) {
        c.kinds.push_back(parse_linear_kind(k));
      }
    }
    if (j.contains("grid")) {
      const Json& g = j.at("grid");
      reject_unknown(g, {"linear", "smapy"}, "grid");
      if (g.contains("linear")) {
        const Json& l = g.at("linear");
        reject_unknown(l, {"alpha", "penalty", "C"}, "grid.linear");
        if (l.contains("alpha")) c.grid.linear.alpha = nonempty_list<double>(l, "alpha", "grid.linear");
        if (l.contains("penalty")) {
          c.grid.linear.penalty.clear();
          for (const auto& p : nonempty_list<std::string>(l, "penalty", "grid.linear")) {
            c.grid.linear.penalty.push_back(parse_penalty(p));
          }
        }
        if (l.contains("C")) c.grid.linear.C = nonempty_list<double>(l, "C", "grid.linear");
        for (double a : c.grid.linear.alpha) {
          if (a < 0.0) throw std::invalid_argument("grid.linear.alpha values must be >= 0");
        }
        for (double v : c.grid.linear.C) {
          if (!(v > 0.0)) throw std::invalid_argument("grid.linear.C values must be positive");
        }
      }
      if (g.contains("smapy")) {
        const Json& s = g.at("smapy");
        reject_unknown(s, {"R", "O", "E", "Nc", "alpha", "Fplus", "Fminus"}, "grid.smapy");
        SmapyGrid& sg = c.grid.smapy;
        if (s.contains("R")) sg.R = nonempty_list<double>(s, "R", "grid.smapy");
        if (s.contains("O")) {
          sg.O.clear();
          for (const Json& o : s.at("O")) {
            sg.O.push_back(o.is_null() ? std::nullopt : std::optional<double>(o.get<double>()));
          }
          if (sg.O.empty()) throw std::invalid_argument("grid.smapy.O must not be empty");
        }
        if (s.contains("E")) sg.E = nonempty_list<bool>(s, "E", "grid.smapy");
        if (s.contains("Nc")) {
          for (const auto& n : nonempty_list<std::string>(s, "Nc", "grid.smapy")) {
            if (n != "sigmoid") throw std::invalid_argument("grid.smapy.Nc supports only 'sigmoid'");
          }
        }
        if (s.contains("alpha")) sg.alpha = nonempty_list<double>(s, "alpha", "grid.smapy");
        if (s.contains("Fplus")) sg.Fplus = nonempty_list<double>(s, "Fplus", "grid.smapy");
        if (s.contains("Fminus")) sg.Fminus = nonempty_list<double>(s, "Fminus", "grid.smapy");
        for (const EngineConfig& cell : smapy_cells(sg)) cell.validate();
      }
    }
    if (j.contains("cv")) {
      const Json& cj = j.at("cv");
      reject_unknown(cj, {"folds", "seed", "epochs", "model_seed", "exploration_passes", "threads"},
                     "cv");
      c.cv.folds = cj.value("folds", c.cv.folds);
      c.cv.seed = cj.value("seed", c.cv.seed);
      c.cv.epochs = cj.value("epochs", c.cv.epochs);
      c.cv.model_seed = cj.value("model_seed", c.cv.model_seed);
      c.cv.exploration_passes = cj.value("exploration_passes", c.cv.exploration_passes);
      c.cv.threads = cj.value("threads", c.cv.threads);
      if (c.cv.folds < 2) throw std::invalid_argument("cv.folds must be >= 2");
      if (c.cv.epochs < 1) throw std::invalid_argument("cv.epochs must be >= 1");
      if (c.cv.exploration_passes < 1) {
        throw std::invalid_argument("cv.exploration_passes must be >= 1");
      }
    }
    c.boundary_step = j.value("boundary_step", c.boundary_step);
    if (!(c.boundary_step > 0.0)) throw std::invalid_argument("boundary_step must be positive");
    c.write_boundaries = j.value("write_boundaries", c.write_boundaries);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid config: ") + e.what());
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json datasets = Json::array();
  for (const auto& d : c.datasets) {
    datasets.push_back(Json{{"name", d.name}, {"n", d.n}, {"noise", d.noise},
                            {"factor", d.factor}, {"seed", d.seed}});
  }
  Json kinds = Json::array();
  for (LinearKind k : c.kinds) kinds.push_back(to_string(k));
  Json penalties = Json::array();
  for (Penalty p : c.grid.linear.penalty) penalties.push_back(to_string(p));
  Json overlap = Json::array();
  for (const auto& o : c.grid.smapy.O) overlap.push_back(o ? Json(*o) : Json(nullptr));
  Json nc = Json::array();
  for (std::size_t i = 0; i < c.grid.smapy.Nc.size(); ++i) nc.push_back("sigmoid");
  return Json{
      {"datasets", datasets},
      {"kinds", kinds},
      {"grid",
       {{"linear", {{"alpha", c.grid.linear.alpha}, {"penalty", penalties}, {"C", c.grid.linear.C}}},
        {"smapy",
         {{"R", c.grid.smapy.R},
          {"O", overlap},
          {"E", c.grid.smapy.E},
          {"Nc", nc},
          {"alpha", c.grid.smapy.alpha},
          {"Fplus", c.grid.smapy.Fplus},
          {"Fminus", c.grid.smapy.Fminus}}}}},
      {"cv",
       {{"folds", c.cv.folds},
        {"seed", c.cv.seed},
        {"epochs", c.cv.epochs},
        {"model_seed", c.cv.model_seed},
        {"exploration_passes", c.cv.exploration_passes},
        {"threads", c.cv.threads}}},
      {"boundary_step", c.boundary_step},
      {"write_boundaries", c.write_boundaries},
  };
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir,
                                const ProgressFn& progress) {
  if (out_dir) std::filesystem::create_directories(*out_dir / "boundaries");
  ExperimentResult result;
  const double origin[2] = {0.0, 0.0};

  for (const DatasetSpec& spec : cfg.datasets) {
    const Dataset d = make_dataset(spec);
    std::vector<double> lo = d.X.front();
    std::vector<double> hi = d.X.front();
    for (const auto& row : d.X) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        lo[j] = std::min(lo[j], row[j]);
        hi[j] = std::max(hi[j], row[j]);
      }
    }

    for (LinearKind kind : cfg.kinds) {
      auto alone = grid_search_linear(spec.name, d, kind, cfg.grid.linear, cfg.cv);
      if (progress) {
        progress(spec.name + " " + to_string(kind) + " ALONE " + fixed(alone.record.mean_accuracy, 3));
      }
      auto mas = grid_search_smapy(spec.name, d, alone.best, cfg.grid.smapy, cfg.cv);
      if (progress) {
        progress(spec.name + " " + to_string(kind) + " MAS " + fixed(mas.record.mean_accuracy, 3));
      }

      // Refit both winners on the full dataset for the boundary lattices.
      LinearModelState linear = LinearModelState::zeros(alone.best, d.dim());
      fit(linear, d.X, d.Y, cfg.cv.epochs, cfg.cv.model_seed);
      Engine engine(mas.best, alone.best, d.dim());
      engine.train(d.X, d.Y);

      const BoundaryGrid g_alone = boundary_grid(
          [&](std::span<const double> x) { return predict(linear, x); }, lo, hi, cfg.boundary_step);
      const BoundaryGrid g_mas = boundary_grid(
          [&](std::span<const double> x) { return engine.exploit_step(x).prediction; }, lo, hi,
          cfg.boundary_step);
      result.boundaries.push_back({spec.name, kind, Stage::kAlone, fit_frontier_line(g_alone),
                                   enclosure_around(g_alone, origin)});
      result.boundaries.push_back({spec.name, kind, Stage::kMas, fit_frontier_line(g_mas),
                                   enclosure_around(g_mas, origin)});
      if (out_dir && cfg.write_boundaries) {
        const auto base = *out_dir / "boundaries" / (spec.name + "_" + to_string(kind));
        write_file(base.string() + "_alone.csv", boundary_csv(g_alone));
        write_file(base.string() + "_mas.csv", boundary_csv(g_mas));
      }
      result.records.push_back(std::move(alone.record));
      result.records.push_back(std::move(mas.record));
    }
  }

  if (out_dir) {
    Json records = Json::array();
    for (const auto& r : result.records) records.push_back(to_json(r));
    write_file(*out_dir / "results.json", records.dump(2) + "\n");
    write_file(*out_dir / "table3.csv", table3_csv(result.records));
    write_file(*out_dir / "table3.txt", table3_text(result.records));
    Json checks = Json::array();
    for (const auto& b : result.boundaries) {
      checks.push_back(Json{{"dataset", b.dataset},
                            {"kind", to_string(b.kind)},
                            {"stage", to_string(b.stage)},
                            {"frontier_cells", b.line.cells},
                            {"line_max_residual", b.line.max_residual},
                            {"straight_band", b.line.straight},
                            {"origin_label", b.origin.label},
                            {"origin_enclosed", b.origin.enclosed}});
    }
    write_file(*out_dir / "boundary_checks.json", checks.dump(2) + "\n");
    write_file(*out_dir / "config.json", to_json(cfg).dump(2) + "\n");
  }
  return result;
}

namespace {

struct TableLayout {
  std::vector<std::string> datasets;
  std::vector<LinearKind> kinds;
};

TableLayout layout_of(const std::vector<ResultRecord>& records) {
  TableLayout t;
  for (const auto& r : records) {
    if (std::find(t.datasets.begin(), t.datasets.end(), r.dataset) == t.datasets.end()) {
      t.datasets.push_back(r.dataset);
    }
    if (std::find(t.kinds.begin(), t.kinds.end(), r.kind) == t.kinds.end()) {
      t.kinds.push_back(r.kind);
    }
  }
  return t;
}

const ResultRecord* lookup(const std::vector<ResultRecord>& records, const std::string& ds,
                           LinearKind kind, Stage stage) {
  for (const auto& r : records) {
    if (r.dataset == ds && r.kind == kind && r.stage == stage) return &r;
  }
  return nullptr;
}

}  // namespace

std::string table3_csv(const std::vector<ResultRecord>& records) {
  const TableLayout t = layout_of(records);
  std::string out = "model";
  for (const auto& ds : t.datasets) out += "," + ds + "_alone," + ds + "_mas";
  out += "\n";
  for (LinearKind k : t.kinds) {
    out += to_string(k);
    for (const auto& ds : t.datasets) {
      for (Stage s : {Stage::kAlone, Stage::kMas}) {
        const ResultRecord* r = lookup(records, ds, k, s);
        out += "," + (r ? fixed(r->mean_accuracy, 4) : std::string());
      }
    }
    out += "\n";
  }
  return out;
}

std::string table3_text(const std::vector<ResultRecord>& records) {
  const TableLayout t = layout_of(records);
  char buf[64];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-12s", "");
  out += buf;
  for (const auto& ds : t.datasets) {
    std::snprintf(buf, sizeof buf, " | %-15s", ds.c_str());
    out += buf;
  }
  out += "\n";
  std::snprintf(buf, sizeof buf, "%-12s", "");
  out += buf;
  for (std::size_t i = 0; i < t.datasets.size(); ++i) out += " | Alone    MAS   ";
  out += "\n";
  for (LinearKind k : t.kinds) {
    std::snprintf(buf, sizeof buf, "%-12s", display_name(k).c_str());
    out += buf;
    for (const auto& ds : t.datasets) {
      const ResultRecord* a = lookup(records, ds, k, Stage::kAlone);
      const ResultRecord* m = lookup(records, ds, k, Stage::kMas);
      std::snprintf(buf, sizeof buf, " | %-5s    %-5s ", a ? fixed(a->mean_accuracy, 2).c_str() : "-",
                    m ? fixed(m->mean_accuracy, 2).c_str() : "-");
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace cotile
