// Command-line front end: dataset generation, grid searches, boundary
// lattices and the full accuracy-table reproduction.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cotile/bench.hpp"
#include "cotile/rng.hpp"

using namespace cotile;

namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void emit(const std::string& path, const Json& j) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text(path, j.dump(2) + "\n");
  }
}

Json bounds_of(const Dataset& d) {
  std::vector<double> lo = d.X.front();
  std::vector<double> hi = d.X.front();
  for (const auto& row : d.X) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      lo[j] = std::min(lo[j], row[j]);
      hi[j] = std::max(hi[j], row[j]);
    }
  }
  return Json{{"min", lo}, {"max", hi}};
}

GridSpec load_grid(const std::string& grid) {
  if (grid == "default") return {};
  Json cfg = Json{{"grid", read_json(grid)}};
  return experiment_from_json(cfg).grid;
}

// fit-linear output files carry the winning parameters under "params".
LinearParams load_linear_params(const std::string& path) {
  const Json j = read_json(path);
  return linear_params_from_json(j.contains("params") ? j.at("params") : j);
}

struct Common {
  std::string data;
  std::string out;
  std::string kind;
  std::string grid = "default";
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::uint64_t model_seed = 0;
  unsigned threads = 0;
  std::string trace;
};

CvOptions cv_of(const Common& c) {
  CvOptions cv;
  cv.folds = c.folds;
  cv.seed = c.seed;
  cv.model_seed = c.model_seed;
  cv.threads = c.threads;
  return cv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative tiling of linear classifiers"};
  app.require_subcommand(1);

  // gen-data
  std::string dataset_name;
  std::size_t n = 100;
  std::uint64_t data_seed = 0;
  double noise = -1.0;
  double factor = 0.5;
  bool raw = false;
  std::string data_out;
  auto* gen = app.add_subcommand("gen-data", "Generate a toy dataset as CSV");
  gen->add_option("--dataset", dataset_name, "moons | circles | linear")
      ->required()
      ->check(CLI::IsMember({"moons", "circles", "linear"}));
  gen->add_option("--n", n, "Number of points")->check(CLI::Range(2, 1000000));
  gen->add_option("--seed", data_seed, "Generator seed");
  gen->add_option("--noise", noise, "Gaussian noise (default 0.3 moons, 0.2 circles)");
  gen->add_option("--factor", factor, "Inner/outer radius ratio for circles");
  gen->add_flag("--raw", raw, "Skip standardization");
  gen->add_option("--out", data_out, "Output CSV")->required();

  // fit-linear
  Common lin;
  int epochs = 100;
  auto* fit_linear = app.add_subcommand("fit-linear", "Grid-search a standalone linear model");
  fit_linear->add_option("--data", lin.data, "Dataset CSV")->required();
  fit_linear->add_option("--kind", lin.kind, "logit | svm | pa1 | pa2")
      ->required()
      ->check(CLI::IsMember({"logit", "svm", "pa1", "pa2"}));
  fit_linear->add_option("--grid", lin.grid, "'default' or a grid JSON file");
  fit_linear->add_option("--cv", lin.folds, "Number of folds");
  fit_linear->add_option("--seed", lin.seed, "Fold assignment seed");
  fit_linear->add_option("--model-seed", lin.model_seed, "Training shuffle seed");
  fit_linear->add_option("--epochs", epochs, "Passes over the training rows");
  fit_linear->add_option("--threads", lin.threads, "Worker threads (0: all cores)");
  fit_linear->add_option("--out", lin.out, "Output JSON (default stdout)");
  fit_linear->add_option("--trace", lin.trace, "Write per-epoch JSON lines of the final fit");

  // fit-smapy
  Common mas;
  std::string linear_params_path;
  int passes = 3;
  auto* fit_smapy = app.add_subcommand("fit-smapy", "Grid-search the tiling system");
  fit_smapy->add_option("--data", mas.data, "Dataset CSV")->required();
  fit_smapy->add_option("--kind", mas.kind, "Internal model kind (checked against params)");
  fit_smapy->add_option("--linear-params", linear_params_path, "fit-linear output or params JSON")
      ->required();
  fit_smapy->add_option("--grid", mas.grid, "'default' or a grid JSON file");
  fit_smapy->add_option("--cv", mas.folds, "Number of folds");
  fit_smapy->add_option("--seed", mas.seed, "Fold assignment seed");
  fit_smapy->add_option("--model-seed", mas.model_seed, "Exploration shuffle seed");
  fit_smapy->add_option("--passes", passes, "Exploration passes")->check(CLI::PositiveNumber);
  fit_smapy->add_option("--threads", mas.threads, "Worker threads (0: all cores)");
  fit_smapy->add_option("--out", mas.out, "Output JSON (default stdout)");
  fit_smapy->add_option("--trace", mas.trace, "Write one JSON line per exploration cycle");

  // boundary
  std::string model_path;
  double step = 0.02;
  std::string boundary_out;
  auto* boundary = app.add_subcommand("boundary", "Evaluate a fitted model on a lattice");
  boundary->add_option("--model", model_path, "fit-linear or fit-smapy output")->required();
  boundary->add_option("--step", step, "Lattice spacing")->check(CLI::PositiveNumber);
  boundary->add_option("--out", boundary_out, "Output CSV (default stdout)");

  // reproduce
  std::string config_path;
  std::string out_dir;
  auto* reproduce = app.add_subcommand("reproduce", "Run the full three-dataset experiment");
  reproduce->add_option("--config", config_path, "Experiment config JSON ('default' allowed)")
      ->required();
  reproduce->add_option("--out", out_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      DatasetSpec spec{dataset_name, n, noise, factor, data_seed};
      if (noise < 0.0) spec.noise = dataset_name == "moons" ? 0.3 : dataset_name == "circles" ? 0.2 : 0.0;
      Dataset d = dataset_name == "moons"     ? gen_moons(n, spec.noise, data_seed)
                  : dataset_name == "circles" ? gen_circles(n, spec.noise, factor, data_seed)
                                              : gen_linear(n, data_seed);
      if (!raw) d = standardize(d);
      save_csv(d, data_out);
      Json manifest{{"dataset", dataset_name}, {"n", n}, {"seed", data_seed},
                    {"noise", spec.noise}, {"factor", factor}, {"standardized", !raw}};
      if (d.scaler) manifest["scaler"] = to_json(*d.scaler);
      write_text(data_out + ".manifest.json", manifest.dump(2) + "\n");
      return 0;
    }

    if (*fit_linear) {
      const Dataset d = load_csv(lin.data);
      CvOptions cv = cv_of(lin);
      cv.epochs = epochs;
      const auto res =
          grid_search_linear(lin.data, d, parse_linear_kind(lin.kind), load_grid(lin.grid).linear, cv);
      LinearModelState model = LinearModelState::zeros(res.best, d.dim());
      std::ofstream trace;
      if (!lin.trace.empty()) trace.open(lin.trace);
      if (trace) {
        Rng rng(cv.model_seed);
        auto order = iota_indices(d.size());
        for (int e = 0; e < epochs; ++e) {
          rng.shuffle(order);
          for (std::size_t i : order) partial_fit(model, d.X[i], d.Y[i]);
          std::vector<Label> pred;
          for (const auto& x : d.X) pred.push_back(predict(model, x));
          trace << Json{{"epoch", e}, {"weights", model.weights}, {"bias", model.bias},
                        {"train_accuracy", accuracy(pred, d.Y)}}.dump()
                << "\n";
        }
      } else {
        fit(model, d.X, d.Y, epochs, cv.model_seed);
      }
      emit(lin.out, Json{{"type", "linear"},
                         {"record", to_json(res.record)},
                         {"params", to_json(res.best)},
                         {"model", to_json(model)},
                         {"bounds", bounds_of(d)}});
      return 0;
    }

    if (*fit_smapy) {
      const Dataset d = load_csv(mas.data);
      const LinearParams params = load_linear_params(linear_params_path);
      if (!mas.kind.empty() && parse_linear_kind(mas.kind) != params.kind) {
        throw std::invalid_argument("--kind does not match the kind in --linear-params");
      }
      CvOptions cv = cv_of(mas);
      cv.exploration_passes = passes;
      const auto res = grid_search_smapy(mas.data, d, params, load_grid(mas.grid).smapy, cv);
      Engine engine(res.best, params, d.dim());
      std::ofstream trace;
      if (!mas.trace.empty()) {
        trace.open(mas.trace);
        engine.set_observer([&trace](const CycleReport& r) { trace << to_json(r).dump() << "\n"; });
      }
      engine.train(d.X, d.Y);
      emit(mas.out, Json{{"type", "smapy"},
                         {"record", to_json(res.record)},
                         {"config", to_json(res.best)},
                         {"snapshot", snapshot(engine)},
                         {"bounds", bounds_of(d)}});
      return 0;
    }

    if (*boundary) {
      const Json j = read_json(model_path);
      const auto lo = j.at("bounds").at("min").get<std::vector<double>>();
      const auto hi = j.at("bounds").at("max").get<std::vector<double>>();
      BoundaryGrid g;
      if (j.value("type", "") == "linear") {
        const LinearModelState m = linear_model_from_json(j.at("model"));
        g = boundary_grid([&](std::span<const double> x) { return predict(m, x); }, lo, hi, step);
      } else if (j.value("type", "") == "smapy") {
        const Engine e = engine_from_snapshot(j.at("snapshot"));
        g = boundary_grid([&](std::span<const double> x) { return e.exploit_step(x).prediction; },
                          lo, hi, step);
      } else {
        throw std::invalid_argument("model file has no recognised 'type'");
      }
      const std::string csv = boundary_csv(g);
      if (boundary_out.empty() || boundary_out == "-") {
        std::cout << csv;
      } else {
        write_text(boundary_out, csv);
      }
      return 0;
    }

    if (*reproduce) {
      const ExperimentConfig cfg =
          config_path == "default" ? default_experiment() : experiment_from_json(read_json(config_path));
      const auto start = std::chrono::steady_clock::now();
      const auto result = run_experiment(cfg, std::filesystem::path(out_dir),
                                         [](const std::string& line) { std::cerr << line << "\n"; });
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << table3_text(result.records);
      std::cerr << result.records.size() << " records in " << secs << " s\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
