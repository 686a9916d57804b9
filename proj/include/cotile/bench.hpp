#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cotile/datasets.hpp"
#include "cotile/engine.hpp"
#include "cotile/serialize.hpp"

namespace cotile {

// ---------------------------------------------------------------------------
// Cross validation

/// Stratified k-fold assignment. Each class is shuffled with `seed` and dealt
/// round-robin across folds, continuing where the previous class stopped, so
/// fold sizes differ by at most one. Throws when a class has fewer than k
/// members.
std::vector<std::vector<std::size_t>> kfold_split(std::span<const Label> labels, std::size_t k,
                                                  std::uint64_t seed);

double accuracy(std::span<const Label> predictions, std::span<const Label> labels);

struct CvOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;   // fold assignment
  int epochs = 100;         // standalone linear training passes
  std::uint64_t model_seed = 0;
  int exploration_passes = 3;  // tiling passes per training fold
  unsigned threads = 0;     // 0: hardware concurrency
};

/// Train/validation row indices of one fold.
struct FoldRows {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

std::vector<FoldRows> fold_rows(const std::vector<std::vector<std::size_t>>& folds);

/// Runs fn(i) for i in [0, n) over a pool of `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Grids

struct LinearGrid {
  std::vector<double> alpha{1e-4, 1e-3, 1e-2};
  std::vector<Penalty> penalty{Penalty::kL1, Penalty::kL2, Penalty::kElasticNet};
  std::vector<double> C{0.5, 1.0, 2.0};
};

struct SmapyGrid {
  std::vector<double> R{0.1, 0.2, 0.5};
  std::vector<std::optional<double>> O{0.2, 0.5};
  std::vector<bool> E{false, true};
  std::vector<Normalization> Nc{Normalization::kSigmoid};
  std::vector<double> alpha{0.0, 0.1, 0.2};
  std::vector<double> Fplus{1.0};
  std::vector<double> Fminus{0.5, 1.0, 2.0};
};

struct GridSpec {
  LinearGrid linear;
  SmapyGrid smapy;
};

/// Cells in grid order: alpha outer, penalty inner for logit / svm; C for
/// the passive-aggressive kinds.
std::vector<LinearParams> linear_cells(LinearKind kind, const LinearGrid& grid,
                                       const LinearParams& base = {});

/// Cells in grid order R, O, E, Nc, alpha, F+, F- (last varies fastest).
std::vector<EngineConfig> smapy_cells(const SmapyGrid& grid, const EngineConfig& base = {});

// ---------------------------------------------------------------------------
// Results

enum class Stage { kAlone, kMas };
std::string to_string(Stage s);

struct ResultRecord {
  std::string dataset;
  LinearKind kind = LinearKind::kLogit;
  Stage stage = Stage::kAlone;
  Json best_params;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
};

Json to_json(const ResultRecord& r);

/// Per-fold validation accuracy of a standalone linear model.
std::vector<double> cross_validate_linear(const Dataset& d, const LinearParams& params,
                                          const std::vector<FoldRows>& folds,
                                          const CvOptions& cv);

/// Per-fold validation accuracy of a tiling engine with the given internal model.
std::vector<double> cross_validate_smapy(const Dataset& d, const LinearParams& model,
                                         const EngineConfig& cfg,
                                         const std::vector<FoldRows>& folds);

struct LinearSearchResult {
  ResultRecord record;
  LinearParams best;
};

struct SmapySearchResult {
  ResultRecord record;
  EngineConfig best;
};

/// Step 1: best linear hyperparameters by k-fold CV. Ties keep the earliest cell.
LinearSearchResult grid_search_linear(const std::string& dataset_name, const Dataset& d,
                                      LinearKind kind, const LinearGrid& grid,
                                      const CvOptions& cv);

/// Step 2: best tiling parameters with the internal model frozen to `model`.
SmapySearchResult grid_search_smapy(const std::string& dataset_name, const Dataset& d,
                                    const LinearParams& model, const SmapyGrid& grid,
                                    const CvOptions& cv);

// ---------------------------------------------------------------------------
// Decision boundary lattice

/// Row-major label lattice: label(ix, iy) at (x0 + ix*step, y0 + iy*step).
struct BoundaryGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double step = 0.02;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<Label> labels;

  Label at(std::size_t ix, std::size_t iy) const { return labels[iy * nx + ix]; }
  double x(std::size_t ix) const { return x0 + static_cast<double>(ix) * step; }
  double y(std::size_t iy) const { return y0 + static_cast<double>(iy) * step; }
};

using Classifier = std::function<Label(std::span<const double>)>;

/// Evaluates `classify` on a lattice covering [lo - 0.5, hi + 0.5] per axis.
BoundaryGrid boundary_grid(const Classifier& classify, std::span<const double> lo,
                           std::span<const double> hi, double step = 0.02);

/// `x1,x2,yhat` rows.
std::string boundary_csv(const BoundaryGrid& g);

/// Lattice cells labelled 1 with at least one 4-neighbour labelled 0.
std::vector<std::pair<std::size_t, std::size_t>> frontier_cells(const BoundaryGrid& g);

struct LineFit {
  std::size_t cells = 0;
  double max_residual = 0.0;  // largest orthogonal distance to the fitted line
  bool straight = false;      // max_residual < step (vacuously true with < 2 cells)
};

/// Total-least-squares line through the frontier cell centres.
LineFit fit_frontier_line(const BoundaryGrid& g);

struct Enclosure {
  Label label = 0;            // label of the cell nearest to the probe point
  std::size_t component_size = 0;
  bool touches_border = true;
  std::size_t frontier_cells = 0;
  bool enclosed = false;      // component does not reach the border
};

/// Connected component (4-connectivity) of the cell nearest to `probe`.
Enclosure enclosure_around(const BoundaryGrid& g, std::span<const double> probe);

// ---------------------------------------------------------------------------
// Full experiment

struct DatasetSpec {
  std::string name;  // moons | circles | linear
  std::size_t n = 100;
  double noise = 0.0;
  double factor = 0.5;
  std::uint64_t seed = 0;
};

Dataset make_dataset(const DatasetSpec& spec);

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<LinearKind> kinds;
  GridSpec grid;
  CvOptions cv;
  double boundary_step = 0.02;
  bool write_boundaries = true;
};

/// Defaults: moons (noise 0.3), circles (noise 0.2, factor 0.5), linear;
/// 100 points each; all four linear kinds.
ExperimentConfig default_experiment();

/// Validates every field; unknown keys are rejected.
ExperimentConfig experiment_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

struct BoundaryCheck {
  std::string dataset;
  LinearKind kind;
  Stage stage;
  LineFit line;
  Enclosure origin;
};

struct ExperimentResult {
  std::vector<ResultRecord> records;
  std::vector<BoundaryCheck> boundaries;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs both search steps for every (dataset, kind). When `out_dir` is set,
/// writes results.json, table3.csv, table3.txt, boundary_checks.json and,
/// if enabled, one boundary lattice CSV per record.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::optional<std::filesystem::path>& out_dir = {},
                                const ProgressFn& progress = {});

/// Accuracy table with a row per kind and (Alone, MAS) column pairs per dataset.
std::string table3_csv(const std::vector<ResultRecord>& records);
std::string table3_text(const std::vector<ResultRecord>& records);

}  // namespace cotile
