#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cotile {

using Label = int;  // binary class, 0 or 1

enum class LinearKind { kLogit, kLinearSvm, kPassiveAggressiveI, kPassiveAggressiveII };
enum class Penalty { kL1, kL2, kElasticNet };

std::string to_string(LinearKind kind);
std::string to_string(Penalty penalty);
LinearKind parse_linear_kind(const std::string& s);
Penalty parse_penalty(const std::string& s);

/// Hyperparameters shared by all online linear classifiers. Only the fields
/// relevant to a given kind are consulted.
struct LinearParams {
  LinearKind kind = LinearKind::kLogit;
  double alpha_reg = 1e-4;      // penalty strength (logit / svm)
  Penalty penalty = Penalty::kL2;
  double l1_ratio = 0.15;       // elastic-net mixing
  double aggressiveness = 1.0;  // C (passive-aggressive)
  double learning_rate0 = 0.01;

  bool operator==(const LinearParams&) const = default;
};

/// Online binary linear classifier: f(x) = w.x + b.
struct LinearModelState {
  LinearParams params;
  std::vector<double> weights;
  double bias = 0.0;
  std::int64_t step_count = 0;

  static LinearModelState zeros(const LinearParams& params, std::size_t dim);

  bool operator==(const LinearModelState&) const = default;
};

double decision_value(const LinearModelState& m, std::span<const double> x);

/// Class 1 when the decision value is >= 0.
Label predict(const LinearModelState& m, std::span<const double> x);

/// Learning rate used by the next SGD step: eta0 / (1 + eta0 * alpha * t).
double learning_rate(const LinearModelState& m);

/// Per-sample regularized objective minimized by the SGD kinds:
/// data loss (log-loss or hinge) plus alpha * R(w). The bias is not penalized.
double regularized_loss(const LinearModelState& m, std::span<const double> x, Label y);

/// (Sub)gradient of regularized_loss with respect to (w..., b); size p + 1.
std::vector<double> loss_gradient(const LinearModelState& m, std::span<const double> x,
                                  Label y);

/// One online update on a single labelled sample. Increments step_count.
void partial_fit(LinearModelState& m, std::span<const double> x, Label y);

/// `epochs` passes of partial_fit over the rows, each pass in a fresh
/// permutation drawn from `seed`.
void fit(LinearModelState& m, const std::vector<std::vector<double>>& X,
         std::span<const Label> Y, int epochs, std::uint64_t seed);

}  // namespace cotile
