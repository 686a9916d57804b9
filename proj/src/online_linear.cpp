#include "cotile/online_linear.hpp"

#include <cmath>
#include <stdexcept>

#include "cotile/rng.hpp"

namespace cotile {
namespace {

void check_dim(const LinearModelState& m, std::span<const double> x) {
  if (x.size() != m.weights.size()) {
    throw std::invalid_argument("sample dimension " + std::to_string(x.size()) +
                                " does not match model dimension " +
                                std::to_string(m.weights.size()));
  }
}

void check_label(Label y) {
  if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
}

double signed_label(Label y) { return y == 1 ? 1.0 : -1.0; }

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool uses_sgd(LinearKind k) { return k == LinearKind::kLogit || k == LinearKind::kLinearSvm; }

double penalty_value(const LinearParams& p, std::span<const double> w) {
  double l1 = 0.0;
  double l2 = 0.0;
  for (double wi : w) {
    l1 += std::abs(wi);
    l2 += 0.5 * wi * wi;
  }
  switch (p.penalty) {
    case Penalty::kL1: return p.alpha_reg * l1;
    case Penalty::kL2: return p.alpha_reg * l2;
    case Penalty::kElasticNet: return p.alpha_reg * (p.l1_ratio * l1 + (1.0 - p.l1_ratio) * l2);
  }
  return 0.0;
}

double penalty_grad(const LinearParams& p, double wi) {
  switch (p.penalty) {
    case Penalty::kL1: return p.alpha_reg * sign(wi);
    case Penalty::kL2: return p.alpha_reg * wi;
    case Penalty::kElasticNet:
      return p.alpha_reg * (p.l1_ratio * sign(wi) + (1.0 - p.l1_ratio) * wi);
  }
  return 0.0;
}

// d(data loss)/d f at the current sample.
double data_loss_slope(const LinearModelState& m, double f, double s) {
  if (m.params.kind == LinearKind::kLogit) return -s * sigmoid(-s * f);
  return (1.0 - s * f) > 0.0 ? -s : 0.0;
}

}  // namespace

std::string to_string(LinearKind kind) {
  switch (kind) {
    case LinearKind::kLogit: return "logit";
    case LinearKind::kLinearSvm: return "svm";
    case LinearKind::kPassiveAggressiveI: return "pa1";
    case LinearKind::kPassiveAggressiveII: return "pa2";
  }
  return "?";
}

std::string to_string(Penalty penalty) {
  switch (penalty) {
    case Penalty::kL1: return "l1";
    case Penalty::kL2: return "l2";
    case Penalty::kElasticNet: return "elasticnet";
  }
  return "?";
}

LinearKind parse_linear_kind(const std::string& s) {
  if (s == "logit") return LinearKind::kLogit;
  if (s == "svm") return LinearKind::kLinearSvm;
  if (s == "pa1") return LinearKind::kPassiveAggressiveI;
  if (s == "pa2") return LinearKind::kPassiveAggressiveII;
  throw std::invalid_argument("unknown linear model kind '" + s + "'");
}

Penalty parse_penalty(const std::string& s) {
  if (s == "l1") return Penalty::kL1;
  if (s == "l2") return Penalty::kL2;
  if (s == "elasticnet") return Penalty::kElasticNet;
  throw std::invalid_argument("unknown penalty '" + s + "'");
}

LinearModelState LinearModelState::zeros(const LinearParams& params, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("model dimension must be positive");
  LinearModelState m;
  m.params = params;
  m.weights.assign(dim, 0.0);
  return m;
}

double decision_value(const LinearModelState& m, std::span<const double> x) {
  check_dim(m, x);
  double f = m.bias;
  for (std::size_t j = 0; j < x.size(); ++j) f += m.weights[j] * x[j];
  return f;
}

Label predict(const LinearModelState& m, std::span<const double> x) {
  return decision_value(m, x) >= 0.0 ? 1 : 0;
}

double learning_rate(const LinearModelState& m) {
  const double eta0 = m.params.learning_rate0;
  return eta0 / (1.0 + eta0 * m.params.alpha_reg * static_cast<double>(m.step_count));
}

double regularized_loss(const LinearModelState& m, std::span<const double> x, Label y) {
  check_label(y);
  const double s = signed_label(y);
  const double f = decision_value(m, x);
  const double data = m.params.kind == LinearKind::kLogit ? softplus(-s * f)
                                                          : std::max(0.0, 1.0 - s * f);
  return data + penalty_value(m.params, m.weights);
}

std::vector<double> loss_gradient(const LinearModelState& m, std::span<const double> x,
                                  Label y) {
  check_label(y);
  const double s = signed_label(y);
  const double slope = data_loss_slope(m, decision_value(m, x), s);
  std::vector<double> g(x.size() + 1);
  for (std::size_t j = 0; j < x.size(); ++j) {
    g[j] = slope * x[j] + penalty_grad(m.params, m.weights[j]);
  }
  g.back() = slope;
  return g;
}

void partial_fit(LinearModelState& m, std::span<const double> x, Label y) {
  check_dim(m, x);
  check_label(y);
  const double s = signed_label(y);

  if (uses_sgd(m.params.kind)) {
    const double eta = learning_rate(m);
    const auto g = loss_gradient(m, x, y);
    for (std::size_t j = 0; j < x.size(); ++j) m.weights[j] -= eta * g[j];
    m.bias -= eta * g.back();
    ++m.step_count;
    return;
  }

  const double loss = std::max(0.0, 1.0 - s * decision_value(m, x));
  double sq_norm = 1.0;  // constant bias feature
  for (double xi : x) sq_norm += xi * xi;
  if (loss > 0.0 && sq_norm > 0.0) {
    const double c = m.params.aggressiveness;
    const double tau = m.params.kind == LinearKind::kPassiveAggressiveI
                           ? std::min(c, loss / sq_norm)
                           : loss / (sq_norm + 1.0 / (2.0 * c));
    for (std::size_t j = 0; j < x.size(); ++j) m.weights[j] += tau * s * x[j];
    m.bias += tau * s;
  }
  ++m.step_count;
}

void fit(LinearModelState& m, const std::vector<std::vector<double>>& X,
         std::span<const Label> Y, int epochs, std::uint64_t seed) {
  if (X.empty() || X.size() != Y.size()) {
    throw std::invalid_argument("fit needs a non-empty sample set with one label per row");
  }
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  Rng rng(seed);
  auto order = iota_indices(X.size());
  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    for (std::size_t i : order) partial_fit(m, X[i], Y[i]);
  }
}

}  // namespace cotile
