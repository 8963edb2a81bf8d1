#include "crcsel/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "crcsel/errors.hpp"
#include "crcsel/random.hpp"

namespace crcsel {

using nlohmann::ordered_json;

namespace {

constexpr double kTau = 1e-12;

void check_training_input(const Eigen::MatrixXd& X, const std::vector<int>& y,
                          int negative, int positive, const char* who) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw UsageError(std::string(who) + ": label count does not match rows");
  }
  if (X.cols() == 0) throw UsageError(std::string(who) + ": no features");
  if (!X.allFinite()) {
    throw DataError(std::string(who) + ": non-finite feature value");
  }
  bool has_neg = false, has_pos = false;
  for (int label : y) {
    if (label == negative) {
      has_neg = true;
    } else if (label == positive) {
      has_pos = true;
    } else {
      throw UsageError(std::string(who) + ": label outside {" +
                       std::to_string(negative) + ", " +
                       std::to_string(positive) + "}");
    }
  }
  if (!has_neg || !has_pos) {
    throw DataError(std::string(who) + ": training labels contain a single class");
  }
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

// log(1 + e^z) without overflow.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

void check_mlp_shape(const MlpModel& m) {
  if (m.layer_sizes.size() < 2 || m.layer_sizes.back() != 1) {
    throw UsageError("MLP needs >= 2 layers and a single output unit");
  }
  for (int s : m.layer_sizes) {
    if (s < 1) throw UsageError("MLP layer sizes must be positive");
  }
  const std::size_t layers = m.layer_sizes.size() - 1;
  if (m.weights.size() != layers || m.biases.size() != layers) {
    throw UsageError("MLP parameter count does not match layer sizes");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (m.weights[l].rows() != m.layer_sizes[l + 1] ||
        m.weights[l].cols() != m.layer_sizes[l] ||
        m.biases[l].size() != m.layer_sizes[l + 1]) {
      throw UsageError("MLP layer " + std::to_string(l) + " has wrong shape");
    }
  }
}

// Forward pass over a batch; activations[0] is the input, the last entry
// the output probabilities. Also returns the output pre-activations.
struct Forward {
  std::vector<Eigen::MatrixXd> activations;
  Eigen::VectorXd output_logits;
};

Forward forward(const MlpModel& m, const Eigen::MatrixXd& X) {
  Forward f;
  f.activations.push_back(X);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd z = f.activations.back() * m.weights[l].transpose();
    z.rowwise() += m.biases[l].transpose();
    if (l + 1 == m.weights.size()) f.output_logits = z.col(0);
    f.activations.push_back(sigmoid(z));
  }
  return f;
}

double mean_cross_entropy(const Eigen::VectorXd& logits, const std::vector<int>& y) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    sum += softplus(logits(i)) - y[static_cast<std::size_t>(i)] * logits(i);
  }
  return sum / static_cast<double>(logits.size());
}

struct LossAndGradient {
  double loss;
  MlpGradient gradient;
};

LossAndGradient loss_and_gradient(const MlpModel& m, const Eigen::MatrixXd& X,
                                  const std::vector<int>& y) {
  const Forward f = forward(m, X);
  const auto n = static_cast<double>(X.rows());
  const std::size_t layers = m.weights.size();

  LossAndGradient out{mean_cross_entropy(f.output_logits, y), {}};
  out.gradient.weights.resize(layers);
  out.gradient.biases.resize(layers);

  // dL/dz at the output is (p - y) / n for logistic output + cross-entropy.
  Eigen::MatrixXd delta = f.activations.back();
  for (Eigen::Index i = 0; i < delta.rows(); ++i) {
    delta(i, 0) = (delta(i, 0) - y[static_cast<std::size_t>(i)]) / n;
  }
  for (std::size_t l = layers; l-- > 0;) {
    out.gradient.weights[l] = delta.transpose() * f.activations[l];
    out.gradient.biases[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      const auto& a = f.activations[l];
      delta = ((delta * m.weights[l]).array() * a.array() * (1.0 - a.array()))
                  .matrix();
    }
  }
  return out;
}

MlpModel step(const MlpModel& m, const MlpGradient& g, double rate) {
  MlpModel next = m;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    next.weights[l] -= rate * g.weights[l];
    next.biases[l] -= rate * g.biases[l];
  }
  return next;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& w) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
    rows.push_back(row);
  }
  return rows;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const ordered_json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw DataError("weight matrix has wrong row count");
  }
  Eigen::MatrixXd w(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (static_cast<int>(row.size()) != cols) {
      throw DataError("weight matrix has wrong column count");
    }
    for (int c = 0; c < cols; ++c) w(r, c) = row[static_cast<std::size_t>(c)];
  }
  return w;
}

}  // namespace

void SvmConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw DataError("SVM C must be positive");
  if (epochs < 1) throw DataError("SVM epochs must be positive");
  if (!(tolerance > 0.0)) throw DataError("SVM tolerance must be positive");
}

void MlpConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw DataError("MLP learning rate must be positive");
  }
  if (epochs < 0) throw DataError("MLP epochs must be non-negative");
  for (int h : hidden) {
    if (h < 1) throw DataError("MLP hidden sizes must be positive");
  }
}

double LinearModel::decision(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return weights.dot(x) + bias;
}

int predict_linear(const LinearModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != m.weights.size()) {
    throw UsageError("predict_linear: dimension mismatch");
  }
  return m.decision(x) >= 0.0 ? 1 : -1;
}

double svm_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, double C) {
  const Eigen::VectorXd f = X * m.weights;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * (f(i) + m.bias));
  }
  return 0.5 * m.weights.squaredNorm() + C * hinge;
}

SvmFit train_linear_svm(const Eigen::MatrixXd& X, const std::vector<int>& y,
                        const SvmConfig& cfg) {
  cfg.validate();
  check_training_input(X, y, -1, 1, "train_linear_svm");

  const auto n = static_cast<std::size_t>(X.rows());
  const double C = cfg.C;
  const Eigen::MatrixXd K = X * X.transpose();
  Eigen::VectorXd yv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) yv(static_cast<Eigen::Index>(i)) = y[i];
  // Q_ij = y_i y_j K_ij.
  const Eigen::MatrixXd Q = yv.asDiagonal() * K * yv.asDiagonal();

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // Q alpha - e

  std::vector<std::size_t> scan(n);
  std::iota(scan.begin(), scan.end(), std::size_t{0});
  Rng rng(cfg.seed);
  rng.shuffle(scan);

  auto is_upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto is_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto dual_objective = [&] {
    double f = 0.0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return 0.5 * f;
  };

  SvmFit fit;
  const std::size_t max_iter = static_cast<std::size_t>(cfg.epochs) * n;
  std::size_t iter = 0;
  while (iter < max_iter) {
    // Second-order working-set selection.
    double g_max = -std::numeric_limits<double>::infinity();
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t : scan) {
      if (y[t] == 1) {
        if (!is_upper(t) && -grad[t] > g_max) {
          g_max = -grad[t];
          i = t;
        }
      } else if (!is_lower(t) && grad[t] > g_max) {
        g_max = grad[t];
        i = t;
      }
    }
    if (i == n) {
      fit.converged = true;
      break;
    }
    double obj_diff_min = std::numeric_limits<double>::infinity();
    for (std::size_t t : scan) {
      double grad_diff, quad;
      if (y[t] == 1) {
        if (is_lower(t)) continue;
        g_max2 = std::max(g_max2, grad[t]);
        grad_diff = g_max + grad[t];
        quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
      } else {
        if (is_upper(t)) continue;
        g_max2 = std::max(g_max2, -grad[t]);
        grad_diff = g_max - grad[t];
        quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
      }
      if (grad_diff > 0.0) {
        const double obj_diff = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
        if (obj_diff < obj_diff_min) {
          obj_diff_min = obj_diff;
          j = t;
        }
      }
    }
    if (g_max + g_max2 < cfg.tolerance || j == n) {
      fit.converged = true;
      break;
    }

    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += Q(static_cast<Eigen::Index>(t), i) * di +
                 Q(static_cast<Eigen::Index>(t), j) * dj;
    }
    ++iter;
    if (iter % n == 0) fit.dual_trace.push_back(dual_objective());
  }
  fit.iterations = iter;
  fit.dual_trace.push_back(dual_objective());

  // Bias from the free support vectors (midpoint of the feasible interval
  // when there are none).
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (is_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free)
                                : 0.5 * (ub + lb);

  Eigen::VectorXd coef(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    coef(static_cast<Eigen::Index>(t)) = alpha[t] * y[t];
  }
  LinearModel model;
  model.weights = X.transpose() * coef;
  model.bias = -rho;
  model.config = cfg;

  // The hinge term is convex piecewise-linear in the bias with breakpoints
  // at y_i - w.x_i; take the best breakpoint if it beats the dual estimate.
  const Eigen::VectorXd scores = X * model.weights;
  auto hinge_at = [&](double b) {
    double h = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      h += std::max(0.0, 1.0 - y[t] * (scores(static_cast<Eigen::Index>(t)) + b));
    }
    return h;
  };
  double best_b = model.bias;
  double best_h = hinge_at(best_b);
  for (std::size_t t = 0; t < n; ++t) {
    const double b = y[t] - scores(static_cast<Eigen::Index>(t));
    const double h = hinge_at(b);
    if (h < best_h - 1e-12 * std::max(1.0, best_h) ||
        (std::abs(h - best_h) <= 1e-12 * std::max(1.0, best_h) &&
         std::abs(b + rho) < std::abs(best_b + rho))) {
      best_h = h;
      best_b = b;
    }
  }
  model.bias = best_b;
  fit.objective = 0.5 * model.weights.squaredNorm() + C * best_h;
  fit.model = std::move(model);
  if (!fit.model.weights.allFinite() || !std::isfinite(fit.model.bias)) {
    throw InvariantError("train_linear_svm produced non-finite parameters");
  }
  return fit;
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layer_sizes != b.layer_sizes || a.config != b.config ||
      a.weights.size() != b.weights.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
  }
  return true;
}

MlpModel make_mlp(const std::vector<int>& layer_sizes) {
  MlpModel m;
  m.layer_sizes = layer_sizes;
  if (layer_sizes.size() < 2) throw UsageError("MLP needs >= 2 layers");
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    m.weights.push_back(Eigen::MatrixXd::Zero(layer_sizes[l + 1], layer_sizes[l]));
    m.biases.push_back(Eigen::VectorXd::Zero(layer_sizes[l + 1]));
  }
  check_mlp_shape(m);
  return m;
}

MlpModel init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  MlpModel m = make_mlp(layer_sizes);
  Rng rng(seed);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < m.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < m.weights[l].cols(); ++c) {
        m.weights[l](r, c) = rng.uniform(-0.5, 0.5);
      }
    }
    for (Eigen::Index r = 0; r < m.biases[l].size(); ++r) {
      m.biases[l](r) = rng.uniform(-0.5, 0.5);
    }
  }
  return m;
}

double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& X,
                const std::vector<int>& y) {
  check_mlp_shape(m);
  if (X.cols() != m.layer_sizes.front() ||
      static_cast<std::size_t>(X.rows()) != y.size()) {
    throw UsageError("mlp_loss: dimension mismatch");
  }
  return mean_cross_entropy(forward(m, X).output_logits, y);
}

MlpGradient loss_gradient(const MlpModel& m, const Eigen::MatrixXd& X,
                          const std::vector<int>& y) {
  check_mlp_shape(m);
  if (X.cols() != m.layer_sizes.front() ||
      static_cast<std::size_t>(X.rows()) != y.size() || X.rows() == 0) {
    throw UsageError("loss_gradient: dimension mismatch");
  }
  return loss_and_gradient(m, X, y).gradient;
}

MlpFit train_mlp(const Eigen::MatrixXd& X, const std::vector<int>& y,
                 const MlpConfig& cfg) {
  cfg.validate();
  check_training_input(X, y, 0, 1, "train_mlp");

  std::vector<int> sizes{static_cast<int>(X.cols())};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);

  MlpFit fit;
  fit.model = init_mlp(sizes, cfg.seed);
  fit.model.config = cfg;
  auto current = loss_and_gradient(fit.model, X, y);
  fit.loss_trace.push_back(current.loss);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double rate = cfg.learning_rate;
    MlpModel next = step(fit.model, current.gradient, rate);
    auto proposed = loss_and_gradient(next, X, y);
    // Halve the step while it raises the loss; stop halving after 40 tries
    // (the step is then numerically zero).
    for (int halvings = 0;
         proposed.loss > current.loss + kLossIncreaseTolerance && halvings < 40;
         ++halvings) {
      rate *= 0.5;
      next = step(fit.model, current.gradient, rate);
      proposed = loss_and_gradient(next, X, y);
    }
    if (!std::isfinite(proposed.loss)) {
      throw DataError("train_mlp: non-finite loss at epoch " + std::to_string(epoch));
    }
    if (proposed.loss > current.loss + kLossIncreaseTolerance) break;
    fit.model = std::move(next);
    current = std::move(proposed);
    fit.loss_trace.push_back(current.loss);
  }
  return fit;
}

double predict_mlp(const MlpModel& m, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_mlp_shape(m);
  if (x.size() != m.layer_sizes.front()) {
    throw UsageError("predict_mlp: dimension mismatch");
  }
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const Eigen::VectorXd z = m.weights[l] * a + m.biases[l];
    a = z.unaryExpr([](double v) { return sigmoid(v); });
  }
  return a(0);
}

ordered_json to_json(const SvmConfig& cfg) {
  ordered_json j;
  j["C"] = cfg.C;
  j["epochs"] = cfg.epochs;
  j["tolerance"] = cfg.tolerance;
  j["seed"] = cfg.seed;
  return j;
}

SvmConfig svm_config_from_json(const ordered_json& j, std::uint64_t seed) {
  SvmConfig cfg(j.value("seed", seed));
  try {
    cfg.C = j.value("C", cfg.C);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed SVM config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ordered_json to_json(const MlpConfig& cfg) {
  ordered_json j;
  j["learning_rate"] = cfg.learning_rate;
  j["epochs"] = cfg.epochs;
  j["seed"] = cfg.seed;
  j["hidden"] = cfg.hidden;
  return j;
}

MlpConfig mlp_config_from_json(const ordered_json& j, std::uint64_t seed) {
  MlpConfig cfg(j.value("seed", seed));
  try {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed MLP config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ordered_json to_json(const LinearModel& m) {
  ordered_json j;
  j["type"] = "linear_svm";
  j["weights"] = vector_to_json(m.weights);
  j["bias"] = m.bias;
  if (m.config) {
    j["config"] = to_json(*m.config);
    j["seed"] = m.config->seed;
  }
  return j;
}

LinearModel linear_model_from_json(const ordered_json& j) {
  try {
    if (j.at("type").get<std::string>() != "linear_svm") {
      throw DataError("not a linear SVM model");
    }
    LinearModel m;
    m.weights = vector_from_json(j.at("weights"));
    m.bias = j.at("bias").get<double>();
    if (j.contains("config")) {
      m.config = svm_config_from_json(j.at("config"), j.at("seed").get<std::uint64_t>());
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed linear model: ") + e.what());
  }
}

ordered_json to_json(const MlpModel& m) {
  check_mlp_shape(m);
  ordered_json j;
  j["type"] = "mlp";
  j["activation"] = "logistic";
  j["layer_sizes"] = m.layer_sizes;
  ordered_json layers = ordered_json::array();
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    ordered_json layer;
    layer["weights"] = matrix_to_json(m.weights[l]);
    layer["bias"] = vector_to_json(m.biases[l]);
    layers.push_back(layer);
  }
  j["layers"] = layers;
  if (m.config) {
    j["config"] = to_json(*m.config);
    j["seed"] = m.config->seed;
  }
  return j;
}

MlpModel mlp_model_from_json(const ordered_json& j) {
  try {
    if (j.at("type").get<std::string>() != "mlp") throw DataError("not an MLP model");
    MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    const auto& layers = j.at("layers");
    if (m.layer_sizes.size() < 2 || layers.size() + 1 != m.layer_sizes.size()) {
      throw DataError("MLP layer listing does not match layer sizes");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      m.weights.push_back(matrix_from_json(layers[l].at("weights"),
                                           m.layer_sizes[l + 1], m.layer_sizes[l]));
      m.biases.push_back(vector_from_json(layers[l].at("bias")));
    }
    if (j.contains("config")) {
      m.config = mlp_config_from_json(j.at("config"), j.at("seed").get<std::uint64_t>());
    }
    check_mlp_shape(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed MLP model: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("malformed MLP model: ") + e.what());
  }
}

std::string export_weights(const MlpModel& m) { return to_json(m).dump(2) + "\n"; }

MlpModel import_weights(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  return mlp_model_from_json(j);
}

}  // namespace crcsel
