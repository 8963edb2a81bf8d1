#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace crcsel {

/// Soft-margin linear SVM settings. `epochs` caps the solver at
/// epochs x n pair updates; `tolerance` is the KKT violation at which the
/// solver stops; `seed` fixes the scan order used to break working-set ties.
struct SvmConfig {
  explicit SvmConfig(std::uint64_t seed_) : seed(seed_) {}

  double C = 1.0;
  int epochs = 1000;
  double tolerance = 1e-3;
  std::uint64_t seed;

  void validate() const;
  friend bool operator==(const SvmConfig&, const SvmConfig&) = default;
};

struct MlpConfig {
  explicit MlpConfig(std::uint64_t seed_) : seed(seed_) {}

  double learning_rate = 0.1;
  int epochs = 2000;
  std::uint64_t seed;
  std::vector<int> hidden{5};

  void validate() const;
  friend bool operator==(const MlpConfig&, const MlpConfig&) = default;
};

struct TrainConfig {
  explicit TrainConfig(std::uint64_t seed) : svm(seed), mlp(seed) {}

  SvmConfig svm;
  MlpConfig mlp;
};

// ---------------------------------------------------------------------------
// Linear SVM

/// f(x) = weights . x + bias; class = sign(f) with f = 0 -> +1.
struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::optional<SvmConfig> config;

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  friend bool operator==(const LinearModel& a, const LinearModel& b) {
    return a.weights == b.weights && a.bias == b.bias && a.config == b.config;
  }
};

struct SvmFit {
  LinearModel model;
  /// Primal objective (1/2)|w|^2 + C sum hinge at the returned parameters.
  double objective = 0.0;
  /// Dual objective (minimization form) at the end of every epoch; the
  /// solver decreases it monotonically.
  std::vector<double> dual_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Trains on rows of X with labels in {-1, +1}. Uses SMO with second-order
/// working-set selection on the exact dual (bias unregularized), then sets
/// the bias to the exact minimizer of the primal for the final weights.
SvmFit train_linear_svm(const Eigen::MatrixXd& X, const std::vector<int>& y,
                        const SvmConfig& cfg);

double svm_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                     const std::vector<int>& y, double C);

int predict_linear(const LinearModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);

// ---------------------------------------------------------------------------
// Feed-forward network: logistic units on every layer, scalar output.

struct MlpModel {
  std::vector<int> layer_sizes;
  /// weights[l] is layer_sizes[l + 1] x layer_sizes[l].
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::optional<MlpConfig> config;

  std::size_t input_size() const {
    return static_cast<std::size_t>(layer_sizes.front());
  }
  friend bool operator==(const MlpModel& a, const MlpModel& b);
};

/// Zero-initialized network of the given shape ([d_in, hidden..., 1]).
MlpModel make_mlp(const std::vector<int>& layer_sizes);
/// Parameters uniform on [-0.5, 0.5], drawn layer by layer (weights in
/// row-major order, then biases).
MlpModel init_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed);

struct MlpGradient {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean binary cross-entropy over rows of X, labels in {0, 1}.
double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& X,
                const std::vector<int>& y);
/// Exact gradient of mlp_loss.
MlpGradient loss_gradient(const MlpModel& m, const Eigen::MatrixXd& X,
                          const std::vector<int>& y);

struct MlpFit {
  MlpModel model;
  /// Loss before the first step and after every epoch.
  std::vector<double> loss_trace;
};

/// Per-step loss increase tolerated before the step is halved.
inline constexpr double kLossIncreaseTolerance = 1e-9;

/// Full-batch gradient descent on mean cross-entropy.
MlpFit train_mlp(const Eigen::MatrixXd& X, const std::vector<int>& y,
                 const MlpConfig& cfg);

double predict_mlp(const MlpModel& m, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Survive iff probability >= 0.5.
inline bool mlp_positive(double probability) { return probability >= 0.5; }

// ---------------------------------------------------------------------------
// Serialization

nlohmann::ordered_json to_json(const SvmConfig& cfg);
SvmConfig svm_config_from_json(const nlohmann::ordered_json& j, std::uint64_t seed);
nlohmann::ordered_json to_json(const MlpConfig& cfg);
MlpConfig mlp_config_from_json(const nlohmann::ordered_json& j, std::uint64_t seed);

nlohmann::ordered_json to_json(const LinearModel& m);
LinearModel linear_model_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const MlpModel& m);
MlpModel mlp_model_from_json(const nlohmann::ordered_json& j);

/// Human-readable full-precision listing; import_weights(export_weights(m))
/// reproduces m exactly.
std::string export_weights(const MlpModel& m);
MlpModel import_weights(std::string_view text);

}  // namespace crcsel
