#pragma once

// Prediction sources (TNM rule, learned model, anti-learned model), agreement
// gating, the per-subset accuracy report, cross-validated evaluation and the
// attribute-count sweep.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "crcsel/learners.hpp"
#include "crcsel/preprocess.hpp"
#include "crcsel/ranking.hpp"
#include "crcsel/tabular.hpp"

namespace crcsel {

enum class PredictionClass { Survive, Die };
enum class ModelSource { T, L, A };

std::string_view to_string(PredictionClass c);
std::string_view to_string(ModelSource s);
PredictionClass invert(PredictionClass c);
/// Survived -> Survive, Died -> Die; Excluded throws UsageError.
PredictionClass truth_of(SurvivalLabel label);

/// Predicted(class) or Abstain.
struct SelectiveDecision {
  std::optional<PredictionClass> predicted;

  static SelectiveDecision abstain() { return {}; }
  static SelectiveDecision of(PredictionClass c) { return {c}; }
  bool abstained() const { return !predicted.has_value(); }

  friend bool operator==(const SelectiveDecision&, const SelectiveDecision&) = default;
};

/// Stage 2 -> Survive, stage 3 -> Die. Other stages throw DataError.
PredictionClass tnm_rule(int stage);

PredictionClass learned_predict(const LinearModel& m, const Eigen::VectorXd& x);
PredictionClass learned_predict(const MlpModel& m, const Eigen::VectorXd& x);
/// The inverse of the base model's class. Throws UsageError when x does
/// not match the model's input size.
PredictionClass antilearn_predict(const LinearModel& base, const Eigen::VectorXd& x);
PredictionClass antilearn_predict(const MlpModel& base, const Eigen::VectorXd& x);

using SourcePredictions = std::map<ModelSource, PredictionClass>;

/// Predicted when every consulted source agrees, else Abstain. Throws
/// UsageError if a consulted source is absent or `consult` is empty.
SelectiveDecision agreement_filter(const SourcePredictions& preds,
                                   const std::vector<ModelSource>& consult);

/// The named clinical rule: agreement of the TNM rule and the learner.
SelectiveDecision confidence_rule(int stage, PredictionClass learned);

enum class PrognosisGroup { TNM2_PredSurvive, TNM2_PredDie, TNM3_PredSurvive, TNM3_PredDie };

std::string_view to_string(PrognosisGroup g);
const std::vector<PrognosisGroup>& all_prognosis_groups();
PrognosisGroup prognosis_group(int stage, PredictionClass learned);

// ---------------------------------------------------------------------------
// Report

struct ReportRow {
  std::vector<ModelSource> subset;
  std::size_t n = 0;
  std::size_t correct = 0;

  /// correct / n; 0 when n is 0.
  double accuracy() const;
  std::string label() const;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Rows in the order T, L, A, T+L, T+A, L+A, T+L+A.
struct AgreementReport {
  std::vector<ReportRow> rows;

  const ReportRow& row(const std::vector<ModelSource>& subset) const;
  friend bool operator==(const AgreementReport&, const AgreementReport&) = default;
};

const std::vector<std::vector<ModelSource>>& report_subsets();

/// One entry of `preds` and `labels` per evaluated patient; labels must
/// not be Excluded. Throws UsageError on a length mismatch.
AgreementReport build_report(const std::vector<SourcePredictions>& preds,
                             const std::vector<SurvivalLabel>& labels);

/// Throws InvariantError when the rows are not the seven subsets, a
/// singleton row does not cover every patient, correct exceeds n, or the
/// triple count exceeds a pairwise count.
void check_report(const AgreementReport& report);

/// "64.6%" style: correct / n as a percentage, one decimal, half away from
/// zero on the exact rational. "n/a" when n is 0.
std::string format_percent(std::size_t correct, std::size_t n);

/// subset,n,correct,accuracy with accuracy printed by format_percent.
std::string report_to_csv(const AgreementReport& report);
/// Aligned terminal table in the same row order.
std::string format_report_table(const AgreementReport& report);
nlohmann::ordered_json to_json(const AgreementReport& report);
AgreementReport report_from_json(const nlohmann::ordered_json& j);

// ---------------------------------------------------------------------------
// Cross-validated evaluation

/// Fold index per sample. Each class is shuffled by `seed` and dealt
/// round-robin, so fold class counts differ by at most one. folds == 1
/// puts every sample in fold 0 (train == test).
std::vector<std::size_t> stratified_folds(const std::vector<int>& y, std::size_t folds,
                                          std::uint64_t seed);

struct EnsembleConfig {
  explicit EnsembleConfig(std::uint64_t seed_) : seed(seed_), svm(seed_), mlp(seed_) {}

  std::uint64_t seed;
  std::size_t folds = 5;
  std::size_t k_top = 8;
  std::size_t k_bottom = 6;
  bool linearize = true;
  SvmConfig svm;
  MlpConfig mlp;

  void validate() const;
};

/// Everything fitted on one training set; applied unchanged to its test set.
struct FoldModel {
  ImputationPlan imputation;
  LinearizationMap linearization;
  Standardizer standardizer;
  Ranking ranking;
  std::vector<std::size_t> top;
  std::vector<std::size_t> bottom;
  MlpModel learner;
  /// Trained on the bottom attributes; its predictions are inverted.
  MlpModel anti_base;
  std::uint64_t seed = 0;

  friend bool operator==(const FoldModel&, const FoldModel&) = default;
};

nlohmann::ordered_json to_json(const FoldModel& model);
FoldModel fold_model_from_json(const nlohmann::ordered_json& j);

/// `train` holds labeled patients only; labels[i] belongs to patient i.
/// Learners are seeded from `seed`.
FoldModel fit_fold_model(const Dataset& train, const std::vector<SurvivalLabel>& labels,
                         const EnsembleConfig& cfg, std::uint64_t seed);

/// Imputation, linearization and standardization of `ds` with the fitted
/// plans; returns the design matrix over the standardizer's attributes.
Eigen::MatrixXd transform(const FoldModel& model, const Dataset& ds);

/// T, L and A predictions for every patient of `ds`.
std::vector<SourcePredictions> predict_sources(const FoldModel& model, const Dataset& ds);

struct CrossValidation {
  std::vector<std::size_t> fold_of;
  std::vector<FoldModel> models;
  /// Out-of-fold predictions, in patient order.
  std::vector<SourcePredictions> predictions;
  AgreementReport report;
};

/// Every patient must carry a Survived/Died label and stage 2 or 3. Folds
/// are fitted concurrently with seeds derive_seed(cfg.seed, fold); the
/// result does not depend on scheduling.
CrossValidation cross_validate(const Dataset& ds, const std::vector<SurvivalLabel>& labels,
                               const EnsembleConfig& cfg);

enum class SweepVariant { Raw, Linearized, Both };

struct SweepPoint {
  std::size_t k = 0;
  /// "raw" or "linearized".
  std::string variant;
  /// Mean of the per-fold test accuracies.
  double accuracy = 0.0;

  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

/// Learner accuracy on the top-k attributes for every k in `k_values`,
/// cross-validated with the folds of cfg.seed. The ranking is refitted on
/// each training fold. Both yields the raw rows first, then the
/// linearized rows. Throws UsageError when a k is 0 or exceeds the
/// attribute count.
std::vector<SweepPoint> attribute_sweep(const Dataset& ds,
                                        const std::vector<SurvivalLabel>& labels,
                                        const std::vector<std::size_t>& k_values,
                                        const EnsembleConfig& cfg, SweepVariant variant);

std::string sweep_to_csv(const std::vector<SweepPoint>& points);

}  // namespace crcsel
