#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "crcsel/errors.hpp"
#include "crcsel/tabular.hpp"

namespace crcsel {

struct ExclusionConfig {
  double min_patient_coverage = 0.5;
  double min_attribute_coverage = 0.5;
  int survival_threshold_months = 60;
  RoleSet drop_roles{Role::TnmDerived, Role::PostOperative, Role::Compound};
  /// Derivable or correlated attributes, removed by name.
  std::vector<std::string> drop_attributes;
  /// When set, the later attribute of any pair with |r| above this value is
  /// also removed. Off by default.
  std::optional<double> correlation_threshold;

  void validate() const;
};

struct AuditStep {
  std::string step;
  std::size_t patients_removed = 0;
  std::size_t attributes_removed = 0;
  std::size_t patients_left = 0;
  std::size_t attributes_left = 0;

  friend bool operator==(const AuditStep&, const AuditStep&) = default;
};

using AuditLog = std::vector<AuditStep>;

/// Raised when the protocol removes every patient or every attribute.
class ProtocolError : public DataError {
 public:
  ProtocolError(const std::string& what, AuditLog log)
      : DataError(what), log_(std::move(log)) {}
  const AuditLog& audit() const { return log_; }

 private:
  AuditLog log_;
};

struct ProtocolResult {
  Dataset dataset;
  AuditLog audit;
};

/// Exclusion steps, in order:
///   1 patient_coverage      drop patients with coverage < min_patient_coverage
///   2 attribute_coverage    drop attributes with coverage < min_attribute_coverage
///   3 alive_short_followup  drop Alive patients with months < threshold
///   4 dead_other_cause      drop DeadOther patients with months < threshold
///   5 role_exclusion        drop attributes carrying any of drop_roles
///   6 derived_or_correlated drop listed names and the correlation filter
ProtocolResult apply_protocol(const Dataset& ds, const ExclusionConfig& cfg);

std::string audit_to_csv(const AuditLog& log);

enum class SurvivalLabel { Survived, Died, Excluded };

std::string_view to_string(SurvivalLabel label);

SurvivalLabel label_five_year(const OutcomeRecord& o, int threshold_months);
std::vector<SurvivalLabel> label_all(const Dataset& ds, int threshold_months);

enum class FillStatistic { Mean, Median, Mode };

struct ImputationEntry {
  std::string attribute;
  FillStatistic statistic = FillStatistic::Mean;
  double fill = 0.0;

  friend bool operator==(const ImputationEntry&, const ImputationEntry&) = default;
};

struct ImputationPlan {
  std::vector<ImputationEntry> entries;

  friend bool operator==(const ImputationPlan&, const ImputationPlan&) = default;
};

ImputationPlan fit_imputation(const Dataset& ds);
Dataset apply_imputation(const Dataset& ds, const ImputationPlan& plan);

/// One linearized attribute: every level in [0, levels) maps to 0 or 1.
struct LinearizedAttribute {
  std::string attribute;
  AttributeKind original_kind = AttributeKind::binary();
  std::vector<int> group_of_level;
  /// Survived fraction per level; nullopt for levels without labeled data.
  std::vector<std::optional<double>> level_rates;
  std::vector<std::size_t> level_counts;
  /// Levels that had no labeled patients and took the group of the nearest
  /// labeled level.
  std::vector<int> borrowed_levels;
  std::size_t group1_prefix = 0;
  double chi_square = 0.0;

  friend bool operator==(const LinearizedAttribute&,
                         const LinearizedAttribute&) = default;
};

struct LinearizationMap {
  std::vector<LinearizedAttribute> attributes;

  friend bool operator==(const LinearizationMap&, const LinearizationMap&) = default;
};

/// Pearson chi-square of the 2x2 table [[a, b], [c, d]]; 0 when a margin
/// is empty.
double chi_square_2x2(double a, double b, double c, double d);

LinearizationMap fit_linearization(const Dataset& ds,
                                   const std::vector<SurvivalLabel>& labels);
Dataset apply_linearization(const Dataset& ds, const LinearizationMap& map);

/// Per-column z-scoring fitted on a complete dataset.
struct Standardizer {
  std::vector<std::string> attributes;
  std::vector<double> means;
  std::vector<double> scales;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

Standardizer fit_standardizer(const Dataset& ds);
/// Complete dataset -> standardized design matrix (patients x attributes).
Eigen::MatrixXd standardize(const Dataset& ds, const Standardizer& s);
/// Raw design matrix; throws DataError on a missing cell.
Eigen::MatrixXd to_matrix(const Dataset& ds);

nlohmann::ordered_json to_json(const ExclusionConfig& cfg);
ExclusionConfig exclusion_config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const ImputationPlan& plan);
ImputationPlan imputation_plan_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const LinearizationMap& map);
LinearizationMap linearization_map_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::ordered_json& j);

}  // namespace crcsel
