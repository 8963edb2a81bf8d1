#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "crcsel/learners.hpp"

namespace crcsel {

struct EliminationStep {
  std::size_t iteration = 0;
  std::size_t removed = 0;
  /// Squared SVM weight of the removed attribute when it was removed.
  double criterion = 0.0;

  friend bool operator==(const EliminationStep&, const EliminationStep&) = default;
};

/// order[0] is the most important attribute (the last survivor).
struct Ranking {
  std::vector<std::size_t> order;
  std::vector<EliminationStep> trace;
  /// Optional attribute names, indexed like the columns that were ranked.
  std::vector<std::string> names;

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

/// SVM recursive feature elimination: train on the surviving columns,
/// remove the one with the smallest w_i^2 (lowest index on ties), repeat
/// until one column remains. X must be complete and standardized.
Ranking rfe_rank(const Eigen::MatrixXd& X, const std::vector<int>& y,
                 const SvmConfig& cfg);

std::vector<std::size_t> top_k(const Ranking& r, std::size_t k);
/// Last k of the order, least important first.
std::vector<std::size_t> bottom_k(const Ranking& r, std::size_t k);

nlohmann::ordered_json to_json(const Ranking& r);
Ranking ranking_from_json(const nlohmann::ordered_json& j);

/// Two-column top-k / bottom-k summary for terminals.
std::string format_ranking_table(const Ranking& r, std::size_t k_top,
                                 std::size_t k_bottom);

}  // namespace crcsel
