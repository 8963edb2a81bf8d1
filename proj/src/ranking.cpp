#include "crcsel/ranking.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "crcsel/errors.hpp"

namespace crcsel {

using nlohmann::ordered_json;

Ranking rfe_rank(const Eigen::MatrixXd& X, const std::vector<int>& y,
                 const SvmConfig& cfg) {
  if (X.cols() < 2) throw UsageError("rfe_rank needs at least 2 attributes");

  std::vector<std::size_t> surviving(static_cast<std::size_t>(X.cols()));
  std::iota(surviving.begin(), surviving.end(), std::size_t{0});
  std::vector<std::size_t> eliminated;
  Ranking ranking;

  for (std::size_t iteration = 0; surviving.size() > 1; ++iteration) {
    Eigen::MatrixXd sub(X.rows(), static_cast<Eigen::Index>(surviving.size()));
    for (std::size_t c = 0; c < surviving.size(); ++c) {
      sub.col(static_cast<Eigen::Index>(c)) =
          X.col(static_cast<Eigen::Index>(surviving[c]));
    }
    SvmFit fit = [&] {
      try {
        return train_linear_svm(sub, y, cfg);
      } catch (const DataError& e) {
        throw DataError("rfe_rank iteration " + std::to_string(iteration) +
                        ": " + e.what());
      }
    }();
    // surviving is kept in ascending index order, so the first minimum is
    // the lowest original index.
    std::size_t worst = 0;
    double worst_value = fit.model.weights(0) * fit.model.weights(0);
    for (std::size_t c = 1; c < surviving.size(); ++c) {
      const double w = fit.model.weights(static_cast<Eigen::Index>(c));
      if (w * w < worst_value) {
        worst_value = w * w;
        worst = c;
      }
    }
    ranking.trace.push_back({iteration, surviving[worst], worst_value});
    eliminated.push_back(surviving[worst]);
    surviving.erase(surviving.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  ranking.order.push_back(surviving.front());
  ranking.order.insert(ranking.order.end(), eliminated.rbegin(), eliminated.rend());
  return ranking;
}

std::vector<std::size_t> top_k(const Ranking& r, std::size_t k) {
  if (k < 1 || k > r.order.size()) {
    throw UsageError("top_k: k must lie in [1, " + std::to_string(r.order.size()) + "]");
  }
  return {r.order.begin(), r.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

std::vector<std::size_t> bottom_k(const Ranking& r, std::size_t k) {
  if (k < 1 || k > r.order.size()) {
    throw UsageError("bottom_k: k must lie in [1, " + std::to_string(r.order.size()) + "]");
  }
  return {r.order.rbegin(), r.order.rbegin() + static_cast<std::ptrdiff_t>(k)};
}

ordered_json to_json(const Ranking& r) {
  ordered_json j;
  j["order"] = r.order;
  if (!r.names.empty()) {
    ordered_json names = ordered_json::array();
    for (std::size_t idx : r.order) names.push_back(r.names.at(idx));
    j["ordered_names"] = names;
    j["names"] = r.names;
  }
  ordered_json trace = ordered_json::array();
  for (const auto& s : r.trace) {
    ordered_json step;
    step["iteration"] = s.iteration;
    step["removed"] = s.removed;
    if (!r.names.empty()) step["name"] = r.names.at(s.removed);
    step["criterion"] = s.criterion;
    trace.push_back(step);
  }
  j["trace"] = trace;
  return j;
}

Ranking ranking_from_json(const ordered_json& j) {
  Ranking r;
  try {
    r.order = j.at("order").get<std::vector<std::size_t>>();
    if (j.contains("names")) r.names = j.at("names").get<std::vector<std::string>>();
    for (const auto& s : j.at("trace")) {
      r.trace.push_back({s.at("iteration").get<std::size_t>(),
                         s.at("removed").get<std::size_t>(),
                         s.at("criterion").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed ranking: ") + e.what());
  }
  std::vector<std::size_t> sorted = r.order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != i) throw DataError("ranking order is not a permutation");
  }
  if (!r.names.empty() && r.names.size() != r.order.size()) {
    throw DataError("ranking names do not match order length");
  }
  return r;
}

std::string format_ranking_table(const Ranking& r, std::size_t k_top,
                                 std::size_t k_bottom) {
  const auto top = top_k(r, k_top);
  const auto bottom = bottom_k(r, k_bottom);
  auto label = [&](std::size_t idx) {
    return r.names.empty() ? "#" + std::to_string(idx) : r.names.at(idx);
  };
  std::size_t width = 12;
  for (std::size_t idx : top) width = std::max(width, label(idx).size() + 2);

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width))
      << ("Top " + std::to_string(k_top)) << "Bottom " << k_bottom << '\n';
  for (std::size_t i = 0; i < std::max(top.size(), bottom.size()); ++i) {
    out << std::setw(static_cast<int>(width)) << (i < top.size() ? label(top[i]) : "");
    if (i < bottom.size()) out << label(bottom[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace crcsel
