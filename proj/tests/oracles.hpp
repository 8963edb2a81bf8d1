#pragma once

// Independent reference computations. None of these call into the code
// they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "crcsel/ensemble.hpp"
#include "crcsel/learners.hpp"
#include "crcsel/survival.hpp"

namespace oracle {

/// (1/2)|w|^2 + C * sum max(0, 1 - y (w.x + b)), computed row by row.
inline double svm_objective(const Eigen::VectorXd& w, double b, const Eigen::MatrixXd& X,
                            const std::vector<int>& y, double C) {
  double hinge = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double f = b;
    for (Eigen::Index j = 0; j < X.cols(); ++j) f += w(j) * X(i, j);
    hinge += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * f);
  }
  return 0.5 * w.squaredNorm() + C * hinge;
}

/// Minimum of the 2-D primal over (w1, w2, b) by a dense grid that is
/// repeatedly re-centred on the best point and shrunk.
inline double svm_grid_minimum(const Eigen::MatrixXd& X, const std::vector<int>& y, double C) {
  constexpr int kSteps = 40;
  double center[3] = {0, 0, 0};
  double half = 8.0;
  double best = svm_objective(Eigen::Vector2d::Zero(), 0.0, X, y, C);
  for (int round = 0; round < 12; ++round) {
    double next[3] = {center[0], center[1], center[2]};
    for (int i = 0; i <= kSteps; ++i) {
      for (int j = 0; j <= kSteps; ++j) {
        for (int k = 0; k <= kSteps; ++k) {
          const double w1 = center[0] - half + 2 * half * i / kSteps;
          const double w2 = center[1] - half + 2 * half * j / kSteps;
          const double b = center[2] - half + 2 * half * k / kSteps;
          const double v = svm_objective(Eigen::Vector2d(w1, w2), b, X, y, C);
          if (v < best) {
            best = v;
            next[0] = w1;
            next[1] = w2;
            next[2] = b;
          }
        }
      }
    }
    std::copy(next, next + 3, center);
    half *= 0.25;
  }
  return best;
}

/// Largest relative difference between the analytic gradient and a
/// central finite difference with step h, over every parameter.
inline double max_gradient_error(const crcsel::MlpModel& m, const Eigen::MatrixXd& X,
                                 const std::vector<int>& y, double h = 1e-5) {
  const auto g = crcsel::loss_gradient(m, X, y);
  double worst = 0;
  auto compare = [&](double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / scale);
  };
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (Eigen::Index r = 0; r < m.weights[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < m.weights[l].cols(); ++c) {
        crcsel::MlpModel plus = m, minus = m;
        plus.weights[l](r, c) += h;
        minus.weights[l](r, c) -= h;
        compare(g.weights[l](r, c),
                (crcsel::mlp_loss(plus, X, y) - crcsel::mlp_loss(minus, X, y)) / (2 * h));
      }
    }
    for (Eigen::Index r = 0; r < m.biases[l].size(); ++r) {
      crcsel::MlpModel plus = m, minus = m;
      plus.biases[l](r) += h;
      minus.biases[l](r) -= h;
      compare(g.biases[l](r),
              (crcsel::mlp_loss(plus, X, y) - crcsel::mlp_loss(minus, X, y)) / (2 * h));
    }
  }
  return worst;
}

/// S(t) by Efron's redistribute-to-the-right: every subject starts with
/// mass 1/n; a censored subject hands its mass in equal parts to the
/// subjects that outlive it. Deaths sort before censorings at equal times.
inline double km_redistribute(std::vector<crcsel::TimedOutcome> v, double t) {
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.event && !b.event;
  });
  std::vector<double> mass(v.size(), 1.0 / static_cast<double>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].event) continue;
    const std::size_t later = v.size() - i - 1;
    if (later == 0) continue;
    for (std::size_t j = i + 1; j < v.size(); ++j) mass[j] += mass[i] / static_cast<double>(later);
    mass[i] = 0;
  }
  double dead = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].event && v[i].time <= t) dead += mass[i];
  }
  return 1.0 - dead;
}

/// Leave-one-out nearest-centroid accuracy, where "nearest" is the larger
/// mean inner product with the other members of a class.
inline double loo_centroid_accuracy(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                    bool inverted) {
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double sum[2] = {0, 0};
    double count[2] = {0, 0};
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      if (j == i) continue;
      const int c = y[static_cast<std::size_t>(j)] > 0 ? 1 : 0;
      sum[c] += X.row(i).dot(X.row(j));
      count[c] += 1;
    }
    const int nearest = sum[1] / count[1] >= sum[0] / count[0] ? 1 : -1;
    const int predicted = inverted ? -nearest : nearest;
    if (predicted == y[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(X.rows());
}

struct Count {
  std::size_t n = 0;
  std::size_t correct = 0;
};

/// Patients on which every source in `subset` predicts the same class,
/// and how many of those predictions match the label.
inline Count recount(const std::vector<crcsel::SourcePredictions>& preds,
                     const std::vector<crcsel::SurvivalLabel>& labels,
                     const std::vector<crcsel::ModelSource>& subset) {
  Count c;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    const auto first = preds[p].at(subset.front());
    bool agree = true;
    for (auto s : subset) agree = agree && preds[p].at(s) == first;
    if (!agree) continue;
    ++c.n;
    const bool survived = labels[p] == crcsel::SurvivalLabel::Survived;
    if ((first == crcsel::PredictionClass::Survive) == survived) ++c.correct;
  }
  return c;
}

}  // namespace oracle
