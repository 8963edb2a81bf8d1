#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "crcsel/tabular.hpp"

namespace crcsel {

struct LabeledMatrix {
  Eigen::MatrixXd X;
  /// Labels in {-1, +1}.
  std::vector<int> y;
};

// ---------------------------------------------------------------------------
// Planted-signal linear data

struct LinearSpec {
  std::size_t n = 100;
  std::size_t d_informative = 2;
  std::size_t d_noise = 8;
  double separation = 2.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Balanced labels (+1 on even rows, -1 on odd rows). The first
/// d_informative columns are y * separation / 2 plus unit normal noise; the
/// rest are standard normal.
LabeledMatrix gen_linear(const LinearSpec& spec);

/// Two blobs in `dims` dimensions separated by a slab of width `margin`
/// around a random hyperplane through the origin; separable by construction.
LabeledMatrix gen_separable_blobs(std::size_t n, std::size_t dims, double margin,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Anti-learnable data

struct AntiSpec {
  std::size_t n = 40;
  double rho_within = 0.10;
  double rho_between = 0.14;
  std::uint64_t seed = 0;

  /// Largest admissible rho_between: rho_within + (1 - rho_within) / (n / 2).
  double max_rho_between() const;
  double min_rho_within() const;
  /// Throws DataError naming the admissible rho_between interval.
  void validate() const;
};

/// Gram matrix with unit diagonal, rho_within between same-class points and
/// rho_between across classes. Rows are in the order of `labels`.
Eigen::MatrixXd anti_gram(const std::vector<int>& labels, double rho_within,
                          double rho_between);

/// Symmetric square root of a PSD matrix. Throws DataError if an
/// eigenvalue is below -1e-9.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& G);

/// Rows of X realize anti_gram exactly (X X^T = G): X = G^{1/2} R for a
/// seeded random rotation R. Each class holds n / 2 points, label order
/// shuffled by the seed. Because every point is closer (in inner product)
/// to the opposite class, leave-one-out nearest-centroid accuracy is 0.
LabeledMatrix gen_antilearnable(const AntiSpec& spec);

// ---------------------------------------------------------------------------
// Clinical-shaped surrogate cohort (TNM stage 2/3 only)

struct SurrogateSpec {
  std::size_t n_patients = 280;
  std::size_t n_signal = 8;
  std::size_t n_antisignal = 6;
  std::size_t n_noise = 12;
  double missing_rate = 0.10;
  bool nonlinear_attribute = true;
  std::uint64_t seed = 11;

  /// P(5-year survival | stage 2) and P(... | stage 3).
  double stage2_survival = 0.75;
  double stage3_survival = 0.40;
  /// Per-attribute label separation of the signal block (in noise SDs).
  double signal_separation = 0.5;

  void validate() const;
};

/// Attribute names of the planted blocks, for tests and reports.
std::string signal_name(std::size_t i);
std::string antisignal_name(std::size_t i);
std::string noise_name(std::size_t i);
inline constexpr const char* kNonlinearName = "flipl";

/// The cohort carries, besides the planted feature blocks, one TNM-derived,
/// one post-operative and one compound attribute, two sparsely recorded
/// markers, a few sparsely recorded patients, and patients with short
/// follow-up or unrelated deaths, so every exclusion step has work to do.
///
/// Labels (Survived / Died) are drawn from the stage; the signal block
/// depends on the label only, so it errs independently of the stage rule.
/// When nonlinear_attribute is set, the last signal attribute is the
/// 4-level `flipl` marker whose extreme levels carry the poor prognosis.
/// The anti-signal block is standard normal noise centered within each
/// label class over the present cells of the labeled patients. Its
/// expected Gram matrix is anti_gram(-1 / (n_c - 1), 0) scaled by the
/// block width, which sits exactly on the positive-semidefinite boundary:
/// the class means coincide, so the block has no in-sample signal, and a
/// held-out point pulls the training mean of its own class away from
/// itself.
///
/// Exactly round(missing_rate * cells) cells are blank.
Dataset gen_clinical_surrogate(const SurrogateSpec& spec);

nlohmann::ordered_json to_json(const SurrogateSpec& spec);
SurrogateSpec surrogate_spec_from_json(const nlohmann::ordered_json& j);

}  // namespace crcsel
