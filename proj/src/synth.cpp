#include "crcsel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "crcsel/errors.hpp"
#include "crcsel/random.hpp"

namespace crcsel {

using nlohmann::ordered_json;

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02zu", prefix, i + 1);
  return buf;
}

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

// Categorical draw from (unnormalized) weights.
int draw_level(Rng& rng, std::initializer_list<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  int level = 0;
  for (double w : weights) {
    if (u < w) return level;
    u -= w;
    ++level;
  }
  return level - 1;
}

Eigen::MatrixXd random_rotation(std::size_t n, Rng& rng) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < g.cols(); ++c) {
    for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  }
  return q;
}

}  // namespace

void LinearSpec::validate() const {
  if (n < 4) throw DataError("LinearSpec: n must be >= 4");
  if (d_informative < 1) throw DataError("LinearSpec: need >= 1 informative column");
  if (!(separation > 0.0)) throw DataError("LinearSpec: separation must be positive");
}

LabeledMatrix gen_linear(const LinearSpec& spec) {
  spec.validate();
  const std::size_t d = spec.d_informative + spec.d_noise;
  LabeledMatrix out;
  out.X.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(d));
  out.y.resize(spec.n);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    out.y[i] = label;
    for (std::size_t c = 0; c < d; ++c) {
      const double shift = c < spec.d_informative ? label * spec.separation / 2.0 : 0.0;
      out.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          shift + rng.normal();
    }
  }
  return out;
}

LabeledMatrix gen_separable_blobs(std::size_t n, std::size_t dims, double margin,
                                  std::uint64_t seed) {
  if (n < 2 || dims < 1 || !(margin > 0.0)) {
    throw DataError("gen_separable_blobs: need n >= 2, dims >= 1, margin > 0");
  }
  Rng rng(seed);
  Eigen::VectorXd normal(static_cast<Eigen::Index>(dims));
  for (Eigen::Index k = 0; k < normal.size(); ++k) normal(k) = rng.normal();
  normal.normalize();

  LabeledMatrix out;
  out.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
  out.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : -1;
    Eigen::VectorXd x(static_cast<Eigen::Index>(dims));
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = 1.5 * rng.normal();
    x -= x.dot(normal) * normal;
    x += label * (margin / 2.0 + std::abs(rng.normal())) * normal;
    out.X.row(static_cast<Eigen::Index>(i)) = x.transpose();
    out.y[i] = label;
  }
  return out;
}

double AntiSpec::max_rho_between() const {
  return rho_within + (1.0 - rho_within) / (static_cast<double>(n) / 2.0);
}

double AntiSpec::min_rho_within() const {
  return -1.0 / (static_cast<double>(n) - 1.0);
}

void AntiSpec::validate() const {
  if (n < 4 || n % 2 != 0) throw DataError("AntiSpec: n must be even and >= 4");
  if (!(rho_within < 1.0) || rho_within < min_rho_within()) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "AntiSpec: rho_within must lie in [" << min_rho_within() << ", 1)";
    throw DataError(msg.str());
  }
  if (!(rho_between > rho_within) || !(rho_between <= max_rho_between())) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "AntiSpec: rho_between = " << rho_between
        << " outside the admissible interval (" << rho_within << ", "
        << max_rho_between() << "] for n = " << n
        << " (needs rho_between > rho_within and positive semidefiniteness)";
    throw DataError(msg.str());
  }
}

Eigen::MatrixXd anti_gram(const std::vector<int>& labels, double rho_within,
                          double rho_between) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        g(i, j) = 1.0;
      } else {
        g(i, j) = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]
                      ? rho_within
                      : rho_between;
      }
    }
  }
  return g;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  if (eig.info() != Eigen::Success) throw InvariantError("eigendecomposition failed");
  Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < -1e-9) {
    std::ostringstream msg;
    msg << "Gram matrix is not positive semidefinite (min eigenvalue "
        << values.minCoeff() << ")";
    throw DataError(msg.str());
  }
  values = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

LabeledMatrix gen_antilearnable(const AntiSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  LabeledMatrix out;
  out.y.assign(spec.n, 1);
  std::fill(out.y.begin() + static_cast<std::ptrdiff_t>(spec.n / 2), out.y.end(), -1);
  rng.shuffle(out.y);

  const Eigen::MatrixXd g = anti_gram(out.y, spec.rho_within, spec.rho_between);
  out.X = psd_sqrt(g) * random_rotation(spec.n, rng);
  return out;
}

void SurrogateSpec::validate() const {
  if (n_patients < 20) throw DataError("SurrogateSpec: n_patients must be >= 20");
  if (n_signal < 1 || n_antisignal < 1) {
    throw DataError("SurrogateSpec: signal and anti-signal counts must be positive");
  }
  if (!(missing_rate >= 0.0 && missing_rate <= 0.5)) {
    throw DataError("SurrogateSpec: missing_rate must lie in [0, 0.5]");
  }
  auto prob_ok = [](double p) { return p > 0.0 && p < 1.0; };
  if (!prob_ok(stage2_survival) || !prob_ok(stage3_survival)) {
    throw DataError("SurrogateSpec: stage survival probabilities must lie in (0, 1)");
  }
  if (!(signal_separation >= 0.0)) {
    throw DataError("SurrogateSpec: signal_separation must be non-negative");
  }
}

std::string signal_name(std::size_t i) { return numbered("signal", i); }
std::string antisignal_name(std::size_t i) { return numbered("anti", i); }
std::string noise_name(std::size_t i) { return numbered("noise", i); }

Dataset gen_clinical_surrogate(const SurrogateSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_patients;
  Rng outcome_rng(derive_seed(spec.seed, 1));
  Rng feature_rng(derive_seed(spec.seed, 2));
  Rng missing_rng(derive_seed(spec.seed, 3));

  // Outcomes. `latent` is the 5-year fate that drives the features, drawn
  // for every patient; only labeled patients expose it through the outcome.
  std::vector<OutcomeRecord> outcomes(n);
  std::vector<bool> latent(n), labeled(n);
  for (std::size_t p = 0; p < n; ++p) {
    auto& o = outcomes[p];
    o.tnm_stage = outcome_rng.bernoulli(0.5) ? 2 : 3;
    latent[p] = outcome_rng.bernoulli(o.tnm_stage == 2 ? spec.stage2_survival
                                                       : spec.stage3_survival);
    const double u = outcome_rng.uniform();
    labeled[p] = false;
    if (u < 0.08) {
      o.vital_status = VitalStatus::Alive;
      o.survival_months = uniform_int(outcome_rng, 6, 59);
    } else if (u < 0.12) {
      o.vital_status = VitalStatus::DeadOther;
      o.survival_months = uniform_int(outcome_rng, 1, 59);
    } else if (u < 0.14) {
      o.vital_status = VitalStatus::DeadOther;
      o.survival_months = uniform_int(outcome_rng, 60, 150);
    } else {
      labeled[p] = true;
      if (!latent[p]) {
        o.vital_status = VitalStatus::DeadOfDisease;
        o.survival_months = uniform_int(outcome_rng, 3, 59);
      } else {
        o.vital_status = outcome_rng.bernoulli(0.15) ? VitalStatus::DeadOfDisease
                                                     : VitalStatus::Alive;
        o.survival_months = uniform_int(outcome_rng, 60, 150);
      }
    }
  }

  // Schema.
  std::vector<AttributeSpec> attrs;
  const std::size_t n_linear_signal =
      spec.nonlinear_attribute ? spec.n_signal - 1 : spec.n_signal;
  for (std::size_t i = 0; i < n_linear_signal; ++i) {
    attrs.push_back({signal_name(i),
                     i % 2 == 0 ? AttributeKind::continuous() : AttributeKind::binary(),
                     {Role::Feature}});
  }
  const std::size_t flipl_col = attrs.size();
  if (spec.nonlinear_attribute) {
    attrs.push_back({kNonlinearName, AttributeKind::ordinal(4), {Role::Feature}});
  }
  const std::size_t anti_begin = attrs.size();
  for (std::size_t i = 0; i < spec.n_antisignal; ++i) {
    attrs.push_back({antisignal_name(i), AttributeKind::continuous(), {Role::Feature}});
  }
  const std::size_t noise_begin = attrs.size();
  for (std::size_t i = 0; i < spec.n_noise; ++i) {
    AttributeKind kind = AttributeKind::continuous();
    switch (i % 4) {
      case 1: kind = AttributeKind::binary(); break;
      case 2: kind = AttributeKind::ordinal(4); break;
      case 3: kind = AttributeKind::categorical(3); break;
      default: break;
    }
    attrs.push_back({noise_name(i), kind, {Role::Feature}});
  }
  const std::size_t dukes_col = attrs.size();
  attrs.push_back({"dukes_stage", AttributeKind::ordinal(4), {Role::TnmDerived}});
  const std::size_t radio_col = attrs.size();
  attrs.push_back({"radiotherapy", AttributeKind::binary(), {Role::PostOperative}});
  const std::size_t composite_col = attrs.size();
  attrs.push_back({"immune_composite", AttributeKind::continuous(), {Role::Compound}});
  const std::size_t sparse_begin = attrs.size();
  attrs.push_back({"sparse_marker_1", AttributeKind::continuous(), {Role::Feature}});
  attrs.push_back({"sparse_marker_2", AttributeKind::continuous(), {Role::Feature}});
  const std::size_t d = attrs.size();

  // Values.
  std::vector<Cell> cells(n * d);
  auto at = [&](std::size_t p, std::size_t a) -> Cell& { return cells[p * d + a]; };
  const double half = spec.signal_separation / 2.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double sign = latent[p] ? 1.0 : -1.0;
    std::vector<double> signal_latent(n_linear_signal);
    for (std::size_t i = 0; i < n_linear_signal; ++i) {
      signal_latent[i] = sign * half + feature_rng.normal();
      at(p, i) = i % 2 == 0 ? signal_latent[i] : (signal_latent[i] > 0.0 ? 1.0 : 0.0);
    }
    if (spec.nonlinear_attribute) {
      // Levels 0 and 3 carry the poor prognosis.
      at(p, flipl_col) = latent[p] ? draw_level(feature_rng, {0.15, 0.35, 0.35, 0.15})
                                   : draw_level(feature_rng, {0.35, 0.15, 0.15, 0.35});
    }
    for (std::size_t i = 0; i < spec.n_antisignal; ++i) {
      at(p, anti_begin + i) = feature_rng.normal();
    }
    for (std::size_t i = 0; i < spec.n_noise; ++i) {
      double v = 0.0;
      switch (i % 4) {
        case 1: v = feature_rng.bernoulli(0.5) ? 1.0 : 0.0; break;
        case 2: v = static_cast<double>(feature_rng.below(4)); break;
        case 3: v = static_cast<double>(feature_rng.below(3)); break;
        default: v = feature_rng.normal(); break;
      }
      at(p, noise_begin + i) = v;
    }
    int dukes = outcomes[p].tnm_stage - 1;
    if (feature_rng.bernoulli(0.1)) dukes += feature_rng.bernoulli(0.5) ? 1 : -1;
    at(p, dukes_col) = std::clamp(dukes, 0, 3);
    at(p, radio_col) =
        feature_rng.bernoulli(outcomes[p].tnm_stage == 3 ? 0.6 : 0.2) ? 1.0 : 0.0;
    const double s0 = n_linear_signal > 0 ? signal_latent[0] : 0.0;
    const double s1 = n_linear_signal > 1 ? signal_latent[1] : 0.0;
    at(p, composite_col) = s0 + s1 + 0.5 * feature_rng.normal();
    at(p, sparse_begin) = feature_rng.normal();
    at(p, sparse_begin + 1) = feature_rng.normal();
  }

  // Missingness: exactly round(rate * cells) blanks. Sparse markers and
  // sparse patients take 60% blanks first, the rest is spread uniformly.
  std::vector<bool> sparse_patient(n, false);
  const auto total_blanks =
      static_cast<std::size_t>(std::llround(spec.missing_rate * static_cast<double>(n * d)));
  if (total_blanks > 0) {
    std::vector<std::size_t> forced;
    std::vector<std::size_t> patients(n);
    std::iota(patients.begin(), patients.end(), std::size_t{0});
    missing_rng.shuffle(patients);
    const std::size_t n_sparse_patients = std::max<std::size_t>(1, n * 3 / 100);
    for (std::size_t k = 0; k < n_sparse_patients; ++k) sparse_patient[patients[k]] = true;

    std::vector<bool> blank(n * d, false);
    auto mark = [&](std::size_t idx) {
      if (!blank[idx]) {
        blank[idx] = true;
        forced.push_back(idx);
      }
    };
    for (std::size_t a = sparse_begin; a < d; ++a) {
      missing_rng.shuffle(patients);
      for (std::size_t k = 0; k < n * 6 / 10; ++k) mark(patients[k] * d + a);
    }
    std::vector<std::size_t> columns(d);
    std::iota(columns.begin(), columns.end(), std::size_t{0});
    for (std::size_t p = 0; p < n; ++p) {
      if (!sparse_patient[p]) continue;
      missing_rng.shuffle(columns);
      for (std::size_t k = 0; k < d * 6 / 10; ++k) mark(p * d + columns[k]);
    }
    if (forced.size() > total_blanks) {
      std::fill(blank.begin(), blank.end(), false);
      std::fill(sparse_patient.begin(), sparse_patient.end(), false);
      forced.clear();
    }
    std::vector<std::size_t> pool;
    for (std::size_t idx = 0; idx < n * d; ++idx) {
      const std::size_t p = idx / d, a = idx % d;
      if (!blank[idx] && !sparse_patient[p] && a < sparse_begin) pool.push_back(idx);
    }
    const std::size_t remaining = std::min(total_blanks - forced.size(), pool.size());
    // Partial Fisher-Yates: the first `remaining` entries are a uniform sample.
    for (std::size_t k = 0; k < remaining; ++k) {
      const auto j = k + static_cast<std::size_t>(missing_rng.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
      blank[pool[k]] = true;
    }
    for (std::size_t idx = 0; idx < n * d; ++idx) {
      if (blank[idx]) cells[idx].reset();
    }
  }

  // Center the anti-signal block within each class of the core cohort.
  for (std::size_t i = 0; i < spec.n_antisignal; ++i) {
    const std::size_t a = anti_begin + i;
    for (bool cls : {true, false}) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t p = 0; p < n; ++p) {
        if (labeled[p] && !sparse_patient[p] && latent[p] == cls && at(p, a)) {
          sum += *at(p, a);
          ++count;
        }
      }
      if (count == 0) continue;
      const double mean = sum / static_cast<double>(count);
      for (std::size_t p = 0; p < n; ++p) {
        if (labeled[p] && !sparse_patient[p] && latent[p] == cls && at(p, a)) {
          *at(p, a) -= mean;
        }
      }
    }
  }

  std::vector<std::string> ids(n);
  for (std::size_t p = 0; p < n; ++p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "CRC%04zu", p + 1);
    ids[p] = buf;
  }
  return Dataset(std::move(attrs), std::move(ids), std::move(cells), std::move(outcomes));
}

ordered_json to_json(const SurrogateSpec& spec) {
  ordered_json j;
  j["generator"] = "surrogate";
  j["n_patients"] = spec.n_patients;
  j["n_signal"] = spec.n_signal;
  j["n_antisignal"] = spec.n_antisignal;
  j["n_noise"] = spec.n_noise;
  j["missing_rate"] = spec.missing_rate;
  j["nonlinear_attribute"] = spec.nonlinear_attribute;
  j["seed"] = spec.seed;
  j["stage2_survival"] = spec.stage2_survival;
  j["stage3_survival"] = spec.stage3_survival;
  j["signal_separation"] = spec.signal_separation;
  return j;
}

SurrogateSpec surrogate_spec_from_json(const ordered_json& j) {
  SurrogateSpec spec;
  try {
    spec.n_patients = j.value("n_patients", spec.n_patients);
    spec.n_signal = j.value("n_signal", spec.n_signal);
    spec.n_antisignal = j.value("n_antisignal", spec.n_antisignal);
    spec.n_noise = j.value("n_noise", spec.n_noise);
    spec.missing_rate = j.value("missing_rate", spec.missing_rate);
    spec.nonlinear_attribute = j.value("nonlinear_attribute", spec.nonlinear_attribute);
    spec.seed = j.value("seed", spec.seed);
    spec.stage2_survival = j.value("stage2_survival", spec.stage2_survival);
    spec.stage3_survival = j.value("stage3_survival", spec.stage3_survival);
    spec.signal_separation = j.value("signal_separation", spec.signal_separation);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed surrogate spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace crcsel
