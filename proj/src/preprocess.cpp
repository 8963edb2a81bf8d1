#include "crcsel/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace crcsel {

using nlohmann::ordered_json;

namespace {

std::vector<bool> all_true(std::size_t n) { return std::vector<bool>(n, true); }

std::size_t count_false(const std::vector<bool>& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), false));
}

// Pearson r over rows where both cells are present; nullopt when fewer
// than 3 such rows or either side is constant.
std::optional<double> pairwise_correlation(const Dataset& ds, std::size_t a,
                                           std::size_t b) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    const auto& x = ds.cell(p, a);
    const auto& y = ds.cell(p, b);
    if (!x || !y) continue;
    sx += *x;
    sy += *y;
    sxx += *x * *x;
    syy += *y * *y;
    sxy += *x * *y;
    ++n;
  }
  if (n < 3) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  if (vx <= 0 || vy <= 0) return std::nullopt;
  return (sxy - sx * sy / nn) / std::sqrt(vx * vy);
}

ordered_json kind_to_json(const AttributeKind& kind) {
  ordered_json j;
  j["kind"] = std::string(to_string(kind.tag()));
  j["levels"] = kind.levels();
  return j;
}

AttributeKind kind_from_json(const ordered_json& j) {
  const auto tag = j.at("kind").get<std::string>();
  if (tag == "binary") return AttributeKind::binary();
  if (tag == "ordinal") return AttributeKind::ordinal(j.at("levels").get<int>());
  if (tag == "categorical") {
    return AttributeKind::categorical(j.at("levels").get<int>());
  }
  if (tag == "continuous") return AttributeKind::continuous();
  throw DataError("unknown attribute kind '" + tag + "'");
}

std::string_view to_string(FillStatistic s) {
  switch (s) {
    case FillStatistic::Mean: return "mean";
    case FillStatistic::Median: return "median";
    case FillStatistic::Mode: return "mode";
  }
  return "?";
}

FillStatistic fill_statistic_from_string(std::string_view s) {
  if (s == "mean") return FillStatistic::Mean;
  if (s == "median") return FillStatistic::Median;
  if (s == "mode") return FillStatistic::Mode;
  throw DataError("unknown fill statistic '" + std::string(s) + "'");
}

}  // namespace

void ExclusionConfig::validate() const {
  auto fraction_ok = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!fraction_ok(min_patient_coverage) || !fraction_ok(min_attribute_coverage)) {
    throw DataError("coverage thresholds must lie in (0, 1]");
  }
  if (survival_threshold_months <= 0) {
    throw DataError("survival threshold must be positive");
  }
  if (correlation_threshold &&
      !(*correlation_threshold > 0.0 && *correlation_threshold <= 1.0)) {
    throw DataError("correlation threshold must lie in (0, 1]");
  }
}

ProtocolResult apply_protocol(const Dataset& input, const ExclusionConfig& cfg) {
  cfg.validate();
  Dataset ds = input;
  AuditLog log;

  auto record = [&](std::string step, const std::vector<bool>& patients,
                    const std::vector<bool>& attributes) {
    ds = select(ds, patients, attributes);
    log.push_back({std::move(step), count_false(patients),
                   count_false(attributes), ds.patient_count(),
                   ds.attribute_count()});
    if (ds.patient_count() == 0 || ds.attribute_count() == 0) {
      throw ProtocolError("exclusion protocol removed every " +
                              std::string(ds.patient_count() == 0
                                              ? "patient"
                                              : "attribute") +
                              " at step '" + log.back().step + "'",
                          log);
    }
  };

  if (ds.patient_count() == 0 || ds.attribute_count() == 0) {
    throw ProtocolError("exclusion protocol given an empty dataset", log);
  }

  {
    const auto cov = coverage_by_patient(ds);
    std::vector<bool> keep(cov.size());
    for (std::size_t p = 0; p < cov.size(); ++p) {
      keep[p] = !(cov[p] < cfg.min_patient_coverage);
    }
    record("patient_coverage", keep, all_true(ds.attribute_count()));
  }
  {
    const auto cov = coverage_by_attribute(ds);
    std::vector<bool> keep(cov.size());
    for (std::size_t a = 0; a < cov.size(); ++a) {
      keep[a] = !(cov[a] < cfg.min_attribute_coverage);
    }
    record("attribute_coverage", all_true(ds.patient_count()), keep);
  }
  auto drop_short = [&](VitalStatus status) {
    std::vector<bool> keep(ds.patient_count());
    for (std::size_t p = 0; p < keep.size(); ++p) {
      const auto& o = ds.outcomes()[p];
      keep[p] = !(o.vital_status == status &&
                  o.survival_months < cfg.survival_threshold_months);
    }
    return keep;
  };
  record("alive_short_followup", drop_short(VitalStatus::Alive),
         all_true(ds.attribute_count()));
  record("dead_other_cause", drop_short(VitalStatus::DeadOther),
         all_true(ds.attribute_count()));
  {
    std::vector<bool> keep(ds.attribute_count());
    for (std::size_t a = 0; a < keep.size(); ++a) {
      keep[a] = !ds.attribute(a).roles.intersects(cfg.drop_roles);
    }
    record("role_exclusion", all_true(ds.patient_count()), keep);
  }
  {
    std::vector<bool> keep(ds.attribute_count(), true);
    for (std::size_t a = 0; a < keep.size(); ++a) {
      const auto& name = ds.attribute(a).name;
      if (std::find(cfg.drop_attributes.begin(), cfg.drop_attributes.end(),
                    name) != cfg.drop_attributes.end()) {
        keep[a] = false;
      }
    }
    if (cfg.correlation_threshold) {
      for (std::size_t a = 0; a < keep.size(); ++a) {
        if (!keep[a]) continue;
        for (std::size_t b = a + 1; b < keep.size(); ++b) {
          if (!keep[b]) continue;
          const auto r = pairwise_correlation(ds, a, b);
          if (r && std::abs(*r) > *cfg.correlation_threshold) keep[b] = false;
        }
      }
    }
    record("derived_or_correlated", all_true(ds.patient_count()), keep);
  }
  return {std::move(ds), std::move(log)};
}

std::string audit_to_csv(const AuditLog& log) {
  std::ostringstream out;
  out << "step,patients_removed,attributes_removed,patients_left,"
         "attributes_left\n";
  for (const auto& s : log) {
    out << s.step << ',' << s.patients_removed << ',' << s.attributes_removed
        << ',' << s.patients_left << ',' << s.attributes_left << '\n';
  }
  return out.str();
}

std::string_view to_string(SurvivalLabel label) {
  switch (label) {
    case SurvivalLabel::Survived: return "Survived";
    case SurvivalLabel::Died: return "Died";
    case SurvivalLabel::Excluded: return "Excluded";
  }
  return "?";
}

SurvivalLabel label_five_year(const OutcomeRecord& o, int threshold_months) {
  const bool reached = o.survival_months >= threshold_months;
  switch (o.vital_status) {
    case VitalStatus::Alive:
      return reached ? SurvivalLabel::Survived : SurvivalLabel::Excluded;
    case VitalStatus::DeadOfDisease:
      return reached ? SurvivalLabel::Survived : SurvivalLabel::Died;
    case VitalStatus::DeadOther:
      return SurvivalLabel::Excluded;
  }
  return SurvivalLabel::Excluded;
}

std::vector<SurvivalLabel> label_all(const Dataset& ds, int threshold_months) {
  std::vector<SurvivalLabel> out;
  out.reserve(ds.patient_count());
  for (const auto& o : ds.outcomes()) {
    out.push_back(label_five_year(o, threshold_months));
  }
  return out;
}

ImputationPlan fit_imputation(const Dataset& ds) {
  ImputationPlan plan;
  for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
    const auto& spec = ds.attribute(a);
    std::vector<double> values;
    for (std::size_t p = 0; p < ds.patient_count(); ++p) {
      if (const auto& c = ds.cell(p, a)) values.push_back(*c);
    }
    if (values.empty()) {
      throw DataError("cannot impute attribute '" + spec.name +
                      "': no present values");
    }
    ImputationEntry entry{spec.name, FillStatistic::Mean, 0.0};
    switch (spec.kind.tag()) {
      case KindTag::Continuous: {
        long double sum = 0;
        for (double v : values) sum += v;
        entry.fill = static_cast<double>(sum / static_cast<long double>(values.size()));
        break;
      }
      case KindTag::Ordinal: {
        entry.statistic = FillStatistic::Median;
        std::sort(values.begin(), values.end());
        const std::size_t n = values.size();
        const double median = n % 2 == 1
                                  ? values[n / 2]
                                  : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        // Half-up rounding keeps the fill on a valid level.
        entry.fill = std::floor(median + 0.5);
        break;
      }
      case KindTag::Binary:
      case KindTag::Categorical: {
        entry.statistic = FillStatistic::Mode;
        std::vector<std::size_t> counts(static_cast<std::size_t>(spec.kind.levels()), 0);
        for (double v : values) ++counts[static_cast<std::size_t>(v)];
        // max_element returns the first maximum: ties go to the smaller level.
        entry.fill = static_cast<double>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        break;
      }
    }
    plan.entries.push_back(std::move(entry));
  }
  return plan;
}

Dataset apply_imputation(const Dataset& ds, const ImputationPlan& plan) {
  if (plan.entries.size() != ds.attribute_count()) {
    throw DataError("imputation plan covers " +
                    std::to_string(plan.entries.size()) +
                    " attributes, dataset has " +
                    std::to_string(ds.attribute_count()));
  }
  for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
    if (plan.entries[a].attribute != ds.attribute(a).name) {
      throw DataError("imputation plan attribute '" + plan.entries[a].attribute +
                      "' does not match dataset attribute '" +
                      ds.attribute(a).name + "'");
    }
  }
  std::vector<Cell> cells = ds.cells();
  const std::size_t d = ds.attribute_count();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i]) cells[i] = plan.entries[i % d].fill;
  }
  return Dataset(ds.attributes(), ds.patient_ids(), std::move(cells),
                 ds.outcomes());
}

double chi_square_2x2(double a, double b, double c, double d) {
  const double n = a + b + c + d;
  const double r1 = a + b, r2 = c + d, c1 = a + c, c2 = b + d;
  const double denom = r1 * r2 * c1 * c2;
  if (denom <= 0.0) return 0.0;
  const double cross = a * d - b * c;
  return n * cross * cross / denom;
}

LinearizationMap fit_linearization(const Dataset& ds,
                                   const std::vector<SurvivalLabel>& labels) {
  if (labels.size() != ds.patient_count()) {
    throw UsageError("fit_linearization: labels not aligned to patients");
  }
  LinearizationMap map;
  for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
    const auto& spec = ds.attribute(a);
    const auto tag = spec.kind.tag();
    if (tag != KindTag::Ordinal && tag != KindTag::Categorical) continue;

    const auto levels = static_cast<std::size_t>(spec.kind.levels());
    std::vector<std::size_t> survived(levels, 0), total(levels, 0);
    for (std::size_t p = 0; p < ds.patient_count(); ++p) {
      const auto& c = ds.cell(p, a);
      if (!c || labels[p] == SurvivalLabel::Excluded) continue;
      const auto level = static_cast<std::size_t>(*c);
      ++total[level];
      if (labels[p] == SurvivalLabel::Survived) ++survived[level];
    }
    std::vector<int> observed;
    for (std::size_t l = 0; l < levels; ++l) {
      if (total[l] > 0) observed.push_back(static_cast<int>(l));
    }
    if (observed.size() < 3) continue;

    LinearizedAttribute lin;
    lin.attribute = spec.name;
    lin.original_kind = spec.kind;
    lin.level_counts = total;
    lin.level_rates.assign(levels, std::nullopt);
    for (int l : observed) {
      lin.level_rates[l] = static_cast<double>(survived[l]) /
                           static_cast<double>(total[l]);
    }

    // Levels by survival rate, highest first; equal rates keep level order.
    std::vector<int> order = observed;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return *lin.level_rates[x] > *lin.level_rates[y];
    });

    double total_survived = 0, total_died = 0;
    for (int l : observed) {
      total_survived += static_cast<double>(survived[l]);
      total_died += static_cast<double>(total[l] - survived[l]);
    }
    double best = -1.0;
    std::size_t best_prefix = 1;
    double g1_survived = 0, g1_died = 0;
    for (std::size_t k = 1; k < order.size(); ++k) {
      const int l = order[k - 1];
      g1_survived += static_cast<double>(survived[l]);
      g1_died += static_cast<double>(total[l] - survived[l]);
      const double stat = chi_square_2x2(g1_survived, g1_died,
                                         total_survived - g1_survived,
                                         total_died - g1_died);
      // Strict improvement beyond rounding noise; ties keep the shorter prefix.
      if (stat > best + 1e-12 * std::max(1.0, best)) {
        best = stat;
        best_prefix = k;
      }
    }
    lin.group1_prefix = best_prefix;
    lin.chi_square = best;
    lin.group_of_level.assign(levels, 0);
    for (std::size_t k = 0; k < best_prefix; ++k) lin.group_of_level[order[k]] = 1;

    for (std::size_t l = 0; l < levels; ++l) {
      if (total[l] > 0) continue;
      int nearest = observed.front();
      for (int o : observed) {
        const auto dist = std::abs(o - static_cast<int>(l));
        if (dist < std::abs(nearest - static_cast<int>(l))) nearest = o;
      }
      lin.group_of_level[l] = lin.group_of_level[nearest];
      lin.borrowed_levels.push_back(static_cast<int>(l));
    }
    map.attributes.push_back(std::move(lin));
  }
  return map;
}

Dataset apply_linearization(const Dataset& ds, const LinearizationMap& map) {
  if (map.attributes.empty()) return ds;
  std::vector<AttributeSpec> attributes = ds.attributes();
  std::vector<Cell> cells = ds.cells();
  const std::size_t d = ds.attribute_count();
  for (const auto& lin : map.attributes) {
    const auto a = ds.find_attribute(lin.attribute);
    if (!a) {
      throw DataError("linearization map names unknown attribute '" +
                      lin.attribute + "'");
    }
    if (!(ds.attribute(*a).kind == lin.original_kind)) {
      throw DataError("attribute '" + lin.attribute +
                      "' kind differs from the one the map was fitted on");
    }
    attributes[*a].kind = AttributeKind::binary();
    for (std::size_t p = 0; p < ds.patient_count(); ++p) {
      auto& c = cells[p * d + *a];
      if (c) c = static_cast<double>(lin.group_of_level[static_cast<std::size_t>(*c)]);
    }
  }
  return Dataset(std::move(attributes), ds.patient_ids(), std::move(cells),
                 ds.outcomes());
}

Eigen::MatrixXd to_matrix(const Dataset& ds) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(ds.patient_count()),
                    static_cast<Eigen::Index>(ds.attribute_count()));
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
      const auto& c = ds.cell(p, a);
      if (!c) {
        throw DataError("missing value at patient '" + ds.patient_ids()[p] +
                        "', attribute '" + ds.attribute(a).name + "'");
      }
      x(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(a)) = *c;
    }
  }
  return x;
}

Standardizer fit_standardizer(const Dataset& ds) {
  if (ds.patient_count() == 0) throw DataError("cannot standardize zero patients");
  const Eigen::MatrixXd x = to_matrix(ds);
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index a = 0; a < x.cols(); ++a) {
    const double mean = x.col(a).sum() / n;
    const double var = (x.col(a).array() - mean).square().sum() / n;
    s.attributes.push_back(ds.attribute(static_cast<std::size_t>(a)).name);
    s.means.push_back(mean);
    // Constant columns standardize to zero.
    s.scales.push_back(var > 0.0 ? std::sqrt(var) : 1.0);
  }
  return s;
}

Eigen::MatrixXd standardize(const Dataset& ds, const Standardizer& s) {
  if (s.attributes.size() != ds.attribute_count()) {
    throw DataError("standardizer does not match dataset attributes");
  }
  for (std::size_t a = 0; a < ds.attribute_count(); ++a) {
    if (s.attributes[a] != ds.attribute(a).name) {
      throw DataError("standardizer attribute '" + s.attributes[a] +
                      "' does not match '" + ds.attribute(a).name + "'");
    }
  }
  Eigen::MatrixXd x = to_matrix(ds);
  for (Eigen::Index a = 0; a < x.cols(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    x.col(a) = (x.col(a).array() - s.means[i]) / s.scales[i];
  }
  return x;
}

ordered_json to_json(const ExclusionConfig& cfg) {
  ordered_json j;
  j["min_patient_coverage"] = cfg.min_patient_coverage;
  j["min_attribute_coverage"] = cfg.min_attribute_coverage;
  j["survival_threshold_months"] = cfg.survival_threshold_months;
  ordered_json roles = ordered_json::array();
  for (Role r : cfg.drop_roles.roles()) roles.push_back(std::string(to_string(r)));
  j["drop_roles"] = roles;
  j["drop_attributes"] = cfg.drop_attributes;
  j["correlation_threshold"] =
      cfg.correlation_threshold ? ordered_json(*cfg.correlation_threshold)
                                : ordered_json(nullptr);
  return j;
}

ExclusionConfig exclusion_config_from_json(const ordered_json& j) {
  ExclusionConfig cfg;
  try {
    cfg.min_patient_coverage = j.value("min_patient_coverage", cfg.min_patient_coverage);
    cfg.min_attribute_coverage =
        j.value("min_attribute_coverage", cfg.min_attribute_coverage);
    cfg.survival_threshold_months =
        j.value("survival_threshold_months", cfg.survival_threshold_months);
    if (j.contains("drop_roles")) {
      cfg.drop_roles = RoleSet{};
      for (const auto& r : j.at("drop_roles")) {
        const auto role = role_from_string(r.get<std::string>());
        if (!role || *role == Role::Outcome) {
          throw DataError("invalid drop role '" + r.get<std::string>() + "'");
        }
        cfg.drop_roles.insert(*role);
      }
    }
    if (j.contains("drop_attributes")) {
      cfg.drop_attributes = j.at("drop_attributes").get<std::vector<std::string>>();
    }
    if (j.contains("correlation_threshold") && !j.at("correlation_threshold").is_null()) {
      cfg.correlation_threshold = j.at("correlation_threshold").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed exclusion config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ordered_json to_json(const ImputationPlan& plan) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : plan.entries) {
    ordered_json j;
    j["attribute"] = e.attribute;
    j["statistic"] = std::string(to_string(e.statistic));
    j["fill"] = e.fill;
    entries.push_back(j);
  }
  ordered_json j;
  j["entries"] = entries;
  return j;
}

ImputationPlan imputation_plan_from_json(const ordered_json& j) {
  ImputationPlan plan;
  try {
    for (const auto& e : j.at("entries")) {
      plan.entries.push_back({e.at("attribute").get<std::string>(),
                              fill_statistic_from_string(
                                  e.at("statistic").get<std::string>()),
                              e.at("fill").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed imputation plan: ") + e.what());
  }
  return plan;
}

ordered_json to_json(const LinearizationMap& map) {
  ordered_json list = ordered_json::array();
  for (const auto& lin : map.attributes) {
    ordered_json j;
    j["attribute"] = lin.attribute;
    j["original"] = kind_to_json(lin.original_kind);
    j["group_of_level"] = lin.group_of_level;
    ordered_json rates = ordered_json::array();
    for (const auto& r : lin.level_rates) {
      rates.push_back(r ? ordered_json(*r) : ordered_json(nullptr));
    }
    j["level_rates"] = rates;
    j["level_counts"] = lin.level_counts;
    j["borrowed_levels"] = lin.borrowed_levels;
    j["group1_prefix"] = lin.group1_prefix;
    j["chi_square"] = lin.chi_square;
    list.push_back(j);
  }
  ordered_json j;
  j["attributes"] = list;
  return j;
}

LinearizationMap linearization_map_from_json(const ordered_json& j) {
  LinearizationMap map;
  try {
    for (const auto& e : j.at("attributes")) {
      LinearizedAttribute lin;
      lin.attribute = e.at("attribute").get<std::string>();
      lin.original_kind = kind_from_json(e.at("original"));
      lin.group_of_level = e.at("group_of_level").get<std::vector<int>>();
      for (const auto& r : e.at("level_rates")) {
        lin.level_rates.push_back(r.is_null() ? std::nullopt
                                              : std::optional<double>(r.get<double>()));
      }
      lin.level_counts = e.at("level_counts").get<std::vector<std::size_t>>();
      lin.borrowed_levels = e.at("borrowed_levels").get<std::vector<int>>();
      lin.group1_prefix = e.at("group1_prefix").get<std::size_t>();
      lin.chi_square = e.at("chi_square").get<double>();
      if (lin.group_of_level.size() !=
          static_cast<std::size_t>(lin.original_kind.levels())) {
        throw DataError("linearization of '" + lin.attribute +
                        "' does not cover every level");
      }
      map.attributes.push_back(std::move(lin));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed linearization map: ") + e.what());
  }
  return map;
}

ordered_json to_json(const Standardizer& s) {
  ordered_json j;
  j["attributes"] = s.attributes;
  j["means"] = s.means;
  j["scales"] = s.scales;
  return j;
}

Standardizer standardizer_from_json(const ordered_json& j) {
  Standardizer s;
  try {
    s.attributes = j.at("attributes").get<std::vector<std::string>>();
    s.means = j.at("means").get<std::vector<double>>();
    s.scales = j.at("scales").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed standardizer: ") + e.what());
  }
  if (s.means.size() != s.attributes.size() || s.scales.size() != s.attributes.size()) {
    throw DataError("standardizer arrays differ in length");
  }
  return s;
}

}  // namespace crcsel
