#include "crcsel/ensemble.hpp"

#include <algorithm>
#include <future>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "crcsel/errors.hpp"
#include "crcsel/random.hpp"

namespace crcsel {

using nlohmann::ordered_json;

namespace {

PredictionClass class_of(bool survive) {
  return survive ? PredictionClass::Survive : PredictionClass::Die;
}

void check_stage(int stage, const char* what) {
  if (stage != 2 && stage != 3) {
    throw DataError(std::string(what) + ": TNM stage " + std::to_string(stage) +
                    " is out of scope (only stages 2 and 3)");
  }
}

std::vector<Eigen::Index> as_index(const std::vector<std::size_t>& cols) {
  return {cols.begin(), cols.end()};
}

Eigen::MatrixXd columns(const Eigen::MatrixXd& X, const std::vector<std::size_t>& cols) {
  return X(Eigen::all, as_index(cols));
}

std::vector<int> signed_labels(const std::vector<SurvivalLabel>& labels) {
  std::vector<int> y;
  y.reserve(labels.size());
  for (auto l : labels) y.push_back(truth_of(l) == PredictionClass::Survive ? 1 : -1);
  return y;
}

std::vector<int> binary_labels(const std::vector<SurvivalLabel>& labels) {
  std::vector<int> y;
  y.reserve(labels.size());
  for (auto l : labels) y.push_back(truth_of(l) == PredictionClass::Survive ? 1 : 0);
  return y;
}

std::vector<bool> fold_mask(const std::vector<std::size_t>& fold_of, std::size_t fold,
                            std::size_t folds, bool test) {
  std::vector<bool> mask(fold_of.size());
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    // A single fold trains and tests on everything.
    mask[i] = folds == 1 || ((fold_of[i] == fold) == test);
  }
  return mask;
}

template <typename T>
std::vector<T> subset(const std::vector<T>& v, const std::vector<bool>& mask) {
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (mask[i]) out.push_back(v[i]);
  }
  return out;
}

Dataset patients(const Dataset& ds, const std::vector<bool>& mask) {
  return select(ds, mask, std::vector<bool>(ds.attribute_count(), true));
}

void check_labeled(const Dataset& ds, const std::vector<SurvivalLabel>& labels,
                   const char* what) {
  if (labels.size() != ds.patient_count()) {
    throw UsageError(std::string(what) + ": one label per patient required");
  }
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] == SurvivalLabel::Excluded) {
      throw UsageError(std::string(what) + ": patient '" + ds.patient_ids()[p] +
                       "' has no 5-year label");
    }
  }
}

struct Prepared {
  LinearizationMap linearization;
  ImputationPlan imputation;
  Standardizer standardizer;
  Eigen::MatrixXd X;
};

Prepared prepare(const Dataset& train, const std::vector<SurvivalLabel>& labels,
                 bool linearize) {
  Prepared out;
  if (linearize) out.linearization = fit_linearization(train, labels);
  const Dataset lin = apply_linearization(train, out.linearization);
  out.imputation = fit_imputation(lin);
  const Dataset complete = apply_imputation(lin, out.imputation);
  out.standardizer = fit_standardizer(complete);
  out.X = standardize(complete, out.standardizer);
  return out;
}

Eigen::MatrixXd apply_prepared(const LinearizationMap& lin, const ImputationPlan& plan,
                               const Standardizer& s, const Dataset& ds) {
  return standardize(apply_imputation(apply_linearization(ds, lin), plan), s);
}

double accuracy_of(const MlpModel& m, const Eigen::MatrixXd& X,
                   const std::vector<int>& y01) {
  if (y01.empty()) return 0.0;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const bool survive = mlp_positive(predict_mlp(m, X.row(i).transpose()));
    if (survive == (y01[static_cast<std::size_t>(i)] == 1)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(y01.size());
}

}  // namespace

std::string_view to_string(PredictionClass c) {
  return c == PredictionClass::Survive ? "Survive" : "Die";
}

std::string_view to_string(ModelSource s) {
  switch (s) {
    case ModelSource::T: return "T";
    case ModelSource::L: return "L";
    case ModelSource::A: return "A";
  }
  return "?";
}

PredictionClass invert(PredictionClass c) {
  return c == PredictionClass::Survive ? PredictionClass::Die : PredictionClass::Survive;
}

PredictionClass truth_of(SurvivalLabel label) {
  switch (label) {
    case SurvivalLabel::Survived: return PredictionClass::Survive;
    case SurvivalLabel::Died: return PredictionClass::Die;
    case SurvivalLabel::Excluded: break;
  }
  throw UsageError("excluded patients have no 5-year label");
}

PredictionClass tnm_rule(int stage) {
  check_stage(stage, "tnm_rule");
  return class_of(stage == 2);
}

PredictionClass learned_predict(const LinearModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.weights.size()) throw UsageError("learned_predict: dimension mismatch");
  return class_of(predict_linear(m, x) == 1);
}

PredictionClass learned_predict(const MlpModel& m, const Eigen::VectorXd& x) {
  return class_of(mlp_positive(predict_mlp(m, x)));
}

PredictionClass antilearn_predict(const LinearModel& base, const Eigen::VectorXd& x) {
  return invert(learned_predict(base, x));
}

PredictionClass antilearn_predict(const MlpModel& base, const Eigen::VectorXd& x) {
  return invert(learned_predict(base, x));
}

SelectiveDecision agreement_filter(const SourcePredictions& preds,
                                   const std::vector<ModelSource>& consult) {
  if (consult.empty()) throw UsageError("agreement_filter: nothing to consult");
  std::optional<PredictionClass> agreed;
  for (ModelSource s : consult) {
    const auto it = preds.find(s);
    if (it == preds.end()) {
      throw UsageError("agreement_filter: no prediction from source " +
                       std::string(to_string(s)));
    }
    if (agreed && *agreed != it->second) return SelectiveDecision::abstain();
    agreed = it->second;
  }
  return SelectiveDecision::of(*agreed);
}

SelectiveDecision confidence_rule(int stage, PredictionClass learned) {
  check_stage(stage, "confidence_rule");
  return agreement_filter({{ModelSource::T, tnm_rule(stage)}, {ModelSource::L, learned}},
                          {ModelSource::T, ModelSource::L});
}

std::string_view to_string(PrognosisGroup g) {
  switch (g) {
    case PrognosisGroup::TNM2_PredSurvive: return "TNM2_PredSurvive";
    case PrognosisGroup::TNM2_PredDie: return "TNM2_PredDie";
    case PrognosisGroup::TNM3_PredSurvive: return "TNM3_PredSurvive";
    case PrognosisGroup::TNM3_PredDie: return "TNM3_PredDie";
  }
  return "?";
}

const std::vector<PrognosisGroup>& all_prognosis_groups() {
  static const std::vector<PrognosisGroup> groups{
      PrognosisGroup::TNM2_PredSurvive, PrognosisGroup::TNM2_PredDie,
      PrognosisGroup::TNM3_PredSurvive, PrognosisGroup::TNM3_PredDie};
  return groups;
}

PrognosisGroup prognosis_group(int stage, PredictionClass learned) {
  check_stage(stage, "prognosis_group");
  const bool survive = learned == PredictionClass::Survive;
  if (stage == 2) {
    return survive ? PrognosisGroup::TNM2_PredSurvive : PrognosisGroup::TNM2_PredDie;
  }
  return survive ? PrognosisGroup::TNM3_PredSurvive : PrognosisGroup::TNM3_PredDie;
}

// ---------------------------------------------------------------------------
// Report

double ReportRow::accuracy() const {
  return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
}

std::string ReportRow::label() const {
  std::string out;
  for (ModelSource s : subset) {
    if (!out.empty()) out += '+';
    out += to_string(s);
  }
  return out;
}

const ReportRow& AgreementReport::row(const std::vector<ModelSource>& subset) const {
  for (const auto& r : rows) {
    if (r.subset == subset) return r;
  }
  throw UsageError("report has no such subset row");
}

const std::vector<std::vector<ModelSource>>& report_subsets() {
  using enum ModelSource;
  static const std::vector<std::vector<ModelSource>> subsets{
      {T}, {L}, {A}, {T, L}, {T, A}, {L, A}, {T, L, A}};
  return subsets;
}

AgreementReport build_report(const std::vector<SourcePredictions>& preds,
                             const std::vector<SurvivalLabel>& labels) {
  if (preds.size() != labels.size()) {
    throw UsageError("build_report: " + std::to_string(preds.size()) +
                     " predictions for " + std::to_string(labels.size()) + " labels");
  }
  AgreementReport report;
  for (const auto& subset : report_subsets()) {
    ReportRow row{subset, 0, 0};
    for (std::size_t p = 0; p < preds.size(); ++p) {
      const auto decision = agreement_filter(preds[p], subset);
      if (decision.abstained()) continue;
      ++row.n;
      if (*decision.predicted == truth_of(labels[p])) ++row.correct;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void check_report(const AgreementReport& report) {
  const auto& subsets = report_subsets();
  if (report.rows.size() != subsets.size()) {
    throw InvariantError("report must have " + std::to_string(subsets.size()) + " rows");
  }
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const auto& r = report.rows[i];
    if (r.subset != subsets[i]) throw InvariantError("report rows out of order");
    if (r.correct > r.n) throw InvariantError("row " + r.label() + ": correct exceeds n");
  }
  const std::size_t total = report.rows[0].n;
  for (std::size_t i = 1; i < 3; ++i) {
    if (report.rows[i].n != total) {
      throw InvariantError("singleton rows cover different patient counts");
    }
  }
  const std::size_t triple = report.rows[6].n;
  for (std::size_t i = 3; i < 6; ++i) {
    if (triple > report.rows[i].n) {
      throw InvariantError("T+L+A count exceeds the " + report.rows[i].label() + " count");
    }
    if (report.rows[i].n > total) {
      throw InvariantError(report.rows[i].label() + " count exceeds the patient count");
    }
  }
}

std::string format_percent(std::size_t correct, std::size_t n) {
  if (n == 0) return "n/a";
  // Tenths of a percent, rounded half up on the exact quotient.
  const std::uint64_t tenths = (2000ULL * correct + n) / (2ULL * n);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

std::string report_to_csv(const AgreementReport& report) {
  std::ostringstream out;
  out << "subset,n,correct,accuracy\n";
  for (const auto& r : report.rows) {
    out << r.label() << ',' << r.n << ',' << r.correct << ','
        << format_percent(r.correct, r.n) << '\n';
  }
  return out.str();
}

std::string format_report_table(const AgreementReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "Subset" << std::right << std::setw(10) << "Accuracy"
      << std::setw(8) << "n" << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(8) << r.label() << std::right << std::setw(10)
        << format_percent(r.correct, r.n) << std::setw(8) << r.n << '\n';
  }
  return out.str();
}

ordered_json to_json(const AgreementReport& report) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json row;
    row["subset"] = r.label();
    row["n"] = r.n;
    row["correct"] = r.correct;
    row["accuracy"] = r.accuracy();
    row["percent"] = format_percent(r.correct, r.n);
    rows.push_back(row);
  }
  ordered_json j;
  j["rows"] = rows;
  return j;
}

AgreementReport report_from_json(const ordered_json& j) {
  AgreementReport report;
  try {
    const auto& rows = j.at("rows");
    if (rows.size() != report_subsets().size()) {
      throw DataError("report must have " + std::to_string(report_subsets().size()) +
                      " rows");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ReportRow r{report_subsets()[i], rows[i].at("n").get<std::size_t>(),
                  rows[i].at("correct").get<std::size_t>()};
      if (rows[i].at("subset").get<std::string>() != r.label()) {
        throw DataError("report row " + std::to_string(i) + " should be " + r.label());
      }
      report.rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Cross-validated evaluation

std::vector<std::size_t> stratified_folds(const std::vector<int>& y, std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 1) throw UsageError("stratified_folds: need at least one fold");
  if (folds > y.size()) {
    throw UsageError("stratified_folds: " + std::to_string(folds) + " folds for " +
                     std::to_string(y.size()) + " samples");
  }
  std::vector<std::size_t> fold_of(y.size(), 0);
  if (folds == 1) return fold_of;

  std::vector<int> classes = y;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  Rng rng(seed);
  std::size_t next = 0;
  for (int c : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) members.push_back(i);
    }
    rng.shuffle(members);
    // Continue dealing where the previous class stopped so fold sizes
    // stay balanced overall.
    for (std::size_t i : members) fold_of[i] = next++ % folds;
  }
  return fold_of;
}

void EnsembleConfig::validate() const {
  if (folds < 1) throw DataError("folds must be >= 1");
  if (k_top < 1 || k_bottom < 1) throw DataError("k_top and k_bottom must be >= 1");
  svm.validate();
  mlp.validate();
}

ordered_json to_json(const FoldModel& model) {
  ordered_json j;
  j["seed"] = model.seed;
  j["linearization"] = to_json(model.linearization);
  j["imputation"] = to_json(model.imputation);
  j["standardizer"] = to_json(model.standardizer);
  j["ranking"] = to_json(model.ranking);
  j["top"] = model.top;
  j["bottom"] = model.bottom;
  j["learner"] = to_json(model.learner);
  j["anti_base"] = to_json(model.anti_base);
  return j;
}

FoldModel fold_model_from_json(const ordered_json& j) {
  FoldModel model;
  try {
    model.seed = j.at("seed").get<std::uint64_t>();
    model.linearization = linearization_map_from_json(j.at("linearization"));
    model.imputation = imputation_plan_from_json(j.at("imputation"));
    model.standardizer = standardizer_from_json(j.at("standardizer"));
    model.ranking = ranking_from_json(j.at("ranking"));
    model.top = j.at("top").get<std::vector<std::size_t>>();
    model.bottom = j.at("bottom").get<std::vector<std::size_t>>();
    model.learner = mlp_model_from_json(j.at("learner"));
    model.anti_base = mlp_model_from_json(j.at("anti_base"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model bundle: ") + e.what());
  }
  const std::size_t d = model.standardizer.attributes.size();
  for (std::size_t c : model.top) {
    if (c >= d) throw DataError("model bundle: top attribute index out of range");
  }
  for (std::size_t c : model.bottom) {
    if (c >= d) throw DataError("model bundle: bottom attribute index out of range");
  }
  if (model.learner.input_size() != model.top.size() ||
      model.anti_base.input_size() != model.bottom.size()) {
    throw DataError("model bundle: network inputs do not match attribute lists");
  }
  return model;
}

FoldModel fit_fold_model(const Dataset& train, const std::vector<SurvivalLabel>& labels,
                         const EnsembleConfig& cfg, std::uint64_t seed) {
  check_labeled(train, labels, "fit_fold_model");
  Prepared prep = prepare(train, labels, cfg.linearize);
  const std::size_t d = static_cast<std::size_t>(prep.X.cols());
  if (cfg.k_top > d || cfg.k_bottom > d) {
    throw DataError("k_top = " + std::to_string(cfg.k_top) + " and k_bottom = " +
                    std::to_string(cfg.k_bottom) + " need at least that many attributes; " +
                    std::to_string(d) + " remain");
  }

  FoldModel model;
  model.seed = seed;
  model.linearization = std::move(prep.linearization);
  model.imputation = std::move(prep.imputation);
  model.standardizer = std::move(prep.standardizer);

  SvmConfig svm = cfg.svm;
  svm.seed = derive_seed(seed, 0);
  model.ranking = rfe_rank(prep.X, signed_labels(labels), svm);
  model.ranking.names = model.standardizer.attributes;
  model.top = top_k(model.ranking, cfg.k_top);
  model.bottom = bottom_k(model.ranking, cfg.k_bottom);

  const auto y01 = binary_labels(labels);
  MlpConfig mlp = cfg.mlp;
  mlp.seed = derive_seed(seed, 1);
  model.learner = train_mlp(columns(prep.X, model.top), y01, mlp).model;
  mlp.seed = derive_seed(seed, 2);
  model.anti_base = train_mlp(columns(prep.X, model.bottom), y01, mlp).model;
  return model;
}

Eigen::MatrixXd transform(const FoldModel& model, const Dataset& ds) {
  return apply_prepared(model.linearization, model.imputation, model.standardizer, ds);
}

std::vector<SourcePredictions> predict_sources(const FoldModel& model, const Dataset& ds) {
  const Eigen::MatrixXd X = transform(model, ds);
  const Eigen::MatrixXd top = columns(X, model.top);
  const Eigen::MatrixXd bottom = columns(X, model.bottom);
  std::vector<SourcePredictions> out;
  out.reserve(ds.patient_count());
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    out.push_back({{ModelSource::T, tnm_rule(ds.outcomes()[p].tnm_stage)},
                   {ModelSource::L, learned_predict(model.learner, top.row(i).transpose())},
                   {ModelSource::A,
                    antilearn_predict(model.anti_base, bottom.row(i).transpose())}});
  }
  return out;
}

CrossValidation cross_validate(const Dataset& ds, const std::vector<SurvivalLabel>& labels,
                               const EnsembleConfig& cfg) {
  cfg.validate();
  check_labeled(ds, labels, "cross_validate");
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    check_stage(ds.outcomes()[p].tnm_stage, "cross_validate");
  }

  CrossValidation cv;
  cv.fold_of = stratified_folds(signed_labels(labels), cfg.folds, cfg.seed);

  struct FoldResult {
    FoldModel model;
    std::vector<SourcePredictions> predictions;
  };
  auto run_fold = [&](std::size_t fold) {
    const auto train_mask = fold_mask(cv.fold_of, fold, cfg.folds, false);
    const auto test_mask = fold_mask(cv.fold_of, fold, cfg.folds, true);
    FoldResult r;
    r.model = fit_fold_model(patients(ds, train_mask), subset(labels, train_mask), cfg,
                             derive_seed(cfg.seed, fold));
    r.predictions = predict_sources(r.model, patients(ds, test_mask));
    return r;
  };
  std::vector<std::future<FoldResult>> pending;
  for (std::size_t fold = 0; fold < cfg.folds; ++fold) {
    pending.push_back(std::async(std::launch::async, run_fold, fold));
  }

  cv.predictions.resize(ds.patient_count());
  for (std::size_t fold = 0; fold < cfg.folds; ++fold) {
    FoldResult r = pending[fold].get();
    const auto test_mask = fold_mask(cv.fold_of, fold, cfg.folds, true);
    std::size_t next = 0;
    for (std::size_t p = 0; p < ds.patient_count(); ++p) {
      if (test_mask[p]) cv.predictions[p] = r.predictions[next++];
    }
    cv.models.push_back(std::move(r.model));
  }
  cv.report = build_report(cv.predictions, labels);
  check_report(cv.report);
  return cv;
}

std::vector<SweepPoint> attribute_sweep(const Dataset& ds,
                                        const std::vector<SurvivalLabel>& labels,
                                        const std::vector<std::size_t>& k_values,
                                        const EnsembleConfig& cfg, SweepVariant variant) {
  cfg.validate();
  check_labeled(ds, labels, "attribute_sweep");
  for (std::size_t k : k_values) {
    if (k < 1 || k > ds.attribute_count()) {
      throw UsageError("attribute_sweep: k = " + std::to_string(k) + " outside [1, " +
                       std::to_string(ds.attribute_count()) + "]");
    }
  }
  const auto fold_of = stratified_folds(signed_labels(labels), cfg.folds, cfg.seed);

  std::vector<bool> passes;
  if (variant != SweepVariant::Linearized) passes.push_back(false);
  if (variant != SweepVariant::Raw) passes.push_back(true);

  std::vector<SweepPoint> points;
  for (bool linearize : passes) {
    // accuracy[fold][k index]
    auto run_fold = [&](std::size_t fold) {
      const auto train_mask = fold_mask(fold_of, fold, cfg.folds, false);
      const auto test_mask = fold_mask(fold_of, fold, cfg.folds, true);
      const Dataset train = patients(ds, train_mask);
      const auto train_labels = subset(labels, train_mask);
      const std::uint64_t seed = derive_seed(cfg.seed, fold);

      Prepared prep = prepare(train, train_labels, linearize);
      SvmConfig svm = cfg.svm;
      svm.seed = derive_seed(seed, 0);
      const Ranking ranking = rfe_rank(prep.X, signed_labels(train_labels), svm);
      const Eigen::MatrixXd test_X = apply_prepared(
          prep.linearization, prep.imputation, prep.standardizer, patients(ds, test_mask));
      const auto test_y = binary_labels(subset(labels, test_mask));

      MlpConfig mlp = cfg.mlp;
      mlp.seed = derive_seed(seed, 1);
      std::vector<double> acc;
      for (std::size_t k : k_values) {
        const auto cols = top_k(ranking, k);
        const MlpModel m =
            train_mlp(columns(prep.X, cols), binary_labels(train_labels), mlp).model;
        acc.push_back(accuracy_of(m, columns(test_X, cols), test_y));
      }
      return acc;
    };
    std::vector<std::future<std::vector<double>>> pending;
    for (std::size_t fold = 0; fold < cfg.folds; ++fold) {
      pending.push_back(std::async(std::launch::async, run_fold, fold));
    }
    std::vector<double> sum(k_values.size(), 0.0);
    for (auto& f : pending) {
      const auto acc = f.get();
      for (std::size_t i = 0; i < acc.size(); ++i) sum[i] += acc[i];
    }
    for (std::size_t i = 0; i < k_values.size(); ++i) {
      points.push_back({k_values[i], linearize ? "linearized" : "raw",
                        sum[i] / static_cast<double>(cfg.folds)});
    }
  }
  return points;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::string out = "k,variant,accuracy\n";
  for (const auto& p : points) {
    out += std::to_string(p.k) + "," + p.variant + "," + format_double(p.accuracy) + "\n";
  }
  return out;
}

}  // namespace crcsel
