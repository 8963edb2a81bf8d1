#include "crcsel/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crcsel/errors.hpp"
#include "crcsel/ranking.hpp"
#include "crcsel/random.hpp"
#include "crcsel/survival.hpp"

namespace crcsel {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Unreadable or unwritable files (exit status 1).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

ordered_json parse_json(const std::string& text, const fs::path& origin) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(origin.string() + ": " + e.what());
  }
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::string_view to_string(SweepVariant v) {
  switch (v) {
    case SweepVariant::Raw: return "raw";
    case SweepVariant::Linearized: return "linearized";
    case SweepVariant::Both: return "both";
  }
  return "?";
}

SweepVariant sweep_variant_from(const std::string& s) {
  if (s == "raw") return SweepVariant::Raw;
  if (s == "linearized") return SweepVariant::Linearized;
  if (s == "both") return SweepVariant::Both;
  throw DataError("sweep_variant must be raw, linearized or both, not '" + s + "'");
}

// ---------------------------------------------------------------------------
// Loading and preprocessing a cohort

struct Cohort {
  AuditLog audit;
  /// Stage 2/3 patients left by the exclusion protocol.
  Dataset data;
  std::vector<SurvivalLabel> labels;
};

Dataset load_dataset(const RunConfig& cfg) {
  if (cfg.surrogate) return gen_clinical_surrogate(*cfg.surrogate);
  const auto schema = parse_schema(read_file(*cfg.schema));
  return parse_dataset(read_file(*cfg.dataset), schema);
}

Cohort load_cohort(const RunConfig& cfg, std::ostream& err) {
  const Dataset raw = load_dataset(cfg);
  std::vector<bool> in_scope(raw.patient_count());
  std::size_t kept = 0;
  for (std::size_t p = 0; p < raw.patient_count(); ++p) {
    const int stage = raw.outcomes()[p].tnm_stage;
    in_scope[p] = stage == 2 || stage == 3;
    kept += in_scope[p] ? 1 : 0;
  }
  if (kept == 0) {
    throw DataError("no TNM stage 2 or 3 patients; the TNM rule cannot be applied");
  }
  const Dataset scoped =
      select(raw, in_scope, std::vector<bool>(raw.attribute_count(), true));

  Cohort cohort;
  cohort.audit.push_back({"stage_scope", raw.patient_count() - kept, 0, kept,
                          raw.attribute_count()});
  ProtocolResult result = [&] {
    try {
      return apply_protocol(scoped, cfg.exclusion);
    } catch (const ProtocolError& e) {
      for (const auto& s : e.audit()) {
        err << "audit " << s.step << ": -" << s.patients_removed << " patients, -"
            << s.attributes_removed << " attributes\n";
      }
      throw;
    }
  }();
  cohort.audit.insert(cohort.audit.end(), result.audit.begin(), result.audit.end());

  const auto labels = label_all(result.dataset, cfg.exclusion.survival_threshold_months);
  std::vector<bool> labeled(labels.size());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    labeled[p] = labels[p] != SurvivalLabel::Excluded;
    if (labeled[p]) cohort.labels.push_back(labels[p]);
  }
  if (cohort.labels.empty()) throw DataError("no patient carries a 5-year label");
  cohort.data = select(result.dataset, labeled,
                       std::vector<bool>(result.dataset.attribute_count(), true));
  err << "cohort: " << cohort.data.patient_count() << " patients, "
      << cohort.data.attribute_count() << " attributes\n";
  return cohort;
}

ordered_json provenance(const RunConfig& cfg) {
  ordered_json j;
  j["seed"] = *cfg.seed;
  j["folds"] = cfg.folds;
  j["k_top"] = cfg.k_top;
  j["k_bottom"] = cfg.k_bottom;
  j["linearize"] = cfg.linearize;
  return j;
}

std::uint64_t final_model_seed(const RunConfig& cfg) {
  // Fold models use indices 0..folds-1.
  return derive_seed(*cfg.seed, cfg.folds);
}

ordered_json model_bundle(const RunConfig& cfg, const FoldModel& model) {
  ordered_json j = provenance(cfg);
  j["model"] = to_json(model);
  return j;
}

FoldModel load_model_bundle(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("model file " + path.string() + " not found");
  const ordered_json j = parse_json(read_file(path), path);
  if (!j.contains("model")) throw DataError(path.string() + ": no model in bundle");
  return fold_model_from_json(j.at("model"));
}

// ---------------------------------------------------------------------------
// Artifacts

std::string predictions_to_csv(const Cohort& cohort, const CrossValidation& cv) {
  std::ostringstream out;
  out << "patient_id,tnm_stage,fold,label,T,L,A\n";
  for (std::size_t p = 0; p < cohort.data.patient_count(); ++p) {
    const auto& pred = cv.predictions[p];
    out << cohort.data.patient_ids()[p] << ',' << cohort.data.outcomes()[p].tnm_stage << ','
        << cv.fold_of[p] << ',' << to_string(cohort.labels[p]) << ','
        << to_string(pred.at(ModelSource::T)) << ',' << to_string(pred.at(ModelSource::L))
        << ',' << to_string(pred.at(ModelSource::A)) << '\n';
  }
  return out.str();
}

PredictionClass prediction_from(const std::string& s, std::size_t line) {
  if (s == "Survive") return PredictionClass::Survive;
  if (s == "Die") return PredictionClass::Die;
  throw DataError("predictions line " + std::to_string(line) + ": bad prediction '" + s +
                  "'");
}

void read_predictions(const std::string& text, std::vector<SourcePredictions>& preds,
                      std::vector<SurvivalLabel>& labels) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "patient_id,tnm_stage,fold,label,T,L,A") {
    throw DataError("predictions: unexpected header '" + line + "'");
  }
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    for (std::string cell; std::getline(fields, cell, ',');) f.push_back(cell);
    if (f.size() != 7) throw DataError("predictions line " + std::to_string(n) + ": 7 fields expected");
    if (f[3] == "Survived") {
      labels.push_back(SurvivalLabel::Survived);
    } else if (f[3] == "Died") {
      labels.push_back(SurvivalLabel::Died);
    } else {
      throw DataError("predictions line " + std::to_string(n) + ": bad label '" + f[3] + "'");
    }
    preds.push_back({{ModelSource::T, prediction_from(f[4], n)},
                     {ModelSource::L, prediction_from(f[5], n)},
                     {ModelSource::A, prediction_from(f[6], n)}});
  }
}

/// Independent recount of every row straight from the predictions.
void verify_report(const AgreementReport& report,
                   const std::vector<SourcePredictions>& preds,
                   const std::vector<SurvivalLabel>& labels) {
  check_report(report);
  for (const auto& row : report.rows) {
    std::size_t n = 0, correct = 0;
    for (std::size_t p = 0; p < preds.size(); ++p) {
      const PredictionClass first = preds[p].at(row.subset.front());
      bool agree = true;
      for (ModelSource s : row.subset) agree = agree && preds[p].at(s) == first;
      if (!agree) continue;
      ++n;
      const bool survived = labels[p] == SurvivalLabel::Survived;
      if ((first == PredictionClass::Survive) == survived) ++correct;
    }
    if (n != row.n || correct != row.correct) {
      throw InvariantError("report row " + row.label() + " disagrees with a recount (" +
                           std::to_string(row.correct) + "/" + std::to_string(row.n) +
                           " vs " + std::to_string(correct) + "/" + std::to_string(n) + ")");
    }
  }
}

std::string render_report(const AgreementReport& report, const RunConfig* cfg,
                          const std::string& format) {
  if (format == "json") {
    ordered_json j = cfg ? provenance(*cfg) : ordered_json::object();
    const ordered_json body = to_json(report);
    for (const auto& [k, v] : body.items()) j[k] = v;
    return dump(j);
  }
  return report_to_csv(report);
}

std::string km_csv(const Cohort& cohort, const std::vector<std::string>& keys,
                   const std::vector<std::string>& expected, std::ostream& err) {
  const CohortOutcomes timed = timed_outcomes(cohort.data, false);
  std::vector<std::string> timed_keys;
  for (std::size_t p : timed.patients) timed_keys.push_back(keys[p]);
  const GroupedCurves grouped = km_by_group(timed.outcomes, timed_keys, expected);
  for (const auto& w : grouped.warnings) err << "warning: " << w << '\n';
  return curves_to_csv(grouped);
}

std::vector<std::string> stage_keys(const Cohort& cohort) {
  std::vector<std::string> keys;
  for (const auto& o : cohort.data.outcomes()) keys.push_back("TNM" + std::to_string(o.tnm_stage));
  return keys;
}

std::vector<std::string> prognosis_keys(const Cohort& cohort,
                                        const std::vector<PredictionClass>& learned) {
  std::vector<std::string> keys;
  for (std::size_t p = 0; p < cohort.data.patient_count(); ++p) {
    keys.emplace_back(
        to_string(prognosis_group(cohort.data.outcomes()[p].tnm_stage, learned[p])));
  }
  return keys;
}

std::vector<std::string> prognosis_names() {
  std::vector<std::string> names;
  for (auto g : all_prognosis_groups()) names.emplace_back(to_string(g));
  return names;
}

std::vector<std::size_t> sweep_ks(const RunConfig& cfg, std::size_t attributes) {
  if (!cfg.sweep_k.empty()) return cfg.sweep_k;
  std::vector<std::size_t> ks;
  for (std::size_t k = 1; k <= std::min<std::size_t>(20, attributes); ++k) ks.push_back(k);
  return ks;
}

// ---------------------------------------------------------------------------
// Commands

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::string grouping = "tnm";
  std::optional<std::size_t> folds;
  std::optional<std::size_t> k_top;
  std::optional<std::size_t> k_bottom;
  std::string model;
};

RunConfig resolve(const Options& o) {
  if (o.config.empty()) throw UsageError("--config is required");
  RunConfig cfg = load_run_config(o.config);
  if (o.seed) cfg.seed = o.seed;
  if (!o.out.empty()) cfg.out = fs::absolute(o.out);
  if (o.folds) cfg.folds = *o.folds;
  if (o.k_top) cfg.k_top = *o.k_top;
  if (o.k_bottom) cfg.k_bottom = *o.k_bottom;
  if (cfg.surrogate && o.seed) cfg.surrogate->seed = *o.seed;
  cfg.validate();
  return cfg;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (o.config.empty()) throw UsageError("--config is required");
  if (o.out.empty()) throw UsageError("--out is required");
  ordered_json spec = parse_json(read_file(o.config), o.config);
  if (o.seed) spec["seed"] = *o.seed;
  const std::string generator = spec.value("generator", std::string("surrogate"));

  Dataset ds;
  if (generator == "surrogate") {
    ds = gen_clinical_surrogate(surrogate_spec_from_json(spec));
  } else if (generator == "antilearnable" || generator == "linear") {
    LabeledMatrix m;
    try {
      if (generator == "antilearnable") {
        AntiSpec s;
        s.n = spec.value("n", s.n);
        s.rho_within = spec.value("rho_within", s.rho_within);
        s.rho_between = spec.value("rho_between", s.rho_between);
        s.seed = spec.value("seed", s.seed);
        m = gen_antilearnable(s);
      } else {
        LinearSpec s;
        s.n = spec.value("n", s.n);
        s.d_informative = spec.value("d_informative", s.d_informative);
        s.d_noise = spec.value("d_noise", s.d_noise);
        s.separation = spec.value("separation", s.separation);
        s.seed = spec.value("seed", s.seed);
        m = gen_linear(s);
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed spec: ") + e.what());
    }
    std::vector<AttributeSpec> attrs;
    for (Eigen::Index c = 0; c < m.X.cols(); ++c) {
      char name[16];
      std::snprintf(name, sizeof name, "x_%02d", static_cast<int>(c + 1));
      attrs.push_back({name, AttributeKind::continuous(), {Role::Feature}});
    }
    std::vector<std::string> ids;
    std::vector<Cell> cells;
    std::vector<OutcomeRecord> outcomes;
    for (Eigen::Index r = 0; r < m.X.rows(); ++r) {
      ids.push_back("P" + std::to_string(r + 1));
      for (Eigen::Index c = 0; c < m.X.cols(); ++c) cells.emplace_back(m.X(r, c));
      // +1 survives the 5-year horizon, -1 dies of the disease before it.
      outcomes.push_back(m.y[static_cast<std::size_t>(r)] == 1
                             ? OutcomeRecord{72, VitalStatus::Alive, 2}
                             : OutcomeRecord{24, VitalStatus::DeadOfDisease, 2});
    }
    ds = Dataset(std::move(attrs), std::move(ids), std::move(cells), std::move(outcomes));
  } else {
    throw DataError("unknown generator '" + generator + "'");
  }

  const fs::path dir = o.out;
  write_file(dir / "dataset.csv", serialize_dataset(ds));
  write_file(dir / "schema.json", serialize_schema(ds.attributes()));
  const std::size_t total = ds.patient_count() * ds.attribute_count();
  const double pct = total ? 100.0 * static_cast<double>(ds.missing_count()) /
                                 static_cast<double>(total)
                           : 0.0;
  char line[64];
  std::snprintf(line, sizeof line, "%.2f%%", pct);
  out << "patients " << ds.patient_count() << '\n'
      << "attributes " << ds.attribute_count() << '\n'
      << "missing " << ds.missing_count() << " of " << total << " cells (" << line << ")\n";
  return kExitOk;
}

int cmd_preprocess(const Options& o, std::ostream&, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const Cohort cohort = load_cohort(cfg, err);
  write_file(cfg.out / "audit.csv", audit_to_csv(cohort.audit));
  write_file(cfg.out / "cohort.csv", serialize_dataset(cohort.data));
  write_file(cfg.out / "cohort.schema.json", serialize_schema(cohort.data.attributes()));
  return kExitOk;
}

FoldModel fit_final(const RunConfig& cfg, const Cohort& cohort) {
  return fit_fold_model(cohort.data, cohort.labels, cfg.ensemble(), final_model_seed(cfg));
}

void write_model(const RunConfig& cfg, const FoldModel& model) {
  ordered_json ranking = provenance(cfg);
  ranking["ranking"] = to_json(model.ranking);
  write_file(cfg.out / "ranking.json", dump(ranking));
  write_file(cfg.out / "model.json", dump(model_bundle(cfg, model)));
}

int cmd_rank(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const Cohort cohort = load_cohort(cfg, err);
  const FoldModel model = fit_final(cfg, cohort);
  ordered_json ranking = provenance(cfg);
  ranking["ranking"] = to_json(model.ranking);
  write_file(cfg.out / "ranking.json", dump(ranking));
  out << format_ranking_table(model.ranking, cfg.k_top, cfg.k_bottom);
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream&, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const Cohort cohort = load_cohort(cfg, err);
  write_model(cfg, fit_final(cfg, cohort));
  return kExitOk;
}

struct Evaluation {
  CrossValidation cv;
  std::vector<SweepPoint> sweep;
};

Evaluation evaluate(const RunConfig& cfg, const Cohort& cohort) {
  Evaluation e;
  e.cv = cross_validate(cohort.data, cohort.labels, cfg.ensemble());
  verify_report(e.cv.report, e.cv.predictions, cohort.labels);
  e.sweep = attribute_sweep(cohort.data, cohort.labels,
                            sweep_ks(cfg, cohort.data.attribute_count()), cfg.ensemble(),
                            cfg.sweep_variant);
  return e;
}

void write_evaluation(const RunConfig& cfg, const Cohort& cohort, const Evaluation& e) {
  write_file(cfg.out / "predictions.csv", predictions_to_csv(cohort, e.cv));
  write_file(cfg.out / "report.csv", report_to_csv(e.cv.report));
  write_file(cfg.out / "report.json", render_report(e.cv.report, &cfg, "json"));
  write_file(cfg.out / "sweep.csv", sweep_to_csv(e.sweep));
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const Cohort cohort = load_cohort(cfg, err);
  const Evaluation e = evaluate(cfg, cohort);
  write_evaluation(cfg, cohort, e);
  out << render_report(e.cv.report, &cfg, o.format);
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  const RunConfig cfg = resolve(o);
  std::vector<SourcePredictions> preds;
  std::vector<SurvivalLabel> labels;
  read_predictions(read_file(cfg.out / "predictions.csv"), preds, labels);
  const AgreementReport report = build_report(preds, labels);
  verify_report(report, preds, labels);
  const fs::path stored = cfg.out / "report.json";
  if (fs::exists(stored)) {
    const AgreementReport saved = report_from_json(parse_json(read_file(stored), stored));
    if (!(saved == report)) {
      throw InvariantError(stored.string() + " does not match a recount of predictions.csv");
    }
  }
  out << (o.format == "table" ? format_report_table(report)
                              : render_report(report, &cfg, o.format));
  return kExitOk;
}

int cmd_km(const Options& o, std::ostream&, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  std::optional<FoldModel> model;
  if (o.grouping == "prognosis") {
    model = load_model_bundle(o.model.empty() ? cfg.out / "model.json" : fs::path(o.model));
  }
  const Cohort cohort = load_cohort(cfg, err);
  if (o.grouping == "tnm") {
    write_file(cfg.out / "km_tnm.csv", km_csv(cohort, stage_keys(cohort), {"TNM2", "TNM3"}, err));
  } else {
    const Eigen::MatrixXd X = transform(*model, cohort.data);
    std::vector<PredictionClass> learned;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const Eigen::VectorXd row = X.row(i)(Eigen::all, std::vector<Eigen::Index>(
                                                          model->top.begin(), model->top.end()))
                                      .transpose();
      learned.push_back(learned_predict(model->learner, row));
    }
    write_file(cfg.out / "km_prognosis.csv",
               km_csv(cohort, prognosis_keys(cohort, learned), prognosis_names(), err));
  }
  return kExitOk;
}

int cmd_pipeline(const Options& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const Cohort cohort = load_cohort(cfg, err);
  write_file(cfg.out / "run.json", dump(to_json(cfg)));
  write_file(cfg.out / "audit.csv", audit_to_csv(cohort.audit));
  write_file(cfg.out / "cohort.csv", serialize_dataset(cohort.data));
  write_file(cfg.out / "cohort.schema.json", serialize_schema(cohort.data.attributes()));

  const Evaluation e = evaluate(cfg, cohort);
  write_evaluation(cfg, cohort, e);

  const FoldModel model = fit_final(cfg, cohort);
  write_model(cfg, model);
  ordered_json plans = provenance(cfg);
  plans["imputation"] = to_json(model.imputation);
  plans["linearization"] = to_json(model.linearization);
  plans["standardizer"] = to_json(model.standardizer);
  write_file(cfg.out / "plans.json", dump(plans));

  write_file(cfg.out / "km_tnm.csv", km_csv(cohort, stage_keys(cohort), {"TNM2", "TNM3"}, err));
  // Prognosis groups from the out-of-fold learner predictions.
  std::vector<PredictionClass> learned;
  for (const auto& p : e.cv.predictions) learned.push_back(p.at(ModelSource::L));
  write_file(cfg.out / "km_prognosis.csv",
             km_csv(cohort, prognosis_keys(cohort, learned), prognosis_names(), err));

  out << format_report_table(e.cv.report);
  return kExitOk;
}

void add_run_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "Run config (JSON)")->required();
  sub->add_option("--seed", o.seed, "Master seed (overrides the config)");
  sub->add_option("--out", o.out, "Output directory (overrides the config)");
  sub->add_option("--folds", o.folds, "Cross-validation folds");
  sub->add_option("--k-top", o.k_top, "Attributes for the learner");
  sub->add_option("--k-bottom", o.k_bottom, "Attributes for the anti-learner");
}

}  // namespace

void RunConfig::validate() const {
  if (!seed) throw UsageError("a seed is required (config \"seed\" or --seed)");
  if (folds < 1) throw UsageError("folds must be >= 1");
  if (k_top < 1 || k_bottom < 1) throw UsageError("k_top and k_bottom must be >= 1");
  if (!surrogate && (!dataset || !schema)) {
    throw UsageError("config needs \"dataset\" and \"schema\", or \"surrogate\"");
  }
  if (dataset && schema && (*dataset == *schema || *dataset == out || *schema == out)) {
    throw UsageError("dataset, schema and output paths must be distinct");
  }
  exclusion.validate();
}

EnsembleConfig RunConfig::ensemble() const {
  EnsembleConfig e(*seed);
  e.folds = folds;
  e.k_top = k_top;
  e.k_bottom = k_bottom;
  e.linearize = linearize;
  e.svm = svm_config_from_json(svm, *seed);
  e.mlp = mlp_config_from_json(mlp, *seed);
  return e;
}

RunConfig load_run_config(const fs::path& path) {
  const ordered_json j = parse_json(read_file(path), path);
  const fs::path base = fs::absolute(path).parent_path();
  auto resolve_path = [&](const std::string& p) { return (base / p).lexically_normal(); };
  RunConfig cfg;
  try {
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.folds = j.value("folds", cfg.folds);
    cfg.k_top = j.value("k_top", cfg.k_top);
    cfg.k_bottom = j.value("k_bottom", cfg.k_bottom);
    cfg.linearize = j.value("linearize", cfg.linearize);
    if (j.contains("dataset")) cfg.dataset = resolve_path(j.at("dataset").get<std::string>());
    if (j.contains("schema")) cfg.schema = resolve_path(j.at("schema").get<std::string>());
    if (j.contains("surrogate")) cfg.surrogate = surrogate_spec_from_json(j.at("surrogate"));
    cfg.out = resolve_path(j.value("out", std::string("out")));
    if (j.contains("exclusion")) cfg.exclusion = exclusion_config_from_json(j.at("exclusion"));
    if (j.contains("survival_threshold_months")) {
      cfg.exclusion.survival_threshold_months = j.at("survival_threshold_months").get<int>();
    }
    cfg.sweep_k = j.value("sweep_k", cfg.sweep_k);
    cfg.sweep_variant = sweep_variant_from(j.value("sweep_variant", std::string("both")));
    if (j.contains("svm")) cfg.svm = j.at("svm");
    if (j.contains("mlp")) cfg.mlp = j.at("mlp");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return cfg;
}

ordered_json to_json(const RunConfig& cfg) {
  ordered_json j = provenance(cfg);
  if (cfg.surrogate) j["surrogate"] = to_json(*cfg.surrogate);
  if (cfg.dataset) j["dataset"] = cfg.dataset->filename().string();
  if (cfg.schema) j["schema"] = cfg.schema->filename().string();
  j["exclusion"] = to_json(cfg.exclusion);
  j["sweep_k"] = cfg.sweep_k;
  j["sweep_variant"] = to_string(cfg.sweep_variant);
  const EnsembleConfig e = cfg.ensemble();
  j["svm"] = to_json(e.svm);
  j["mlp"] = to_json(e.mlp);
  return j;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selective survival prediction for colorectal cancer cohorts", "crcsel"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset and schema");
  synth->add_option("--config", o.config, "Generator spec (JSON)")->required();
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.seed, "Seed (overrides the spec)");

  auto* preprocess = app.add_subcommand("preprocess", "Apply the exclusion protocol");
  auto* rank = app.add_subcommand("rank", "Rank attributes by SVM-RFE");
  auto* train = app.add_subcommand("train", "Fit the model bundle on the whole cohort");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Cross-validate T, L and A and sweep k");
  auto* report = app.add_subcommand("report", "Recount the report from predictions.csv");
  auto* km = app.add_subcommand("km", "Export Kaplan-Meier curves");
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
  for (auto* sub : {preprocess, rank, train, evaluate_cmd, report, km, pipeline}) {
    add_run_options(sub, o);
  }
  for (auto* sub : {evaluate_cmd, report}) {
    sub->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"csv", "json", "table"}));
  }
  km->add_option("--grouping", o.grouping, "tnm or prognosis")
      ->check(CLI::IsMember({"tnm", "prognosis"}));
  km->add_option("--model", o.model, "Model bundle (default <out>/model.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(o, out);
    if (*preprocess) return cmd_preprocess(o, out, err);
    if (*rank) return cmd_rank(o, out, err);
    if (*train) return cmd_train(o, out, err);
    if (*evaluate_cmd) return cmd_evaluate(o, out, err);
    if (*report) return cmd_report(o, out, err);
    if (*km) return cmd_km(o, out, err);
    if (*pipeline) return cmd_pipeline(o, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvariantError& e) {
    err << "invariant failure: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInvariant;
  }
  return kExitUsage;
}

}  // namespace crcsel
