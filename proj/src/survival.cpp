#include "crcsel/survival.hpp"

#include <algorithm>
#include <sstream>

#include "crcsel/errors.hpp"

namespace crcsel {

KmCurve km_estimate(const std::vector<TimedOutcome>& outcomes) {
  if (outcomes.empty()) throw UsageError("km_estimate: no outcomes");
  std::vector<TimedOutcome> sorted = outcomes;
  for (const auto& o : sorted) {
    if (o.time < 0) throw UsageError("km_estimate: negative time");
  }
  // Deaths before censorings at equal times.
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.time != b.time ? a.time < b.time : a.event > b.event;
  });

  KmCurve curve;
  curve.subjects = sorted.size();
  double survival = 1.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const int t = sorted[i].time;
    const std::size_t at_risk = sorted.size() - i;
    std::size_t deaths = 0, leaving = 0;
    while (i + leaving < sorted.size() && sorted[i + leaving].time == t) {
      deaths += sorted[i + leaving].event ? 1 : 0;
      ++leaving;
    }
    if (deaths > 0) {
      survival *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      curve.steps.push_back({t, at_risk, deaths, survival});
    }
    i += leaving;
  }
  return curve;
}

double survival_rate_at(const KmCurve& curve, double t) {
  if (t < 0) throw UsageError("survival_rate_at: negative time");
  double s = 1.0;
  for (const auto& step : curve.steps) {
    if (step.time > t) break;
    s = step.survival;
  }
  return s;
}

GroupedCurves km_by_group(const std::vector<TimedOutcome>& outcomes,
                          const std::vector<std::string>& group_keys,
                          const std::vector<std::string>& expected_groups) {
  if (outcomes.size() != group_keys.size()) {
    throw UsageError("km_by_group: one group key per outcome required");
  }
  std::map<std::string, std::vector<TimedOutcome>> members;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    members[group_keys[i]].push_back(outcomes[i]);
  }
  GroupedCurves grouped;
  for (const auto& [key, list] : members) grouped.curves[key] = km_estimate(list);
  for (const auto& key : expected_groups) {
    if (!members.contains(key)) {
      grouped.warnings.push_back("group '" + key + "' has no patients; curve omitted");
    }
  }
  return grouped;
}

CohortOutcomes timed_outcomes(const Dataset& ds, bool drop_other_deaths) {
  CohortOutcomes out;
  for (std::size_t p = 0; p < ds.patient_count(); ++p) {
    const auto& o = ds.outcomes()[p];
    if (drop_other_deaths && o.vital_status == VitalStatus::DeadOther) continue;
    out.outcomes.push_back(
        {o.survival_months, o.vital_status == VitalStatus::DeadOfDisease});
    out.patients.push_back(p);
  }
  return out;
}

std::string curves_to_csv(const GroupedCurves& grouped, std::optional<int> horizon) {
  std::ostringstream out;
  out.precision(17);
  out << "group,time,at_risk,deaths,survival\n";
  for (const auto& [key, curve] : grouped.curves) {
    out << key << ",0," << curve.subjects << ",0,1\n";
    for (const auto& s : curve.steps) {
      if (horizon && s.time > *horizon) break;
      out << key << ',' << s.time << ',' << s.at_risk << ',' << s.deaths << ','
          << format_double(s.survival) << '\n';
    }
  }
  return out.str();
}

}  // namespace crcsel
