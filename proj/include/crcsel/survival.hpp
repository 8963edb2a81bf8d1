#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crcsel/tabular.hpp"

namespace crcsel {

/// event = true: death from disease at `time`; false: censored at `time`.
struct TimedOutcome {
  int time = 0;
  bool event = false;
};

struct KmStep {
  int time = 0;
  std::size_t at_risk = 0;
  std::size_t deaths = 0;
  double survival = 1.0;
};

/// Product-limit step function with an implicit S(0) = 1. Steps occur
/// only at distinct death times.
struct KmCurve {
  std::size_t subjects = 0;
  std::vector<KmStep> steps;
};

/// Subjects censored at a death time count as at risk at that time.
KmCurve km_estimate(const std::vector<TimedOutcome>& outcomes);

/// S(t): the survival of the last step with time <= t, else 1.
double survival_rate_at(const KmCurve& curve, double t);

struct GroupedCurves {
  std::map<std::string, KmCurve> curves;
  /// One line per requested group that had no subjects.
  std::vector<std::string> warnings;
};

/// group_keys[i] is the group of outcomes[i]. Groups listed in
/// `expected_groups` with no subjects are omitted and reported as warnings.
GroupedCurves km_by_group(const std::vector<TimedOutcome>& outcomes,
                          const std::vector<std::string>& group_keys,
                          const std::vector<std::string>& expected_groups = {});

/// Death from another cause is censored at the death time unless
/// `drop_other_deaths` is set, in which case those patients are skipped
/// (and absent from the returned index list).
struct CohortOutcomes {
  std::vector<TimedOutcome> outcomes;
  std::vector<std::size_t> patients;
};
CohortOutcomes timed_outcomes(const Dataset& ds, bool drop_other_deaths);

/// CSV: group,time,at_risk,deaths,survival; a t = 0 row then one row per
/// step up to `horizon` (all steps when unset).
std::string curves_to_csv(const GroupedCurves& grouped,
                          std::optional<int> horizon = std::nullopt);

}  // namespace crcsel
