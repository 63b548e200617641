#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdid/model.hpp"

namespace sdid {

/// Between-level trend difference over one adjacent pre-treatment interval:
/// mean(Y_to - Y_from | a) - mean(Y_to - Y_from | b), with its Welch SE.
struct IntervalContrast {
  long from = 0;
  long to = 0;
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// One contrast per adjacent pair of pre-treatment times. Needs at least two
/// pre-treatment periods and two units per level.
std::vector<IntervalContrast> interval_trend_contrasts(const MultiPeriodPanel& panel,
                                                       const SubgroupContrast& contrast);

struct JointTest {
  double statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
};

/// Sum of squared interval z-scores referred to chi-squared(df = #intervals).
/// Treats the interval contrasts as independent; adjacent intervals share a
/// period, so with period-specific noise the reference distribution is only
/// approximate.
JointTest pretrends_joint_test(std::span<const IntervalContrast> contrasts);

struct PretrendsReport {
  SubgroupContrast contrast;
  std::vector<IntervalContrast> per_interval;
  JointTest joint;
  double alpha = 0.05;
  bool passed = false;  // joint p >= alpha
  std::string decision_note;
};

PretrendsReport pretrends_report(const MultiPeriodPanel& panel, const SubgroupContrast& contrast,
                                 double alpha = 0.05);

struct EventStudyPoint {
  long period = 0;
  long base = 0;
  double estimate = 0.0;
  double se = 0.0;
  bool pre_treatment = false;
};

/// SDiD of (Y_base, Y_t) for every period t (the base itself only when
/// include_base is set). Pre-treatment entries are placebos; post-treatment
/// entries estimate effect modification at each horizon.
std::vector<EventStudyPoint> event_study_contrasts(const MultiPeriodPanel& panel,
                                                   const SubgroupContrast& contrast,
                                                   long base_period, bool include_base = false);

}  // namespace sdid
