#include "sdid/pretrends.hpp"

#include <cmath>
#include <sstream>

#include "sdid/distributions.hpp"
#include "sdid/error.hpp"
#include "sdid/estimators.hpp"
#include "sdid/inference.hpp"

namespace sdid {

namespace {

struct PeriodPairContrast {
  double estimate;
  double se;
  std::size_t n_a;
  std::size_t n_b;
};

PeriodPairContrast contrast_between(const MultiPeriodPanel& panel, const SubgroupContrast& contrast,
                                    long from, long to) {
  const auto stats = subgroup_stats(panel.two_period(from, to));
  const auto estimate = sdid_from_stats(stats, contrast);
  const LevelStats& a = find_level(stats, as_label(contrast.level_a));
  const LevelStats& b = find_level(stats, as_label(contrast.level_b));
  const double se = contrast.trivial() ? 0.0 : analytic_se(a, b);
  return {estimate.point, se, a.n, b.n};
}

void require_categorical(const MultiPeriodPanel& panel) {
  if (panel.covariate_kind() != CovariateKind::Categorical) {
    throw UsageError("pre-trends diagnostics require a categorical covariate");
  }
}

}  // namespace

std::vector<IntervalContrast> interval_trend_contrasts(const MultiPeriodPanel& panel,
                                                       const SubgroupContrast& contrast) {
  require_categorical(panel);
  const auto pre = panel.pre_times();
  if (pre.size() < 2) {
    throw DataError("pre-trends untestable with a single pre-period");
  }
  std::vector<IntervalContrast> out;
  out.reserve(pre.size() - 1);
  for (std::size_t k = 0; k + 1 < pre.size(); ++k) {
    const auto c = contrast_between(panel, contrast, pre[k], pre[k + 1]);
    out.push_back({pre[k], pre[k + 1], c.estimate, c.se, c.n_a, c.n_b});
  }
  return out;
}

JointTest pretrends_joint_test(std::span<const IntervalContrast> contrasts) {
  if (contrasts.empty()) throw UsageError("joint pre-trends test needs at least one interval");
  JointTest test;
  for (const auto& c : contrasts) {
    if (!(c.se > 0.0) || !std::isfinite(c.se)) {
      throw NumericalError("interval [" + std::to_string(c.from) + ", " + std::to_string(c.to) +
                           "] has a zero standard error; the joint test is degenerate");
    }
    const double z = c.estimate / c.se;
    test.statistic += z * z;
  }
  test.df = contrasts.size();
  test.p_value = dist::chi_squared_sf(test.statistic, static_cast<double>(test.df));
  return test;
}

PretrendsReport pretrends_report(const MultiPeriodPanel& panel, const SubgroupContrast& contrast,
                                 double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie strictly between 0 and 1");
  PretrendsReport report;
  report.contrast = contrast;
  report.alpha = alpha;
  report.per_interval = interval_trend_contrasts(panel, contrast);
  report.joint = pretrends_joint_test(report.per_interval);
  report.passed = report.joint.p_value >= alpha;

  std::ostringstream note;
  note << (report.passed ? "no evidence against" : "evidence against")
       << " subgroup parallel pre-trends at alpha = " << alpha << " (joint p = "
       << report.joint.p_value << ", df = " << report.joint.df
       << "). Non-rejection does not establish parallel trends in the post-period; the "
          "assumption is extremely strong and untestable. The chi-squared reference treats "
          "interval contrasts as independent, which is approximate.";
  report.decision_note = note.str();
  return report;
}

std::vector<EventStudyPoint> event_study_contrasts(const MultiPeriodPanel& panel,
                                                   const SubgroupContrast& contrast,
                                                   long base_period, bool include_base) {
  require_categorical(panel);
  panel.time_position(base_period);
  if (base_period >= panel.treatment_time()) {
    throw UsageError("event-study base period " + std::to_string(base_period) +
                     " is not before treatment time " + std::to_string(panel.treatment_time()));
  }
  std::vector<EventStudyPoint> out;
  for (long t : panel.times()) {
    if (t == base_period && !include_base) continue;
    EventStudyPoint point{t, base_period, 0.0, 0.0, t < panel.treatment_time()};
    if (t != base_period) {
      const auto c = contrast_between(panel, contrast, base_period, t);
      point.estimate = c.estimate;
      point.se = c.se;
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace sdid
