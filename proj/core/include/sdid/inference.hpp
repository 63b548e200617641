#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sdid/estimators.hpp"
#include "sdid/model.hpp"

namespace sdid {

/// sqrt(var_a / n_a + var_b / n_b): unpooled (Welch) standard error of a
/// difference of two independent subgroup means of d. Requires n >= 2 in both
/// groups, otherwise NumericalError.
double analytic_se(std::size_t n_a, double var_a, std::size_t n_b, double var_b);
double analytic_se(const LevelStats& a, const LevelStats& b);

/// point -/+ z(level) * se.
ConfidenceInterval confidence_interval(double point, double se, double level);

struct WaldTest {
  double z = 0.0;
  double p_two_sided = 1.0;
};

/// z = point / se, p = 2 (1 - Phi(|z|)). se must be > 0.
WaldTest wald_test(double point, double se);

/// Attaches the Welch SE and a normal-theory interval to a categorical
/// estimate. The estimate's contrast must name levels present in `stats`.
void attach_analytic_inference(EffectModEstimate& estimate, const std::vector<LevelStats>& stats,
                               double level);

/// What to recompute on each bootstrap resample.
struct EstimatorSpec {
  EstimateMethod method = EstimateMethod::SubgroupMeans;
  SubgroupContrast contrast;
  BasisSpec basis = BasisSpec::saturated();
  ExtrapolationPolicy extrapolation = ExtrapolationPolicy::Strict;

  static EstimatorSpec subgroup_means(SubgroupContrast contrast) {
    return {EstimateMethod::SubgroupMeans, std::move(contrast), BasisSpec::saturated(),
            ExtrapolationPolicy::Strict};
  }
  static EstimatorSpec regression(BasisSpec basis, SubgroupContrast contrast,
                                  ExtrapolationPolicy policy = ExtrapolationPolicy::Strict) {
    return {EstimateMethod::DeltaRegression, std::move(contrast), std::move(basis), policy};
  }
};

/// Runs the estimator described by `spec` on the full panel.
EffectModEstimate run_estimator(const PanelDataset& panel, const EstimatorSpec& spec);

enum class ResampleScheme { Unit, StratifiedByLevel };
std::string to_string(ResampleScheme scheme);

struct BootstrapOptions {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  double level = 0.95;
  ResampleScheme scheme = ResampleScheme::Unit;
  std::size_t threads = 0;  // 0: resolve_threads()
  double max_failure_rate = 0.10;
};

struct BootstrapResult {
  std::vector<double> replicates;  // successful replicates, in replicate order
  std::size_t requested = 0;
  std::size_t failed = 0;
  ConfidenceInterval ci_percentile;
  double se_boot = 0.0;
  std::uint64_t seed = 0;
  ResampleScheme scheme = ResampleScheme::Unit;
};

/// Nonparametric bootstrap of the SDiD estimate. Replicate r resamples whole
/// units (x, y_pre, y_post) with replacement using a stream derived from
/// (seed, r), so the result depends only on (panel order, spec, options) and
/// not on the thread count. A replicate whose resample lacks a contrast level
/// (or whose fit fails) is counted as failed; more than max_failure_rate
/// failures is a NumericalError suggesting the stratified scheme.
BootstrapResult bootstrap_sdid(const PanelDataset& panel, const EstimatorSpec& spec,
                               const BootstrapOptions& options);

/// Equal-tailed percentile interval from order statistics of `values`
/// (ranks ceil(m * alpha / 2) and ceil(m * (1 - alpha / 2)), 1-based).
ConfidenceInterval percentile_interval(std::vector<double> values, double level);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(const std::vector<double>& values);

}  // namespace sdid
