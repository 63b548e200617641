#include "sdid/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "sdid/distributions.hpp"
#include "sdid/error.hpp"
#include "sdid/parallel.hpp"
#include "sdid/random.hpp"

namespace sdid {

double analytic_se(std::size_t n_a, double var_a, std::size_t n_b, double var_b) {
  if (n_a < 2 || n_b < 2) {
    throw NumericalError("analytic standard error needs at least two units per level (got n_a = " +
                         std::to_string(n_a) + ", n_b = " + std::to_string(n_b) + ")");
  }
  if (var_a < 0.0 || var_b < 0.0) throw UsageError("variances must be non-negative");
  return std::sqrt(var_a / static_cast<double>(n_a) + var_b / static_cast<double>(n_b));
}

double analytic_se(const LevelStats& a, const LevelStats& b) {
  return analytic_se(a.n, a.variance.value_or(0.0), b.n, b.variance.value_or(0.0));
}

ConfidenceInterval confidence_interval(double point, double se, double level) {
  if (!(se >= 0.0)) throw UsageError("standard error must be non-negative");
  const double half_width = dist::normal_critical(level) * se;
  return {point - half_width, point + half_width, level};
}

WaldTest wald_test(double point, double se) {
  if (!(se > 0.0)) {
    throw NumericalError("Wald test is degenerate with a zero standard error");
  }
  const double z = point / se;
  return {z, std::min(1.0, 2.0 * dist::normal_sf(std::fabs(z)))};
}

void attach_analytic_inference(EffectModEstimate& estimate, const std::vector<LevelStats>& stats,
                               double level) {
  const LevelStats& a = find_level(stats, as_label(estimate.contrast.level_a));
  const LevelStats& b = find_level(stats, as_label(estimate.contrast.level_b));
  estimate.se = estimate.contrast.trivial() ? 0.0 : analytic_se(a, b);
  estimate.ci = confidence_interval(estimate.point, *estimate.se, level);
}

EffectModEstimate run_estimator(const PanelDataset& panel, const EstimatorSpec& spec) {
  if (spec.method == EstimateMethod::SubgroupMeans) {
    return sdid_categorical(panel, spec.contrast);
  }
  return sdid_continuous(fit_delta_regression(panel, spec.basis), spec.contrast,
                         spec.extrapolation);
}

std::string to_string(ResampleScheme scheme) {
  return scheme == ResampleScheme::Unit ? "unit" : "stratified";
}

double sample_sd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ConfidenceInterval percentile_interval(std::vector<double> values, double level) {
  if (values.empty()) throw NumericalError("percentile interval of an empty replicate set");
  if (!(level > 0.0 && level < 1.0)) {
    throw UsageError("confidence level must lie strictly between 0 and 1");
  }
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  const double alpha = 1.0 - level;
  auto rank = [&](double p) {
    // Guard against m * p landing a hair above an integer.
    const double r = std::ceil(m * p - 1e-9);
    return static_cast<std::size_t>(std::clamp(r, 1.0, m)) - 1;
  };
  return {values[rank(0.5 * alpha)], values[rank(1.0 - 0.5 * alpha)], level};
}

namespace {

// Level membership per unit; strata are the categorical levels, or a single
// stratum for continuous covariates.
struct Strata {
  std::vector<std::size_t> level_of_unit;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::string> names;
};

Strata build_strata(const PanelDataset& panel) {
  Strata strata;
  if (panel.covariate_kind() != CovariateKind::Categorical) {
    strata.level_of_unit.assign(panel.size(), 0);
    strata.members.emplace_back(panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i) strata.members[0][i] = i;
    return strata;
  }
  strata.names = panel.levels();
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < strata.names.size(); ++k) index[strata.names[k]] = k;
  strata.members.resize(strata.names.size());
  strata.level_of_unit.reserve(panel.size());
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const std::size_t k = index.at(as_label(panel.records()[i].x));
    strata.level_of_unit.push_back(k);
    strata.members[k].push_back(i);
  }
  return strata;
}

// Draws the resampled unit indices for one replicate.
void draw_indices(const Strata& strata, std::size_t n, ResampleScheme scheme, RandomStream& rng,
                  std::vector<std::size_t>& out) {
  out.clear();
  if (scheme == ResampleScheme::Unit) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<std::size_t>(rng.below(n)));
    return;
  }
  for (const auto& group : strata.members) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      out.push_back(group[static_cast<std::size_t>(rng.below(group.size()))]);
    }
  }
}

}  // namespace

BootstrapResult bootstrap_sdid(const PanelDataset& panel, const EstimatorSpec& spec,
                               const BootstrapOptions& options) {
  if (options.replicates < 1) throw UsageError("bootstrap needs at least one replicate");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw UsageError("confidence level must lie strictly between 0 and 1");
  }
  const bool categorical_fast = spec.method == EstimateMethod::SubgroupMeans;
  if (options.scheme == ResampleScheme::StratifiedByLevel &&
      panel.covariate_kind() != CovariateKind::Categorical) {
    throw UsageError("stratified bootstrap requires a categorical covariate");
  }

  // Validates the contrast against the full sample before resampling.
  run_estimator(panel, spec);

  const Strata strata = build_strata(panel);
  const std::size_t n = panel.size();
  std::vector<double> deltas;
  deltas.reserve(n);
  for (const auto& r : panel.records()) deltas.push_back(r.y_post - r.y_pre);

  std::size_t level_a = 0;
  std::size_t level_b = 0;
  if (categorical_fast) {
    auto locate = [&](const CovariateValue& v) {
      const auto& label = as_label(v);
      return static_cast<std::size_t>(
          std::find(strata.names.begin(), strata.names.end(), label) - strata.names.begin());
    };
    level_a = locate(spec.contrast.level_a);
    level_b = locate(spec.contrast.level_b);
  }

  EstimatorSpec replicate_spec = spec;
  // Support was checked on the full sample; a resample's narrower range
  // should not turn into a failure.
  replicate_spec.extrapolation = ExtrapolationPolicy::Warn;

  const std::size_t b_count = options.replicates;
  std::vector<std::optional<double>> slots(b_count);

  parallel_for(b_count, resolve_threads(options.threads), [&](std::size_t r) {
    RandomStream rng(options.seed, r);
    std::vector<std::size_t> picks;
    picks.reserve(n);
    draw_indices(strata, n, options.scheme, rng, picks);

    if (categorical_fast) {
      double sum_a = 0.0, sum_b = 0.0;
      std::size_t n_a = 0, n_b = 0;
      for (std::size_t i : picks) {
        const std::size_t k = strata.level_of_unit[i];
        if (k == level_a) {
          sum_a += deltas[i];
          ++n_a;
        }
        if (k == level_b) {
          sum_b += deltas[i];
          ++n_b;
        }
      }
      if (n_a == 0 || n_b == 0) return;
      slots[r] = level_a == level_b ? 0.0
                                    : sum_a / static_cast<double>(n_a) -
                                          sum_b / static_cast<double>(n_b);
      return;
    }

    std::vector<UnitRecord> records;
    records.reserve(n);
    for (std::size_t i : picks) records.push_back(panel.records()[i]);
    try {
      const PanelDataset resample(std::move(records), panel.covariate_kind(), panel.provenance());
      const double value = run_estimator(resample, replicate_spec).point;
      if (std::isfinite(value)) slots[r] = value;
    } catch (const Error&) {
      // counted as a failed replicate below
    }
  });

  BootstrapResult result;
  result.requested = b_count;
  result.seed = options.seed;
  result.scheme = options.scheme;
  result.replicates.reserve(b_count);
  for (const auto& slot : slots) {
    if (slot) {
      result.replicates.push_back(*slot);
    } else {
      ++result.failed;
    }
  }
  const double failure_rate = static_cast<double>(result.failed) / static_cast<double>(b_count);
  if (result.replicates.empty() || failure_rate > options.max_failure_rate) {
    throw NumericalError(std::to_string(result.failed) + " of " + std::to_string(b_count) +
                         " bootstrap replicates failed (a resample lacked a contrast level or "
                         "the fit broke down); use the stratified resampling scheme");
  }
  result.se_boot = sample_sd(result.replicates);
  result.ci_percentile = percentile_interval(result.replicates, options.level);
  return result;
}

}  // namespace sdid
