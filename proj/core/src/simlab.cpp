#include "sdid/simlab.hpp"

#include <cmath>
#include <numeric>

#include "sdid/error.hpp"
#include "sdid/parallel.hpp"
#include "sdid/pretrends.hpp"
#include "sdid/random.hpp"

namespace sdid::sim {

std::string to_string(NoiseDistribution distribution) {
  switch (distribution) {
    case NoiseDistribution::Gaussian:
      return "gaussian";
    case NoiseDistribution::Uniform:
      return "uniform";
    case NoiseDistribution::StudentT:
      return "student_t";
  }
  return "unknown";
}

std::string to_string(NoiseProcess process) {
  return process == NoiseProcess::Independent ? "independent" : "random_walk";
}

void DgpSpec::validate() const {
  if (levels.empty()) throw UsageError("DGP needs at least one covariate level");
  double total = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto& level = levels[i];
    if (level.name.empty()) throw UsageError("DGP level names must be non-empty");
    for (std::size_t j = 0; j < i; ++j) {
      if (levels[j].name == level.name) throw UsageError("duplicate DGP level '" + level.name + "'");
    }
    if (!(level.probability > 0.0)) {
      throw UsageError("level '" + level.name + "' must have a positive sampling probability");
    }
    if (!std::isfinite(level.alpha) || !std::isfinite(level.delta) || !std::isfinite(level.beta)) {
      throw UsageError("level '" + level.name + "' has a non-finite parameter");
    }
    total += level.probability;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw UsageError("level sampling probabilities must sum to 1");
  }
  if (!std::isfinite(tau) || !std::isfinite(shock)) throw UsageError("tau and shock must be finite");
  for (double sd : {noise.sd_pre, noise.sd_post, noise.sd_unit}) {
    if (!(sd >= 0.0) || !std::isfinite(sd)) throw UsageError("noise standard deviations must be >= 0");
  }
  if (noise.distribution == NoiseDistribution::StudentT && !(noise.df > 2.0)) {
    throw UsageError("student_t noise needs df > 2 for a finite standard deviation");
  }
  if (n < 1) throw UsageError("DGP sample size must be at least 1");
  if (periods) {
    if (periods->count < 2) throw UsageError("multi-period DGP needs at least two periods");
    if (periods->treatment_time < 1 ||
        periods->treatment_time >= static_cast<long>(periods->count)) {
      throw UsageError("treatment_time must lie in [1, count - 1]");
    }
  }
}

const LevelSpec& DgpSpec::level(const std::string& name) const {
  for (const auto& entry : levels) {
    if (entry.name == name) return entry;
  }
  std::string known;
  for (const auto& entry : levels) known += (known.empty() ? "" : ", ") + entry.name;
  throw DataError("unknown DGP level '" + name + "'; available levels: " + known);
}

namespace {

double draw_noise(const NoiseSpec& noise, double sd, RandomStream& rng) {
  switch (noise.distribution) {
    case NoiseDistribution::Gaussian:
      return sd * rng.normal();
    case NoiseDistribution::Uniform:
      return sd * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case NoiseDistribution::StudentT:
      return sd * std::sqrt((noise.df - 2.0) / noise.df) * rng.student_t(noise.df);
  }
  return 0.0;
}

std::size_t draw_level(const std::vector<LevelSpec>& levels, RandomStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    cumulative += levels[k].probability;
    if (u < cumulative) return k;
  }
  return levels.size() - 1;
}

std::string unit_name(std::size_t i) { return "u" + std::to_string(i + 1); }

}  // namespace

SimulatedSample generate(const DgpSpec& dgp) { return generate(dgp, dgp.seed); }

SimulatedSample generate(const DgpSpec& dgp, std::uint64_t seed) {
  dgp.validate();
  RandomStream rng(seed);
  std::vector<UnitRecord> records;
  std::vector<LedgerEntry> ledger;
  records.reserve(dgp.n);
  ledger.reserve(dgp.n);

  for (std::size_t i = 0; i < dgp.n; ++i) {
    const LevelSpec& g = dgp.levels[draw_level(dgp.levels, rng)];
    // Fixed draw order keeps streams aligned whatever the noise settings.
    const double unit = draw_noise(dgp.noise, dgp.noise.sd_unit, rng);
    const double e0 = draw_noise(dgp.noise, dgp.noise.sd_pre, rng);
    const double e1 = draw_noise(dgp.noise, dgp.noise.sd_post, rng);

    const double y0 = g.alpha + unit + e0;
    const double y1_untreated = g.alpha + unit + dgp.tau + g.delta + dgp.shock + e1;
    const double y1_treated = y1_untreated + g.beta;

    std::string id = unit_name(i);
    ledger.push_back({id, g.name, y0, y1_untreated, y1_treated});
    records.push_back({std::move(id), g.name, y0, y1_treated});
  }
  return {PanelDataset(std::move(records), CovariateKind::Categorical, "simulated"),
          std::move(ledger)};
}

SimulatedMultiPeriod generate_multi_period(const DgpSpec& dgp) {
  return generate_multi_period(dgp, dgp.seed);
}

SimulatedMultiPeriod generate_multi_period(const DgpSpec& dgp, std::uint64_t seed) {
  dgp.validate();
  const PeriodSpec periods = dgp.periods.value_or(PeriodSpec{});
  RandomStream rng(seed);

  std::vector<long> times(periods.count);
  std::iota(times.begin(), times.end(), 0L);
  std::vector<MultiPeriodUnit> units;
  std::vector<MultiPeriodLedgerEntry> ledger;
  units.reserve(dgp.n);
  ledger.reserve(dgp.n);

  for (std::size_t i = 0; i < dgp.n; ++i) {
    const LevelSpec& g = dgp.levels[draw_level(dgp.levels, rng)];
    const double unit = draw_noise(dgp.noise, dgp.noise.sd_unit, rng);
    std::vector<double> observed(periods.count);
    std::vector<double> untreated(periods.count);
    double walk = 0.0;
    for (std::size_t k = 0; k < periods.count; ++k) {
      const long t = times[k];
      const bool treated = t >= periods.treatment_time;
      const double sd = treated ? dgp.noise.sd_post : dgp.noise.sd_pre;
      const double innovation = draw_noise(dgp.noise, sd, rng);
      const double e = periods.process == NoiseProcess::RandomWalk ? (walk += innovation)
                                                                   : innovation;
      untreated[k] = g.alpha + unit + static_cast<double>(t) * (dgp.tau + g.delta) +
                     (treated ? dgp.shock : 0.0) + e;
      observed[k] = untreated[k] + (treated ? g.beta : 0.0);
    }
    std::string id = unit_name(i);
    ledger.push_back({id, g.name, std::move(untreated)});
    units.push_back({std::move(id), g.name, std::move(observed)});
  }
  return {MultiPeriodPanel(std::move(units), std::move(times), periods.treatment_time,
                           CovariateKind::Categorical, "simulated"),
          std::move(ledger)};
}

OracleTruth oracle(const DgpSpec& dgp, const SubgroupContrast& contrast) {
  const LevelSpec& a = dgp.level(as_label(contrast.level_a));
  const LevelSpec& b = dgp.level(as_label(contrast.level_b));
  OracleTruth truth;
  truth.true_effect_modification = a.beta - b.beta;
  truth.true_trend_gap = a.delta - b.delta;
  for (const auto& level : dgp.levels) {
    truth.naive_expectation[level.name] = level.beta + dgp.tau + level.delta + dgp.shock;
  }
  return truth;
}

namespace {

struct RepOutcome {
  bool ok = false;
  double estimate = 0.0;
  std::optional<double> analytic_se;
  std::optional<ConfidenceInterval> normal_ci;
  std::optional<ConfidenceInterval> percentile_ci;
  std::optional<double> bootstrap_se;
  std::optional<bool> rejected;
  std::vector<std::pair<std::string, double>> level_means;
};

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

bool covers(const ConfidenceInterval& ci, double truth) {
  return ci.lower <= truth && truth <= ci.upper;
}

}  // namespace

MonteCarloSummary monte_carlo(const DgpSpec& dgp, const MonteCarloOptions& options) {
  dgp.validate();
  if (options.reps < 1) throw UsageError("Monte Carlo needs at least one rep");
  const SubgroupContrast& contrast = options.estimator.contrast;
  const OracleTruth truth = oracle(dgp, contrast);
  const double alpha = 1.0 - options.level;
  const bool means = options.estimator.method == EstimateMethod::SubgroupMeans;

  std::vector<RepOutcome> outcomes(options.reps);
  parallel_for(options.reps, resolve_threads(options.threads), [&](std::size_t r) {
    RepOutcome& out = outcomes[r];
    try {
      const auto sample = generate(dgp, derive_seed(options.master_seed, 2 * r));
      const auto stats = subgroup_stats(sample.panel);
      for (const auto& s : stats) out.level_means.emplace_back(s.level, s.mean);

      auto estimate = means ? sdid_from_stats(stats, contrast)
                            : run_estimator(sample.panel, options.estimator);
      out.estimate = estimate.point;
      std::optional<double> test_se;
      if (means) {
        attach_analytic_inference(estimate, stats, options.level);
        out.analytic_se = estimate.se;
        out.normal_ci = estimate.ci;
        test_se = estimate.se;
      }
      if (options.bootstrap_replicates > 0) {
        BootstrapOptions boot;
        boot.replicates = options.bootstrap_replicates;
        boot.seed = derive_seed(options.master_seed, 2 * r + 1);
        boot.level = options.level;
        boot.scheme = options.scheme;
        boot.threads = 1;
        const auto result = bootstrap_sdid(sample.panel, options.estimator, boot);
        out.percentile_ci = result.ci_percentile;
        out.bootstrap_se = result.se_boot;
        if (!test_se) test_se = result.se_boot;
      }
      if (test_se && *test_se > 0.0) {
        out.rejected = wald_test(out.estimate, *test_se).p_two_sided < alpha;
      }
      out.ok = true;
    } catch (const Error&) {
      out.ok = false;
    }
  });

  MonteCarloSummary summary;
  summary.reps = options.reps;
  summary.oracle_effect = truth.true_effect_modification;
  summary.true_trend_gap = truth.true_trend_gap;

  std::size_t normal_n = 0, normal_hit = 0, pct_n = 0, pct_hit = 0, rejections = 0;
  std::vector<double> analytic_ses, boot_ses;
  std::map<std::string, std::pair<double, std::size_t>> level_acc;
  for (const auto& out : outcomes) {
    if (!out.ok) {
      ++summary.failures;
      continue;
    }
    summary.estimates.push_back(out.estimate);
    if (out.analytic_se) analytic_ses.push_back(*out.analytic_se);
    if (out.bootstrap_se) boot_ses.push_back(*out.bootstrap_se);
    if (out.normal_ci) {
      ++normal_n;
      normal_hit += covers(*out.normal_ci, truth.true_effect_modification);
    }
    if (out.percentile_ci) {
      ++pct_n;
      pct_hit += covers(*out.percentile_ci, truth.true_effect_modification);
    }
    if (out.rejected) {
      ++summary.wald_tests;
      rejections += *out.rejected;
    }
    for (const auto& [level, m] : out.level_means) {
      auto& acc = level_acc[level];
      acc.first += m;
      ++acc.second;
    }
  }

  const double failure_rate =
      static_cast<double>(summary.failures) / static_cast<double>(options.reps);
  if (summary.estimates.empty() || failure_rate > options.max_failure_rate) {
    throw NumericalError(std::to_string(summary.failures) + " of " + std::to_string(options.reps) +
                         " Monte Carlo reps failed; increase n or use stratified resampling");
  }

  summary.mean_estimate = mean_of(summary.estimates);
  summary.bias = summary.mean_estimate - truth.true_effect_modification;
  summary.empirical_sd = sample_sd(summary.estimates);
  summary.mc_standard_error =
      summary.empirical_sd / std::sqrt(static_cast<double>(summary.estimates.size()));
  if (!analytic_ses.empty()) summary.mean_analytic_se = mean_of(analytic_ses);
  if (!boot_ses.empty()) summary.mean_bootstrap_se = mean_of(boot_ses);
  if (normal_n) summary.coverage_normal = static_cast<double>(normal_hit) / normal_n;
  if (pct_n) summary.coverage_percentile = static_cast<double>(pct_hit) / pct_n;
  if (summary.wald_tests) {
    summary.rejection_rate = static_cast<double>(rejections) / summary.wald_tests;
  }
  for (const auto& [level, acc] : level_acc) {
    summary.naive_mean[level] = acc.first / static_cast<double>(acc.second);
  }
  return summary;
}

PretrendsMonteCarloSummary monte_carlo_pretrends(const DgpSpec& dgp,
                                                 const PretrendsMonteCarloOptions& options) {
  dgp.validate();
  if (!dgp.periods) throw UsageError("pre-trends Monte Carlo needs a multi-period DGP");
  if (options.reps < 1) throw UsageError("Monte Carlo needs at least one rep");
  const OracleTruth truth = oracle(dgp, options.contrast);

  struct Outcome {
    bool ok = false;
    bool rejected = false;
    double statistic = 0.0;
    std::size_t df = 0;
  };
  std::vector<Outcome> outcomes(options.reps);
  parallel_for(options.reps, resolve_threads(options.threads), [&](std::size_t r) {
    try {
      const auto sample = generate_multi_period(dgp, derive_seed(options.master_seed, 2 * r));
      const auto report = pretrends_report(sample.panel, options.contrast, options.alpha);
      outcomes[r] = {true, !report.passed, report.joint.statistic, report.joint.df};
    } catch (const Error&) {
      outcomes[r].ok = false;
    }
  });

  PretrendsMonteCarloSummary summary;
  summary.reps = options.reps;
  summary.alpha = options.alpha;
  summary.true_trend_gap = truth.true_trend_gap;
  std::size_t ok = 0, rejected = 0;
  double stat_sum = 0.0;
  for (const auto& out : outcomes) {
    if (!out.ok) {
      ++summary.failures;
      continue;
    }
    ++ok;
    rejected += out.rejected;
    stat_sum += out.statistic;
    summary.df = out.df;
  }
  const double failure_rate =
      static_cast<double>(summary.failures) / static_cast<double>(options.reps);
  if (ok == 0 || failure_rate > options.max_failure_rate) {
    throw NumericalError(std::to_string(summary.failures) + " of " + std::to_string(options.reps) +
                         " pre-trends Monte Carlo reps failed");
  }
  summary.rejection_rate = static_cast<double>(rejected) / static_cast<double>(ok);
  summary.mean_statistic = stat_sum / static_cast<double>(ok);
  return summary;
}

}  // namespace sdid::sim
