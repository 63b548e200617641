#pragma once

// Simulation lab: potential-outcome data-generating processes with
// closed-form oracle truth, and Monte Carlo drivers that measure how the
// SDiD estimator and the pre-trends test behave against that truth.
//
// Two-period DGP, for a unit in level g with unit effect u:
//
//   Y0     = alpha_g + u + e0
//   Y1(0)  = alpha_g + u + tau + delta_g + shock + e1
//   Y1(1)  = Y1(0) + beta_g
//   observed Y1 = Y1(1)            (every unit is treated at time 1)
//
// delta_g is the violation knob: subgroup parallel trends holds iff all
// delta_g are equal. `shock` is a treated-population-wide change coinciding
// with the intervention; it enters every untreated path equally.

#include <cstddef>
#include <cstdint>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sdid/estimators.hpp"
#include "sdid/inference.hpp"
#include "sdid/model.hpp"

namespace sdid::sim {

enum class NoiseDistribution { Gaussian, Uniform, StudentT };
std::string to_string(NoiseDistribution distribution);

/// Each draw is rescaled to mean 0 and the stated standard deviation
/// (StudentT therefore needs df > 2).
struct NoiseSpec {
  NoiseDistribution distribution = NoiseDistribution::Gaussian;
  double df = 5.0;
  double sd_pre = 1.0;   // periods before treatment
  double sd_post = 1.0;  // treatment period onward
  double sd_unit = 0.0;  // time-invariant unit effect
};

struct LevelSpec {
  std::string name;
  double probability = 0.0;
  double alpha = 0.0;  // baseline mean of Y0
  double delta = 0.0;  // level-specific trend deviation
  double beta = 0.0;   // treatment effect, Y1(1) - Y1(0)
};

/// Period-to-period noise structure for multi-period panels. Under
/// RandomWalk the per-interval changes are independent, so adjacent
/// interval contrasts are uncorrelated.
enum class NoiseProcess { Independent, RandomWalk };
std::string to_string(NoiseProcess process);

/// Multi-period extension: times 0 .. count-1, first treated period
/// treatment_time. The untreated path is
///   Y_t(0) = alpha_g + u + t (tau + delta_g) + [t >= treatment_time] shock + e_t
/// and Y_t(1) = Y_t(0) + beta_g from treatment_time on. With count = 2 and
/// treatment_time = 1 this is the two-period DGP.
struct PeriodSpec {
  std::size_t count = 2;
  long treatment_time = 1;
  NoiseProcess process = NoiseProcess::Independent;
};

struct DgpSpec {
  std::vector<LevelSpec> levels;
  double tau = 0.0;
  double shock = 0.0;
  NoiseSpec noise;
  std::size_t n = 1;
  std::uint64_t seed = 0;
  std::optional<PeriodSpec> periods;

  /// Throws UsageError describing the first violated invariant.
  void validate() const;
  /// Throws DataError listing the known levels.
  const LevelSpec& level(const std::string& name) const;
};

nlohmann::json to_json(const DgpSpec& spec);
/// Parses and validates a DGP document; unknown keys are rejected.
DgpSpec dgp_from_json(const nlohmann::json& doc);

struct LedgerEntry {
  std::string unit_id;
  std::string level;
  double y_pre = 0.0;
  double y_post_untreated = 0.0;  // Y1(0), never shown to estimators
  double y_post_treated = 0.0;    // Y1(1)
};

/// Output of one draw: the observed panel, plus the potential outcomes kept
/// apart for audit.
struct SimulatedSample {
  PanelDataset panel;
  std::vector<LedgerEntry> ledger;
};

struct MultiPeriodLedgerEntry {
  std::string unit_id;
  std::string level;
  std::vector<double> untreated;  // Y_t(0) for every t
};

struct SimulatedMultiPeriod {
  MultiPeriodPanel panel;
  std::vector<MultiPeriodLedgerEntry> ledger;
};

SimulatedSample generate(const DgpSpec& dgp);
SimulatedSample generate(const DgpSpec& dgp, std::uint64_t seed);
SimulatedMultiPeriod generate_multi_period(const DgpSpec& dgp);
SimulatedMultiPeriod generate_multi_period(const DgpSpec& dgp, std::uint64_t seed);

struct OracleTruth {
  double true_effect_modification = 0.0;  // beta_a - beta_b
  double true_trend_gap = 0.0;            // delta_a - delta_b
  /// E[Y1 - Y0 | g] = beta_g + tau + delta_g + shock, for every level.
  std::map<std::string, double> naive_expectation;
};

OracleTruth oracle(const DgpSpec& dgp, const SubgroupContrast& contrast);

struct MonteCarloOptions {
  EstimatorSpec estimator;  // its contrast is the one scored against the oracle
  std::size_t reps = 1000;
  std::uint64_t master_seed = 0;
  double level = 0.95;
  std::size_t bootstrap_replicates = 0;  // 0 disables the bootstrap
  ResampleScheme scheme = ResampleScheme::Unit;
  std::size_t threads = 0;
  double max_failure_rate = 0.05;
};

struct MonteCarloSummary {
  std::size_t reps = 0;
  std::size_t failures = 0;
  double oracle_effect = 0.0;
  double true_trend_gap = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double empirical_sd = 0.0;
  double mc_standard_error = 0.0;  // empirical_sd / sqrt(successful reps)
  std::optional<double> mean_analytic_se;
  std::optional<double> coverage_normal;
  std::optional<double> coverage_percentile;
  std::optional<double> mean_bootstrap_se;
  std::optional<double> rejection_rate;  // Wald test of zero effect modification
  std::size_t wald_tests = 0;
  std::map<std::string, double> naive_mean;  // averaged per-level mean of d
  std::vector<double> estimates;             // one per successful rep, rep order
};

/// Rep r draws its sample from stream derive_seed(master, 2r) and its
/// bootstrap from derive_seed(master, 2r + 1); the summary is therefore a
/// pure function of (dgp, options) for any thread count.
MonteCarloSummary monte_carlo(const DgpSpec& dgp, const MonteCarloOptions& options);

struct PretrendsMonteCarloOptions {
  SubgroupContrast contrast;
  std::size_t reps = 1000;
  std::uint64_t master_seed = 0;
  double alpha = 0.05;
  std::size_t threads = 0;
  double max_failure_rate = 0.05;
};

struct PretrendsMonteCarloSummary {
  std::size_t reps = 0;
  std::size_t failures = 0;
  std::size_t df = 0;
  double alpha = 0.05;
  double rejection_rate = 0.0;
  double mean_statistic = 0.0;
  double true_trend_gap = 0.0;  // per interval
};

PretrendsMonteCarloSummary monte_carlo_pretrends(const DgpSpec& dgp,
                                                 const PretrendsMonteCarloOptions& options);

}  // namespace sdid::sim
