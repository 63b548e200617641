#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sdid/model.hpp"

namespace sdid {

enum class EstimateMethod { SubgroupMeans, DeltaRegression };
std::string to_string(EstimateMethod method);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
};

/// Estimate of E[Y1(1)-Y1(0) | x] - E[Y1(1)-Y1(0) | x'] obtained from the
/// subgroup difference in mean pre-post changes.
struct EffectModEstimate {
  SubgroupContrast contrast;
  double point = 0.0;
  std::optional<double> se;
  std::optional<ConfidenceInterval> ci;
  std::optional<std::size_t> n_a;
  std::optional<std::size_t> n_b;
  EstimateMethod method = EstimateMethod::SubgroupMeans;
  bool extrapolated = false;
  /// Identifying assumptions this particular number relies on.
  std::vector<std::string> assumption_notes;
};

/// Point estimate for a categorical panel: mean(d | a) - mean(d | b).
/// Unknown levels raise DataError naming the level and the available ones.
EffectModEstimate sdid_categorical(const PanelDataset& panel, const SubgroupContrast& contrast);

/// Same computation from precomputed subgroup moments.
EffectModEstimate sdid_from_stats(const std::vector<LevelStats>& stats,
                                  const SubgroupContrast& contrast);

/// One estimate (level, reference) per non-reference level, in sorted level
/// order. Each row carries its own pairwise parallel-trends note.
std::vector<EffectModEstimate> sdid_all_pairs(const PanelDataset& panel,
                                              const std::string& reference);

// ---------------------------------------------------------------------------
// Regression of d on a basis expansion of x
// ---------------------------------------------------------------------------

struct BasisSpec {
  enum class Kind { SaturatedIndicators, Polynomial, LinearSpline };

  Kind kind = Kind::Polynomial;
  int degree = 1;
  /// Knots in covariate units. Empty means `default_knot_count` quantiles.
  std::vector<double> knots;
  std::size_t default_knot_count = 3;

  static BasisSpec saturated() { return {Kind::SaturatedIndicators, 0, {}, 0}; }
  static BasisSpec polynomial(int degree) { return {Kind::Polynomial, degree, {}, 0}; }
  static BasisSpec spline(std::vector<double> knots = {}, std::size_t default_count = 3) {
    return {Kind::LinearSpline, 1, std::move(knots), default_count};
  }

  /// "saturated", "poly:D", "spline:k1,k2" or "spline".
  std::string describe() const;
  /// Inverse of describe(); throws UsageError on malformed text.
  static BasisSpec parse(const std::string& text);
};

enum class ExtrapolationPolicy { Strict, Warn };
std::string to_string(ExtrapolationPolicy policy);

struct FitDiagnostics {
  std::size_t n = 0;
  std::size_t rank = 0;
  double residual_variance = 0.0;  // RSS / (n - p)
  double condition_estimate = 0.0;  // max|R_ii| / min|R_ii| of the pivoted QR
};

/// Fitted conditional-mean model m(x) = E[d | x].
///
/// Polynomial and spline bases are evaluated on u = (x - center) / half_range,
/// which maps the observed covariate range onto [-1, 1]; coefficients() are in
/// that transformed basis. polynomial_coefficients() maps a polynomial fit back
/// to ordinary powers of x.
class DeltaModel {
 public:
  const BasisSpec& basis() const { return basis_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  const FitDiagnostics& diagnostics() const { return diagnostics_; }
  std::size_t dimension() const { return coefficients_.size(); }

  double center() const { return center_; }
  double half_range() const { return half_range_; }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  /// Resolved knots in covariate units (spline basis only).
  const std::vector<double>& knots() const { return knots_; }
  /// Indicator order (saturated basis only).
  const std::vector<std::string>& levels() const { return levels_; }

  bool in_support(const CovariateValue& x) const;
  double predict(const CovariateValue& x) const;
  std::vector<double> polynomial_coefficients() const;

 private:
  friend DeltaModel fit_delta_regression(const PanelDataset&, const BasisSpec&);

  std::vector<double> basis_row(const CovariateValue& x) const;

  BasisSpec basis_;
  std::vector<double> coefficients_;
  FitDiagnostics diagnostics_;
  double center_ = 0.0;
  double half_range_ = 1.0;
  double x_min_ = 0.0;
  double x_max_ = 0.0;
  std::vector<double> knots_;
  std::vector<std::string> levels_;
};

/// Least-squares fit of d = y_post - y_pre on the basis expansion of x, solved
/// with a column-pivoted Householder QR. Errors: n <= basis dimension, a
/// rank-deficient design (NumericalError carrying the condition estimate), or
/// a basis incompatible with the covariate kind.
DeltaModel fit_delta_regression(const PanelDataset& panel, const BasisSpec& basis);

/// m(a) - m(b) from a fitted model. Values outside the observed covariate
/// range raise DataError under Strict and are flagged under Warn.
EffectModEstimate sdid_continuous(const DeltaModel& model, const SubgroupContrast& contrast,
                                  ExtrapolationPolicy policy = ExtrapolationPolicy::Strict);

/// Linear-interpolation (type 7) sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p);

}  // namespace sdid
