#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sdid {

/// A baseline covariate value: a categorical label or a real number.
using CovariateValue = std::variant<std::string, double>;

std::string to_string(const CovariateValue& value);
bool is_label(const CovariateValue& value);
/// Throws UsageError if the value is not of the requested alternative.
const std::string& as_label(const CovariateValue& value);
double as_real(const CovariateValue& value);

enum class CovariateKind { Categorical, Continuous };

/// What to do with a row whose covariate is missing or whose outcomes are
/// not finite.
enum class MissingPolicy { Strict, Drop };

std::string to_string(CovariateKind kind);
std::string to_string(MissingPolicy policy);

/// One observed unit O = (X, Y0, Y1).
struct UnitRecord {
  std::string unit_id;
  CovariateValue x;
  double y_pre = 0.0;
  double y_post = 0.0;
};

/// A row as it comes out of a reader, before any invariant is enforced.
/// Unparseable or empty outcome cells are expected to arrive as NaN.
struct RawRow {
  std::string unit_id;
  std::optional<std::string> covariate;
  double y_pre = 0.0;
  double y_post = 0.0;
};

struct RejectedRow {
  std::size_t row_index = 0;  // zero-based position in the raw input
  std::string unit_id;
  std::string reason;
};

struct ValidationReport {
  std::size_t rows_in = 0;
  std::size_t rows_kept = 0;
  std::vector<RejectedRow> dropped;

  bool clean() const { return dropped.empty(); }
};

class PanelDataset {
 public:
  PanelDataset() = default;
  PanelDataset(std::vector<UnitRecord> records, CovariateKind kind, std::string provenance);

  const std::vector<UnitRecord>& records() const { return records_; }
  CovariateKind covariate_kind() const { return kind_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Distinct categorical levels, sorted. Empty for continuous panels.
  std::vector<std::string> levels() const;

 private:
  std::vector<UnitRecord> records_;
  CovariateKind kind_ = CovariateKind::Categorical;
  std::string provenance_;
};

struct ValidatedPanel {
  PanelDataset panel;
  ValidationReport report;
};

/// Enforces the PanelDataset invariants on raw rows. Under MissingPolicy::Drop,
/// rows with a missing covariate, an unparseable continuous covariate, or a
/// non-finite outcome are excluded and listed in the report; under Strict they
/// raise DataError. Duplicate ids and an empty result are always errors.
ValidatedPanel validate_panel(const std::vector<RawRow>& rows, CovariateKind kind,
                              std::string provenance,
                              MissingPolicy policy = MissingPolicy::Strict);

struct UnitDelta {
  std::string unit_id;
  CovariateValue x;
  double d = 0.0;  // y_post - y_pre
};

std::vector<UnitDelta> unit_deltas(const PanelDataset& panel);

struct LevelStats {
  std::string level;
  std::size_t n = 0;
  double mean = 0.0;
  /// Sample variance of the deltas (n - 1 denominator); unset when n == 1.
  std::optional<double> variance;
};

/// Per-level moments of the unit deltas, one entry per distinct level in
/// sorted label order. Requires a categorical panel.
std::vector<LevelStats> subgroup_stats(const PanelDataset& panel);

/// Stats for one level, or DataError listing the available levels.
const LevelStats& find_level(const std::vector<LevelStats>& stats, const std::string& level);

/// Ordered pair (x, x') of covariate values being compared.
struct SubgroupContrast {
  CovariateValue level_a;
  CovariateValue level_b;

  bool trivial() const { return level_a == level_b; }
  SubgroupContrast reversed() const { return {level_b, level_a}; }
};

std::string to_string(const SubgroupContrast& contrast);

// ---------------------------------------------------------------------------
// Multi-period panels (balanced; used by the pre-trends diagnostics)
// ---------------------------------------------------------------------------

struct MultiPeriodUnit {
  std::string unit_id;
  CovariateValue x;
  std::vector<double> outcomes;  // aligned with MultiPeriodPanel::times()
};

struct LongRow {
  std::string unit_id;
  std::optional<std::string> covariate;
  long time = 0;
  double y = 0.0;
};

class MultiPeriodPanel {
 public:
  MultiPeriodPanel() = default;
  MultiPeriodPanel(std::vector<MultiPeriodUnit> units, std::vector<long> times,
                   long treatment_time, CovariateKind kind, std::string provenance);

  const std::vector<MultiPeriodUnit>& units() const { return units_; }
  const std::vector<long>& times() const { return times_; }
  long treatment_time() const { return treatment_time_; }
  CovariateKind covariate_kind() const { return kind_; }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return units_.size(); }

  /// Position of a time index in times(); throws DataError if absent.
  std::size_t time_position(long time) const;
  /// Times strictly before treatment_time.
  std::vector<long> pre_times() const;

  /// Two-period view built from the outcomes at `from` and `to`.
  PanelDataset two_period(long from, long to) const;

 private:
  std::vector<MultiPeriodUnit> units_;
  std::vector<long> times_;
  long treatment_time_ = 0;
  CovariateKind kind_ = CovariateKind::Categorical;
  std::string provenance_;
};

struct ValidatedMultiPeriod {
  MultiPeriodPanel panel;
  ValidationReport report;
};

/// Pivots long rows into a balanced multi-period panel. A unit missing any
/// listed time is a DataError naming the unit; so is a treatment time that
/// is not among the observed times or has no earlier time.
ValidatedMultiPeriod validate_multi_period(const std::vector<LongRow>& rows, long treatment_time,
                                           CovariateKind kind, std::string provenance,
                                           MissingPolicy policy = MissingPolicy::Strict);

}  // namespace sdid
