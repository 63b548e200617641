#include "sdid/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sdid/error.hpp"

namespace sdid {

namespace {

std::string format_real(double value) {
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

std::optional<double> parse_real(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  if (first == last) return std::nullopt;
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string join_levels(const std::vector<std::string>& levels) {
  std::string out;
  for (const auto& level : levels) {
    if (!out.empty()) out += ", ";
    out += level;
  }
  return out;
}

// Resolves a raw covariate cell; returns an error reason when the cell is
// unusable under the given kind.
std::variant<CovariateValue, std::string> resolve_covariate(
    const std::optional<std::string>& cell, CovariateKind kind) {
  if (!cell || cell->empty()) return std::string("missing covariate");
  if (kind == CovariateKind::Categorical) return CovariateValue{*cell};
  if (auto value = parse_real(*cell)) return CovariateValue{*value};
  return std::string("covariate '" + *cell + "' is not a finite real");
}

}  // namespace

std::string to_string(const CovariateValue& value) {
  if (const auto* label = std::get_if<std::string>(&value)) return *label;
  return format_real(std::get<double>(value));
}

bool is_label(const CovariateValue& value) { return std::holds_alternative<std::string>(value); }

const std::string& as_label(const CovariateValue& value) {
  if (const auto* label = std::get_if<std::string>(&value)) return *label;
  throw UsageError("expected a categorical level, got numeric value " + to_string(value));
}

double as_real(const CovariateValue& value) {
  if (const auto* real = std::get_if<double>(&value)) return *real;
  throw UsageError("expected a numeric covariate value, got label '" + std::get<std::string>(value) +
                   "'");
}

std::string to_string(CovariateKind kind) {
  return kind == CovariateKind::Categorical ? "categorical" : "continuous";
}

std::string to_string(MissingPolicy policy) {
  return policy == MissingPolicy::Strict ? "strict" : "drop";
}

std::string to_string(const SubgroupContrast& contrast) {
  return "(" + to_string(contrast.level_a) + ", " + to_string(contrast.level_b) + ")";
}

PanelDataset::PanelDataset(std::vector<UnitRecord> records, CovariateKind kind,
                           std::string provenance)
    : records_(std::move(records)), kind_(kind), provenance_(std::move(provenance)) {}

std::vector<std::string> PanelDataset::levels() const {
  if (kind_ != CovariateKind::Categorical) return {};
  std::set<std::string> seen;
  for (const auto& record : records_) seen.insert(as_label(record.x));
  return {seen.begin(), seen.end()};
}

ValidatedPanel validate_panel(const std::vector<RawRow>& rows, CovariateKind kind,
                              std::string provenance, MissingPolicy policy) {
  ValidationReport report;
  report.rows_in = rows.size();
  std::vector<UnitRecord> kept;
  kept.reserve(rows.size());
  std::unordered_set<std::string> ids;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RawRow& row = rows[i];
    if (row.unit_id.empty()) {
      throw DataError("row " + std::to_string(i + 1) + ": empty unit_id");
    }
    if (!ids.insert(row.unit_id).second) {
      throw DataError("duplicate unit_id '" + row.unit_id + "'");
    }

    std::string reason;
    auto covariate = resolve_covariate(row.covariate, kind);
    if (auto* why = std::get_if<std::string>(&covariate)) {
      reason = *why;
    } else if (!std::isfinite(row.y_pre)) {
      reason = "non-finite y_pre";
    } else if (!std::isfinite(row.y_post)) {
      reason = "non-finite y_post";
    }

    if (!reason.empty()) {
      if (policy == MissingPolicy::Strict) {
        throw DataError("unit '" + row.unit_id + "' (row " + std::to_string(i + 1) + "): " + reason);
      }
      report.dropped.push_back({i, row.unit_id, reason});
      continue;
    }
    kept.push_back({row.unit_id, std::get<CovariateValue>(std::move(covariate)), row.y_pre,
                    row.y_post});
  }

  if (kept.empty()) throw DataError("panel is empty after validation");
  report.rows_kept = kept.size();
  return {PanelDataset(std::move(kept), kind, std::move(provenance)), std::move(report)};
}

std::vector<UnitDelta> unit_deltas(const PanelDataset& panel) {
  std::vector<UnitDelta> out;
  out.reserve(panel.size());
  for (const auto& record : panel.records()) {
    out.push_back({record.unit_id, record.x, record.y_post - record.y_pre});
  }
  return out;
}

std::vector<LevelStats> subgroup_stats(const PanelDataset& panel) {
  if (panel.covariate_kind() != CovariateKind::Categorical) {
    throw UsageError("subgroup statistics require a categorical covariate");
  }
  std::map<std::string, std::vector<double>> groups;
  for (const auto& record : panel.records()) {
    groups[as_label(record.x)].push_back(record.y_post - record.y_pre);
  }

  std::vector<LevelStats> out;
  out.reserve(groups.size());
  for (const auto& [level, deltas] : groups) {
    LevelStats stats;
    stats.level = level;
    stats.n = deltas.size();
    double sum = 0.0;
    for (double d : deltas) sum += d;
    stats.mean = sum / static_cast<double>(stats.n);
    if (stats.n >= 2) {
      double ss = 0.0;
      for (double d : deltas) ss += (d - stats.mean) * (d - stats.mean);
      stats.variance = ss / static_cast<double>(stats.n - 1);
    }
    out.push_back(std::move(stats));
  }
  return out;
}

const LevelStats& find_level(const std::vector<LevelStats>& stats, const std::string& level) {
  for (const auto& entry : stats) {
    if (entry.level == level) return entry;
  }
  std::vector<std::string> available;
  for (const auto& entry : stats) available.push_back(entry.level);
  throw DataError("unknown covariate level '" + level + "'; available levels: " +
                  join_levels(available));
}

// ---------------------------------------------------------------------------

MultiPeriodPanel::MultiPeriodPanel(std::vector<MultiPeriodUnit> units, std::vector<long> times,
                                   long treatment_time, CovariateKind kind,
                                   std::string provenance)
    : units_(std::move(units)),
      times_(std::move(times)),
      treatment_time_(treatment_time),
      kind_(kind),
      provenance_(std::move(provenance)) {
  if (!std::is_sorted(times_.begin(), times_.end()) ||
      std::adjacent_find(times_.begin(), times_.end()) != times_.end()) {
    throw DataError("time indices must be strictly increasing");
  }
  if (std::find(times_.begin(), times_.end(), treatment_time_) == times_.end()) {
    throw DataError("treatment time " + std::to_string(treatment_time_) +
                    " is not among the observed times");
  }
  if (times_.front() >= treatment_time_) {
    throw DataError("no pre-treatment period before treatment time " +
                    std::to_string(treatment_time_));
  }
  for (const auto& unit : units_) {
    if (unit.outcomes.size() != times_.size()) {
      throw DataError("unit '" + unit.unit_id + "' is not observed at every time");
    }
  }
  if (units_.empty()) throw DataError("multi-period panel is empty");
}

std::size_t MultiPeriodPanel::time_position(long time) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), time);
  if (it == times_.end() || *it != time) {
    throw DataError("time " + std::to_string(time) + " is not in the panel");
  }
  return static_cast<std::size_t>(it - times_.begin());
}

std::vector<long> MultiPeriodPanel::pre_times() const {
  std::vector<long> out;
  for (long t : times_) {
    if (t < treatment_time_) out.push_back(t);
  }
  return out;
}

PanelDataset MultiPeriodPanel::two_period(long from, long to) const {
  const std::size_t i = time_position(from);
  const std::size_t j = time_position(to);
  std::vector<UnitRecord> records;
  records.reserve(units_.size());
  for (const auto& unit : units_) {
    records.push_back({unit.unit_id, unit.x, unit.outcomes[i], unit.outcomes[j]});
  }
  return PanelDataset(std::move(records), kind_, provenance_);
}

ValidatedMultiPeriod validate_multi_period(const std::vector<LongRow>& rows, long treatment_time,
                                           CovariateKind kind, std::string provenance,
                                           MissingPolicy policy) {
  ValidationReport report;
  report.rows_in = rows.size();

  struct Pending {
    CovariateValue x;
    std::map<long, double> outcomes;
    std::string bad_reason;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Pending> units;
  std::set<long> times;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LongRow& row = rows[i];
    if (row.unit_id.empty()) {
      throw DataError("row " + std::to_string(i + 1) + ": empty unit_id");
    }
    times.insert(row.time);
    auto [it, inserted] = units.try_emplace(row.unit_id);
    Pending& unit = it->second;
    if (inserted) order.push_back(row.unit_id);

    auto covariate = resolve_covariate(row.covariate, kind);
    std::string reason;
    if (auto* why = std::get_if<std::string>(&covariate)) {
      reason = *why;
    } else if (!std::isfinite(row.y)) {
      reason = "non-finite outcome at time " + std::to_string(row.time);
    } else {
      const auto& x = std::get<CovariateValue>(covariate);
      if (unit.outcomes.empty()) {
        unit.x = x;
      } else if (unit.x != x) {
        throw DataError("unit '" + row.unit_id + "' has a time-varying covariate");
      }
    }

    if (!reason.empty()) {
      if (policy == MissingPolicy::Strict) {
        throw DataError("unit '" + row.unit_id + "' (row " + std::to_string(i + 1) + "): " + reason);
      }
      if (unit.bad_reason.empty()) unit.bad_reason = reason;
      report.dropped.push_back({i, row.unit_id, reason});
      continue;
    }
    if (!unit.outcomes.emplace(row.time, row.y).second) {
      throw DataError("unit '" + row.unit_id + "' has duplicate rows at time " +
                      std::to_string(row.time));
    }
  }

  std::vector<long> time_list(times.begin(), times.end());
  std::vector<MultiPeriodUnit> kept;
  for (const auto& id : order) {
    Pending& unit = units.at(id);
    if (!unit.bad_reason.empty()) continue;  // whole unit excluded under Drop
    if (unit.outcomes.size() != time_list.size()) {
      for (long t : time_list) {
        if (!unit.outcomes.count(t)) {
          throw DataError("unbalanced panel: unit '" + id + "' is missing time " +
                          std::to_string(t));
        }
      }
    }
    MultiPeriodUnit out{id, unit.x, {}};
    out.outcomes.reserve(time_list.size());
    for (const auto& [t, y] : unit.outcomes) out.outcomes.push_back(y);
    kept.push_back(std::move(out));
  }
  if (kept.empty()) throw DataError("panel is empty after validation");
  report.rows_kept = kept.size() * time_list.size();
  return {MultiPeriodPanel(std::move(kept), std::move(time_list), treatment_time, kind,
                           std::move(provenance)),
          std::move(report)};
}

}  // namespace sdid
