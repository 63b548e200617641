#include "io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "sdid/error.hpp"
#include "sdid/estimators.hpp"

namespace sdid::cli {

namespace {

const std::set<std::string> kReserved = {"unit_id", "y_pre", "y_post", "time", "y"};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

// Missing tokens become NaN (validation applies the missing-data policy);
// anything else must parse fully.
double parse_outcome(const std::string& cell, std::size_t row, const std::string& column) {
  const std::string text = trim(cell);
  if (is_missing_token(text)) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError("row " + std::to_string(row) + ", column '" + column + "': '" + cell +
                    "' is not a number");
  }
  return value;
}

long parse_time(const std::string& cell, std::size_t row) {
  const std::string text = trim(cell);
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("row " + std::to_string(row) + ", column 'time': '" + cell +
                    "' is not an integer time index");
  }
  return value;
}

std::optional<std::string> covariate_cell(const std::string& cell) {
  const std::string text = trim(cell);
  if (is_missing_token(text)) return std::nullopt;
  return text;
}

}  // namespace

std::string to_string(InputFormat format) {
  return format == InputFormat::WideCsv ? "wide" : "long";
}

std::string resolve_covariate_column(const CsvTable& table, const LoadOptions& options) {
  if (!options.covariate_column.empty()) {
    table.column(options.covariate_column);
    return options.covariate_column;
  }
  std::vector<std::string> candidates;
  for (const auto& h : table.header) {
    if (!kReserved.count(h)) candidates.push_back(h);
  }
  if (candidates.size() != 1) {
    throw UsageError("cannot infer the covariate column; pass --covariate (" +
                     std::to_string(candidates.size()) + " candidate columns)");
  }
  return candidates.front();
}

LoadedData load_panel(const std::string& path, const LoadOptions& options) {
  return load_panel(read_csv_file(path), path, options);
}

LoadedData load_panel(const CsvTable& table, const std::string& provenance,
                      const LoadOptions& options) {
  const std::string cov_name = resolve_covariate_column(table, options);
  const std::size_t id_col = table.column("unit_id");
  const std::size_t cov_col = table.column(cov_name);

  if (options.format == InputFormat::WideCsv) {
    const std::size_t pre_col = table.column("y_pre");
    const std::size_t post_col = table.column("y_post");
    std::vector<RawRow> rows;
    rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      rows.push_back({trim(r[id_col]), covariate_cell(r[cov_col]),
                      parse_outcome(r[pre_col], i + 1, "y_pre"),
                      parse_outcome(r[post_col], i + 1, "y_post")});
    }
    return validate_panel(rows, options.kind, provenance, options.policy);
  }

  if (!options.treatment_time) {
    throw UsageError("long-format input needs a treatment time (--treatment-time)");
  }
  const std::size_t time_col = table.column("time");
  const std::size_t y_col = table.column("y");
  std::vector<LongRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    rows.push_back({trim(r[id_col]), covariate_cell(r[cov_col]), parse_time(r[time_col], i + 1),
                    parse_outcome(r[y_col], i + 1, "y")});
  }
  auto multi = validate_multi_period(rows, *options.treatment_time, options.kind, provenance,
                                     options.policy);
  const auto& times = multi.panel.times();
  if (options.flatten_two_period && times.size() == 2) {
    return ValidatedPanel{multi.panel.two_period(times[0], times[1]), std::move(multi.report)};
  }
  return multi;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

void write_panel_csv(std::ostream& out, const PanelDataset& panel,
                     const std::string& covariate_column) {
  write_csv_row(out, {"unit_id", covariate_column, "y_pre", "y_post"});
  for (const auto& r : panel.records()) {
    const std::string x =
        is_label(r.x) ? std::get<std::string>(r.x) : format_number(std::get<double>(r.x));
    write_csv_row(out, {r.unit_id, x, format_number(r.y_pre), format_number(r.y_post)});
  }
}

BinnedPanel bin_covariate(const PanelDataset& panel, std::size_t k) {
  if (panel.covariate_kind() != CovariateKind::Continuous) {
    throw UsageError("--bin applies to continuous covariates only");
  }
  if (k < 2) throw UsageError("--bin needs at least two groups");
  std::vector<double> xs;
  for (const auto& r : panel.records()) xs.push_back(as_real(r.x));
  std::sort(xs.begin(), xs.end());

  BinnedPanel out;
  out.edges.push_back(xs.front());
  for (std::size_t j = 1; j < k; ++j) {
    const double q = sorted_quantile(xs, static_cast<double>(j) / static_cast<double>(k));
    if (q > out.edges.back()) out.edges.push_back(q);
  }
  if (xs.back() > out.edges.back() || out.edges.size() == 1) out.edges.push_back(xs.back());
  const std::size_t bins = out.edges.size() - 1;
  for (std::size_t j = 0; j < bins; ++j) out.labels.push_back("Q" + std::to_string(j + 1));

  std::vector<UnitRecord> records;
  records.reserve(panel.size());
  for (const auto& r : panel.records()) {
    const double x = as_real(r.x);
    // first edge e_j (j >= 1) with x <= e_j
    auto it = std::lower_bound(out.edges.begin() + 1, out.edges.end(), x);
    const std::size_t bin = std::min<std::size_t>(
        static_cast<std::size_t>(it - out.edges.begin()) - 1, bins - 1);
    records.push_back({r.unit_id, out.labels[bin], r.y_pre, r.y_post});
  }
  out.panel = PanelDataset(std::move(records), CovariateKind::Categorical,
                           panel.provenance() + " [binned into " + std::to_string(bins) + " groups]");
  return out;
}

}  // namespace sdid::cli
