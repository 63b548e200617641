#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "csv.hpp"
#include "sdid/model.hpp"

namespace sdid::cli {

using sdid::to_string;

enum class InputFormat { WideCsv, LongCsv };
std::string to_string(InputFormat format);

struct LoadOptions {
  InputFormat format = InputFormat::WideCsv;
  /// Covariate column name; empty means "the single column that is not a
  /// reserved name" (unit_id, y_pre, y_post, time, y).
  std::string covariate_column;
  CovariateKind kind = CovariateKind::Categorical;
  MissingPolicy policy = MissingPolicy::Strict;
  std::optional<long> treatment_time;  // required for LongCsv
  /// A long file with exactly two periods is returned as a PanelDataset.
  bool flatten_two_period = true;
};

using LoadedData = std::variant<ValidatedPanel, ValidatedMultiPeriod>;

/// Reads and validates a wide (unit_id, <covariate>, y_pre, y_post) or long
/// (unit_id, <covariate>, time, y) CSV file.
LoadedData load_panel(const std::string& path, const LoadOptions& options);
LoadedData load_panel(const CsvTable& table, const std::string& provenance,
                      const LoadOptions& options);

/// Resolved covariate column for a table under the given options.
std::string resolve_covariate_column(const CsvTable& table, const LoadOptions& options);

/// Writes a panel as wide CSV; reading it back with the same covariate
/// column and kind reproduces the dataset exactly.
void write_panel_csv(std::ostream& out, const PanelDataset& panel,
                     const std::string& covariate_column);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

struct BinnedPanel {
  PanelDataset panel;            // categorical, labels Q1..Qk
  std::vector<double> edges;     // k + 1 quantile edges of the original covariate
  std::vector<std::string> labels;
};

/// Quantile binning of a continuous covariate into k groups. Bin j holds
/// edges[j-1] < x <= edges[j] (the first bin is closed on the left). Bins
/// that collapse because of ties are merged away, so fewer than k labels
/// may result.
BinnedPanel bin_covariate(const PanelDataset& panel, std::size_t k);

}  // namespace sdid::cli
