#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "io.hpp"
#include "report.hpp"
#include "sdid/estimators.hpp"
#include "sdid/model.hpp"

namespace sdid::cli {

enum class Command { Estimate, Pretrends, Simulate, Validate };
std::string to_string(Command command);

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kNumericalError = 3 };

struct RunConfig {
  Command command = Command::Estimate;

  // input
  std::string data_path;
  InputFormat input = InputFormat::WideCsv;
  std::string covariate_column;  // empty: infer
  CovariateKind kind = CovariateKind::Categorical;
  MissingPolicy missing = MissingPolicy::Strict;
  std::optional<long> treatment_time;

  // estimation
  std::optional<std::string> contrast;   // "a,b"
  std::optional<std::string> reference;  // all-pairs mode
  std::optional<std::string> basis;      // BasisSpec text
  ExtrapolationPolicy extrapolation = ExtrapolationPolicy::Strict;
  std::size_t bin = 0;

  // inference
  std::size_t bootstrap = 0;
  std::optional<std::uint64_t> seed;
  double ci_level = 0.95;
  bool stratified = false;
  double alpha = 0.05;
  std::optional<long> base_period;

  // simulation
  std::string config_path;
  std::size_t reps = 1000;
  std::string sample_out;

  // output
  OutputFormat format = OutputFormat::Json;
  std::string out_path;
  std::string dump_panel_path;
  bool deterministic = false;
  std::size_t threads = 0;  // 0: SDID_THREADS or hardware
};

/// Parses the command line (argv[0] is the program name). Returns nullopt when
/// help was requested; the help text is written to `out`. Throws UsageError.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Checks cross-field constraints (ranges, required flags per command).
void validate_config(const RunConfig& config);

/// Resolved configuration echoed in every report. Excludes settings that do
/// not affect the result (output path, thread count).
nlohmann::json config_to_json(const RunConfig& config);

/// Executes one command. Reports go to `out` (or config.out_path), messages
/// to `err`. Returns an ExitCode.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args + run with error-to-exit-code mapping.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Splits "a,b" into a contrast; numeric parsing for continuous covariates.
SubgroupContrast parse_contrast(const std::string& text, CovariateKind kind);

}  // namespace sdid::cli
