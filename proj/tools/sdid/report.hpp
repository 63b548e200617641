#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "sdid/estimators.hpp"
#include "sdid/inference.hpp"
#include "sdid/model.hpp"
#include "sdid/pretrends.hpp"
#include "sdid/simlab.hpp"

namespace sdid::cli {

enum class OutputFormat { Json, Csv, Text };
std::string to_string(OutputFormat format);

/// Printed with every estimate, in every format.
extern const char* const kAssumptionCaution;

/// Fields shared by every report: tool name, version, command, the fully
/// resolved configuration, and (outside deterministic mode) a timestamp.
struct ReportHeader {
  std::string command;
  nlohmann::json config;
  bool deterministic = false;
};

struct EstimateRow {
  EffectModEstimate estimate;  // se/ci hold the default inference
  std::string ci_method;       // "normal", "percentile_bootstrap" or "" when absent
  std::optional<ConfidenceInterval> normal_ci;
  std::optional<WaldTest> wald;
  std::optional<BootstrapResult> bootstrap;
};

struct EstimateReport {
  std::vector<EstimateRow> rows;
  ValidationReport validation;
  std::vector<std::string> notes;  // e.g. binning disclosures
};

struct PretrendsOutput {
  PretrendsReport report;
  std::vector<EventStudyPoint> event_study;
  ValidationReport validation;
};

struct SimulateOutput {
  sim::DgpSpec dgp;
  sim::OracleTruth oracle;
  std::optional<sim::MonteCarloSummary> summary;
  std::optional<sim::PretrendsMonteCarloSummary> pretrends;
};

struct ValidateOutput {
  ValidationReport validation;
  CovariateKind kind = CovariateKind::Categorical;
  std::size_t units = 0;
  std::vector<long> times;  // long input only
  std::vector<LevelStats> levels;
};

nlohmann::json estimate_to_json(const EstimateRow& row);

std::string emit_report(const ReportHeader& header, const EstimateReport& report,
                        OutputFormat format);
std::string emit_report(const ReportHeader& header, const PretrendsOutput& output,
                        OutputFormat format);
std::string emit_report(const ReportHeader& header, const SimulateOutput& output,
                        OutputFormat format);
std::string emit_report(const ReportHeader& header, const ValidateOutput& output,
                        OutputFormat format);

}  // namespace sdid::cli
