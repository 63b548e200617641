#include "report.hpp"

#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "csv.hpp"
#include "io.hpp"

namespace sdid::cli {

using nlohmann::json;

const char* const kAssumptionCaution =
    "SDiD contrasts identify effect modification only under subgroup parallel trends: "
    "E[Y1(0) - Y0 | X = x] must be equal across the compared levels. That assumption is "
    "extremely strong and untestable; a passing pre-trends test supports but never proves it. "
    "The per-level pre-post changes themselves are not causal effects.";

std::string to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Json:
      return "json";
    case OutputFormat::Csv:
      return "csv";
    case OutputFormat::Text:
      return "text";
  }
  return "json";
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json header_json(const ReportHeader& header) {
  json doc;
  doc["tool"] = "sdid";
  doc["version"] = SDID_VERSION_STRING;
  doc["command"] = header.command;
  if (!header.deterministic) doc["generated_at"] = utc_timestamp();
  doc["config"] = header.config;
  return doc;
}

template <typename T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

std::string num(double v) { return format_number(v); }

template <typename T>
std::string opt_num(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) return format_number(*v);
  else return std::to_string(*v);
}

json validation_json(const ValidationReport& report) {
  json dropped = json::array();
  for (const auto& row : report.dropped) {
    dropped.push_back({{"row", row.row_index + 1}, {"unit_id", row.unit_id}, {"reason", row.reason}});
  }
  return {{"rows_in", report.rows_in}, {"rows_kept", report.rows_kept}, {"dropped", dropped}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json contrast_json(const SubgroupContrast& c) {
  auto value = [](const CovariateValue& v) {
    return is_label(v) ? json(std::get<std::string>(v)) : json(std::get<double>(v));
  };
  return {{"a", value(c.level_a)}, {"b", value(c.level_b)}};
}

}  // namespace

json estimate_to_json(const EstimateRow& row) {
  const auto& e = row.estimate;
  json doc;
  doc["contrast"] = contrast_json(e.contrast);
  doc["point"] = e.point;
  doc["se"] = optional_json(e.se);
  doc["ci_lower"] = e.ci ? json(e.ci->lower) : json(nullptr);
  doc["ci_upper"] = e.ci ? json(e.ci->upper) : json(nullptr);
  doc["level"] = e.ci ? json(e.ci->level) : json(nullptr);
  doc["ci_method"] = row.ci_method.empty() ? json(nullptr) : json(row.ci_method);
  doc["normal_ci"] = row.normal_ci ? json{{"lower", row.normal_ci->lower},
                                          {"upper", row.normal_ci->upper},
                                          {"level", row.normal_ci->level}}
                                   : json(nullptr);
  doc["method"] = to_string(e.method);
  doc["n_a"] = optional_json(e.n_a);
  doc["n_b"] = optional_json(e.n_b);
  doc["z"] = row.wald ? json(row.wald->z) : json(nullptr);
  doc["p_value"] = row.wald ? json(row.wald->p_two_sided) : json(nullptr);
  doc["extrapolated"] = e.extrapolated;
  if (row.bootstrap) {
    const auto& b = *row.bootstrap;
    doc["bootstrap"] = {{"replicates", b.requested},
                        {"failed", b.failed},
                        {"seed", b.seed},
                        {"scheme", to_string(b.scheme)},
                        {"se_boot", b.se_boot},
                        {"ci_lower", b.ci_percentile.lower},
                        {"ci_upper", b.ci_percentile.upper},
                        {"level", b.ci_percentile.level}};
  } else {
    doc["bootstrap"] = nullptr;
  }
  doc["assumption_notes"] = e.assumption_notes;
  return doc;
}

std::string emit_report(const ReportHeader& header, const EstimateReport& report,
                        OutputFormat format) {
  if (format == OutputFormat::Json) {
    json doc = header_json(header);
    json rows = json::array();
    for (const auto& row : report.rows) rows.push_back(estimate_to_json(row));
    doc["estimates"] = rows;
    doc["validation"] = validation_json(report.validation);
    doc["notes"] = report.notes;
    doc["assumption_notes"] = json::array({kAssumptionCaution});
    return dump(doc);
  }

  std::ostringstream os;
  if (format == OutputFormat::Csv) {
    write_csv_row(os, {"contrast_a", "contrast_b", "point", "se", "ci_lower", "ci_upper", "level",
                       "ci_method", "method", "n_a", "n_b", "z", "p_value", "extrapolated",
                       "assumption_note"});
    for (const auto& row : report.rows) {
      const auto& e = row.estimate;
      write_csv_row(os, {to_string(e.contrast.level_a), to_string(e.contrast.level_b), num(e.point),
                         opt_num(e.se), e.ci ? num(e.ci->lower) : "", e.ci ? num(e.ci->upper) : "",
                         e.ci ? num(e.ci->level) : "", row.ci_method, to_string(e.method),
                         opt_num(e.n_a), opt_num(e.n_b), row.wald ? num(row.wald->z) : "",
                         row.wald ? num(row.wald->p_two_sided) : "",
                         e.extrapolated ? "true" : "false", kAssumptionCaution});
    }
    return os.str();
  }

  os << "sdid " << SDID_VERSION_STRING << " - effect modification estimates\n";
  if (!report.validation.clean()) {
    os << "  " << report.validation.dropped.size() << " row(s) dropped during validation\n";
  }
  for (const auto& note : report.notes) os << "  note: " << note << "\n";
  for (const auto& row : report.rows) {
    const auto& e = row.estimate;
    os << "\ncontrast " << to_string(e.contrast) << "  [" << to_string(e.method) << "]\n";
    os << "  estimate     " << num(e.point) << "\n";
    if (e.n_a) os << "  units        n_a = " << *e.n_a << ", n_b = " << *e.n_b << "\n";
    if (e.se) os << "  std. error   " << num(*e.se) << "\n";
    if (e.ci) {
      os << "  " << e.ci->level * 100 << "% CI      [" << num(e.ci->lower) << ", "
         << num(e.ci->upper) << "] (" << row.ci_method << ")\n";
    }
    if (row.wald) os << "  Wald z       " << num(row.wald->z) << ", p = " << num(row.wald->p_two_sided) << "\n";
    if (e.extrapolated) os << "  WARNING: contrast extrapolates beyond the observed covariate range\n";
    for (const auto& note : e.assumption_notes) os << "  - " << note << "\n";
  }
  os << "\nCaution: " << kAssumptionCaution << "\n";
  return os.str();
}

std::string emit_report(const ReportHeader& header, const PretrendsOutput& output,
                        OutputFormat format) {
  const auto& r = output.report;
  if (format == OutputFormat::Json) {
    json doc = header_json(header);
    doc["contrast"] = contrast_json(r.contrast);
    json intervals = json::array();
    for (const auto& c : r.per_interval) {
      intervals.push_back({{"from", c.from},
                           {"to", c.to},
                           {"estimate", c.estimate},
                           {"se", c.se},
                           {"z", c.se > 0.0 ? json(c.estimate / c.se) : json(nullptr)},
                           {"n_a", c.n_a},
                           {"n_b", c.n_b}});
    }
    doc["per_interval"] = intervals;
    doc["joint"] = {{"statistic", r.joint.statistic}, {"df", r.joint.df}, {"p_value", r.joint.p_value}};
    doc["alpha"] = r.alpha;
    doc["passed"] = r.passed;
    doc["decision_note"] = r.decision_note;
    json events = json::array();
    for (const auto& p : output.event_study) {
      events.push_back({{"period", p.period},
                        {"base", p.base},
                        {"estimate", p.estimate},
                        {"se", p.se},
                        {"pre_treatment", p.pre_treatment}});
    }
    doc["event_study"] = events;
    doc["validation"] = validation_json(output.validation);
    doc["assumption_notes"] = json::array({kAssumptionCaution});
    return dump(doc);
  }

  std::ostringstream os;
  if (format == OutputFormat::Csv) {
    write_csv_row(os, {"kind", "from", "to", "estimate", "se", "z", "statistic", "df", "p_value"});
    for (const auto& c : r.per_interval) {
      write_csv_row(os, {"interval", std::to_string(c.from), std::to_string(c.to), num(c.estimate),
                         num(c.se), num(c.estimate / c.se), "", "", ""});
    }
    for (const auto& p : output.event_study) {
      write_csv_row(os, {p.pre_treatment ? "event_pre" : "event_post", std::to_string(p.base),
                         std::to_string(p.period), num(p.estimate), num(p.se),
                         p.se > 0.0 ? num(p.estimate / p.se) : "", "", "", ""});
    }
    write_csv_row(os, {"joint", "", "", "", "", "", num(r.joint.statistic),
                       std::to_string(r.joint.df), num(r.joint.p_value)});
    return os.str();
  }

  os << "sdid " << SDID_VERSION_STRING << " - pre-trends diagnostics for contrast "
     << to_string(r.contrast) << "\n\n";
  for (const auto& c : r.per_interval) {
    os << "  interval [" << c.from << ", " << c.to << "]  estimate " << num(c.estimate) << "  se "
       << num(c.se) << "  z " << num(c.estimate / c.se) << "\n";
  }
  os << "\n  joint chi-squared " << num(r.joint.statistic) << " on " << r.joint.df << " df, p = "
     << num(r.joint.p_value) << "  -> " << (r.passed ? "PASS" : "FAIL") << " at alpha " << r.alpha
     << "\n";
  if (!output.event_study.empty()) {
    os << "\n  event study (base " << output.event_study.front().base << ")\n";
    for (const auto& p : output.event_study) {
      os << "    t = " << p.period << (p.pre_treatment ? " (placebo)" : " (post)") << "  "
         << num(p.estimate) << "  se " << num(p.se) << "\n";
    }
  }
  os << "\n" << r.decision_note << "\n\nCaution: " << kAssumptionCaution << "\n";
  return os.str();
}

namespace {

json summary_json(const sim::MonteCarloSummary& s) {
  json naive = json::object();
  for (const auto& [level, v] : s.naive_mean) naive[level] = v;
  return {{"reps", s.reps},
          {"failures", s.failures},
          {"oracle_effect_modification", s.oracle_effect},
          {"true_trend_gap", s.true_trend_gap},
          {"mean_estimate", s.mean_estimate},
          {"bias", s.bias},
          {"empirical_sd", s.empirical_sd},
          {"mc_standard_error", s.mc_standard_error},
          {"mean_analytic_se", optional_json(s.mean_analytic_se)},
          {"mean_bootstrap_se", optional_json(s.mean_bootstrap_se)},
          {"coverage_normal", optional_json(s.coverage_normal)},
          {"coverage_percentile", optional_json(s.coverage_percentile)},
          {"rejection_rate", optional_json(s.rejection_rate)},
          {"wald_tests", s.wald_tests},
          {"naive_mean", naive}};
}

json pretrends_summary_json(const sim::PretrendsMonteCarloSummary& s) {
  return {{"reps", s.reps},         {"failures", s.failures},
          {"df", s.df},             {"alpha", s.alpha},
          {"rejection_rate", s.rejection_rate}, {"mean_statistic", s.mean_statistic},
          {"true_trend_gap", s.true_trend_gap}};
}

json oracle_json(const sim::OracleTruth& o) {
  json naive = json::object();
  for (const auto& [level, v] : o.naive_expectation) naive[level] = v;
  return {{"true_effect_modification", o.true_effect_modification},
          {"true_trend_gap", o.true_trend_gap},
          {"naive_expectation", naive}};
}

// Flattens nested objects into dotted keys for the CSV rendering.
void flatten(const json& value, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& out) {
  if (value.is_object()) {
    for (const auto& [k, v] : value.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (value.is_null()) {
    out.emplace_back(prefix, "");
  } else if (value.is_number_float()) {
    out.emplace_back(prefix, format_number(value.get<double>()));
  } else if (value.is_string()) {
    out.emplace_back(prefix, value.get<std::string>());
  } else {
    out.emplace_back(prefix, value.dump());
  }
}

}  // namespace

std::string emit_report(const ReportHeader& header, const SimulateOutput& output,
                        OutputFormat format) {
  json results;
  results["oracle"] = oracle_json(output.oracle);
  if (output.summary) results["summary"] = summary_json(*output.summary);
  if (output.pretrends) results["pretrends_summary"] = pretrends_summary_json(*output.pretrends);

  if (format == OutputFormat::Json) {
    json doc = header_json(header);
    for (const auto& [k, v] : results.items()) doc[k] = v;
    doc["assumption_notes"] = json::array({kAssumptionCaution});
    return dump(doc);
  }

  std::ostringstream os;
  if (format == OutputFormat::Csv) {
    std::vector<std::pair<std::string, std::string>> flat;
    flatten(results, "", flat);
    write_csv_row(os, {"metric", "value"});
    for (const auto& [k, v] : flat) write_csv_row(os, {k, v});
    return os.str();
  }

  os << "sdid " << SDID_VERSION_STRING << " - Monte Carlo simulation\n\n";
  std::vector<std::pair<std::string, std::string>> flat;
  flatten(results, "", flat);
  for (const auto& [k, v] : flat) os << "  " << std::left << std::setw(44) << k << v << "\n";
  os << "\nCaution: " << kAssumptionCaution << "\n";
  return os.str();
}

std::string emit_report(const ReportHeader& header, const ValidateOutput& output,
                        OutputFormat format) {
  if (format == OutputFormat::Json) {
    json doc = header_json(header);
    doc["validation"] = validation_json(output.validation);
    doc["units"] = output.units;
    doc["covariate_kind"] = to_string(output.kind);
    if (!output.times.empty()) doc["times"] = output.times;
    json levels = json::array();
    for (const auto& s : output.levels) {
      levels.push_back({{"level", s.level},
                        {"n", s.n},
                        {"mean_delta", s.mean},
                        {"variance_delta", optional_json(s.variance)}});
    }
    doc["levels"] = levels;
    return dump(doc);
  }

  std::ostringstream os;
  if (format == OutputFormat::Csv) {
    write_csv_row(os, {"row", "unit_id", "reason"});
    for (const auto& d : output.validation.dropped) {
      write_csv_row(os, {std::to_string(d.row_index + 1), d.unit_id, d.reason});
    }
    return os.str();
  }
  os << "sdid " << SDID_VERSION_STRING << " - validation\n\n";
  os << "  rows read      " << output.validation.rows_in << "\n";
  os << "  rows kept      " << output.validation.rows_kept << "\n";
  os << "  units          " << output.units << " (" << to_string(output.kind) << " covariate)\n";
  for (const auto& d : output.validation.dropped) {
    os << "  dropped row " << d.row_index + 1 << " (" << d.unit_id << "): " << d.reason << "\n";
  }
  for (const auto& s : output.levels) {
    os << "  level " << s.level << ": n = " << s.n << ", mean delta = " << num(s.mean) << "\n";
  }
  return os.str();
}

}  // namespace sdid::cli
