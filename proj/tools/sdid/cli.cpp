#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sdid/error.hpp"
#include "sdid/inference.hpp"
#include "sdid/pretrends.hpp"
#include "sdid/random.hpp"
#include "sdid/simlab.hpp"

namespace sdid::cli {

using nlohmann::json;

std::string to_string(Command command) {
  switch (command) {
    case Command::Estimate:
      return "estimate";
    case Command::Pretrends:
      return "pretrends";
    case Command::Simulate:
      return "simulate";
    case Command::Validate:
      return "validate";
  }
  return "estimate";
}

SubgroupContrast parse_contrast(const std::string& text, CovariateKind kind) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
    throw UsageError("--contrast expects two values separated by a comma, got '" + text + "'");
  }
  const std::string a = text.substr(0, comma);
  const std::string b = text.substr(comma + 1);
  if (a.empty() || b.empty()) throw UsageError("--contrast values must be non-empty");
  if (kind == CovariateKind::Categorical) return {a, b};
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::logic_error&) {
      throw UsageError("--contrast value '" + s + "' is not a number (continuous covariate)");
    }
  };
  return {number(a), number(b)};
}

namespace {

template <typename Enum>
Enum lookup(const std::string& flag, const std::string& value,
            std::initializer_list<std::pair<const char*, Enum>> table) {
  std::string allowed;
  for (const auto& [name, e] : table) {
    if (value == name) return e;
    allowed += (allowed.empty() ? "" : "|") + std::string(name);
  }
  throw UsageError(flag + " must be one of " + allowed + ", got '" + value + "'");
}

struct RawFlags {
  std::string kind = "categorical";
  std::string input = "wide";
  std::string format = "json";
  std::string missing = "strict";
  std::string extrapolation = "strict";
  std::string contrast;
  std::string reference;
  std::string basis;
  std::int64_t seed = -1;
  long treatment_time = 0;
  long base_period = 0;
};

void add_input_options(CLI::App* app, RunConfig& config, RawFlags& raw, bool data_required) {
  auto* data = app->add_option("--data", config.data_path, "Input CSV file");
  if (data_required) data->required();
  app->add_option("--covariate", config.covariate_column,
                  "Covariate column (default: the only non-reserved column)");
  app->add_option("--kind", raw.kind, "categorical|continuous");
  app->add_option("--input", raw.input, "wide (unit_id,<cov>,y_pre,y_post) | long (unit_id,<cov>,time,y)");
  app->add_option("--missing", raw.missing, "strict|drop policy for missing covariates and non-finite outcomes");
}

void add_output_options(CLI::App* app, RunConfig& config, RawFlags& raw) {
  app->add_option("--format", raw.format, "json|csv|text");
  app->add_option("--out", config.out_path, "Write the report here instead of standard output");
  app->add_flag("--deterministic", config.deterministic, "Omit the timestamp from reports");
  app->add_option("--threads", config.threads, "Worker threads (default: SDID_THREADS or all cores)");
}

}  // namespace

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"sdid: effect modification from pre-post data without a control group"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("sdid ") + SDID_VERSION_STRING);

  RunConfig config;
  RawFlags raw;
  std::optional<long> treatment_time;
  std::optional<long> base_period;
  std::optional<std::uint64_t> seed;

  auto* estimate = app.add_subcommand("estimate", "Estimate effect modification between covariate levels");
  add_input_options(estimate, config, raw, true);
  estimate->add_option("--contrast", raw.contrast, "Levels or values to compare, as A,B");
  estimate->add_option("--reference", raw.reference, "Compare every level against this one");
  estimate->add_option("--basis", raw.basis, "saturated | poly:D | spline | spline:k1,k2,...");
  estimate->add_option("--bootstrap", config.bootstrap, "Bootstrap replicates (0 disables)");
  estimate->add_option("--seed", seed, "Bootstrap seed");
  estimate->add_option("--ci", config.ci_level, "Confidence level");
  estimate->add_option("--extrapolation", raw.extrapolation, "strict|warn for contrasts outside the covariate range");
  estimate->add_flag("--stratified", config.stratified, "Resample within covariate levels");
  estimate->add_option("--bin", config.bin, "Quantile-bin a continuous covariate into K groups");
  estimate->add_option("--treatment-time", treatment_time, "Treatment time for two-period long input");
  estimate->add_option("--dump-panel", config.dump_panel_path, "Write the validated panel as wide CSV");
  add_output_options(estimate, config, raw);

  auto* pretrends = app.add_subcommand("pretrends", "Test subgroup parallel trends over pre-treatment periods");
  add_input_options(pretrends, config, raw, true);
  pretrends->add_option("--treatment-time", treatment_time, "First treated period")->required();
  pretrends->add_option("--contrast", raw.contrast, "Levels to compare, as A,B")->required();
  pretrends->add_option("--alpha", config.alpha, "Significance level of the joint test");
  pretrends->add_option("--base-period", base_period, "Event-study base period (default: last pre-period)");
  add_output_options(pretrends, config, raw);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study of a potential-outcome DGP");
  simulate->add_option("--config", config.config_path, "DGP JSON document")->required();
  simulate->add_option("--reps", config.reps, "Monte Carlo repetitions");
  simulate->add_option("--seed", seed, "Master seed (default: the DGP's seed)");
  simulate->add_option("--contrast", raw.contrast, "Levels to compare (default: first two DGP levels)");
  simulate->add_option("--bootstrap", config.bootstrap, "Bootstrap replicates per rep (0 disables)");
  simulate->add_option("--ci", config.ci_level, "Confidence level");
  simulate->add_option("--alpha", config.alpha, "Significance level of the pre-trends test");
  simulate->add_flag("--stratified", config.stratified, "Resample within covariate levels");
  simulate->add_option("--sample-out", config.sample_out, "Write rep 0's panel and potential-outcome ledger to PREFIX_panel.csv / PREFIX_ledger.csv");
  add_output_options(simulate, config, raw);

  auto* validate = app.add_subcommand("validate", "Validate an input file and summarize it");
  add_input_options(validate, config, raw, true);
  validate->add_option("--treatment-time", treatment_time, "Treatment time for long input");
  add_output_options(validate, config, raw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::CallForVersion& e) {
    out << "sdid " << SDID_VERSION_STRING << "\n";
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (estimate->parsed()) config.command = Command::Estimate;
  if (pretrends->parsed()) config.command = Command::Pretrends;
  if (simulate->parsed()) config.command = Command::Simulate;
  if (validate->parsed()) config.command = Command::Validate;

  config.kind = lookup<CovariateKind>("--kind", raw.kind,
                                      {{"categorical", CovariateKind::Categorical},
                                       {"continuous", CovariateKind::Continuous}});
  config.input = lookup<InputFormat>("--input", raw.input,
                                     {{"wide", InputFormat::WideCsv}, {"long", InputFormat::LongCsv}});
  config.format = lookup<OutputFormat>(
      "--format", raw.format,
      {{"json", OutputFormat::Json}, {"csv", OutputFormat::Csv}, {"text", OutputFormat::Text}});
  config.missing = lookup<MissingPolicy>("--missing", raw.missing,
                                         {{"strict", MissingPolicy::Strict}, {"drop", MissingPolicy::Drop}});
  config.extrapolation = lookup<ExtrapolationPolicy>(
      "--extrapolation", raw.extrapolation,
      {{"strict", ExtrapolationPolicy::Strict}, {"warn", ExtrapolationPolicy::Warn}});
  if (!raw.contrast.empty()) config.contrast = raw.contrast;
  if (!raw.reference.empty()) config.reference = raw.reference;
  if (!raw.basis.empty()) config.basis = raw.basis;
  config.seed = seed;
  config.treatment_time = treatment_time;
  config.base_period = base_period;
  if (config.command == Command::Pretrends) config.input = InputFormat::LongCsv;

  validate_config(config);
  return config;
}

void validate_config(const RunConfig& config) {
  if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) {
    throw UsageError("--ci must lie strictly between 0 and 1");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw UsageError("--alpha must lie strictly between 0 and 1");
  }
  switch (config.command) {
    case Command::Estimate:
      if (config.contrast.has_value() == config.reference.has_value()) {
        throw UsageError("estimate needs exactly one of --contrast A,B or --reference LEVEL");
      }
      if (config.reference && config.kind == CovariateKind::Continuous && config.bin == 0) {
        throw UsageError("--reference (all pairs) needs a categorical or binned covariate");
      }
      if (config.bin > 0 && config.kind != CovariateKind::Continuous) {
        throw UsageError("--bin requires --kind continuous");
      }
      if (config.bin == 1) throw UsageError("--bin needs at least two groups");
      if (config.input == InputFormat::LongCsv && !config.treatment_time) {
        throw UsageError("--input long needs --treatment-time");
      }
      if (config.basis) BasisSpec::parse(*config.basis);
      break;
    case Command::Pretrends:
      if (config.kind != CovariateKind::Categorical) {
        throw UsageError("pretrends needs a categorical covariate");
      }
      break;
    case Command::Simulate:
      if (config.reps < 1) throw UsageError("--reps must be at least 1");
      break;
    case Command::Validate:
      if (config.input == InputFormat::LongCsv && !config.treatment_time) {
        throw UsageError("--input long needs --treatment-time");
      }
      break;
  }
}

json config_to_json(const RunConfig& config) {
  json doc;
  doc["command"] = to_string(config.command);
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  switch (config.command) {
    case Command::Estimate:
    case Command::Pretrends:
    case Command::Validate:
      doc["data"] = config.data_path;
      doc["input"] = to_string(config.input);
      doc["covariate"] = config.covariate_column.empty() ? json(nullptr) : json(config.covariate_column);
      doc["kind"] = to_string(config.kind);
      doc["missing"] = to_string(config.missing);
      doc["treatment_time"] = opt(config.treatment_time);
      break;
    case Command::Simulate:
      doc["config_file"] = config.config_path;
      doc["reps"] = config.reps;
      break;
  }
  if (config.command == Command::Estimate) {
    doc["contrast"] = opt(config.contrast);
    doc["reference"] = opt(config.reference);
    doc["basis"] = opt(config.basis);
    doc["extrapolation"] = to_string(config.extrapolation);
    doc["bin"] = config.bin;
  }
  if (config.command == Command::Estimate || config.command == Command::Simulate) {
    doc["bootstrap"] = config.bootstrap;
    if (config.command == Command::Estimate) {
      doc["seed"] = config.seed.value_or(0);
    } else {
      doc["seed"] = opt(config.seed);
    }
    doc["ci"] = config.ci_level;
    doc["stratified"] = config.stratified;
  }
  if (config.command == Command::Pretrends || config.command == Command::Simulate) {
    doc["alpha"] = config.alpha;
  }
  if (config.command == Command::Pretrends) {
    doc["contrast"] = opt(config.contrast);
    doc["base_period"] = opt(config.base_period);
  }
  if (config.command == Command::Simulate) doc["contrast"] = opt(config.contrast);
  doc["format"] = to_string(config.format);
  doc["deterministic"] = config.deterministic;
  return doc;
}

namespace {

LoadOptions load_options(const RunConfig& config, bool flatten) {
  LoadOptions options;
  options.format = config.input;
  options.covariate_column = config.covariate_column;
  options.kind = config.kind;
  options.policy = config.missing;
  options.treatment_time = config.treatment_time;
  options.flatten_two_period = flatten;
  return options;
}

void write_output(const RunConfig& config, const std::string& text, std::ostream& out) {
  if (config.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(config.out_path, std::ios::binary);
  if (!file) throw DataError("cannot open '" + config.out_path + "' for writing");
  file << text;
}

ValidatedPanel require_two_period(LoadedData data) {
  if (auto* panel = std::get_if<ValidatedPanel>(&data)) return std::move(*panel);
  throw DataError("estimate needs exactly two periods; use 'sdid pretrends' for multi-period data");
}

EstimateRow infer(const PanelDataset& panel, const EstimatorSpec& spec, const RunConfig& config,
                  std::vector<std::string>& notes) {
  EstimateRow row;
  row.estimate = run_estimator(panel, spec);
  auto& e = row.estimate;

  std::optional<double> analytic;
  if (spec.method == EstimateMethod::SubgroupMeans) {
    try {
      const auto stats = subgroup_stats(panel);
      attach_analytic_inference(e, stats, config.ci_level);
      analytic = e.se;
      row.normal_ci = e.ci;
      row.ci_method = "normal";
    } catch (const NumericalError& err) {
      notes.push_back("no analytic standard error for " + to_string(spec.contrast) + ": " +
                      err.what());
    }
  }

  if (config.bootstrap > 0) {
    BootstrapOptions options;
    options.replicates = config.bootstrap;
    options.seed = config.seed.value_or(0);
    options.level = config.ci_level;
    options.scheme = config.stratified ? ResampleScheme::StratifiedByLevel : ResampleScheme::Unit;
    options.threads = config.threads;
    row.bootstrap = bootstrap_sdid(panel, spec, options);
    e.ci = row.bootstrap->ci_percentile;
    row.ci_method = "percentile_bootstrap";
    if (!analytic) e.se = row.bootstrap->se_boot;
  }

  if (e.se && *e.se > 0.0) row.wald = wald_test(e.point, *e.se);
  return row;
}

int run_estimate(const RunConfig& config, std::ostream& out) {
  auto loaded = require_two_period(load_panel(config.data_path, load_options(config, true)));
  if (!config.dump_panel_path.empty()) {
    std::ofstream dump(config.dump_panel_path, std::ios::binary);
    if (!dump) throw DataError("cannot open '" + config.dump_panel_path + "' for writing");
    const CsvTable table = read_csv_file(config.data_path);
    write_panel_csv(dump, loaded.panel, resolve_covariate_column(table, load_options(config, true)));
  }

  EstimateReport report;
  report.validation = loaded.report;
  PanelDataset panel = loaded.panel;
  if (config.bin > 0) {
    auto binned = bin_covariate(panel, config.bin);
    std::ostringstream note;
    note << "covariate binned into " << binned.labels.size()
         << " quantile groups; the estimand compares bins, not covariate values. edges:";
    for (double e : binned.edges) note << " " << format_number(e);
    report.notes.push_back(note.str());
    panel = std::move(binned.panel);
  }

  const bool categorical = panel.covariate_kind() == CovariateKind::Categorical;
  EstimatorSpec base;
  if (categorical) {
    if (config.basis) {
      auto basis = BasisSpec::parse(*config.basis);
      if (basis.kind != BasisSpec::Kind::SaturatedIndicators) {
        throw UsageError("categorical covariates only support --basis saturated");
      }
      base = EstimatorSpec::regression(basis, {}, config.extrapolation);
    } else {
      base = EstimatorSpec::subgroup_means({});
    }
  } else {
    base = EstimatorSpec::regression(BasisSpec::parse(config.basis.value_or("poly:1")), {},
                                     config.extrapolation);
  }

  std::vector<SubgroupContrast> contrasts;
  if (config.reference) {
    const auto levels = panel.levels();
    find_level(subgroup_stats(panel), *config.reference);
    for (const auto& level : levels) {
      if (level != *config.reference) contrasts.push_back({level, *config.reference});
    }
    report.notes.push_back(
        "all-pairs output: each contrast relies on its own pairwise subgroup parallel trends "
        "assumption; p-values are not adjusted for multiple comparisons");
  } else {
    contrasts.push_back(parse_contrast(*config.contrast, panel.covariate_kind()));
  }

  for (const auto& contrast : contrasts) {
    EstimatorSpec spec = base;
    spec.contrast = contrast;
    report.rows.push_back(infer(panel, spec, config, report.notes));
  }

  ReportHeader header{"estimate", config_to_json(config), config.deterministic};
  write_output(config, emit_report(header, report, config.format), out);
  return kOk;
}

int run_pretrends(const RunConfig& config, std::ostream& out) {
  auto loaded = load_panel(config.data_path, load_options(config, false));
  auto* multi = std::get_if<ValidatedMultiPeriod>(&loaded);
  if (!multi) throw DataError("pretrends needs long-format input");
  const auto contrast = parse_contrast(*config.contrast, CovariateKind::Categorical);

  PretrendsOutput output;
  output.validation = multi->report;
  output.report = pretrends_report(multi->panel, contrast, config.alpha);
  const auto pre = multi->panel.pre_times();
  const long base = config.base_period.value_or(pre.back());
  output.event_study = event_study_contrasts(multi->panel, contrast, base);

  ReportHeader header{"pretrends", config_to_json(config), config.deterministic};
  write_output(config, emit_report(header, output, config.format), out);
  return kOk;
}

void write_sample(const RunConfig& config, const sim::DgpSpec& dgp, std::uint64_t master) {
  const std::uint64_t seed = derive_seed(master, 0);
  std::ofstream panel_file(config.sample_out + "_panel.csv", std::ios::binary);
  std::ofstream ledger_file(config.sample_out + "_ledger.csv", std::ios::binary);
  if (!panel_file || !ledger_file) {
    throw DataError("cannot write sample files with prefix '" + config.sample_out + "'");
  }
  if (dgp.periods) {
    const auto sample = sim::generate_multi_period(dgp, seed);
    write_csv_row(panel_file, {"unit_id", "level", "time", "y"});
    for (const auto& u : sample.panel.units()) {
      for (std::size_t k = 0; k < u.outcomes.size(); ++k) {
        write_csv_row(panel_file, {u.unit_id, to_string(u.x), std::to_string(sample.panel.times()[k]),
                                   format_number(u.outcomes[k])});
      }
    }
    write_csv_row(ledger_file, {"unit_id", "level", "time", "y_untreated"});
    for (const auto& entry : sample.ledger) {
      for (std::size_t k = 0; k < entry.untreated.size(); ++k) {
        write_csv_row(ledger_file, {entry.unit_id, entry.level,
                                    std::to_string(sample.panel.times()[k]),
                                    format_number(entry.untreated[k])});
      }
    }
    return;
  }
  const auto sample = sim::generate(dgp, seed);
  write_panel_csv(panel_file, sample.panel, "level");
  write_csv_row(ledger_file, {"unit_id", "level", "y_pre", "y_post_untreated", "y_post_treated"});
  for (const auto& e : sample.ledger) {
    write_csv_row(ledger_file, {e.unit_id, e.level, format_number(e.y_pre),
                                format_number(e.y_post_untreated), format_number(e.y_post_treated)});
  }
}

int run_simulate(const RunConfig& config, std::ostream& out) {
  std::ifstream in(config.config_path);
  if (!in) throw DataError("cannot open '" + config.config_path + "' for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("DGP file '" + config.config_path + "' is not valid JSON: " + e.what());
  }
  const sim::DgpSpec dgp = sim::dgp_from_json(doc);
  const std::uint64_t master = config.seed.value_or(dgp.seed);

  SubgroupContrast contrast;
  if (config.contrast) {
    contrast = parse_contrast(*config.contrast, CovariateKind::Categorical);
  } else {
    if (dgp.levels.size() < 2) throw UsageError("DGP has a single level; nothing to contrast");
    contrast = {dgp.levels[0].name, dgp.levels[1].name};
  }

  SimulateOutput output;
  output.dgp = dgp;
  output.oracle = sim::oracle(dgp, contrast);
  if (dgp.periods) {
    sim::PretrendsMonteCarloOptions options;
    options.contrast = contrast;
    options.reps = config.reps;
    options.master_seed = master;
    options.alpha = config.alpha;
    options.threads = config.threads;
    output.pretrends = sim::monte_carlo_pretrends(dgp, options);
  } else {
    sim::MonteCarloOptions options;
    options.estimator = EstimatorSpec::subgroup_means(contrast);
    options.reps = config.reps;
    options.master_seed = master;
    options.level = config.ci_level;
    options.bootstrap_replicates = config.bootstrap;
    options.scheme = config.stratified ? ResampleScheme::StratifiedByLevel : ResampleScheme::Unit;
    options.threads = config.threads;
    output.summary = sim::monte_carlo(dgp, options);
  }
  if (!config.sample_out.empty()) write_sample(config, dgp, master);

  json resolved = config_to_json(config);
  resolved["dgp"] = sim::to_json(dgp);
  resolved["master_seed"] = master;
  resolved["contrast"] = json::array({to_string(contrast.level_a), to_string(contrast.level_b)});
  ReportHeader header{"simulate", resolved, config.deterministic};
  write_output(config, emit_report(header, output, config.format), out);
  return kOk;
}

int run_validate(const RunConfig& config, std::ostream& out) {
  LoadOptions options = load_options(config, false);
  options.policy = MissingPolicy::Drop;  // collect every problem instead of stopping at the first
  auto loaded = load_panel(config.data_path, options);

  ValidateOutput output;
  output.kind = config.kind;
  if (auto* panel = std::get_if<ValidatedPanel>(&loaded)) {
    output.validation = panel->report;
    output.units = panel->panel.size();
    if (config.kind == CovariateKind::Categorical) output.levels = subgroup_stats(panel->panel);
  } else {
    auto& multi = std::get<ValidatedMultiPeriod>(loaded);
    output.validation = multi.report;
    output.units = multi.panel.size();
    output.times = multi.panel.times();
  }
  ReportHeader header{"validate", config_to_json(config), config.deterministic};
  write_output(config, emit_report(header, output, config.format), out);
  return output.validation.clean() ? kOk : kDataError;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.command) {
      case Command::Estimate:
        return run_estimate(config, out);
      case Command::Pretrends:
        return run_pretrends(config, out);
      case Command::Simulate:
        return run_simulate(config, out);
      case Command::Validate:
        return run_validate(config, out);
    }
  } catch (const UsageError& e) {
    err << "sdid: usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const DataError& e) {
    err << "sdid: data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalError& e) {
    err << "sdid: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
  return kUsageError;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> config;
  try {
    config = parse_args(argc, argv, out);
  } catch (const UsageError& e) {
    err << "sdid: usage error: " << e.what() << "\n"
        << "Run 'sdid --help' for the command grammar.\n";
    return kUsageError;
  }
  if (!config) return kOk;
  return run(*config, out, err);
}

}  // namespace sdid::cli
