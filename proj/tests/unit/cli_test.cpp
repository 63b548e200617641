#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"
#include "csv.hpp"
#include "io.hpp"
#include "report.hpp"
#include "sdid/error.hpp"

namespace sdid::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "sdid");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sdid_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream(path) << content;
    return path.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string hand() { return std::string(SDID_TEST_FIXTURES) + "/hand_wide.csv"; }

  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

TEST(Csv, QuotedFieldsAndEscapes) {
  std::istringstream in("a,b\n\"x, y\",\"say \"\"hi\"\"\"\r\n3,\n");
  const auto table = read_csv(in);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0][0], "x, y");
  EXPECT_EQ(table.rows[0][1], "say \"hi\"");
  EXPECT_EQ(table.rows[1][1], "");
  EXPECT_EQ(csv_escape("x, y"), "\"x, y\"");
  EXPECT_EQ(csv_escape("plain"), "plain");
}

TEST(Csv, RaggedRowsAreDataErrors) {
  std::istringstream in("a,b\n1,2,3\n");
  EXPECT_THROW(read_csv(in), DataError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(LoadPanel, WideCsvInfersTheCovariateColumn) {
  std::istringstream in("unit_id,sex,y_pre,y_post\n1,F,1,2\n2,M,0,0.5\n");
  const auto loaded = load_panel(read_csv(in), "mem", LoadOptions{});
  const auto& v = std::get<ValidatedPanel>(loaded);
  EXPECT_EQ(v.panel.size(), 2u);
  EXPECT_EQ(v.panel.levels(), (std::vector<std::string>{"F", "M"}));
}

TEST(LoadPanel, MissingRequiredColumnIsADataError) {
  std::istringstream in("unit_id,sex,y_pre\n1,F,1\n");
  EXPECT_THROW(load_panel(read_csv(in), "mem", LoadOptions{}), DataError);
}

TEST(LoadPanel, AmbiguousCovariateNeedsTheFlag) {
  std::istringstream in("unit_id,sex,age,y_pre,y_post\n1,F,30,1,2\n");
  const auto table = read_csv(in);
  EXPECT_THROW(resolve_covariate_column(table, LoadOptions{}), UsageError);
  LoadOptions opt;
  opt.covariate_column = "age";
  EXPECT_EQ(resolve_covariate_column(table, opt), "age");
}

TEST(LoadPanel, UnparseableNumberIsAlwaysAnError) {
  std::istringstream in("unit_id,g,y_pre,y_post\n1,A,1,abc\n2,A,1,2\n");
  const auto table = read_csv(in);
  LoadOptions drop;
  drop.policy = MissingPolicy::Drop;
  try {
    load_panel(table, "mem", drop);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(LoadPanel, NonFiniteOutcomeFollowsThePolicy) {
  std::istringstream in("unit_id,g,y_pre,y_post\n1,A,1,nan\n2,A,1,2\n3,B,0,1\n");
  const auto table = read_csv(in);
  EXPECT_THROW(load_panel(table, "mem", LoadOptions{}), DataError);
  LoadOptions drop;
  drop.policy = MissingPolicy::Drop;
  const auto& v = std::get<ValidatedPanel>(load_panel(table, "mem", drop));
  EXPECT_EQ(v.panel.size(), 2u);
  EXPECT_EQ(v.report.dropped.size(), 1u);
}

TEST(LoadPanel, LongTwoPeriodInputFlattensToWide) {
  std::istringstream in("unit_id,g,time,y\n1,A,0,1\n1,A,1,3\n2,B,1,5\n2,B,0,4\n");
  LoadOptions opt;
  opt.format = InputFormat::LongCsv;
  opt.treatment_time = 1;
  const auto& v = std::get<ValidatedPanel>(load_panel(read_csv(in), "mem", opt));
  EXPECT_EQ(v.panel.records()[1].y_pre, 4.0);
  EXPECT_EQ(v.panel.records()[1].y_post, 5.0);
}

TEST(LoadPanel, LongInputRequiresBalance) {
  std::istringstream in("unit_id,g,time,y\n1,A,0,1\n1,A,1,3\n2,B,1,5\n");
  LoadOptions opt;
  opt.format = InputFormat::LongCsv;
  opt.treatment_time = 1;
  EXPECT_THROW(load_panel(read_csv(in), "mem", opt), DataError);
}

TEST(BinCovariate, QuantileBinsWithOrderedLabels) {
  std::vector<UnitRecord> records;
  for (int i = 0; i < 100; ++i) records.push_back({"u" + std::to_string(i), static_cast<double>(i), 0.0, 1.0});
  const auto binned = bin_covariate(PanelDataset(records, CovariateKind::Continuous, "x"), 4);
  EXPECT_EQ(binned.labels, (std::vector<std::string>{"Q1", "Q2", "Q3", "Q4"}));
  EXPECT_EQ(binned.edges.size(), 5u);
  const auto stats = subgroup_stats(binned.panel);
  for (const auto& s : stats) EXPECT_EQ(s.n, 25u);
}

TEST(ParseContrast, LabelsAndNumbers) {
  const auto labels = parse_contrast("F,M", CovariateKind::Categorical);
  EXPECT_EQ(as_label(labels.level_a), "F");
  const auto numbers = parse_contrast("2.5,-1", CovariateKind::Continuous);
  EXPECT_EQ(as_real(numbers.level_b), -1.0);
  EXPECT_THROW(parse_contrast("F", CovariateKind::Categorical), UsageError);
  EXPECT_THROW(parse_contrast("a,1", CovariateKind::Continuous), UsageError);
}

TEST(EmitReport, MinimalEstimateHasExplicitNulls) {
  EstimateReport report;
  EstimateRow row;
  row.estimate.contrast = {std::string("A"), std::string("B")};
  row.estimate.point = 1.0;
  report.rows.push_back(row);
  const auto doc = json::parse(emit_report(ReportHeader{"estimate", json::object(), true}, report, OutputFormat::Json));
  const auto& e = doc.at("estimates").at(0);
  EXPECT_EQ(e.at("point"), 1.0);
  EXPECT_TRUE(e.at("se").is_null());
  EXPECT_TRUE(e.at("ci_lower").is_null());
  EXPECT_TRUE(e.at("bootstrap").is_null());
  EXPECT_FALSE(doc.contains("generated_at"));
}

// ---------------------------------------------------------------------------

TEST_F(CliTest, EstimateHandFixture) {
  const auto r = invoke({"estimate", "--data", hand(), "--contrast", "A,B", "--deterministic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("tool"), "sdid");
  EXPECT_EQ(doc.at("command"), "estimate");
  const auto& e = doc.at("estimates").at(0);
  EXPECT_EQ(e.at("point"), 1.0);
  EXPECT_EQ(e.at("se"), 0.0);
  EXPECT_EQ(e.at("n_a"), 2);
  EXPECT_NE(doc.at("assumption_notes").at(0).get<std::string>().find("extremely strong and untestable"),
            std::string::npos);
}

TEST_F(CliTest, DeterministicOutputIsByteIdentical) {
  const std::vector<std::string> args = {"estimate", "--data", hand(), "--contrast", "A,B",
                                         "--bootstrap", "200", "--seed", "9", "--stratified",
                                         "--deterministic"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  EXPECT_EQ(invoke(threaded).out, a.out);
}

TEST_F(CliTest, ExitCodesByErrorClass) {
  EXPECT_EQ(invoke({"estimate", "--data", hand()}).code, kUsageError);  // no contrast
  EXPECT_EQ(invoke({"estimate", "--data", hand(), "--contrast", "A,B", "--ci", "2"}).code, kUsageError);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsageError);
  const auto unknown = invoke({"estimate", "--data", hand(), "--contrast", "A,C"});
  EXPECT_EQ(unknown.code, kDataError);
  EXPECT_NE(unknown.err.find("A, B"), std::string::npos);
  EXPECT_EQ(invoke({"estimate", "--data", path("missing.csv"), "--contrast", "A,B"}).code, kDataError);
  const auto flat = write("flat.csv", "unit_id,x,y_pre,y_post\n1,2,0,1\n2,2,0,2\n3,2,0,3\n");
  EXPECT_EQ(invoke({"estimate", "--data", flat, "--kind", "continuous", "--basis", "poly:1", "--contrast", "2,2"})
                .code,
            kNumericalError);
}

TEST_F(CliTest, HelpAndVersionExitZero) {
  const auto help = invoke({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("estimate"), std::string::npos);
  EXPECT_EQ(invoke({"--version"}).code, 0);
}

TEST_F(CliTest, AllPairsCsv) {
  const auto data = write("three.csv", "unit_id,g,y_pre,y_post\n1,A,0,2\n2,A,0,2\n3,B,0,1\n4,B,0,1\n5,C,0,5\n6,C,0,7\n");
  const auto r = invoke({"estimate", "--data", data, "--reference", "B", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  const auto table = read_csv(in);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0][table.column("point")], "1");
  EXPECT_EQ(table.rows[1][table.column("point")], "5");
  EXPECT_NE(table.rows[0][table.column("assumption_note")].find("untestable"), std::string::npos);
}

TEST_F(CliTest, TextReportCarriesTheCaution) {
  const auto r = invoke({"estimate", "--data", hand(), "--contrast", "A,B", "--format", "text"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("extremely strong and untestable"), std::string::npos);
}

TEST_F(CliTest, DumpPanelRoundTrips) {
  const auto dump = path("dump.csv");
  ASSERT_EQ(invoke({"estimate", "--data", hand(), "--contrast", "A,B", "--dump-panel", dump}).code, 0);
  const auto again = invoke({"estimate", "--data", dump, "--contrast", "A,B", "--deterministic"});
  const auto original = invoke({"estimate", "--data", hand(), "--contrast", "A,B", "--deterministic"});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(json::parse(again.out).at("estimates"), json::parse(original.out).at("estimates"));
}

TEST_F(CliTest, ContinuousBinning) {
  std::string content = "unit_id,age,y_pre,y_post\n";
  for (int i = 0; i < 40; ++i) {
    content += std::to_string(i) + "," + std::to_string(20 + i) + ",0," + std::to_string(i < 20 ? 1 : 3) + "\n";
  }
  const auto data = write("ages.csv", content);
  const auto r = invoke({"estimate", "--data", data, "--kind", "continuous", "--bin", "2", "--contrast", "Q2,Q1",
                         "--deterministic"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("estimates").at(0).at("point"), 2.0);
}

TEST_F(CliTest, OutFlagWritesTheFile) {
  const auto out = path("report.json");
  const auto r = invoke({"estimate", "--data", hand(), "--contrast", "A,B", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(json::parse(slurp(out)).at("estimates").at(0).at("point"), 1.0);
}

TEST_F(CliTest, PretrendsReport) {
  const auto data = write("long.csv",
                          "unit_id,g,time,y\n"
                          "a1,A,0,0\na1,A,1,1\na1,A,2,2\na1,A,3,9\n"
                          "a2,A,0,1\na2,A,1,2.5\na2,A,2,3\na2,A,3,10\n"
                          "b1,B,0,5\nb1,B,1,6\nb1,B,2,7.5\nb1,B,3,9\n"
                          "b2,B,0,4\nb2,B,1,5.5\nb2,B,2,6\nb2,B,3,8\n");
  const auto r = invoke({"pretrends", "--data", data, "--input", "long", "--treatment-time", "3", "--contrast", "A,B",
                         "--deterministic"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("per_interval").size(), 2u);
  EXPECT_EQ(doc.at("joint").at("df"), 2);
  EXPECT_EQ(doc.at("event_study").size(), 3u);
  const auto single = invoke({"pretrends", "--data", data, "--input", "long", "--treatment-time", "1",
                              "--contrast", "A,B"});
  EXPECT_EQ(single.code, kDataError);
  EXPECT_NE(single.err.find("single pre-period"), std::string::npos);
}

TEST_F(CliTest, SimulateIsDeterministicAcrossThreadCounts) {
  const auto config = write("dgp.json", R"({
    "levels": [{"name": "A", "probability": 0.5, "alpha": 1, "beta": 2},
               {"name": "B", "probability": 0.5, "alpha": 0, "beta": 1}],
    "tau": 3, "n": 200, "seed": 5})");
  const auto one = invoke({"simulate", "--config", config, "--reps", "30", "--bootstrap", "20", "--threads", "1",
                           "--deterministic"});
  const auto four = invoke({"simulate", "--config", config, "--reps", "30", "--bootstrap", "20", "--threads", "4",
                            "--deterministic"});
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(one.out, four.out);
  const auto doc = json::parse(one.out);
  EXPECT_EQ(doc.at("oracle").at("true_effect_modification"), 1.0);
  EXPECT_TRUE(doc.at("summary").contains("bias"));
}

TEST_F(CliTest, SimulateSampleOutWritesPanelAndLedger) {
  const auto config = write("dgp.json", R"({
    "levels": [{"name": "A", "probability": 0.5}, {"name": "B", "probability": 0.5}],
    "n": 20, "seed": 1})");
  const auto prefix = path("rep0");
  const auto r = invoke({"simulate", "--config", config, "--reps", "5", "--sample-out", prefix});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream panel(prefix + "_panel.csv");
  std::ifstream ledger(prefix + "_ledger.csv");
  ASSERT_TRUE(panel.good());
  ASSERT_TRUE(ledger.good());
  EXPECT_EQ(read_csv(panel).rows.size(), 20u);
  EXPECT_TRUE(read_csv(ledger).has_column("y_post_untreated"));
}

TEST_F(CliTest, SimulateRejectsBadConfig) {
  const auto config = write("bad.json", R"({"levels": [], "n": 10, "extra": true})");
  EXPECT_EQ(invoke({"simulate", "--config", config}).code, kUsageError);
  const auto broken = write("broken.json", "{not json");
  EXPECT_NE(invoke({"simulate", "--config", broken}).code, kOk);
}

TEST_F(CliTest, ValidateReportsDroppedRows) {
  EXPECT_EQ(invoke({"validate", "--data", hand()}).code, kOk);
  const auto dirty = write("dirty.csv", "unit_id,g,y_pre,y_post\n1,A,0,1\n2,,0,1\n3,B,nan,1\n");
  const auto r = invoke({"validate", "--data", dirty, "--deterministic"});
  EXPECT_EQ(r.code, kDataError);
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("validation").at("dropped").size(), 2u);
}

}  // namespace
}  // namespace sdid::cli
