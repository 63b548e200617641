#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sdid/error.hpp"
#include "sdid/estimators.hpp"

namespace sdid {
namespace {

using testing::panel_from_deltas;

SubgroupContrast labels(const std::string& a, const std::string& b) { return {a, b}; }
SubgroupContrast points(double a, double b) { return {a, b}; }

PanelDataset continuous_panel(const std::vector<std::pair<double, double>>& x_and_delta) {
  std::vector<UnitRecord> records;
  for (std::size_t i = 0; i < x_and_delta.size(); ++i) {
    records.push_back({"u" + std::to_string(i), x_and_delta[i].first, 1.0, 1.0 + x_and_delta[i].second});
  }
  return PanelDataset(std::move(records), CovariateKind::Continuous, "fixture");
}

TEST(SdidCategorical, HandFixtureGivesDifferenceOfMeanChanges) {
  const auto est = sdid_categorical(testing::hand_panel(), labels("A", "B"));
  EXPECT_EQ(est.point, 1.0);
  EXPECT_EQ(est.n_a.value(), 2u);
  EXPECT_EQ(est.n_b.value(), 2u);
  EXPECT_EQ(est.method, EstimateMethod::SubgroupMeans);
  EXPECT_FALSE(est.assumption_notes.empty());
}

TEST(SdidCategorical, SameLevelAndReversedContrasts) {
  const auto panel = testing::hand_panel();
  EXPECT_EQ(sdid_categorical(panel, labels("A", "A")).point, 0.0);
  EXPECT_EQ(sdid_categorical(panel, labels("B", "A")).point, -1.0);
}

TEST(SdidCategorical, UnknownLevelIsADataError) {
  EXPECT_THROW(sdid_categorical(testing::hand_panel(), labels("A", "C")), DataError);
}

TEST(SdidCategorical, ContinuousPanelIsAUsageError) {
  EXPECT_THROW(sdid_categorical(testing::random_continuous_panel(2, 20), labels("A", "B")), UsageError);
}

TEST(SdidAllPairs, ContrastsEveryOtherLevelAgainstTheReference) {
  const auto panel = panel_from_deltas({{"A", {2, 2}}, {"B", {1, 1}}, {"C", {4, 6}}});
  const auto all = sdid_all_pairs(panel, "B");
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(as_label(all[0].contrast.level_a), "A");
  EXPECT_EQ(all[0].point, 1.0);
  EXPECT_EQ(as_label(all[1].contrast.level_a), "C");
  EXPECT_EQ(all[1].point, 4.0);
  for (const auto& e : all) EXPECT_EQ(as_label(e.contrast.level_b), "B");
  EXPECT_THROW(sdid_all_pairs(panel, "Z"), DataError);
}

TEST(SdidAllPairs, SingleLevelPanelHasNoPairs) {
  EXPECT_TRUE(sdid_all_pairs(panel_from_deltas({{"A", {1, 2}}}), "A").empty());
}

// ---------------------------------------------------------------------------

TEST(BasisSpec, ParseAndDescribeRoundTrip) {
  EXPECT_EQ(BasisSpec::parse("saturated").kind, BasisSpec::Kind::SaturatedIndicators);
  const auto poly = BasisSpec::parse("poly:3");
  EXPECT_EQ(poly.kind, BasisSpec::Kind::Polynomial);
  EXPECT_EQ(poly.degree, 3);
  const auto spline = BasisSpec::parse("spline:2.5,-1");
  EXPECT_EQ(spline.knots, (std::vector<double>{-1.0, 2.5}));
  for (const char* text : {"saturated", "poly:2", "spline", "spline:-1,2.5"}) {
    EXPECT_EQ(BasisSpec::parse(text).describe(), text);
  }
  for (const char* bad : {"", "poly", "poly:-1", "poly:x", "spline:", "spline:1,a", "cubic"}) {
    EXPECT_THROW(BasisSpec::parse(bad), UsageError) << bad;
  }
}

TEST(DeltaRegression, RecoversExactLinearFunctionInRawPowers) {
  std::vector<std::pair<double, double>> data;
  for (double x : {-2.0, 0.0, 1.0, 3.5, 7.0, 10.0}) data.emplace_back(x, 3.0 + 2.0 * x);
  const auto model = fit_delta_regression(continuous_panel(data), BasisSpec::polynomial(1));
  const auto coef = model.polynomial_coefficients();
  ASSERT_EQ(coef.size(), 2u);
  EXPECT_NEAR(coef[0], 3.0, 1e-12);
  EXPECT_NEAR(coef[1], 2.0, 1e-12);
  EXPECT_NEAR(model.diagnostics().residual_variance, 0.0, 1e-24);
  EXPECT_EQ(model.diagnostics().rank, 2u);
}

TEST(DeltaRegression, ConstantDeltasGiveZeroHigherOrderTerms) {
  std::vector<std::pair<double, double>> data;
  for (double x : {0.0, 1.0, 2.0, 3.0, 4.0}) data.emplace_back(x, 5.0);
  const auto model = fit_delta_regression(continuous_panel(data), BasisSpec::polynomial(2));
  const auto coef = model.polynomial_coefficients();
  EXPECT_NEAR(coef[0], 5.0, 1e-12);
  EXPECT_NEAR(coef[1], 0.0, 1e-12);
  EXPECT_NEAR(coef[2], 0.0, 1e-12);
}

TEST(DeltaRegression, RankDeficientDesignIsANumericalError) {
  std::vector<std::pair<double, double>> data;
  for (int i = 0; i < 6; ++i) data.emplace_back(2.0, 1.0 + i);
  try {
    fit_delta_regression(continuous_panel(data), BasisSpec::polynomial(1));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("rank"), std::string::npos);
  }
}

TEST(DeltaRegression, TooFewUnitsForTheBasisIsAnError) {
  const auto panel = continuous_panel({{0.0, 1.0}, {1.0, 2.0}, {2.0, 5.0}});
  EXPECT_THROW(fit_delta_regression(panel, BasisSpec::polynomial(2)), NumericalError);
  EXPECT_NO_THROW(fit_delta_regression(panel, BasisSpec::polynomial(1)));
}

TEST(DeltaRegression, BasisMustMatchCovariateKind) {
  EXPECT_THROW(fit_delta_regression(testing::hand_panel(), BasisSpec::polynomial(1)), UsageError);
  EXPECT_THROW(fit_delta_regression(testing::random_continuous_panel(1, 20), BasisSpec::saturated()),
               UsageError);
}

TEST(DeltaRegression, MatchesNormalEquationsOracle) {
  const auto panel = testing::random_continuous_panel(5, 400);
  for (int degree : {1, 2, 3}) {
    const auto model = fit_delta_regression(panel, BasisSpec::polynomial(degree));
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (const auto& r : panel.records()) {
      std::vector<double> row;
      double power = 1.0;
      for (int k = 0; k <= degree; ++k) {
        row.push_back(power);
        power *= as_real(r.x);
      }
      rows.push_back(row);
      y.push_back(r.y_post - r.y_pre);
    }
    const auto oracle = testing::normal_equations_ols(rows, y);
    const auto coef = model.polynomial_coefficients();
    ASSERT_EQ(coef.size(), oracle.size());
    for (std::size_t k = 0; k < coef.size(); ++k) {
      EXPECT_NEAR(coef[k], oracle[k], 1e-9) << "degree " << degree << " term " << k;
    }
  }
}

TEST(DeltaRegression, SplineReproducesPiecewiseLinearTruth) {
  std::vector<std::pair<double, double>> data;
  for (int i = 0; i <= 40; ++i) {
    const double x = -2.0 + 0.2 * i;
    data.emplace_back(x, 1.0 + 0.5 * x + 2.0 * std::max(0.0, x - 1.0));
  }
  const auto model = fit_delta_regression(continuous_panel(data), BasisSpec::spline({1.0}));
  EXPECT_EQ(model.knots(), (std::vector<double>{1.0}));
  for (double x : {-2.0, -0.3, 1.0, 2.4, 6.0}) {
    EXPECT_NEAR(model.predict(x), 1.0 + 0.5 * x + 2.0 * std::max(0.0, x - 1.0), 1e-10);
  }
}

TEST(DeltaRegression, DefaultSplineKnotsAreInteriorQuantiles) {
  const auto model = fit_delta_regression(testing::random_continuous_panel(8, 300), BasisSpec::spline());
  ASSERT_EQ(model.knots().size(), 3u);
  EXPECT_TRUE(std::is_sorted(model.knots().begin(), model.knots().end()));
  EXPECT_GT(model.knots().front(), model.x_min());
  EXPECT_LT(model.knots().back(), model.x_max());
}

TEST(SdidContinuous, DifferenceOfFittedValues) {
  std::vector<std::pair<double, double>> data;
  for (double x : {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}) data.emplace_back(x, 3.0 + 2.0 * x);
  const auto model = fit_delta_regression(continuous_panel(data), BasisSpec::polynomial(1));
  EXPECT_NEAR(sdid_continuous(model, points(3.0, 2.0)).point, 2.0, 1e-12);
  EXPECT_EQ(sdid_continuous(model, points(2.5, 2.5)).point, 0.0);
  EXPECT_NEAR(sdid_continuous(model, points(2.0, 3.0)).point, -2.0, 1e-12);
  const auto est = sdid_continuous(model, points(3.0, 2.0));
  EXPECT_EQ(est.method, EstimateMethod::DeltaRegression);
  EXPECT_FALSE(est.extrapolated);
  EXPECT_FALSE(est.se.has_value());
}

TEST(SdidContinuous, ExtrapolationIsRefusedOrFlagged) {
  std::vector<std::pair<double, double>> data;
  for (double x : {0.0, 1.0, 2.0, 3.0}) data.emplace_back(x, x);
  const auto model = fit_delta_regression(continuous_panel(data), BasisSpec::polynomial(1));
  EXPECT_THROW(sdid_continuous(model, points(4.0, 1.0)), DataError);
  const auto warned = sdid_continuous(model, points(4.0, 1.0), ExtrapolationPolicy::Warn);
  EXPECT_TRUE(warned.extrapolated);
  EXPECT_NEAR(warned.point, 3.0, 1e-12);
  const bool noted = std::any_of(warned.assumption_notes.begin(), warned.assumption_notes.end(),
                                 [](const std::string& s) { return s.find("extrapolat") != std::string::npos; });
  EXPECT_TRUE(noted);
}

TEST(SdidContinuous, SaturatedModelRejectsUnseenLabels) {
  const auto model = fit_delta_regression(testing::hand_panel(), BasisSpec::saturated());
  EXPECT_THROW(sdid_continuous(model, labels("A", "C")), DataError);
}

TEST(SortedQuantile, TypeSevenInterpolation) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  EXPECT_EQ(sorted_quantile(v, 0.0), 1.0);
  EXPECT_EQ(sorted_quantile(v, 1.0), 5.0);
  EXPECT_EQ(sorted_quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(sorted_quantile(v, 0.1), 1.4);
}

// ---------------------------------------------------------------------------
// Structural properties over randomly generated panels.

class EstimatorProperties : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(EstimatorProperties, Antisymmetry) {
  const auto panel = testing::random_categorical_panel(GetParam(), 150, 4);
  for (const auto& a : panel.levels()) {
    for (const auto& b : panel.levels()) {
      EXPECT_EQ(sdid_categorical(panel, labels(a, b)).point, -sdid_categorical(panel, labels(b, a)).point);
    }
    EXPECT_EQ(sdid_categorical(panel, labels(a, a)).point, 0.0);
  }
}

TEST_P(EstimatorProperties, CommonPostPeriodShockCancels) {
  const auto panel = testing::random_categorical_panel(GetParam(), 150, 3);
  std::mt19937_64 rng(GetParam());
  const double shock = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
  std::vector<UnitRecord> shocked = panel.records();
  for (auto& r : shocked) r.y_post += shock;
  const PanelDataset moved(shocked, CovariateKind::Categorical, "shocked");
  EXPECT_NEAR(sdid_categorical(moved, labels("L0", "L2")).point,
              sdid_categorical(panel, labels("L0", "L2")).point, 1e-12);
}

TEST_P(EstimatorProperties, UnitFixedEffectsCancel) {
  const auto panel = testing::random_categorical_panel(GetParam(), 150, 3);
  std::mt19937_64 rng(GetParam() + 99);
  std::normal_distribution<double> fe(0.0, 100.0);
  std::vector<UnitRecord> shifted = panel.records();
  for (auto& r : shifted) {
    const double c = fe(rng);
    r.y_pre += c;
    r.y_post += c;
  }
  const PanelDataset moved(shifted, CovariateKind::Categorical, "fe");
  EXPECT_NEAR(sdid_categorical(moved, labels("L1", "L0")).point,
              sdid_categorical(panel, labels("L1", "L0")).point, 1e-10);
}

TEST_P(EstimatorProperties, SaturatedRegressionEqualsSubgroupMeans) {
  const auto panel = testing::random_categorical_panel(GetParam(), 200, 4);
  const auto model = fit_delta_regression(panel, BasisSpec::saturated());
  for (const auto& a : panel.levels()) {
    for (const auto& b : panel.levels()) {
      EXPECT_NEAR(sdid_continuous(model, labels(a, b)).point, sdid_categorical(panel, labels(a, b)).point,
                  1e-12);
    }
  }
}

TEST_P(EstimatorProperties, NaivePerLevelChangesAreBiasedButTheirDifferenceIsNot) {
  // Common trend 3 plus level effects 2 and 1: each level's mean change is wrong
  // for its own effect, the difference is exactly the effect gap.
  std::mt19937_64 rng(GetParam());
  std::normal_distribution<double> base(0.0, 5.0);
  std::vector<UnitRecord> records;
  for (int i = 0; i < 40; ++i) {
    const bool a = i % 2 == 0;
    const double pre = base(rng);
    const double post = pre + 3.0 + (a ? 2.0 : 1.0);
    records.push_back({"u" + std::to_string(i), std::string(a ? "A" : "B"), pre, post});
  }
  const PanelDataset panel(records, CovariateKind::Categorical, "naive");
  const auto stats = subgroup_stats(panel);
  EXPECT_GT(std::fabs(find_level(stats, "A").mean - 2.0), 2.5);
  EXPECT_GT(std::fabs(find_level(stats, "B").mean - 1.0), 2.5);
  EXPECT_NEAR(sdid_categorical(panel, labels("A", "B")).point, 1.0, 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Seeds, EstimatorProperties, ::testing::Range<std::uint64_t>(1, 26));

}  // namespace
}  // namespace sdid
