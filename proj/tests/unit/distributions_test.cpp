#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sdid/distributions.hpp"
#include "sdid/error.hpp"

namespace sdid::dist {
namespace {

TEST(Erfc, AgreesWithCLibraryAcrossAllThreeIntervals) {
  for (double x = -6.0; x <= 26.0; x += 0.01) {
    const double expected = std::erfc(x);
    EXPECT_TRUE(testing::rel_close(erfc(x), expected, 2e-15, 1e-300)) << "x = " << x;
  }
  EXPECT_EQ(erfc(0.0), 1.0);
  EXPECT_EQ(erfc(30.0), 0.0);
  EXPECT_EQ(erfc(-30.0), 2.0);
}

TEST(NormalCdf, MatchesQuadratureOracle) {
  for (double x = -8.0; x <= 8.0; x += 0.125) {
    EXPECT_NEAR(normal_cdf(x), testing::quadrature_normal_cdf(x), 1e-12) << "x = " << x;
  }
}

TEST(NormalCdf, TailsStayAccurate) {
  EXPECT_TRUE(testing::rel_close(normal_sf(8.0), 6.22096057427178e-16, 1e-12));
  EXPECT_NEAR(normal_cdf(-1.959963984540054), 0.025, 1e-15);
  EXPECT_EQ(normal_cdf(0.0), 0.5);
}

TEST(NormalQuantile, StandardTableValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-14);
  EXPECT_NEAR(normal_quantile(0.75), 0.6744897501960817, 1e-14);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-16);
  EXPECT_NEAR(normal_quantile(0.995), 2.5758293035489004, 1e-13);
  EXPECT_NEAR(normal_critical(0.95), 1.959963984540054, 1e-14);
  EXPECT_NEAR(normal_critical(0.5), 0.6744897501960817, 1e-14);
}

TEST(NormalQuantile, InvertsTheQuadratureCdf) {
  for (double p : {1e-6, 0.001, 0.02, 0.1, 0.3, 0.5, 0.6, 0.9, 0.97, 0.999, 1 - 1e-6}) {
    const double z = normal_quantile(p);
    // Error measured on the quantile scale, through the density at z.
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    EXPECT_LT(std::fabs(testing::quadrature_normal_cdf(z) - p) / density, 1e-8) << "p = " << p;
  }
}

TEST(NormalQuantile, FarTailsAgainstTheCLibrary) {
  for (double p : {1e-300, 1e-100, 1e-20, 1e-12, 1e-8}) {
    const double z = normal_quantile(p);
    EXPECT_TRUE(testing::rel_close(0.5 * std::erfc(-z / std::numbers::sqrt2), p, 1e-12)) << "p = " << p;
  }
}

TEST(NormalQuantile, RejectsProbabilitiesOutsideTheOpenInterval) {
  EXPECT_THROW(normal_quantile(0.0), UsageError);
  EXPECT_THROW(normal_quantile(1.0), UsageError);
  EXPECT_THROW(normal_critical(1.5), UsageError);
}

TEST(ChiSquared, MatchesClosedFormsForSmallDegreesOfFreedom) {
  for (int df : {1, 2, 3, 4, 5, 6, 9, 10}) {
    for (double x : {0.01, 0.5, 1.0, 2.7, 3.841458820694124, 7.5, 15.0, 40.0}) {
      EXPECT_NEAR(chi_squared_sf(x, df), testing::closed_form_chi2_sf(x, df), 1e-13)
          << "df = " << df << ", x = " << x;
      EXPECT_NEAR(chi_squared_cdf(x, df) + chi_squared_sf(x, df), 1.0, 1e-14);
    }
  }
}

TEST(ChiSquared, CriticalValues) {
  EXPECT_NEAR(chi_squared_sf(3.841458820694124, 1), 0.05, 1e-12);
  EXPECT_NEAR(chi_squared_sf(5.991464547107979, 2), 0.05, 1e-12);
  EXPECT_NEAR(chi_squared_sf(7.814727903251178, 3), 0.05, 1e-12);
  EXPECT_EQ(chi_squared_sf(0.0, 3), 1.0);
}

TEST(ChiSquared, OneDegreeOfFreedomIsASquaredNormal) {
  for (double z : {0.1, 0.8, 1.959964, 2.5, 4.0}) {
    EXPECT_NEAR(chi_squared_sf(z * z, 1), 2.0 * normal_sf(z), 1e-14);
  }
}

TEST(ChiSquared, RejectsBadArguments) {
  EXPECT_THROW(chi_squared_sf(1.0, 0.0), UsageError);
  EXPECT_THROW(gamma_q(-1.0, 1.0), UsageError);
}

}  // namespace
}  // namespace sdid::dist
