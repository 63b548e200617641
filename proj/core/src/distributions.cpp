#include "sdid/distributions.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "sdid/error.hpp"

namespace sdid::dist {

namespace {

constexpr double kInvSqrtPi = 0.56418958354775628695;
constexpr double kSqrt2 = 1.41421356237309504880;

// exp(-y*y) evaluated as exp(-ys*ys) * exp(-(y-ys)(y+ys)) with ys = y rounded
// down to a multiple of 1/16, which keeps y*y from losing low bits.
double exp_neg_square(double y) {
  const double ys = std::trunc(y * 16.0) / 16.0;
  const double del = (y - ys) * (y + ys);
  return std::exp(-ys * ys) * std::exp(-del);
}

}  // namespace

double erfc(double x) {
  static constexpr std::array<double, 5> a = {3.1611237438705656, 113.864154151050156,
                                              377.485237685302021, 3209.37758913846947,
                                              .185777706184603153};
  static constexpr std::array<double, 4> b = {23.6012909523441209, 244.024637934444173,
                                              1282.61652607737228, 2844.23683343917062};
  static constexpr std::array<double, 9> c = {
      .564188496988670089, 8.88314979438837594, 66.1191906371416295,
      298.635138197400131, 881.95222124176909,  1712.04761263407058,
      2051.07837782607147, 1230.33935479799725, 2.15311535474403846e-8};
  static constexpr std::array<double, 8> d = {15.7449261107098347, 117.693950891312499,
                                              537.181101862009858, 1621.38957456669019,
                                              3290.79923573345963, 4362.61909014324716,
                                              3439.36767414372164, 1230.33935480374942};
  static constexpr std::array<double, 6> p = {.305326634961232344, .360344899949804439,
                                              .125781726111229246, .0160837851487422766,
                                              6.58749161529837803e-4, .0163153871373020978};
  static constexpr std::array<double, 5> q = {2.56852019228982242, 1.87295284992346047,
                                              .527905102951428412, .0605183413124413191,
                                              .00233520497626869185};
  constexpr double kThresh = 0.46875;
  constexpr double kXSmall = 1.11e-16;
  constexpr double kXBig = 26.543;

  if (std::isnan(x)) return x;
  const double y = std::fabs(x);
  double result = 0.0;

  if (y <= kThresh) {
    const double ysq = y > kXSmall ? y * y : 0.0;
    double num = a[4] * ysq;
    double den = ysq;
    for (int i = 0; i < 3; ++i) {
      num = (num + a[i]) * ysq;
      den = (den + b[i]) * ysq;
    }
    return 1.0 - x * (num + a[3]) / (den + b[3]);
  }

  if (y <= 4.0) {
    double num = c[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + c[i]) * y;
      den = (den + d[i]) * y;
    }
    result = exp_neg_square(y) * (num + c[7]) / (den + d[7]);
  } else if (y < kXBig) {
    const double ysq = 1.0 / (y * y);
    double num = p[5] * ysq;
    double den = ysq;
    for (int i = 0; i < 4; ++i) {
      num = (num + p[i]) * ysq;
      den = (den + q[i]) * ysq;
    }
    const double r = ysq * (num + p[4]) / (den + q[4]);
    result = exp_neg_square(y) * (kInvSqrtPi - r) / y;
  }

  return x < 0.0 ? 2.0 - result : result;
}

double normal_cdf(double x) { return 0.5 * erfc(-x / kSqrt2); }

double normal_sf(double x) { return 0.5 * erfc(x / kSqrt2); }

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw UsageError("normal quantile requires 0 < p < 1");
  }
  constexpr double kSplit1 = 0.425;
  constexpr double kSplit2 = 5.0;
  constexpr double kConst1 = 0.180625;
  constexpr double kConst2 = 1.6;

  static constexpr std::array<double, 8> a = {
      3.3871328727963666080,     1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4,   4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4,   2.5090809287301226727e3};
  static constexpr std::array<double, 8> b = {
      1.0,                     4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4, 5.2264952788528545610e3};
  static constexpr std::array<double, 8> c = {
      1.42343711074968357734,  4.63033784615654529590,   5.76949722146069140550,
      3.64784832476320460504,  1.27045825245236838258,   2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr std::array<double, 8> d = {
      1.0,                       2.05319162663775882187,   1.67638483018380384940,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr std::array<double, 8> e = {
      6.65790464350110377720,    5.46378491116411436990,    1.78482653991729133580,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr std::array<double, 8> f = {
      1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto poly = [](const std::array<double, 8>& coef, double r) {
    double acc = coef[7];
    for (int i = 6; i >= 0; --i) acc = acc * r + coef[i];
    return acc;
  };

  const double q = prob - 0.5;
  if (std::fabs(q) <= kSplit1) {
    const double r = kConst1 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double z = 0.0;
  if (r <= kSplit2) {
    r -= kConst2;
    z = poly(c, r) / poly(d, r);
  } else {
    r -= kSplit2;
    z = poly(e, r) / poly(f, r);
  }
  return q < 0.0 ? -z : z;
}

double normal_critical(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw UsageError("confidence level must lie strictly between 0 and 1");
  }
  return normal_quantile(0.5 + 0.5 * level);
}

namespace {

constexpr double kGammaEps = 1e-15;
constexpr int kGammaMaxIter = 10000;

double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_continued_fraction(double a, double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw UsageError("incomplete gamma requires a > 0 and x >= 0");
  }
}

}  // namespace

double gamma_p(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_series(a, x) : 1.0 - gamma_continued_fraction(a, x);
}

double gamma_q(double a, double x) {
  check_gamma_args(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_series(a, x) : gamma_continued_fraction(a, x);
}

double chi_squared_cdf(double x, double df) {
  if (!(df > 0.0)) throw UsageError("chi-squared degrees of freedom must be positive");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi_squared_sf(double x, double df) {
  if (!(df > 0.0)) throw UsageError("chi-squared degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace sdid::dist
