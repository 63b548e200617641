#pragma once

// Independent reference computations used only by tests. None of these call
// into the library's numerical code paths.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace sdid::testing {

/// Group-by-then-average over (label, value) pairs.
inline std::map<std::string, std::pair<std::size_t, double>> brute_group_means(
    const std::vector<std::pair<std::string, double>>& rows) {
  std::map<std::string, std::pair<std::size_t, long double>> acc;
  for (const auto& [label, value] : rows) {
    acc[label].first += 1;
    acc[label].second += value;
  }
  std::map<std::string, std::pair<std::size_t, double>> out;
  for (const auto& [label, a] : acc) {
    out[label] = {a.first, static_cast<double>(a.second / static_cast<long double>(a.first))};
  }
  return out;
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double eps,
                      int depth = 50) {
  auto step = [&](auto&& self, double lo, double hi, double flo, double fmid, double fhi,
                  double whole, double tol, int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid);
    const double rm = 0.5 * (mid + hi);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::fabs(left + right - whole) <= 15.0 * tol) {
      return left + right + (left + right - whole) / 15.0;
    }
    return self(self, lo, mid, flo, flm, fmid, left, tol / 2.0, d - 1) +
           self(self, mid, hi, fmid, frm, fhi, right, tol / 2.0, d - 1);
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return step(step, a, b, fa, fm, fb, whole, eps, depth);
}

/// Phi(x) by integrating the standard-normal density from 0.
inline double quadrature_normal_cdf(double x) {
  const auto density = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  const double half = simpson(density, 0.0, std::fabs(x), 1e-15);
  return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

/// Closed-form chi-squared survival for small integer df (Poisson-sum for even
/// df, erfc-plus-series for odd df), using only the C library's erfc/exp.
inline double closed_form_chi2_sf(double x, int df) {
  if (df % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < df / 2; ++j) {
      term *= (x / 2.0) / j;
      sum += term;
    }
    return std::exp(-x / 2.0) * sum;
  }
  double sum = std::erfc(std::sqrt(x / 2.0));
  // + sqrt(2x/pi) e^{-x/2} * sum_{j=1}^{(df-1)/2} x^{j-1} / (1*3*...*(2j-1))
  double term = std::sqrt(2.0 * x / std::numbers::pi) * std::exp(-x / 2.0);
  for (int j = 1; j <= (df - 1) / 2; ++j) {
    sum += term;
    term *= x / (2.0 * j + 1.0);
  }
  return sum;
}

/// Ordinary least squares through the normal equations in long double with
/// Gauss-Jordan elimination (partial pivoting). Adequate for small,
/// well-conditioned designs.
inline std::vector<double> normal_equations_ols(const std::vector<std::vector<double>>& rows,
                                                const std::vector<double>& y) {
  const std::size_t p = rows.front().size();
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < p; ++k) a[j][k] += static_cast<long double>(rows[i][j]) * rows[i][k];
      a[j][p] += static_cast<long double>(rows[i][j]) * y[i];
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::fabs(static_cast<double>(a[r][c])) > std::fabs(static_cast<double>(a[piv][c]))) piv = r;
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<double> beta(p);
  for (std::size_t j = 0; j < p; ++j) beta[j] = static_cast<double>(a[j][p] / a[j][j]);
  return beta;
}

inline bool rel_close(double a, double b, double rel, double abs_floor = 1e-300) {
  return std::fabs(a - b) <= std::max(rel * std::max(std::fabs(a), std::fabs(b)), abs_floor);
}

}  // namespace sdid::testing
