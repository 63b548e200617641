#include "sdid/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdid/error.hpp"

namespace sdid {

namespace {

std::string pairwise_note(const SubgroupContrast& contrast) {
  return "assumes subgroup parallel trends between " + to_string(contrast.level_a) + " and " +
         to_string(contrast.level_b) +
         ": E[Y1(0)-Y0 | x] equal at both levels; this is untestable and not implied by any "
         "other contrast";
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(EstimateMethod method) {
  return method == EstimateMethod::SubgroupMeans ? "subgroup_means" : "delta_regression";
}

std::string to_string(ExtrapolationPolicy policy) {
  return policy == ExtrapolationPolicy::Strict ? "strict" : "warn";
}

EffectModEstimate sdid_from_stats(const std::vector<LevelStats>& stats,
                                  const SubgroupContrast& contrast) {
  const LevelStats& a = find_level(stats, as_label(contrast.level_a));
  const LevelStats& b = find_level(stats, as_label(contrast.level_b));
  EffectModEstimate out;
  out.contrast = contrast;
  out.point = contrast.trivial() ? 0.0 : a.mean - b.mean;
  out.n_a = a.n;
  out.n_b = b.n;
  out.method = EstimateMethod::SubgroupMeans;
  out.assumption_notes.push_back(pairwise_note(contrast));
  return out;
}

EffectModEstimate sdid_categorical(const PanelDataset& panel, const SubgroupContrast& contrast) {
  if (panel.covariate_kind() != CovariateKind::Categorical) {
    throw UsageError("sdid_categorical requires a categorical covariate");
  }
  return sdid_from_stats(subgroup_stats(panel), contrast);
}

std::vector<EffectModEstimate> sdid_all_pairs(const PanelDataset& panel,
                                              const std::string& reference) {
  const auto stats = subgroup_stats(panel);
  find_level(stats, reference);
  std::vector<EffectModEstimate> out;
  for (const auto& entry : stats) {
    if (entry.level == reference) continue;
    out.push_back(sdid_from_stats(stats, {entry.level, reference}));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string BasisSpec::describe() const {
  switch (kind) {
    case Kind::SaturatedIndicators:
      return "saturated";
    case Kind::Polynomial:
      return "poly:" + std::to_string(degree);
    case Kind::LinearSpline: {
      if (knots.empty()) return "spline";
      std::string out = "spline:";
      for (std::size_t i = 0; i < knots.size(); ++i) {
        if (i) out += ",";
        out += format_double(knots[i]);
      }
      return out;
    }
  }
  return "unknown";
}

BasisSpec BasisSpec::parse(const std::string& text) {
  if (text == "saturated") return saturated();
  if (text == "spline") return spline();
  auto fail = [&] {
    throw UsageError("invalid basis '" + text + "' (expected saturated, poly:D, spline, or spline:k1,k2,...)");
  };
  if (text.rfind("poly:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int degree = std::stoi(text.substr(5), &used);
      if (used != text.size() - 5 || degree < 0) fail();
      return polynomial(degree);
    } catch (const std::logic_error&) {
      fail();
    }
  }
  if (text.rfind("spline:", 0) == 0) {
    std::vector<double> knots;
    std::stringstream ss(text.substr(7));
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        knots.push_back(std::stod(item, &used));
        if (used != item.size()) fail();
      } catch (const std::logic_error&) {
        fail();
      }
    }
    if (knots.empty()) fail();
    std::sort(knots.begin(), knots.end());
    return spline(std::move(knots));
  }
  fail();
  return {};
}

double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw UsageError("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

bool DeltaModel::in_support(const CovariateValue& x) const {
  if (basis_.kind == BasisSpec::Kind::SaturatedIndicators) {
    return std::find(levels_.begin(), levels_.end(), as_label(x)) != levels_.end();
  }
  const double v = as_real(x);
  return v >= x_min_ && v <= x_max_;
}

std::vector<double> DeltaModel::basis_row(const CovariateValue& x) const {
  const std::size_t p = basis_.kind == BasisSpec::Kind::SaturatedIndicators
                            ? levels_.size()
                            : (basis_.kind == BasisSpec::Kind::Polynomial
                                   ? static_cast<std::size_t>(basis_.degree) + 1
                                   : 2 + knots_.size());
  std::vector<double> row(p, 0.0);
  switch (basis_.kind) {
    case BasisSpec::Kind::SaturatedIndicators: {
      const auto& label = as_label(x);
      auto it = std::find(levels_.begin(), levels_.end(), label);
      if (it == levels_.end()) {
        std::string available;
        for (const auto& l : levels_) available += (available.empty() ? "" : ", ") + l;
        throw DataError("unknown covariate level '" + label + "'; available levels: " + available);
      }
      row[static_cast<std::size_t>(it - levels_.begin())] = 1.0;
      break;
    }
    case BasisSpec::Kind::Polynomial: {
      const double u = (as_real(x) - center_) / half_range_;
      double power = 1.0;
      for (std::size_t k = 0; k < p; ++k) {
        row[k] = power;
        power *= u;
      }
      break;
    }
    case BasisSpec::Kind::LinearSpline: {
      const double u = (as_real(x) - center_) / half_range_;
      row[0] = 1.0;
      row[1] = u;
      for (std::size_t j = 0; j < knots_.size(); ++j) {
        const double knot_u = (knots_[j] - center_) / half_range_;
        row[2 + j] = std::max(0.0, u - knot_u);
      }
      break;
    }
  }
  return row;
}

double DeltaModel::predict(const CovariateValue& x) const {
  const auto row = basis_row(x);
  double value = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) value += row[k] * coefficients_[k];
  return value;
}

std::vector<double> DeltaModel::polynomial_coefficients() const {
  if (basis_.kind != BasisSpec::Kind::Polynomial) {
    throw UsageError("polynomial_coefficients() needs a polynomial basis");
  }
  // sum_k c_k ((x - m) / h)^k expanded in powers of x.
  const std::size_t p = coefficients_.size();
  std::vector<double> out(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const double scale = coefficients_[k] / std::pow(half_range_, static_cast<double>(k));
    double binom = 1.0;  // C(k, j)
    for (std::size_t j = 0; j <= k; ++j) {
      out[j] += scale * binom * std::pow(-center_, static_cast<double>(k - j));
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  return out;
}

DeltaModel fit_delta_regression(const PanelDataset& panel, const BasisSpec& basis) {
  DeltaModel model;
  model.basis_ = basis;
  const auto& records = panel.records();
  const bool categorical = panel.covariate_kind() == CovariateKind::Categorical;

  if (basis.kind == BasisSpec::Kind::SaturatedIndicators) {
    if (!categorical) {
      throw UsageError("saturated indicator basis requires a categorical covariate");
    }
    model.levels_ = panel.levels();
  } else {
    if (categorical) {
      throw UsageError("basis '" + basis.describe() + "' requires a continuous covariate");
    }
    if (basis.kind == BasisSpec::Kind::Polynomial && basis.degree < 0) {
      throw UsageError("polynomial degree must be non-negative");
    }
    std::vector<double> xs;
    xs.reserve(records.size());
    for (const auto& r : records) xs.push_back(as_real(r.x));
    std::sort(xs.begin(), xs.end());
    model.x_min_ = xs.front();
    model.x_max_ = xs.back();
    model.center_ = 0.5 * (model.x_min_ + model.x_max_);
    model.half_range_ = 0.5 * (model.x_max_ - model.x_min_);
    if (model.half_range_ <= 0.0) {
      // Degenerate range: only an intercept can be identified.
      model.half_range_ = 1.0;
    }
    if (basis.kind == BasisSpec::Kind::LinearSpline) {
      if (!basis.knots.empty()) {
        model.knots_ = basis.knots;
      } else {
        const std::size_t k = basis.default_knot_count;
        for (std::size_t j = 1; j <= k; ++j) {
          const double q = sorted_quantile(xs, static_cast<double>(j) / static_cast<double>(k + 1));
          if (q > model.x_min_ && q < model.x_max_ &&
              (model.knots_.empty() || q > model.knots_.back())) {
            model.knots_.push_back(q);
          }
        }
      }
    }
  }

  const std::size_t p = model.basis_row(records.front().x).size();
  const std::size_t n = records.size();
  if (n <= p) {
    throw NumericalError("delta regression needs more units than basis columns (n = " +
                         std::to_string(n) + ", basis dimension = " + std::to_string(p) + ")");
  }

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = model.basis_row(records[i].x);
    for (std::size_t k = 0; k < p; ++k) {
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
    target(static_cast<Eigen::Index>(i)) = records[i].y_post - records[i].y_pre;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  const double max_diag = diag.size() ? diag.maxCoeff() : 0.0;
  const double min_diag = diag.size() ? diag.minCoeff() : 0.0;
  const double condition =
      min_diag > 0.0 ? max_diag / min_diag : std::numeric_limits<double>::infinity();
  model.diagnostics_.n = n;
  model.diagnostics_.rank = static_cast<std::size_t>(qr.rank());
  model.diagnostics_.condition_estimate = condition;
  if (model.diagnostics_.rank < p) {
    throw NumericalError("rank-deficient design for basis '" + basis.describe() + "' (rank " +
                         std::to_string(model.diagnostics_.rank) + " of " + std::to_string(p) +
                         ", condition estimate " + format_double(condition) + ")");
  }

  const Eigen::VectorXd beta = qr.solve(target);
  const Eigen::VectorXd residual = target - design * beta;
  model.coefficients_.assign(beta.data(), beta.data() + beta.size());
  model.diagnostics_.residual_variance =
      residual.squaredNorm() / static_cast<double>(n - p);
  return model;
}

EffectModEstimate sdid_continuous(const DeltaModel& model, const SubgroupContrast& contrast,
                                  ExtrapolationPolicy policy) {
  EffectModEstimate out;
  out.contrast = contrast;
  out.method = EstimateMethod::DeltaRegression;

  const bool saturated = model.basis().kind == BasisSpec::Kind::SaturatedIndicators;
  if (!saturated) {
    for (const auto* value : {&contrast.level_a, &contrast.level_b}) {
      if (model.in_support(*value)) continue;
      if (policy == ExtrapolationPolicy::Strict) {
        throw DataError("contrast value " + to_string(*value) + " lies outside the observed range [" +
                        format_double(model.x_min()) + ", " + format_double(model.x_max()) + "]");
      }
      out.extrapolated = true;
    }
  }

  const double at_a = model.predict(contrast.level_a);
  const double at_b = model.predict(contrast.level_b);
  out.point = contrast.trivial() ? 0.0 : at_a - at_b;
  out.assumption_notes.push_back(pairwise_note(contrast));
  out.assumption_notes.push_back("relies on the '" + model.basis().describe() +
                                 "' regression model for E[Y1-Y0 | x]");
  if (out.extrapolated) {
    out.assumption_notes.push_back("contrast extrapolates beyond the observed covariate range");
  }
  return out;
}

}  // namespace sdid
