#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multiindex.hpp"
#include "rules1d.hpp"

namespace qosg {

/// Fitted decay model log|c_nu| ~ -C - alpha.nu - beta.log(nu + 1).
struct FitParams {
  std::vector<double> alpha;
  std::vector<double> beta;
  double c_hat = 0.0;
  double residual = 0.0;         ///< root mean square of the fit residual
  std::size_t used = 0;          ///< number of coefficients in the regression
  std::set<std::size_t> corrected_dims;
  std::set<std::size_t> excluded_dims;

  [[nodiscard]] std::size_t dim() const noexcept { return alpha.size(); }
  [[nodiscard]] CurvedWeights weights() const { return {alpha, beta}; }

  /// alpha = 1, beta = 0: the fallback when nothing has been fitted yet.
  static FitParams isotropic(std::size_t d) {
    FitParams p;
    p.alpha.assign(d, 1.0);
    p.beta.assign(d, 0.0);
    return p;
  }
};

/// Raised when the data cannot support a fit; callers keep their previous parameters.
struct Unfittable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Replaces every entry <= 0 with the smallest strictly positive entry.
inline std::vector<double> adhoc_correction(std::vector<double> alpha,
                                            std::set<std::size_t>* corrected = nullptr) {
  double smallest = 0.0;
  for (double a : alpha)
    if (a > 0.0 && (smallest == 0.0 || a < smallest)) smallest = a;
  if (smallest == 0.0) throw Unfittable("adhoc_correction: no positive entry");
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (!(alpha[k] > 0.0)) {
      alpha[k] = smallest;
      if (corrected) corrected->insert(k);
    }
  return alpha;
}

/// Rescales to unit mean. Reporting only.
inline std::vector<double> normalize_alpha(std::vector<double> alpha) {
  if (alpha.empty()) throw std::invalid_argument("normalize_alpha: empty vector");
  const double mean = std::accumulate(alpha.begin(), alpha.end(), 0.0) / alpha.size();
  if (!(mean > 0.0)) throw std::invalid_argument("normalize_alpha: mean must be positive");
  for (auto& a : alpha) a /= mean;
  return alpha;
}

struct FitOptions {
  double min_magnitude = 1e-14;   ///< drop |c| <= min_magnitude * max|c|
  bool fit_beta = true;           ///< false pins beta = 0 (total-degree model)
  std::optional<std::vector<double>> row_weights;  ///< unused unless set; one per coefficient
};

/// Least-squares fit of the decay model to a coefficient map keyed by
/// 0-based polynomial exponents.
///
/// Dimensions whose exponents take a single value are excluded (alpha_k set to
/// the largest fitted alpha, beta_k = 0). Dimensions with exactly two distinct
/// exponents cannot separate nu_k from log(nu_k + 1); their beta_k is pinned to 0.
inline FitParams fit_curved(const std::map<MultiIndex, double>& coeffs, FitOptions opt = {}) {
  if (coeffs.empty()) throw Unfittable("fit: no coefficients");
  const std::size_t d = coeffs.begin()->first.dim();

  double cmax = 0.0;
  for (const auto& [nu, c] : coeffs)
    if (std::isfinite(c)) cmax = std::max(cmax, std::abs(c));
  const double threshold = opt.min_magnitude * cmax;

  std::vector<const MultiIndex*> rows;
  std::vector<double> response;
  std::vector<double> row_w;
  std::size_t pos = 0;
  for (const auto& [nu, c] : coeffs) {
    const bool ok = std::isfinite(c) && std::abs(c) > threshold && std::abs(c) >= 1e-300;
    if (ok) {
      rows.push_back(&nu);
      response.push_back(-std::log(std::abs(c)));
      row_w.push_back(opt.row_weights ? (*opt.row_weights)[pos] : 1.0);
    }
    ++pos;
  }
  if (rows.size() < 2 * d + 1)
    throw Unfittable("fit: " + std::to_string(rows.size()) + " usable coefficients, need " +
                     std::to_string(2 * d + 1));

  FitParams out;
  out.used = rows.size();
  // Columns: intercept, alpha_k for included dims, beta_k for dims with >= 3 levels.
  std::vector<std::size_t> alpha_dims, beta_dims;
  for (std::size_t k = 0; k < d; ++k) {
    std::set<int> distinct;
    for (const auto* nu : rows) distinct.insert((*nu)[k]);
    if (distinct.size() < 2) {
      out.excluded_dims.insert(k);
      continue;
    }
    alpha_dims.push_back(k);
    if (opt.fit_beta && distinct.size() >= 3) beta_dims.push_back(k);
  }
  if (alpha_dims.empty()) throw Unfittable("fit: every dimension is rank deficient");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index cols = 1 + static_cast<Eigen::Index>(alpha_dims.size() + beta_dims.size());
  Eigen::MatrixXd a(n, cols);
  Eigen::VectorXd b(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const MultiIndex& nu = *rows[r];
    const double sw = std::sqrt(row_w[r]);
    Eigen::Index c = 0;
    a(r, c++) = sw;
    for (std::size_t k : alpha_dims) a(r, c++) = sw * nu[k];
    for (std::size_t k : beta_dims) a(r, c++) = sw * std::log(nu[k] + 1.0);
    b(r) = sw * response[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < cols) throw Unfittable("fit: design matrix is rank deficient");
  const Eigen::VectorXd x = qr.solve(b);
  out.residual = std::sqrt((a * x - b).squaredNorm() / static_cast<double>(n));

  out.c_hat = x(0);
  std::vector<double> alpha(d, 0.0), beta(d, 0.0);
  Eigen::Index c = 1;
  for (std::size_t k : alpha_dims) alpha[k] = x(c++);
  for (std::size_t k : beta_dims) beta[k] = x(c++);

  std::vector<double> included(alpha_dims.size());
  for (std::size_t t = 0; t < alpha_dims.size(); ++t) included[t] = alpha[alpha_dims[t]];
  std::set<std::size_t> corrected_local;
  included = adhoc_correction(std::move(included), &corrected_local);
  for (std::size_t t = 0; t < alpha_dims.size(); ++t) alpha[alpha_dims[t]] = included[t];
  for (std::size_t t : corrected_local) out.corrected_dims.insert(alpha_dims[t]);

  const double largest = *std::max_element(included.begin(), included.end());
  for (std::size_t k : out.excluded_dims) {
    alpha[k] = largest;
    beta[k] = 0.0;
  }
  out.alpha = std::move(alpha);
  out.beta = std::move(beta);
  return out;
}

/// The same regression on hierarchical surpluses keyed by 1-based grid
/// indices; only meaningful for rules with m(l) = l + 1.
inline FitParams fit_surplus(const std::map<MultiIndex, double>& surpluses, RuleKind rule,
                             FitOptions opt = {}) {
  if (!unit_growth(rule))
    throw std::invalid_argument("fit_surplus: rule " + std::string(to_string(rule)) +
                                " does not have unit growth");
  std::map<MultiIndex, double> shifted;
  for (const auto& [j, s] : surpluses) shifted.emplace(j.plus_scalar(-1), s);
  return fit_curved(shifted, opt);
}

}  // namespace qosg
