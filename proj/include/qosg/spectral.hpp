#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "multiindex.hpp"
#include "sparse_grid.hpp"

namespace qosg {

/// Degree-nu Legendre polynomial, orthonormal under the uniform probability
/// measure on [-1,1]: sqrt(2 nu + 1) P_nu(y).
inline double legendre_1d(int nu, double y) {
  if (nu < 0) throw std::invalid_argument("legendre_1d: negative degree");
  double p0 = 1.0;
  if (nu == 0) return 1.0;
  double p1 = y;
  for (int n = 1; n < nu; ++n) {
    const double p2 = ((2.0 * n + 1.0) * y * p1 - n * p0) / (n + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * nu + 1.0) * p1;
}

/// Orthonormal Legendre values L_0(y) .. L_{count-1}(y).
inline std::vector<double> legendre_table(int count, double y) {
  std::vector<double> out(count);
  double p0 = 1.0, p1 = y;
  for (int n = 0; n < count; ++n) {
    double pn;
    if (n == 0)
      pn = 1.0;
    else if (n == 1)
      pn = y;
    else {
      pn = ((2.0 * n - 1.0) * y * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = pn;
    }
    out[n] = std::sqrt(2.0 * n + 1.0) * pn;
  }
  return out;
}

/// n-point Gauss-Legendre rule on [-1,1] with weights summing to 1.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs n >= 1");
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 1.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 1; k < n; ++k) {
          const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
          p0 = p1;
          p1 = p2;
        }
        // P_n = p1, P_{n-1} = p0
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      nodes[n - 1 - i] = -x;
      const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // (2 / ...) / 2
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
  }
};

/// Full tensor Gauss-Legendre rule, one 1D rule per dimension.
struct QuadratureRule {
  std::vector<GaussLegendre> axes;

  [[nodiscard]] std::vector<int> counts() const {
    std::vector<int> out;
    for (const auto& a : axes) out.push_back(static_cast<int>(a.nodes.size()));
    return out;
  }
  [[nodiscard]] std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.nodes.size();
    return n;
  }
};

/// n_k = max_{nu in lambda} nu_k + 1 points per axis: exact through degree
/// 2 n_k - 1 >= 2 max nu_k, enough for products of two members of P_lambda.
inline QuadratureRule quadrature_for(const IndexSet& lambda, int extra_points = 0) {
  if (lambda.empty()) throw std::invalid_argument("quadrature_for: empty index set");
  QuadratureRule q;
  for (std::size_t k = 0; k < lambda.dim(); ++k)
    q.axes.emplace_back(lambda.max_entry(k) + 1 + extra_points);
  return q;
}

struct LegendreExpansion {
  IndexSet lambda;
  std::map<MultiIndex, double> coeffs;

  /// Coefficients too small to take a logarithm of.
  [[nodiscard]] static bool usable(double c) { return c != 0.0 && std::abs(c) >= 1e-300; }

  [[nodiscard]] double evaluate(std::span<const double> y) const {
    const std::size_t d = lambda.dim();
    std::vector<std::vector<double>> tables(d);
    for (std::size_t k = 0; k < d; ++k) tables[k] = legendre_table(lambda.max_entry(k) + 1, y[k]);
    double sum = 0.0;
    for (const auto& [nu, c] : coeffs) {
      double term = c;
      for (std::size_t k = 0; k < d; ++k) term *= tables[k][nu[k]];
      sum += term;
    }
    return sum;
  }
};

/// Practical dimension cap for the full-tensor spectral path.
inline constexpr std::size_t spectral_max_dim = 10;

/// c_nu = E[f_interp L_nu] under the uniform probability measure, by tensor
/// Gauss quadrature of the interpolant only. The quadrature is sized for the
/// union of lambda and the interpolant's range so the result is exact.
inline LegendreExpansion legendre_coeffs(const Interpolant& interp, const IndexSet& lambda) {
  const std::size_t d = interp.dim();
  if (lambda.dim() != d) throw std::invalid_argument("legendre_coeffs: dimension mismatch");
  if (d > spectral_max_dim)
    throw std::invalid_argument("legendre_coeffs: tensor quadrature limited to d <= 10");
  const QuadratureRule q = quadrature_for(lambda.united(interp.range()));

  std::vector<std::vector<double>> axes(d);
  for (std::size_t k = 0; k < d; ++k) axes[k] = q.axes[k].nodes;
  const std::vector<double> values = interp.evaluate_tensor_grid(axes);

  // leg[k][point * width_k + degree]
  std::vector<std::vector<double>> leg(d);
  std::vector<std::size_t> width(d);
  for (std::size_t k = 0; k < d; ++k) {
    width[k] = static_cast<std::size_t>(lambda.max_entry(k) + 1);
    leg[k].resize(axes[k].size() * width[k]);
    for (std::size_t p = 0; p < axes[k].size(); ++p) {
      const auto t = legendre_table(static_cast<int>(width[k]), axes[k][p]);
      std::copy(t.begin(), t.end(), leg[k].begin() + p * width[k]);
    }
  }

  // Weighted values, then one pass per coefficient in fixed order.
  std::vector<double> weighted(values.size());
  std::vector<int> idx(d, 0);
  std::vector<std::vector<int>> points;
  points.reserve(values.size());
  for (std::size_t p = 0; p < values.size(); ++p) {
    double w = values[p];
    for (std::size_t k = 0; k < d; ++k) w *= q.axes[k].weights[idx[k]];
    weighted[p] = w;
    points.push_back(idx);
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < static_cast<int>(axes[k].size())) break;
      idx[k] = 0;
    }
  }

  LegendreExpansion out{lambda, {}};
  for (const auto& nu : lambda) {
    double c = 0.0;
    for (std::size_t p = 0; p < weighted.size(); ++p) {
      double term = weighted[p];
      for (std::size_t k = 0; k < d; ++k) term *= leg[k][points[p][k] * width[k] + nu[k]];
      c += term;
    }
    out.coeffs.emplace(nu, c);
  }
  return out;
}

inline void write_csv(std::ostream& os, const LegendreExpansion& e) {
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < e.lambda.dim(); ++k) os << "nu_" << (k + 1) << ',';
  os << "c_hat\n";
  for (const auto& [nu, c] : e.coeffs) {
    for (int v : nu) os << v << ',';
    os << c << '\n';
  }
  os.precision(old);
}

}  // namespace qosg
