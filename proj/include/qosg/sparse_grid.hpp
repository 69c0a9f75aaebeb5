#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "multiindex.hpp"
#include "rules1d.hpp"

namespace qosg {

/// A lower set of tensor levels together with the rule that fixes m(l) and the nodes.
struct TensorSet {
  IndexSet theta;
  RuleKind rule = RuleKind::leja;

  [[nodiscard]] std::size_t dim() const noexcept { return theta.dim(); }
  friend bool operator==(const TensorSet&, const TensorSet&) = default;
};

/// m applied componentwise to i - 1.
inline std::vector<int> growth_below(RuleKind rule, const MultiIndex& i) {
  std::vector<int> out(i.dim());
  for (std::size_t k = 0; k < i.dim(); ++k) out[k] = growth(rule, i[k] - 1);
  return out;
}

/// Minimal tensor set whose interpolant range contains `lambda`:
/// { i : m(i - 1) in lambda }.
inline TensorSet theta_opt(const IndexSet& lambda, RuleKind rule) {
  if (lambda.empty()) throw std::invalid_argument("theta_opt: empty polynomial set");
  if (!lambda.lower()) throw std::invalid_argument("theta_opt: polynomial set is not lower");
  // Inverse of l -> m(l - 1) on its image.
  std::map<int, int> level_of;
  int max_entry = 0;
  for (std::size_t k = 0; k < lambda.dim(); ++k) max_entry = std::max(max_entry, lambda.max_entry(k));
  for (int l = 0; growth(rule, l - 1) <= max_entry; ++l) level_of[growth(rule, l - 1)] = l;

  std::vector<MultiIndex> levels;
  for (const auto& nu : lambda) {
    MultiIndex i(lambda.dim());
    bool in_image = true;
    for (std::size_t k = 0; k < nu.dim() && in_image; ++k) {
      auto it = level_of.find(nu[k]);
      if (it == level_of.end())
        in_image = false;
      else
        i[k] = it->second;
    }
    if (in_image) levels.push_back(std::move(i));
  }
  return {IndexSet(lambda.dim(), std::move(levels)), rule};
}

/// Smallest curved-set level L at which tensor level i enters theta_curved:
/// the weight of the cheapest polynomial index dominating m(i - 1).
inline double level_weight(const CurvedWeights& w, RuleKind rule, const MultiIndex& i) {
  std::vector<int> nu = growth_below(rule, i);
  for (std::size_t k = 0; k < nu.size(); ++k) nu[k] = std::max(nu[k], w.axis_argmin(k));
  return w.weight(nu);
}

/// Optimal tensor set of the curved polynomial set at level L. Identical to
/// theta_opt(lambda_curved(w, L), rule); for beta >= 0 this is exactly
/// { i : alpha.m(i-1) + beta.log(m(i-1)+1) <= L }.
inline TensorSet theta_curved(const CurvedWeights& w, double level, RuleKind rule) {
  detail::require_positive(w.alpha);
  if (w.beta.size() != w.alpha.size())
    throw std::invalid_argument("alpha and beta must have the same length");
  return {enumerate_lower(w.dim(), [&](const MultiIndex& i) { return level_weight(w, rule, i) <= level; }),
          rule};
}

/// Lower completion of the literal level-space membership test
/// alpha.m(i-1) + beta.log(m(i-1)+1) <= L. A subset of theta_curved; the two
/// differ only when some beta_k < 0.
inline TensorSet theta_curved_literal(const CurvedWeights& w, double level, RuleKind rule) {
  const TensorSet outer = theta_curved(w, level, rule);
  std::vector<MultiIndex> kept;
  for (const auto& i : outer.theta)
    if (w.weight(growth_below(rule, i)) <= level) kept.push_back(i);
  return {lower_completion(IndexSet(w.dim(), std::move(kept))), rule};
}

/// Number of grid nodes: sum over i of prod_k (m(i_k) - m(i_k - 1)).
inline std::size_t grid_node_count(const TensorSet& ts) {
  std::size_t total = 0;
  for (const auto& i : ts.theta) {
    std::size_t box = 1;
    for (std::size_t k = 0; k < i.dim(); ++k)
      box *= static_cast<std::size_t>(growth(ts.rule, i[k]) - growth(ts.rule, i[k] - 1));
    total += box;
  }
  return total;
}

namespace detail {

/// Visits every multi-index j with lo <= j <= hi (inclusive), last axis fastest.
template <typename F>
void for_each_in_box(const std::vector<int>& lo, const std::vector<int>& hi, F&& f) {
  const std::size_t d = lo.size();
  for (std::size_t k = 0; k < d; ++k)
    if (lo[k] > hi[k]) return;
  std::vector<int> cur = lo;
  while (true) {
    f(cur);
    std::size_t k = d;
    while (k > 0) {
      --k;
      if (++cur[k] <= hi[k]) break;
      cur[k] = lo[k];
      if (k == 0) return;
    }
    if (d == 0) return;
  }
}

struct MultiIndexHash {
  std::size_t operator()(std::span<const int> v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ULL;
    return h;
  }
  std::size_t operator()(const MultiIndex& m) const noexcept { return (*this)(m.entries()); }
};

}  // namespace detail

/// Grid indices (1-based) and coordinates of the sparse grid of a tensor set.
struct GridNodes {
  std::vector<MultiIndex> indices;           ///< graded-lex sorted
  std::vector<std::vector<double>> points;   ///< points[n] matches indices[n]
};

/// Grid indices only: the disjoint union of the boxes m(i-1)+1 <= j <= m(i).
inline std::vector<MultiIndex> grid_indices(const TensorSet& ts) {
  std::vector<MultiIndex> out;
  out.reserve(grid_node_count(ts));
  const std::size_t d = ts.dim();
  std::vector<int> lo(d), hi(d);
  for (const auto& i : ts.theta) {
    for (std::size_t k = 0; k < d; ++k) {
      lo[k] = growth(ts.rule, i[k] - 1) + 1;
      hi[k] = growth(ts.rule, i[k]);
    }
    detail::for_each_in_box(lo, hi, [&](const std::vector<int>& j) { out.emplace_back(j); });
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline int max_node_count(const TensorSet& ts) {
  int count = 1;
  for (std::size_t k = 0; k < ts.dim(); ++k)
    count = std::max(count, growth(ts.rule, ts.theta.max_entry(k)));
  return count;
}

inline GridNodes grid_nodes(const TensorSet& ts) {
  if (!ts.theta.lower()) throw std::invalid_argument("grid_nodes: tensor set is not lower");
  GridNodes g;
  g.indices = grid_indices(ts);
  const std::vector<double> y = interpolation_nodes(ts.rule, max_node_count(ts));
  g.points.reserve(g.indices.size());
  for (const auto& j : g.indices) {
    std::vector<double> p(j.dim());
    for (std::size_t k = 0; k < j.dim(); ++k) p[k] = y[j[k] - 1];
    g.points.push_back(std::move(p));
  }
  return g;
}

/// Integer weights t_i of the combination form:
/// t_i = sum over e in {0,1}^d with i + e in theta of (-1)^|e|. Zero weights are omitted.
inline std::map<MultiIndex, int> combination_weights(const TensorSet& ts) {
  std::map<MultiIndex, int> out;
  const std::size_t d = ts.dim();
  for (const auto& i : ts.theta) {
    int t = 0;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      MultiIndex j = i;
      for (std::size_t k = 0; k < d; ++k)
        if (mask & (1u << k)) j[k] += 1;
      if (ts.theta.contains(j)) t += (std::popcount(mask) % 2) ? -1 : 1;
    }
    if (t != 0) out.emplace(i, t);
  }
  return out;
}

/// Polynomial range of the interpolant: { j - 1 : j a grid index }.
inline IndexSet polynomial_range(const TensorSet& ts) {
  std::vector<MultiIndex> out;
  for (const auto& j : grid_indices(ts)) out.push_back(j.plus_scalar(-1));
  return IndexSet(ts.dim(), std::move(out));
}

/// Exact bit pattern of a coordinate vector; identifies a node across grids.
using NodeKey = std::vector<std::uint64_t>;

inline NodeKey node_key(std::span<const double> y) {
  NodeKey key(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) key[k] = std::bit_cast<std::uint64_t>(y[k]);
  return key;
}

enum class Extrapolation { error, warn, allow };

/// Thrown when an evaluation point lies outside [-1,1]^d.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Newton hierarchical basis on a nested 1D node sequence:
/// h_1 = 1, h_j(y) = prod_{i<j} (y - y_i) / (y_j - y_i).
class NewtonBasis {
 public:
  NewtonBasis() = default;
  explicit NewtonBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    // Every factor is doubled (exact in binary) so that long products stay
    // near 1 instead of underflowing: [-1,1] has logarithmic capacity 1/2.
    denom_.assign(nodes_.size(), 1.0);
    for (std::size_t j = 1; j < nodes_.size(); ++j)
      for (std::size_t i = 0; i < j; ++i) denom_[j] *= 2.0 * (nodes_[j] - nodes_[i]);
  }

  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }

  /// h_1(y) .. h_count(y) written to out[0 .. count-1].
  void evaluate(double y, std::size_t count, std::span<double> out) const {
    double running = 1.0;
    for (std::size_t j = 0; j < count; ++j) {
      out[j] = running / denom_[j];
      running *= 2.0 * (y - nodes_[j]);
    }
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> denom_;
};

/// Sparse-grid interpolant stored in hierarchical surplus form.
///
/// Grid indices are 1-based and kept in graded-lex order; samples and surpluses
/// are parallel arrays. The object is immutable once built; growing the tensor
/// set produces a new interpolant that reuses all existing surpluses.
class Interpolant {
 public:
  using SampleMap = std::map<MultiIndex, double>;

  Interpolant() = default;

  /// Builds from scratch; `samples` must hold f(y_j) for every grid index j.
  static Interpolant build(const TensorSet& ts, const SampleMap& samples) {
    Interpolant out;
    out.init_structure(ts, interpolation_nodes(ts.rule, max_node_count(ts)));
    out.samples_.resize(out.grid_.size());
    for (std::size_t n = 0; n < out.grid_.size(); ++n) {
      auto it = samples.find(out.grid_[n]);
      if (it == samples.end()) throw std::invalid_argument("compute_surpluses: missing sample");
      out.samples_[n] = it->second;
    }
    out.solve_surpluses();
    return out;
  }

  /// Grows to a superset tensor set. Existing surpluses are kept; new ones are
  /// solved for the new grid indices only, whose samples come from `fresh`.
  [[nodiscard]] Interpolant extended(const TensorSet& bigger, const SampleMap& fresh) const {
    if (bigger.rule != ts_.rule) throw std::invalid_argument("extended: rule mismatch");
    if (!bigger.theta.includes(ts_.theta))
      throw std::invalid_argument("extended: tensor set must be a superset");
    Interpolant out;
    std::vector<double> nodes = nodes1d_;
    const int needed = max_node_count(bigger);
    if (static_cast<int>(nodes.size()) < needed) nodes = interpolation_nodes(bigger.rule, needed);
    out.init_structure(bigger, std::move(nodes));
    out.samples_.assign(out.grid_.size(), 0.0);
    out.surpluses_.assign(out.grid_.size(), 0.0);
    std::vector<char> known(out.grid_.size(), 0);
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      const std::size_t m = out.position_.at(grid_[n]);
      out.samples_[m] = samples_[n];
      out.surpluses_[m] = surpluses_[n];
      known[m] = 1;
    }
    for (std::size_t m = 0; m < out.grid_.size(); ++m) {
      if (known[m]) continue;
      auto it = fresh.find(out.grid_[m]);
      if (it == fresh.end()) throw std::invalid_argument("extended: missing sample for new node");
      out.samples_[m] = it->second;
    }
    out.solve_surpluses_for(known);
    return out;
  }

  /// Restores an interpolant from stored data without touching the rule tables.
  static Interpolant restore(const TensorSet& ts, std::vector<double> nodes1d,
                             const SampleMap& samples, const SampleMap& surpluses) {
    Interpolant out;
    out.init_structure(ts, std::move(nodes1d));
    out.samples_.resize(out.grid_.size());
    out.surpluses_.resize(out.grid_.size());
    for (std::size_t n = 0; n < out.grid_.size(); ++n) {
      out.samples_[n] = samples.at(out.grid_[n]);
      out.surpluses_[n] = surpluses.at(out.grid_[n]);
    }
    return out;
  }

  [[nodiscard]] std::size_t dim() const noexcept { return ts_.dim(); }
  [[nodiscard]] const TensorSet& tensor_set() const noexcept { return ts_; }
  [[nodiscard]] RuleKind rule() const noexcept { return ts_.rule; }
  [[nodiscard]] std::size_t size() const noexcept { return grid_.size(); }
  [[nodiscard]] const std::vector<MultiIndex>& grid() const noexcept { return grid_; }
  [[nodiscard]] const std::vector<double>& samples() const noexcept { return samples_; }
  [[nodiscard]] const std::vector<double>& surpluses() const noexcept { return surpluses_; }
  [[nodiscard]] const std::vector<double>& nodes1d() const noexcept { return nodes1d_; }

  [[nodiscard]] std::vector<double> point(std::size_t n) const {
    std::vector<double> p(dim());
    for (std::size_t k = 0; k < dim(); ++k) p[k] = nodes1d_[grid_[n][k] - 1];
    return p;
  }

  [[nodiscard]] SampleMap surplus_map() const {
    SampleMap out;
    for (std::size_t n = 0; n < grid_.size(); ++n) out.emplace(grid_[n], surpluses_[n]);
    return out;
  }

  [[nodiscard]] SampleMap sample_map() const {
    SampleMap out;
    for (std::size_t n = 0; n < grid_.size(); ++n) out.emplace(grid_[n], samples_[n]);
    return out;
  }

  [[nodiscard]] IndexSet range() const {
    std::vector<MultiIndex> out;
    out.reserve(grid_.size());
    for (const auto& j : grid_) out.push_back(j.plus_scalar(-1));
    return IndexSet(dim(), std::move(out));
  }

  /// sum_j s_j H_j(y).
  [[nodiscard]] double evaluate(std::span<const double> y,
                                Extrapolation mode = Extrapolation::error) const {
    check_domain(y, mode);
    const std::size_t d = dim();
    const std::size_t width = max_index_;
    std::vector<double> h(d * width);
    for (std::size_t k = 0; k < d; ++k)
      basis_.evaluate(y[k], width, std::span<double>(h).subspan(k * width, width));
    double sum = 0.0;
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      double term = surpluses_[n];
      for (std::size_t k = 0; k < d; ++k) term *= h[k * width + grid_[n][k] - 1];
      sum += term;
    }
    return sum;
  }

  [[nodiscard]] std::vector<double> evaluate_batch(const std::vector<std::vector<double>>& points,
                                                   Extrapolation mode = Extrapolation::error) const {
    std::vector<double> out(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) out[p] = evaluate(points[p], mode);
    return out;
  }

  /// Values on the full tensor grid points[0] x ... x points[d-1], last axis fastest.
  [[nodiscard]] std::vector<double> evaluate_tensor_grid(
      const std::vector<std::vector<double>>& axes) const {
    const std::size_t d = dim();
    const std::size_t width = max_index_;
    // basis[k][q * width + j]
    std::vector<std::vector<double>> basis(d);
    std::size_t total = 1;
    for (std::size_t k = 0; k < d; ++k) {
      basis[k].resize(axes[k].size() * width);
      for (std::size_t q = 0; q < axes[k].size(); ++q)
        basis_.evaluate(axes[k][q], width, std::span<double>(basis[k]).subspan(q * width, width));
      total *= axes[k].size();
    }
    std::vector<double> out(total, 0.0);
    std::vector<int> q(d, 0);
    for (std::size_t p = 0; p < total; ++p) {
      double sum = 0.0;
      for (std::size_t n = 0; n < grid_.size(); ++n) {
        double term = surpluses_[n];
        for (std::size_t k = 0; k < d; ++k) term *= basis[k][q[k] * width + grid_[n][k] - 1];
        sum += term;
      }
      out[p] = sum;
      for (std::size_t k = d; k-- > 0;) {
        if (++q[k] < static_cast<int>(axes[k].size())) break;
        q[k] = 0;
      }
    }
    return out;
  }

  /// Combination-technique form sum_i t_i U^{m(i)}[f](y), using Lagrange
  /// polynomials on each full tensor. Kept for cross-validation.
  [[nodiscard]] double evaluate_combination(std::span<const double> y) const {
    const std::size_t d = dim();
    double sum = 0.0;
    for (const auto& [level, t] : combination_weights(ts_)) {
      std::vector<std::vector<double>> lagrange(d);
      std::vector<int> lo(d, 1), hi(d);
      for (std::size_t k = 0; k < d; ++k) {
        const int m = growth(ts_.rule, level[k]);
        hi[k] = m;
        lagrange[k].resize(m);
        for (int j = 0; j < m; ++j) {
          double v = 1.0;
          for (int r = 0; r < m; ++r)
            if (r != j) v *= (y[k] - nodes1d_[r]) / (nodes1d_[j] - nodes1d_[r]);
          lagrange[k][j] = v;
        }
      }
      double full = 0.0;
      detail::for_each_in_box(lo, hi, [&](const std::vector<int>& j) {
        double v = samples_[position_.at(MultiIndex(j))];
        for (std::size_t k = 0; k < d; ++k) v *= lagrange[k][j[k] - 1];
        full += v;
      });
      sum += t * full;
    }
    return sum;
  }

 private:
  void init_structure(const TensorSet& ts, std::vector<double> nodes) {
    if (!ts.theta.lower()) throw std::invalid_argument("interpolant: tensor set is not lower");
    if (ts.theta.empty()) throw std::invalid_argument("interpolant: empty tensor set");
    ts_ = ts;
    grid_ = grid_indices(ts);
    nodes1d_ = std::move(nodes);
    basis_ = NewtonBasis(nodes1d_);
    max_index_ = static_cast<std::size_t>(max_node_count(ts));
    position_.clear();
    position_.reserve(grid_.size());
    for (std::size_t n = 0; n < grid_.size(); ++n) position_.emplace(grid_[n], n);
  }

  void solve_surpluses() {
    surpluses_.assign(grid_.size(), 0.0);
    solve_surpluses_for(std::vector<char>(grid_.size(), 0));
  }

  /// Unitriangular solve in graded-lex order over the unknown positions:
  /// s_i = f(y_i) - sum_{j <= i, j != i} s_j H_j(y_i).
  void solve_surpluses_for(const std::vector<char>& known) {
    const std::size_t d = dim();
    const std::size_t width = max_index_;
    // table[a * width + b] = h_{b+1}(y_{a+1})
    std::vector<double> table(width * width, 0.0);
    for (std::size_t a = 0; a < width; ++a)
      basis_.evaluate(nodes1d_[a], width, std::span<double>(table).subspan(a * width, width));
    std::vector<int> lo(d, 1);
    for (std::size_t n = 0; n < grid_.size(); ++n) {
      if (known[n]) continue;
      const MultiIndex& i = grid_[n];
      std::vector<int> hi(i.begin(), i.end());
      double acc = samples_[n];
      detail::for_each_in_box(lo, hi, [&](const std::vector<int>& j) {
        if (std::equal(j.begin(), j.end(), i.begin())) return;
        double h = surpluses_[position_.at(MultiIndex(j))];
        for (std::size_t k = 0; k < d && h != 0.0; ++k)
          h *= table[static_cast<std::size_t>(i[k] - 1) * width + j[k] - 1];
        acc -= h;
      });
      surpluses_[n] = acc;
    }
  }

  void check_domain(std::span<const double> y, Extrapolation mode) const {
    if (y.size() != dim()) throw std::invalid_argument("evaluate: point dimension mismatch");
    bool inside = true;
    for (double v : y)
      if (!(v >= -1.0 && v <= 1.0)) inside = false;
    if (inside || mode == Extrapolation::allow) return;
    if (mode == Extrapolation::error)
      throw DomainError("evaluation point outside [-1,1]^d");
    std::clog << "warning: extrapolating outside [-1,1]^d\n";
  }

  TensorSet ts_;
  std::vector<MultiIndex> grid_;
  std::unordered_map<MultiIndex, std::size_t, detail::MultiIndexHash> position_;
  std::vector<double> nodes1d_;
  NewtonBasis basis_;
  std::size_t max_index_ = 1;
  std::vector<double> samples_;
  std::vector<double> surpluses_;
};

/// Surpluses for a tensor set given samples at every grid node.
inline Interpolant::SampleMap compute_surpluses(const TensorSet& ts,
                                                const Interpolant::SampleMap& samples) {
  return Interpolant::build(ts, samples).surplus_map();
}

/// Samples a callable at every grid node and builds the interpolant.
template <typename F>
Interpolant interpolate(const TensorSet& ts, F&& f) {
  const GridNodes g = grid_nodes(ts);
  Interpolant::SampleMap samples;
  for (std::size_t n = 0; n < g.indices.size(); ++n)
    samples.emplace(g.indices[n], f(std::span<const double>(g.points[n])));
  return Interpolant::build(ts, samples);
}

}  // namespace qosg
