#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <deque>
#include <initializer_list>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qosg {

/// A point in N^d. Used for polynomial degrees, tensor levels and grid
/// indices alike. Ordering is graded-lexicographic: total degree first,
/// ties broken lexicographically.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : entries_(dim, 0) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) { validate(); }
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) { validate(); }

  [[nodiscard]] std::size_t dim() const noexcept { return entries_.size(); }
  [[nodiscard]] int operator[](std::size_t k) const { return entries_[k]; }
  int& operator[](std::size_t k) { return entries_[k]; }
  [[nodiscard]] std::span<const int> entries() const noexcept { return entries_; }
  [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
  [[nodiscard]] auto end() const noexcept { return entries_.end(); }

  [[nodiscard]] long total() const noexcept {
    return std::accumulate(entries_.begin(), entries_.end(), 0L);
  }

  /// Componentwise partial order.
  [[nodiscard]] bool leq(const MultiIndex& other) const noexcept {
    for (std::size_t k = 0; k < entries_.size(); ++k)
      if (entries_[k] > other.entries_[k]) return false;
    return true;
  }

  [[nodiscard]] MultiIndex shifted(std::size_t k, int delta) const {
    MultiIndex out = *this;
    out.entries_[k] += delta;
    return out;
  }

  [[nodiscard]] MultiIndex plus_scalar(int delta) const {
    MultiIndex out = *this;
    for (auto& e : out.entries_) e += delta;
    return out;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
    if (auto c = a.total() <=> b.total(); c != 0) return c;
    return a.entries_ <=> b.entries_;
  }

  friend std::ostream& operator<<(std::ostream& os, const MultiIndex& mi) {
    os << '(';
    for (std::size_t k = 0; k < mi.dim(); ++k) os << (k ? "," : "") << mi[k];
    return os << ')';
  }

 private:
  void validate() const {
    for (int e : entries_)
      if (e < 0) throw std::invalid_argument("multi-index entries must be non-negative");
  }

  std::vector<int> entries_;
};

/// An immutable, duplicate-free, graded-lex sorted collection of multi-indices
/// of a fixed dimension.
class IndexSet {
 public:
  explicit IndexSet(std::size_t dim = 1) : dim_(dim) {
    if (dim == 0) throw std::invalid_argument("index set dimension must be >= 1");
  }

  IndexSet(std::size_t dim, std::vector<MultiIndex> members) : IndexSet(dim) {
    for (const auto& m : members)
      if (m.dim() != dim) throw std::invalid_argument("multi-index dimension mismatch");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    members_ = std::move(members);
    lower_ = check_lower();
  }

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return members_.size(); }
  [[nodiscard]] bool empty() const noexcept { return members_.empty(); }
  [[nodiscard]] bool lower() const noexcept { return lower_; }
  [[nodiscard]] const std::vector<MultiIndex>& members() const noexcept { return members_; }
  [[nodiscard]] auto begin() const noexcept { return members_.begin(); }
  [[nodiscard]] auto end() const noexcept { return members_.end(); }
  [[nodiscard]] const MultiIndex& operator[](std::size_t i) const { return members_[i]; }

  [[nodiscard]] bool contains(const MultiIndex& mi) const {
    return std::binary_search(members_.begin(), members_.end(), mi);
  }

  [[nodiscard]] bool includes(const IndexSet& other) const {
    return std::includes(members_.begin(), members_.end(), other.members_.begin(),
                         other.members_.end());
  }

  /// Largest entry along dimension k (0 for an empty set).
  [[nodiscard]] int max_entry(std::size_t k) const {
    int out = 0;
    for (const auto& m : members_) out = std::max(out, m[k]);
    return out;
  }

  [[nodiscard]] IndexSet united(const IndexSet& other) const {
    if (other.dim_ != dim_) throw std::invalid_argument("index set dimension mismatch");
    std::vector<MultiIndex> out;
    out.reserve(members_.size() + other.members_.size());
    std::set_union(members_.begin(), members_.end(), other.members_.begin(),
                   other.members_.end(), std::back_inserter(out));
    return IndexSet(dim_, std::move(out));
  }

  [[nodiscard]] IndexSet minus(const IndexSet& other) const {
    std::vector<MultiIndex> out;
    std::set_difference(members_.begin(), members_.end(), other.members_.begin(),
                        other.members_.end(), std::back_inserter(out));
    return IndexSet(dim_, std::move(out));
  }

  friend bool operator==(const IndexSet& a, const IndexSet& b) {
    return a.dim_ == b.dim_ && a.members_ == b.members_;
  }

 private:
  [[nodiscard]] bool check_lower() const {
    for (const auto& m : members_)
      for (std::size_t k = 0; k < dim_; ++k)
        if (m[k] > 0 && !contains(m.shifted(k, -1))) return false;
    return true;
  }

  std::size_t dim_;
  std::vector<MultiIndex> members_;
  bool lower_ = true;
};

/// Decay rates (alpha) and logarithmic corrections (beta) of the curved set.
struct CurvedWeights {
  std::vector<double> alpha;
  std::vector<double> beta;

  [[nodiscard]] std::size_t dim() const noexcept { return alpha.size(); }

  /// alpha . nu + beta . log(nu + 1), accumulated left to right.
  [[nodiscard]] double weight(std::span<const int> nu) const {
    double w = 0.0;
    for (std::size_t k = 0; k < nu.size(); ++k)
      w += alpha[k] * nu[k] + beta[k] * std::log(nu[k] + 1.0);
    return w;
  }

  [[nodiscard]] double axis_weight(std::size_t k, int n) const {
    return alpha[k] * n + beta[k] * std::log(n + 1.0);
  }

  /// Integer minimiser of the convex axis weight over n >= 0 (0 when beta >= 0).
  [[nodiscard]] int axis_argmin(std::size_t k) const {
    if (beta[k] >= 0.0) return 0;
    const double x = -beta[k] / alpha[k] - 1.0;
    if (x <= 0.0) return 0;
    const int lo = static_cast<int>(std::floor(x));
    return axis_weight(k, lo + 1) < axis_weight(k, lo) ? lo + 1 : lo;
  }
};

enum class ClassicKind { tensor, total_degree, hyperbolic, smolyak };

inline bool is_lower(const IndexSet& s) { return s.lower(); }

/// Smallest lower superset: union of the boxes {j : j <= nu} over members.
inline IndexSet lower_completion(const IndexSet& s) {
  if (s.lower()) return s;
  std::set<MultiIndex> out;
  std::vector<MultiIndex> stack(s.begin(), s.end());
  while (!stack.empty()) {
    MultiIndex m = std::move(stack.back());
    stack.pop_back();
    if (!out.insert(m).second) continue;
    for (std::size_t k = 0; k < m.dim(); ++k)
      if (m[k] > 0) stack.push_back(m.shifted(k, -1));
  }
  return IndexSet(s.dim(), std::vector<MultiIndex>(out.begin(), out.end()));
}

/// Enumerates the lower set {nu : member(nu)} by a breadth-first sweep from the
/// origin. The predicate must be downward closed and hold on a finite set.
template <typename Predicate>
IndexSet enumerate_lower(std::size_t dim, Predicate&& member) {
  std::set<MultiIndex> found;
  std::deque<MultiIndex> queue;
  MultiIndex origin(dim);
  if (!member(origin)) return IndexSet(dim);
  found.insert(origin);
  queue.push_back(origin);
  while (!queue.empty()) {
    MultiIndex m = std::move(queue.front());
    queue.pop_front();
    for (std::size_t k = 0; k < dim; ++k) {
      MultiIndex next = m.shifted(k, 1);
      if (found.contains(next)) continue;
      if (!member(next)) continue;
      found.insert(next);
      queue.push_back(std::move(next));
    }
  }
  return lower_completion(IndexSet(dim, std::vector<MultiIndex>(found.begin(), found.end())));
}

namespace detail {
inline void require_positive(std::span<const double> alpha) {
  if (alpha.empty()) throw std::invalid_argument("weight vector must be non-empty");
  for (double a : alpha)
    if (!(a > 0.0)) throw std::invalid_argument("alpha entries must be strictly positive");
}
}  // namespace detail

/// Lower completion of {nu : alpha.nu + beta.log(nu+1) <= L}.
///
/// Each axis weight is convex in nu_k, so nu belongs to the completion iff the
/// cheapest index dominating it, max(nu, argmin), satisfies the inequality.
/// That predicate is downward closed and the set can be swept from the origin.
inline IndexSet lambda_curved(const CurvedWeights& w, double level) {
  detail::require_positive(w.alpha);
  if (w.beta.size() != w.alpha.size())
    throw std::invalid_argument("alpha and beta must have the same length");
  const std::size_t d = w.dim();
  std::vector<int> argmin(d);
  for (std::size_t k = 0; k < d; ++k) argmin[k] = w.axis_argmin(k);
  std::vector<int> probe(d);
  return enumerate_lower(d, [&](const MultiIndex& nu) {
    for (std::size_t k = 0; k < d; ++k) probe[k] = std::max(nu[k], argmin[k]);
    return w.weight(probe) <= level;
  });
}

inline IndexSet lambda_classic(ClassicKind kind, std::span<const double> alpha, double level) {
  detail::require_positive(alpha);
  const std::size_t d = alpha.size();
  auto member = [&](const MultiIndex& nu) {
    switch (kind) {
      case ClassicKind::tensor: {
        double m = 0.0;
        for (std::size_t k = 0; k < d; ++k) m = std::max(m, alpha[k] * nu[k]);
        return m <= level;
      }
      case ClassicKind::total_degree: {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += alpha[k] * nu[k];
        return s <= level;
      }
      case ClassicKind::hyperbolic: {
        double p = 1.0;
        for (std::size_t k = 0; k < d; ++k) p *= std::pow(nu[k] + 1.0, alpha[k]);
        return p <= level;
      }
      case ClassicKind::smolyak: {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += alpha[k] * std::log2(nu[k] + 1.0);
        return s <= level;
      }
    }
    return false;
  };
  return enumerate_lower(d, member);
}

inline IndexSet total_degree(std::size_t dim, int degree) {
  return lambda_classic(ClassicKind::total_degree, std::vector<double>(dim, 1.0), degree);
}

inline ClassicKind parse_classic_kind(const std::string& name) {
  if (name == "tensor") return ClassicKind::tensor;
  if (name == "total_degree") return ClassicKind::total_degree;
  if (name == "hyperbolic") return ClassicKind::hyperbolic;
  if (name == "smolyak") return ClassicKind::smolyak;
  throw std::invalid_argument("unknown index set kind: " + name);
}

inline std::string to_string(ClassicKind kind) {
  switch (kind) {
    case ClassicKind::tensor: return "tensor";
    case ClassicKind::total_degree: return "total_degree";
    case ClassicKind::hyperbolic: return "hyperbolic";
    case ClassicKind::smolyak: return "smolyak";
  }
  return "?";
}

// CSV: header nu_1,...,nu_d then one row per member in graded-lex order.

inline void write_csv(std::ostream& os, const IndexSet& s) {
  for (std::size_t k = 0; k < s.dim(); ++k) os << (k ? "," : "") << "nu_" << (k + 1);
  os << '\n';
  for (const auto& m : s) {
    for (std::size_t k = 0; k < s.dim(); ++k) os << (k ? "," : "") << m[k];
    os << '\n';
  }
}

inline IndexSet read_index_set_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("index set CSV: missing header");
  const std::size_t dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<MultiIndex> members;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<int> entries;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) entries.push_back(std::stoi(cell));
    if (entries.size() != dim) throw std::runtime_error("index set CSV: ragged row");
    members.emplace_back(std::move(entries));
  }
  return IndexSet(dim, std::move(members));
}

}  // namespace qosg
