#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qosg {

/// The fourteen nested one-dimensional rules.
enum class RuleKind {
  clenshaw_curtis,
  fejer2,
  rleja,
  rleja_double2,
  rleja_double4,
  rleja_odd,
  leja,
  leja_odd,
  max_lebesgue,
  max_lebesgue_odd,
  min_lebesgue,
  min_lebesgue_odd,
  min_delta,
  min_delta_odd,
};

inline constexpr std::array<RuleKind, 14> all_rules = {
    RuleKind::clenshaw_curtis, RuleKind::fejer2,           RuleKind::rleja,
    RuleKind::rleja_double2,   RuleKind::rleja_double4,    RuleKind::rleja_odd,
    RuleKind::leja,            RuleKind::leja_odd,         RuleKind::max_lebesgue,
    RuleKind::max_lebesgue_odd, RuleKind::min_lebesgue,    RuleKind::min_lebesgue_odd,
    RuleKind::min_delta,       RuleKind::min_delta_odd,
};

inline constexpr std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::clenshaw_curtis: return "clenshaw_curtis";
    case RuleKind::fejer2: return "fejer2";
    case RuleKind::rleja: return "rleja";
    case RuleKind::rleja_double2: return "rleja_double2";
    case RuleKind::rleja_double4: return "rleja_double4";
    case RuleKind::rleja_odd: return "rleja_odd";
    case RuleKind::leja: return "leja";
    case RuleKind::leja_odd: return "leja_odd";
    case RuleKind::max_lebesgue: return "max_lebesgue";
    case RuleKind::max_lebesgue_odd: return "max_lebesgue_odd";
    case RuleKind::min_lebesgue: return "min_lebesgue";
    case RuleKind::min_lebesgue_odd: return "min_lebesgue_odd";
    case RuleKind::min_delta: return "min_delta";
    case RuleKind::min_delta_odd: return "min_delta_odd";
  }
  return "?";
}

inline RuleKind parse_rule(std::string_view name) {
  for (RuleKind k : all_rules)
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown rule: " + std::string(name));
}

/// Greedy objective families. Odd variants share the node sequence of their
/// one-point counterpart and only change the growth.
enum class GreedyKind { leja, max_lebesgue, min_lebesgue, min_delta };

inline std::optional<GreedyKind> greedy_family(RuleKind kind) {
  switch (kind) {
    case RuleKind::leja:
    case RuleKind::leja_odd: return GreedyKind::leja;
    case RuleKind::max_lebesgue:
    case RuleKind::max_lebesgue_odd: return GreedyKind::max_lebesgue;
    case RuleKind::min_lebesgue:
    case RuleKind::min_lebesgue_odd: return GreedyKind::min_lebesgue;
    case RuleKind::min_delta:
    case RuleKind::min_delta_odd: return GreedyKind::min_delta;
    default: return std::nullopt;
  }
}

/// Number of nodes m(l) at level l; m(-1) = 0 for every rule.
inline int growth(RuleKind kind, int level) {
  if (level < -1) throw std::invalid_argument("growth: level must be >= -1");
  if (level == -1) return 0;
  const int l = level;
  switch (kind) {
    case RuleKind::clenshaw_curtis: return l == 0 ? 1 : (1 << l) + 1;
    case RuleKind::fejer2: return (1 << (l + 1)) - 1;
    case RuleKind::rleja:
    case RuleKind::leja:
    case RuleKind::max_lebesgue:
    case RuleKind::min_lebesgue:
    case RuleKind::min_delta: return l + 1;
    case RuleKind::rleja_odd:
    case RuleKind::leja_odd:
    case RuleKind::max_lebesgue_odd:
    case RuleKind::min_lebesgue_odd:
    case RuleKind::min_delta_odd: return 2 * l + 1;
    case RuleKind::rleja_double2: {
      if (l == 0) return 1;
      if (l == 1) return 3;
      // 2^(h+1) * (1 + frac(l/2)) + 1 with h = floor(l/2)
      const int h = l / 2;
      return (1 << (h + 1)) + ((l % 2) ? (1 << h) : 0) + 1;
    }
    case RuleKind::rleja_double4: {
      if (l == 0) return 1;
      if (l == 1) return 3;
      // 2^(2+q) * (1 + r/4) + 1 with q, r = divmod(l - 2, 4)
      const int q = (l - 2) / 4;
      const int r = (l - 2) % 4;
      return (1 << q) * (4 + r) + 1;
    }
  }
  return 0;
}

/// True when m(l) = l + 1.
inline bool unit_growth(RuleKind kind) { return growth(kind, 1) == 2 && growth(kind, 2) == 3; }

/// Smallest level l with m(l) >= count (count >= 1).
inline int level_of_node(RuleKind kind, int count) {
  int l = 0;
  while (growth(kind, l) < count) ++l;
  return l;
}

namespace detail {

inline int ceil_log2(long n) {
  int k = 0;
  while ((1L << k) < n) ++k;
  return k;
}

/// R-Leja angle sequence theta_j, j >= 1.
inline std::vector<double> rleja_angles(int count) {
  std::vector<double> theta(std::max(count, 3) + 1, 0.0);
  theta[1] = 0.0;
  theta[2] = std::numbers::pi;
  theta[3] = std::numbers::pi / 2.0;
  for (int j = 4; j <= count; ++j)
    theta[j] = (j % 2) ? theta[j - 1] + std::numbers::pi : 0.5 * theta[j / 2 + 1];
  return theta;
}

}  // namespace detail

namespace detail {

/// cos(k pi / 2^e) for the odd k with the same cosine as theta.
inline double dyadic_node(double theta, int e) {
  constexpr double pi = std::numbers::pi;
  double t = std::fmod(theta, 2.0 * pi);
  if (t > pi) t = 2.0 * pi - t;
  const long k = std::lround(std::ldexp(t / pi, e));
  return std::cos(std::ldexp(static_cast<double>(k), -e) * pi);
}

/// First `count` nodes of a closed-form rule. With `leja_order` the
/// Clenshaw-Curtis and Fejer-2 levels are listed in centered R-Leja order
/// instead of the monotone sequence order; the level sets are the same.
inline std::vector<double> closed_form_nodes(RuleKind kind, int count, bool leja_order = false) {
  std::vector<double> out(static_cast<std::size_t>(std::max(count, 0)));
  if (count <= 0) return out;
  const std::vector<double> theta = rleja_angles(count + 2);
  for (int j = 1; j <= count; ++j) {
    double y = 0.0;
    switch (kind) {
      case RuleKind::clenshaw_curtis:
        if (j == 1) y = 0.0;
        else if (j == 2) y = 1.0;
        else if (j == 3) y = -1.0;
        else if (leja_order) y = dyadic_node(theta[j], ceil_log2(j - 1));
        else y = std::cos(std::ldexp(2.0 * j - 3.0, -ceil_log2(j - 1)) * std::numbers::pi);
        break;
      case RuleKind::fejer2:
        // The interior of the next Clenshaw-Curtis level: skip positions 2 and 3.
        if (j == 1) y = 0.0;
        else if (leja_order) y = dyadic_node(theta[j + 2], ceil_log2(j + 1));
        else y = std::cos(std::ldexp(2.0 * j + 1.0, -ceil_log2(j + 1)) * std::numbers::pi);
        if (std::abs(y) < 1e-15) y = 0.0;
        break;
      case RuleKind::rleja:
        y = std::cos(theta[j]);
        if (std::abs(y) < 1e-15) y = 0.0;
        break;
      case RuleKind::rleja_double2:
      case RuleKind::rleja_double4:
      case RuleKind::rleja_odd:
        if (j == 1) y = 0.0;
        else if (j == 2) y = 1.0;
        else if (j == 3) y = -1.0;
        else y = std::cos(theta[j]);
        break;
      default:
        throw std::invalid_argument("rule " + std::string(to_string(kind)) +
                                    " has no closed-form nodes");
    }
    out[j - 1] = y;
  }
  return out;
}

}  // namespace detail

/// Closed-form node y_j (1-based) for the rules that have one.
inline double closed_form_node(RuleKind kind, int j) {
  if (j < 1) throw std::invalid_argument("node index must be >= 1");
  return detail::closed_form_nodes(kind, j).back();
}

// ---------------------------------------------------------------------------
// Lebesgue function machinery

/// Lebesgue function sum_j |psi_j(y)| of the Lagrange basis on `nodes`.
/// Uses barycentric weights rescaled by their largest magnitude.
class LebesgueFunction {
 public:
  explicit LebesgueFunction(std::span<const double> nodes) : nodes_(nodes.begin(), nodes.end()) {
    const std::size_t n = nodes_.size();
    if (n == 0) throw std::invalid_argument("Lebesgue function needs at least one node");
    std::vector<double> logw(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        if (i != j) {
          const double diff = nodes_[j] - nodes_[i];
          if (diff == 0.0) throw std::invalid_argument("duplicate interpolation nodes");
          logw[j] -= std::log(std::abs(diff));
        }
    log_scale_ = *std::max_element(logw.begin(), logw.end());
    weights_.resize(n);
    for (std::size_t j = 0; j < n; ++j) weights_[j] = std::exp(logw[j] - log_scale_);
    scale_ = std::exp(log_scale_);
  }

  [[nodiscard]] double operator()(double y) const {
    double omega = 1.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const double diff = y - nodes_[j];
      if (diff == 0.0) return 1.0;
      omega *= std::abs(diff);
      sum += weights_[j] / std::abs(diff);
    }
    return omega * scale_ * sum;
  }

  [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  double log_scale_ = 0.0;
  double scale_ = 1.0;
};

namespace detail {

inline constexpr double golden = 0.6180339887498949;

/// Golden-section maximisation of f on [a, b]; returns (argmax, max).
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, int iterations = 60) {
  double x1 = b - golden * (b - a);
  double x2 = a + golden * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < iterations && b - a > 1e-15; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + golden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - golden * (b - a);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

/// Maximum of the Lebesgue function, using that it has exactly one local
/// maximum between consecutive nodes and is monotone outside the node hull.
inline double lebesgue_max_piecewise(const LebesgueFunction& leb, int iterations = 60) {
  std::vector<double> sorted(leb.nodes().begin(), leb.nodes().end());
  std::sort(sorted.begin(), sorted.end());
  double best = std::max(leb(-1.0), leb(1.0));
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
    best = std::max(best, golden_max(leb, sorted[i], sorted[i + 1], iterations).second);
  return best;
}

}  // namespace detail

inline constexpr int default_probe_count = 100000;
inline constexpr int default_candidate_count = (1 << 17) + 1;
inline constexpr int default_min_lebesgue_candidates = 10000;

/// Operator norm estimate max_y sum_j |psi_j(y)| on a uniform probe grid of
/// [-1,1], followed by golden-section refinement in the best probe cell.
inline double lebesgue_constant(std::span<const double> nodes,
                                int probe_count = default_probe_count) {
  if (probe_count < 2) throw std::invalid_argument("probe_count must be >= 2");
  LebesgueFunction leb(nodes);
  if (nodes.size() == 1) return 1.0;
  double best = 0.0;
  int best_i = 0;
  const double h = 2.0 / (probe_count - 1);
  for (int i = 0; i < probe_count; ++i) {
    const double v = leb(-1.0 + i * h);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double a = std::max(-1.0, -1.0 + (best_i - 1) * h);
  const double b = std::min(1.0, -1.0 + (best_i + 1) * h);
  return std::max(best, detail::golden_max(leb, a, b).second);
}

// ---------------------------------------------------------------------------
// Greedy sequences

struct GreedyOptions {
  int candidate_count = 0;  ///< 0 selects the per-family default
};

namespace detail {

/// Chebyshev-distributed candidates ordered right to left: cos(k pi / (N-1)).
inline std::vector<double> chebyshev_candidates(int count) {
  std::vector<double> c(count);
  for (int k = 0; k < count; ++k) c[k] = std::cos(k * std::numbers::pi / (count - 1));
  c.front() = 1.0;
  c.back() = -1.0;
  if (count % 2 == 1) c[count / 2] = 0.0;
  return c;
}

inline double log_abs_omega(std::span<const double> nodes, double y) {
  double s = 0.0;
  for (double x : nodes) s += std::log(std::abs(y - x));
  return s;
}

/// Normalised barycentric weights: log scale and |w_j| / max |w|.
inline std::pair<double, std::vector<double>> scaled_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> logw(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) logw[j] -= std::log(std::abs(nodes[j] - nodes[i]));
  const double scale = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = std::exp(logw[j] - scale);
  return {scale, std::move(w)};
}

/// log of the Lebesgue function of `nodes` at y, given log|omega(y)|.
inline double log_lebesgue_at(std::span<const double> nodes, double log_scale,
                              std::span<const double> w, double log_omega, double y) {
  double sum = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) sum += w[j] / std::abs(y - nodes[j]);
  return log_omega + log_scale + std::log(sum);
}

/// Lebesgue constant of nodes + {y}, via the per-interval maximum.
inline double lebesgue_with(std::span<const double> nodes, double y, int iterations) {
  std::vector<double> all(nodes.begin(), nodes.end());
  all.push_back(y);
  return lebesgue_max_piecewise(LebesgueFunction(all), iterations);
}

/// Cheap screen of the same quantity: a few samples per interval.
inline double lebesgue_with_coarse(std::span<const double> nodes, double y) {
  std::vector<double> all(nodes.begin(), nodes.end());
  all.push_back(y);
  LebesgueFunction leb(all);
  std::sort(all.begin(), all.end());
  double best = std::max(leb(-1.0), leb(1.0));
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    for (double t : {0.2, 0.35, 0.5, 0.65, 0.8})
      best = std::max(best, leb(all[i] + t * (all[i + 1] - all[i])));
  return best;
}

}  // namespace detail

/// Greedy node sequence with y_1 = 0. Each new node optimises the family's
/// objective over Chebyshev candidates of [-1,1] (right-most wins ties), then a
/// golden-section pass refines inside the winning candidate cell.
inline std::vector<double> greedy_sequence(GreedyKind kind, int n, GreedyOptions opt = {}) {
  if (n < 1) throw std::invalid_argument("greedy_sequence: n must be >= 1");
  int count = opt.candidate_count;
  if (count == 0)
    count = kind == GreedyKind::min_lebesgue ? default_min_lebesgue_candidates
                                             : default_candidate_count;
  if (count < 10000) throw std::invalid_argument("candidate_count must be >= 10^4");

  const bool maximise = kind == GreedyKind::leja || kind == GreedyKind::max_lebesgue;
  const std::vector<double> cand = detail::chebyshev_candidates(count);
  std::vector<double> nodes{0.0};
  nodes.reserve(n);
  // Running log|omega(c)| for every candidate.
  std::vector<double> log_omega(count);
  for (int c = 0; c < count; ++c) log_omega[c] = std::log(std::abs(cand[c]));
  // Objective values are compared in log form; anything within this margin is
  // treated as a tie and resolved toward the right.
  constexpr double tie = 1e-12;

  while (static_cast<int>(nodes.size()) < n) {
    auto [log_scale, w] = detail::scaled_weights(nodes);
    double max_log_omega = -std::numeric_limits<double>::infinity();
    for (double v : log_omega) max_log_omega = std::max(max_log_omega, v);

    // Objective in log form; +/-inf where undefined.
    auto objective_at = [&](double y, double lom) -> double {
      switch (kind) {
        case GreedyKind::leja: return lom;
        case GreedyKind::max_lebesgue:
          if (!std::isfinite(lom)) return -std::numeric_limits<double>::infinity();
          return detail::log_lebesgue_at(nodes, log_scale, w, lom, y);
        case GreedyKind::min_delta: {
          if (!std::isfinite(lom)) return std::numeric_limits<double>::infinity();
          const double leb = std::exp(detail::log_lebesgue_at(nodes, log_scale, w, lom, y));
          return std::log1p(leb) + max_log_omega - lom;
        }
        case GreedyKind::min_lebesgue:
          if (!std::isfinite(lom)) return std::numeric_limits<double>::infinity();
          return std::log(detail::lebesgue_with_coarse(nodes, y));
      }
      return 0.0;
    };
    auto better = [&](double v, double best) {
      return maximise ? v > best + tie : v < best - tie;
    };

    std::vector<double> values(count);
    for (int c = 0; c < count; ++c) values[c] = objective_at(cand[c], log_omega[c]);

    int best = -1;
    for (int c = 0; c < count; ++c) {
      if (!std::isfinite(values[c])) continue;
      if (best < 0 || better(values[c], values[best])) best = c;
    }
    if (best < 0)
      throw std::runtime_error("greedy_sequence: objective non-finite at every candidate");

    if (kind == GreedyKind::min_lebesgue) {
      // Re-rank the best few screened candidates with the accurate inner max.
      std::vector<int> order;
      for (int c = 0; c < count; ++c)
        if (std::isfinite(values[c])) order.push_back(c);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return values[a] < values[b]; });
      order.resize(std::min<std::size_t>(order.size(), 8));
      std::sort(order.begin(), order.end());  // right-most first
      best = -1;
      double best_value = 0.0;
      for (int c : order) {
        const double v = std::log(detail::lebesgue_with(nodes, cand[c], 50));
        values[c] = v;
        if (best < 0 || v < best_value - tie) {
          best = c;
          best_value = v;
        }
      }
    }

    double y = cand[best];
    double yv = values[best];
    const double lo = cand[std::min(best + 1, count - 1)];
    const double hi = cand[std::max(best - 1, 0)];
    auto refine_objective = [&](double t) {
      const double lom = detail::log_abs_omega(nodes, t);
      double v = kind == GreedyKind::min_lebesgue
                     ? (std::isfinite(lom) ? std::log(detail::lebesgue_with(nodes, t, 50))
                                           : std::numeric_limits<double>::infinity())
                     : objective_at(t, lom);
      if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
      return maximise ? v : -v;
    };
    if (hi > lo) {
      auto [ty, tv] = detail::golden_max(refine_objective, lo, hi,
                                         kind == GreedyKind::min_lebesgue ? 30 : 60);
      const double tv_signed = maximise ? tv : -tv;
      if (std::isfinite(tv) && better(tv_signed, yv)) {
        y = ty;
        yv = tv_signed;
      }
    }
    if (kind == GreedyKind::leja && y > -1.0 && y < 1.0) {
      // log|omega| is concave between nodes; Newton on its derivative
      // recovers the digits golden section cannot resolve near a flat maximum.
      double t = y;
      for (int it = 0; it < 30; ++it) {
        double g = 0.0, h = 0.0;
        for (double x : nodes) {
          g += 1.0 / (t - x);
          h -= 1.0 / ((t - x) * (t - x));
        }
        const double next = t - g / h;
        if (!(next >= lo && next <= hi)) break;
        const bool done = std::abs(next - t) <= 1e-16;
        t = next;
        if (done) break;
      }
      if (detail::log_abs_omega(nodes, t) >= yv - tie) y = t;
    }
    for (double x : nodes)
      if (x == y) throw std::runtime_error("greedy_sequence: duplicate node selected");
    nodes.push_back(y);
    for (int c = 0; c < count; ++c) log_omega[c] += std::log(std::abs(cand[c] - y));
  }
  return nodes;
}

// ---------------------------------------------------------------------------
// Node tables

/// Horizon of the precomputed node tables.
inline constexpr int cached_node_horizon = 50;

namespace detail {

struct NodeCache {
  std::mutex mutex;
  std::map<GreedyKind, std::vector<double>> tables;
};

inline NodeCache& node_cache() {
  static NodeCache cache;
  return cache;
}

}  // namespace detail

/// The first `count` nodes of the rule's sequence. Greedy sequences are cached
/// per family (odd variants share the one-point table), at least 50 nodes deep
/// except for min_lebesgue, and extended on demand.
inline std::vector<double> rule_nodes(RuleKind kind, int count) {
  if (count < 0) throw std::invalid_argument("rule_nodes: negative count");
  if (auto family = greedy_family(kind)) {
    auto& cache = detail::node_cache();
    std::lock_guard lock(cache.mutex);
    auto& table = cache.tables[*family];
    if (static_cast<int>(table.size()) < count) {
      const int target =
          *family == GreedyKind::min_lebesgue ? count : std::max(count, cached_node_horizon);
      table = greedy_sequence(*family, target);
    }
    return {table.begin(), table.begin() + count};
  }
  return detail::closed_form_nodes(kind, count);
}

/// The nodes an interpolant is built on. Same level sets as rule_nodes, but
/// Clenshaw-Curtis and Fejer-2 levels are reordered so that the Newton
/// divided differences stay bounded past a few hundred points.
inline std::vector<double> interpolation_nodes(RuleKind kind, int count) {
  if (kind == RuleKind::clenshaw_curtis || kind == RuleKind::fejer2)
    return detail::closed_form_nodes(kind, count, true);
  return rule_nodes(kind, count);
}

/// Reference growth curve for the level-l operator norm (natural logs).
inline double lambda_model(RuleKind kind, int l) {
  if (l < 0) throw std::invalid_argument("lambda_model: level must be >= 0");
  const double s = std::sqrt(l + 1.0);
  switch (kind) {
    case RuleKind::clenshaw_curtis: return 2.0 / std::numbers::pi * std::log(std::ldexp(1.0, l) + 1.0);
    case RuleKind::fejer2: return 2.0 / std::numbers::pi * std::log(std::ldexp(1.0, l + 1) - 1.0);
    case RuleKind::rleja:
    case RuleKind::rleja_double2:
    case RuleKind::rleja_double4: return 1.5 * (l + 1);
    case RuleKind::rleja_odd: return 3.0 * (l + 1);
    case RuleKind::leja: return 3.0 * s;
    case RuleKind::leja_odd: return 6.0 * s;
    case RuleKind::max_lebesgue: return 4.0 * s;
    case RuleKind::max_lebesgue_odd: return 8.0 * s;
    case RuleKind::min_lebesgue: return 4.0 * s;
    case RuleKind::min_lebesgue_odd: return 8.0 * s;
    case RuleKind::min_delta: return 3.0 * s;
    case RuleKind::min_delta_odd: return 6.0 * s;
  }
  return 0.0;
}

/// Clenshaw-Curtis operator norm (2/pi) log(m(l) - 1) + 1, exact at l = 0.
inline double cc_lebesgue_reference(int l) {
  return 2.0 / std::numbers::pi * std::log(std::ldexp(1.0, l)) + 1.0;
}

/// Polynomial envelope lambda_l <= C_gamma (l+1)^gamma.
struct LebesgueGrowth {
  double c_gamma;
  double gamma;
};

inline LebesgueGrowth lebesgue_growth(RuleKind kind) {
  switch (kind) {
    case RuleKind::clenshaw_curtis:
    case RuleKind::fejer2: return {1.0, 1.0};  // envelope of the logarithmic growth
    case RuleKind::rleja:
    case RuleKind::rleja_double2:
    case RuleKind::rleja_double4: return {1.5, 1.0};
    case RuleKind::rleja_odd: return {3.0, 1.0};
    case RuleKind::leja:
    case RuleKind::min_delta: return {3.0, 0.5};
    case RuleKind::leja_odd:
    case RuleKind::min_delta_odd: return {6.0, 0.5};
    case RuleKind::max_lebesgue:
    case RuleKind::min_lebesgue: return {4.0, 0.5};
    case RuleKind::max_lebesgue_odd:
    case RuleKind::min_lebesgue_odd: return {8.0, 0.5};
  }
  return {1.0, 1.0};
}

/// A rule's nodes up to some level together with measured operator norms.
struct NodeSequence {
  RuleKind kind{};
  std::vector<double> nodes;
  LebesgueGrowth lebesgue_growth_model{};
  std::vector<double> lambda_table;  ///< measured lambda_l, l = 0..levels-1

  [[nodiscard]] int levels() const noexcept { return static_cast<int>(lambda_table.size()); }
};

inline NodeSequence make_node_sequence(RuleKind kind, int levels,
                                       int probe_count = default_probe_count) {
  if (levels < 1) throw std::invalid_argument("make_node_sequence: levels must be >= 1");
  NodeSequence seq;
  seq.kind = kind;
  seq.nodes = rule_nodes(kind, growth(kind, levels - 1));
  seq.lebesgue_growth_model = lebesgue_growth(kind);
  for (int l = 0; l < levels; ++l)
    seq.lambda_table.push_back(lebesgue_constant(
        std::span<const double>(seq.nodes).first(growth(kind, l)), probe_count));
  return seq;
}

}  // namespace qosg
