#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fitting.hpp"
#include "multiindex.hpp"
#include "rules1d.hpp"
#include "sparse_grid.hpp"
#include "spectral.hpp"
#include "targets.hpp"

namespace qosg {

enum class FitSource { legendre, surplus };

/// Which decay model drives the growth. `fixed` never fits and keeps the
/// initial weights, which gives the isotropic reference scheme.
enum class FitModel { curved, total_degree, fixed };

struct InitialSet {
  enum class Kind { automatic, curved, classic };
  Kind kind = Kind::automatic;
  ClassicKind classic = ClassicKind::total_degree;
  std::vector<double> alpha;
  std::vector<double> beta;
  double level = 0.0;
};

struct ErrorProbe {
  int count = 1000;
  std::uint64_t seed = 0;
};

struct AdaptiveConfig {
  RuleKind rule = RuleKind::leja;
  std::size_t dim = 1;
  InitialSet initial;
  FitSource fit_source = FitSource::legendre;
  FitModel model = FitModel::curved;
  std::size_t target_new_nodes = 0;  ///< 0: minimal growth
  int max_iterations = 50;
  std::size_t max_samples = 1000;
  std::optional<ErrorProbe> probe;
  double min_magnitude = 1e-14;

  void validate() const {
    if (dim == 0) throw std::invalid_argument("config: dim must be >= 1");
    if (max_iterations < 0) throw std::invalid_argument("config: max_iterations must be >= 0");
    if (probe && probe->count < 1) throw std::invalid_argument("config: probe count must be >= 1");
    if (fit_source == FitSource::surplus && !unit_growth(rule))
      throw std::invalid_argument("config: surplus fitting needs a rule with m(l) = l + 1");
    if (fit_source == FitSource::legendre && dim > spectral_max_dim && !unit_growth(rule))
      throw std::invalid_argument("config: Legendre fitting is limited to d <= 10");
    if (initial.kind != InitialSet::Kind::automatic && initial.alpha.size() != dim)
      throw std::invalid_argument("config: initial alpha must have d entries");
    if (initial.kind == InitialSet::Kind::curved && initial.beta.size() != dim)
      throw std::invalid_argument("config: initial beta must have d entries");
  }

  /// Legendre fitting falls back to surpluses above the tensor-quadrature cap.
  [[nodiscard]] FitSource effective_fit_source() const noexcept {
    return (fit_source == FitSource::legendre && dim > spectral_max_dim) ? FitSource::surplus
                                                                          : fit_source;
  }
};

struct ConvergenceRecord {
  int iteration = 0;
  std::size_t node_count = 0;
  std::size_t new_node_count = 0;
  double level = std::numeric_limits<double>::quiet_NaN();  ///< L that produced this set
  FitParams fit;
  bool fitted = false;  ///< false: `fit` is the carried-over fallback
  std::optional<double> probe_error;
  double wall_time = 0.0;
};

/// Loop state. A state with an empty history has not sampled its initial grid yet.
struct AdaptiveState {
  int iteration = 0;
  TensorSet theta;
  Interpolant interp;
  FitParams fit;
  std::vector<ConvergenceRecord> history;
  std::map<NodeKey, double> cache;    ///< every value ever returned by the target
  std::vector<double> probe_values;   ///< target values at the probe points

  [[nodiscard]] bool started() const noexcept { return !history.empty(); }
};

/// No admissible growth fits into the remaining sample budget.
struct BudgetExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Uniform points in [-1,1]^d. The bit-level conversion keeps the sequence
/// identical across standard libraries.
inline std::vector<Point> probe_points(std::size_t dim, int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Point> out(static_cast<std::size_t>(count), Point(dim));
  for (auto& p : out)
    for (auto& v : p) v = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
  return out;
}

inline double linf_error(const Interpolant& interp, const std::vector<Point>& points,
                         const std::vector<double>& values) {
  double err = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    err = std::max(err, std::abs(interp.evaluate(points[i]) - values[i]));
  return err;
}

/// max over `count` uniform points of |interp - f|.
inline double mc_linf_error(const Interpolant& interp, const TargetSpec& target, int count,
                            std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("mc_linf_error: count must be >= 1");
  const auto points = probe_points(interp.dim(), count, seed);
  return linf_error(interp, points, target.evaluate(points));
}

struct LevelChoice {
  double level = 0.0;
  std::size_t new_nodes = 0;
};

namespace detail {

inline std::size_t box_size(RuleKind rule, const MultiIndex& i) {
  std::size_t box = 1;
  for (std::size_t k = 0; k < i.dim(); ++k)
    box *= static_cast<std::size_t>(growth(rule, i[k]) - growth(rule, i[k] - 1));
  return box;
}

/// Indices outside `set` whose backward neighbours all lie in it.
inline std::set<MultiIndex> margin(const std::set<MultiIndex>& set, std::size_t dim) {
  std::set<MultiIndex> out;
  for (const auto& i : set)
    for (std::size_t k = 0; k < dim; ++k) {
      MultiIndex j = i.shifted(k, 1);
      if (set.count(j) || out.count(j)) continue;
      bool admissible = true;
      for (std::size_t m = 0; m < dim && admissible; ++m)
        if (j[m] > 0 && !set.count(j.shifted(m, -1))) admissible = false;
      if (admissible) out.insert(std::move(j));
    }
  return out;
}

}  // namespace detail

/// Smallest level L whose curved tensor set adds nodes to `current`
/// (target_new_nodes = 0), or adds at least `target_new_nodes` of them. The
/// candidates are the weights of margin indices. If the target count would
/// overrun `budget` new nodes, the largest admissible level is returned
/// instead; BudgetExhausted if even the smallest growth does not fit.
inline LevelChoice next_level(const FitParams& fit, const TensorSet& current,
                              std::size_t target_new_nodes, std::size_t budget) {
  const CurvedWeights w = fit.weights();
  detail::require_positive(w.alpha);
  const std::size_t d = current.dim();
  std::set<MultiIndex> grown(current.theta.begin(), current.theta.end());
  std::size_t added = 0;
  std::optional<LevelChoice> accepted;
  const std::size_t wanted = std::max<std::size_t>(target_new_nodes, 1);

  while (true) {
    auto front = detail::margin(grown, d);
    if (front.empty()) throw BudgetExhausted("next_level: margin is empty");
    double level = std::numeric_limits<double>::infinity();
    for (const auto& i : front) level = std::min(level, level_weight(w, current.rule, i));
    // Everything at or below the new level enters, including indices that
    // only become admissible once their neighbours are in.
    while (!front.empty()) {
      std::vector<MultiIndex> entering;
      for (const auto& i : front)
        if (level_weight(w, current.rule, i) <= level) entering.push_back(i);
      if (entering.empty()) break;
      for (auto& i : entering) {
        added += detail::box_size(current.rule, i);
        grown.insert(std::move(i));
      }
      front = detail::margin(grown, d);
    }
    if (added > budget) {
      if (accepted) return *accepted;
      throw BudgetExhausted("next_level: smallest growth adds " + std::to_string(added) +
                            " nodes, budget allows " + std::to_string(budget));
    }
    accepted = LevelChoice{level, added};
    if (added >= wanted) return *accepted;
  }
}

/// Theta_n united with the curved tensor set of `fit` at level L.
inline TensorSet grow(const TensorSet& current, const FitParams& fit, double level) {
  const TensorSet extra = theta_curved(fit.weights(), level, current.rule);
  return {current.theta.united(extra.theta), current.rule};
}

/// Smallest isotropic total-degree set whose interpolant range has at least
/// 2d + 1 coefficients.
inline TensorSet default_initial_set(std::size_t dim, RuleKind rule) {
  for (int level = 0;; ++level) {
    TensorSet ts = theta_opt(total_degree(dim, level), rule);
    if (polynomial_range(ts).size() >= 2 * dim + 1) return ts;
  }
}

inline TensorSet initial_tensor_set(const AdaptiveConfig& cfg) {
  switch (cfg.initial.kind) {
    case InitialSet::Kind::curved:
      return theta_curved({cfg.initial.alpha, cfg.initial.beta}, cfg.initial.level, cfg.rule);
    case InitialSet::Kind::classic:
      return theta_opt(lambda_classic(cfg.initial.classic, cfg.initial.alpha, cfg.initial.level),
                       cfg.rule);
    case InitialSet::Kind::automatic:
      break;
  }
  return default_initial_set(cfg.dim, cfg.rule);
}

/// Weights used before the first successful fit.
inline FitParams initial_fit(const AdaptiveConfig& cfg) {
  FitParams p = FitParams::isotropic(cfg.dim);
  if (cfg.initial.kind != InitialSet::Kind::automatic) p.alpha = cfg.initial.alpha;
  if (cfg.initial.kind == InitialSet::Kind::curved) p.beta = cfg.initial.beta;
  p.used = 0;
  return p;
}

/// Coefficient extraction plus regression for the configured source and model.
inline FitParams fit_interpolant(const Interpolant& interp, const AdaptiveConfig& cfg) {
  FitOptions opt;
  opt.min_magnitude = cfg.min_magnitude;
  opt.fit_beta = cfg.model == FitModel::curved;
  if (cfg.effective_fit_source() == FitSource::surplus)
    return fit_surplus(interp.surplus_map(), interp.rule(), opt);
  return fit_curved(legendre_coeffs(interp, interp.range()).coeffs, opt);
}

namespace detail {

/// Target values for the grid indices of `ts` not present in `known`,
/// served from the cache where possible. Partial results of a failed batch
/// are cached before the error propagates.
inline Interpolant::SampleMap collect_samples(std::map<NodeKey, double>& cache,
                                              const TensorSet& ts, const Interpolant* known,
                                              const TargetSpec& target) {
  const std::vector<double> nodes = interpolation_nodes(ts.rule, max_node_count(ts));
  Interpolant::SampleMap out;
  std::vector<MultiIndex> pending;
  std::vector<Point> points;
  for (const auto& j : grid_indices(ts)) {
    if (known && std::binary_search(known->grid().begin(), known->grid().end(), j)) continue;
    Point y(j.dim());
    for (std::size_t k = 0; k < j.dim(); ++k) y[k] = nodes[j[k] - 1];
    auto it = cache.find(node_key(y));
    if (it != cache.end()) {
      out.emplace(j, it->second);
    } else {
      pending.push_back(j);
      points.push_back(std::move(y));
    }
  }
  if (points.empty()) return out;
  std::vector<double> values;
  try {
    values = target.evaluate(points);
  } catch (EvaluationError& e) {
    for (const auto& [id, v] : e.partial) cache.emplace(node_key(points[id]), v);
    throw;
  }
  for (std::size_t n = 0; n < points.size(); ++n) {
    cache.emplace(node_key(points[n]), values[n]);
    out.emplace(pending[n], values[n]);
  }
  return out;
}

}  // namespace detail

/// One pass of the adaptive loop. The first call samples the initial set;
/// later calls pick the next level from the current fit, sample the new
/// nodes only, extend the interpolant and refit. On failure the state is
/// untouched apart from the sample cache.
inline void adaptive_step(AdaptiveState& state, const AdaptiveConfig& cfg,
                          const TargetSpec& target) {
  const auto start = std::chrono::steady_clock::now();
  if (target.dim != cfg.dim) throw std::invalid_argument("target dimension does not match config");

  ConvergenceRecord rec;
  TensorSet next;
  Interpolant interp;
  if (!state.started()) {
    next = initial_tensor_set(cfg);
    const std::size_t count = grid_node_count(next);
    if (count > cfg.max_samples)
      throw BudgetExhausted("initial set needs " + std::to_string(count) + " samples, budget is " +
                            std::to_string(cfg.max_samples));
    interp = Interpolant::build(next, detail::collect_samples(state.cache, next, nullptr, target));
    rec.iteration = 0;
    rec.new_node_count = interp.size();
    state.fit = initial_fit(cfg);
  } else {
    const std::size_t have = state.interp.size();
    const std::size_t budget = cfg.max_samples > have ? cfg.max_samples - have : 0;
    const LevelChoice choice = next_level(state.fit, state.theta, cfg.target_new_nodes, budget);
    next = grow(state.theta, state.fit, choice.level);
    if (grid_node_count(next) != have + choice.new_nodes)
      throw std::logic_error("next_level and grow disagree on the node count");
    interp = state.interp.extended(
        next, detail::collect_samples(state.cache, next, &state.interp, target));
    rec.iteration = state.iteration + 1;
    rec.level = choice.level;
    rec.new_node_count = choice.new_nodes;
  }
  rec.node_count = interp.size();

  rec.fit = state.fit;
  if (cfg.model != FitModel::fixed) {
    try {
      rec.fit = fit_interpolant(interp, cfg);
      rec.fitted = true;
    } catch (const Unfittable&) {
    }
  }

  std::vector<double> probe_values = state.probe_values;
  if (cfg.probe) {
    const auto points = probe_points(cfg.dim, cfg.probe->count, cfg.probe->seed);
    if (probe_values.size() != points.size()) probe_values = target.evaluate(points);
    rec.probe_error = linf_error(interp, points, probe_values);
  }
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (state.started()) ++state.iteration;
  state.theta = std::move(next);
  state.interp = std::move(interp);
  state.fit = rec.fit;
  state.probe_values = std::move(probe_values);
  state.history.push_back(std::move(rec));
}

/// Steps until max_iterations growth steps are done or the sample budget
/// admits no further growth. `after_step` sees every committed state.
inline void run(AdaptiveState& state, const AdaptiveConfig& cfg, const TargetSpec& target,
                const std::function<void(const AdaptiveState&)>& after_step = {}) {
  cfg.validate();
  while (!state.started() || state.iteration < cfg.max_iterations) {
    try {
      adaptive_step(state, cfg, target);
    } catch (const BudgetExhausted&) {
      if (!state.started()) throw;
      break;
    }
    if (after_step) after_step(state);
  }
}

inline AdaptiveState run(const AdaptiveConfig& cfg, const TargetSpec& target) {
  AdaptiveState state;
  run(state, cfg, target);
  return state;
}

struct CompareRow {
  std::string scheme;
  std::size_t nodes = 0;
  double error = 0.0;
};

/// Configuration of one comparison scheme: isotropic (total degree, never
/// refit), dynamic_td (beta pinned to 0) or dynamic_curved.
inline AdaptiveConfig scheme_config(AdaptiveConfig cfg, const std::string& scheme) {
  if (!cfg.probe) cfg.probe = ErrorProbe{};
  if (scheme == "isotropic") {
    cfg.model = FitModel::fixed;
    cfg.initial = InitialSet{};
  } else if (scheme == "dynamic_td") {
    cfg.model = FitModel::total_degree;
  } else if (scheme == "dynamic_curved") {
    cfg.model = FitModel::curved;
  } else {
    throw std::invalid_argument("unknown scheme: " + scheme);
  }
  return cfg;
}

/// Runs each scheme with its own sample cache and reports (nodes, error) per iteration.
inline std::vector<CompareRow> compare_schemes(const AdaptiveConfig& base, const TargetSpec& target,
                                               const std::vector<std::string>& schemes) {
  std::vector<CompareRow> rows;
  for (const auto& scheme : schemes) {
    const AdaptiveState state = run(scheme_config(base, scheme), target);
    for (const auto& rec : state.history) rows.push_back({scheme, rec.node_count, *rec.probe_error});
  }
  return rows;
}

inline std::string to_string(FitSource s) { return s == FitSource::legendre ? "legendre" : "surplus"; }

inline FitSource parse_fit_source(const std::string& s) {
  if (s == "legendre") return FitSource::legendre;
  if (s == "surplus") return FitSource::surplus;
  throw std::invalid_argument("unknown fit source: " + s);
}

inline std::string to_string(FitModel m) {
  switch (m) {
    case FitModel::curved: return "curved";
    case FitModel::total_degree: return "total_degree";
    case FitModel::fixed: return "fixed";
  }
  return "?";
}

inline FitModel parse_fit_model(const std::string& s) {
  if (s == "curved") return FitModel::curved;
  if (s == "total_degree") return FitModel::total_degree;
  if (s == "fixed") return FitModel::fixed;
  throw std::invalid_argument("unknown fit model: " + s);
}

}  // namespace qosg
