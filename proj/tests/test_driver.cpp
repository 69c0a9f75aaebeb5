#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "qosg/driver.hpp"
#include "qosg/io.hpp"

using namespace qosg;

namespace {

TargetSpec lambda_target(std::size_t dim, std::function<double(std::span<const double>)> f) {
  TargetSpec t;
  t.name = "test";
  t.dim = dim;
  t.function = std::move(f);
  return t;
}

FitParams weights(std::vector<double> alpha, std::vector<double> beta) {
  FitParams p;
  p.alpha = std::move(alpha);
  p.beta = std::move(beta);
  return p;
}

// Oracle for one growth step in d = 2. Polynomial indices are scanned in a
// box, tensor levels are admitted by domination, nodes are counted as the
// union of boxes [0, m(i_1)) x [0, m(i_2)).
struct GrowthOracle {
  RuleKind rule;
  std::vector<double> alpha, beta;
  int poly_hi = 40;

  double weight(int a, int b) const {
    return alpha[0] * a + alpha[1] * b + beta[0] * std::log(a + 1.0) + beta[1] * std::log(b + 1.0);
  }
  std::vector<int> levels() const {
    std::vector<int> out;
    for (int l = 0; growth(rule, l - 1) <= poly_hi; ++l) out.push_back(l);
    return out;
  }
  std::set<std::pair<int, int>> theta(double level) const {
    std::vector<std::pair<int, int>> raw;
    for (int a = 0; a <= poly_hi; ++a)
      for (int b = 0; b <= poly_hi; ++b)
        if (weight(a, b) <= level) raw.emplace_back(a, b);
    std::set<std::pair<int, int>> out;
    for (int i : levels())
      for (int j : levels()) {
        const int ma = growth(rule, i - 1), mb = growth(rule, j - 1);
        for (const auto& [a, b] : raw)
          if (a >= ma && b >= mb) {
            out.emplace(i, j);
            break;
          }
      }
    return out;
  }
  std::size_t nodes(const std::set<std::pair<int, int>>& th) const {
    std::set<std::pair<int, int>> pts;
    for (const auto& [i, j] : th)
      for (int a = 0; a < growth(rule, i); ++a)
        for (int b = 0; b < growth(rule, j); ++b) pts.emplace(a, b);
    return pts.size();
  }
  std::vector<double> candidates() const {
    std::set<double> out;
    for (int a = 0; a <= poly_hi; ++a)
      for (int b = 0; b <= poly_hi; ++b) out.insert(weight(a, b));
    return {out.begin(), out.end()};
  }
};

std::set<std::pair<int, int>> pairs(const IndexSet& s) {
  std::set<std::pair<int, int>> out;
  for (const auto& i : s) out.emplace(i[0], i[1]);
  return out;
}

AdaptiveConfig rational_config(std::size_t max_samples) {
  AdaptiveConfig cfg;
  cfg.rule = RuleKind::leja;
  cfg.dim = 2;
  cfg.max_iterations = 1000;
  cfg.max_samples = max_samples;
  cfg.probe = ErrorProbe{200, 3};
  return cfg;
}

}  // namespace

TEST(NextLevel, SingleIndexExample) {
  const TensorSet start = theta_opt(IndexSet(2, {MultiIndex(2)}), RuleKind::leja);
  const FitParams fit = weights({1.0, 2.0}, {0.0, 0.0});
  const LevelChoice c = next_level(fit, start, 0, 100);
  EXPECT_DOUBLE_EQ(c.level, 1.0);
  EXPECT_EQ(c.new_nodes, 1u);
  const TensorSet next = grow(start, fit, c.level);
  EXPECT_EQ(next.theta, IndexSet(2, {MultiIndex(2), MultiIndex(std::vector<int>{1, 0})}));
}

TEST(NextLevel, IsotropicGrowthAddsTheNextTotalDegreeLayer) {
  for (int n = 0; n < 6; ++n) {
    const TensorSet start = theta_opt(total_degree(3, n), RuleKind::leja);
    const FitParams fit = weights({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0});
    const LevelChoice c = next_level(fit, start, 0, 1000);
    EXPECT_DOUBLE_EQ(c.level, n + 1.0);
    EXPECT_EQ(grow(start, fit, c.level).theta, theta_opt(total_degree(3, n + 1), RuleKind::leja).theta);
  }
}

TEST(NextLevel, TargetCountsAgainstOracle) {
  const std::vector<double> alpha{0.7, 1.3}, beta{0.5, -0.8};
  for (RuleKind rule : {RuleKind::leja, RuleKind::clenshaw_curtis}) {
    const GrowthOracle oracle{rule, alpha, beta};
    const TensorSet start = theta_opt(total_degree(2, 2), rule);
    const std::size_t have = grid_node_count(start);
    ASSERT_EQ(oracle.nodes(pairs(start.theta)), have);
    for (std::size_t target : {0u, 1u, 10u, 40u, 100u}) {
      double expected_level = NAN;
      std::size_t expected_new = 0;
      const auto base = pairs(start.theta);
      for (double l : oracle.candidates()) {
        auto th = oracle.theta(l);
        th.insert(base.begin(), base.end());
        const std::size_t added = oracle.nodes(th) - have;
        if (added >= std::max<std::size_t>(target, 1)) {
          expected_level = l;
          expected_new = added;
          break;
        }
      }
      const LevelChoice c = next_level(weights(alpha, beta), start, target, 100000);
      EXPECT_NEAR(c.level, expected_level, 1e-12) << to_string(rule) << " target " << target;
      EXPECT_EQ(c.new_nodes, expected_new) << to_string(rule) << " target " << target;
      EXPECT_EQ(grid_node_count(grow(start, weights(alpha, beta), c.level)), have + c.new_nodes);
    }
  }
}

TEST(NextLevel, BudgetLimits) {
  const TensorSet start = theta_opt(total_degree(2, 2), RuleKind::leja);
  const FitParams fit = weights({1.0, 1.0}, {0.0, 0.0});
  EXPECT_THROW(next_level(fit, start, 0, 0), BudgetExhausted);
  // The next layers add 4, 5 and 6 nodes; a budget of 10 admits the first two.
  const LevelChoice c = next_level(fit, start, 100, 10);
  EXPECT_EQ(c.new_nodes, 9u);
  EXPECT_DOUBLE_EQ(c.level, 4.0);
}

TEST(Probe, PointsAreReproducibleAndInRange) {
  const auto a = probe_points(3, 500, 42);
  EXPECT_EQ(a, probe_points(3, 500, 42));
  EXPECT_NE(a, probe_points(3, 500, 43));
  for (const auto& p : a)
    for (double v : p) {
      EXPECT_GE(v, -1.0);
      EXPECT_LT(v, 1.0);
    }
}

TEST(Probe, PolynomialErrorIsZero) {
  const auto f = [](std::span<const double> y) { return 1.0 + y[0] * y[0] * y[1] - 0.5 * y[1]; };
  const Interpolant interp = interpolate({theta_opt(total_degree(2, 3), RuleKind::leja)}, f);
  EXPECT_LT(mc_linf_error(interp, lambda_target(2, f), 1000, 1), 1e-12);
  const TargetSpec g = builtin_target("expsum", 2, {});
  EXPECT_EQ(mc_linf_error(interp, g, 100, 5), mc_linf_error(interp, g, 100, 5));
}

TEST(Adaptive, ZeroIterationsGivesInitialRecord) {
  AdaptiveConfig cfg = rational_config(1000);
  cfg.max_iterations = 0;
  const AdaptiveState s = run(cfg, builtin_target("rational", 2, {{"c0", {2.0}}, {"c", {1.0, 0.5}}}));
  ASSERT_EQ(s.history.size(), 1u);
  EXPECT_EQ(s.history[0].iteration, 0);
  EXPECT_TRUE(std::isnan(s.history[0].level));
  EXPECT_EQ(s.theta, default_initial_set(2, RuleKind::leja));
  EXPECT_GE(polynomial_range(s.theta).size(), 5u);
}

TEST(Adaptive, ConstantTargetIsExactAndNeverFitted) {
  AdaptiveConfig cfg = rational_config(100);
  cfg.max_iterations = 3;
  const AdaptiveState s = run(cfg, lambda_target(2, [](std::span<const double>) { return 2.5; }));
  ASSERT_EQ(s.history.size(), 4u);
  for (const auto& r : s.history) {
    EXPECT_EQ(*r.probe_error, 0.0);
    EXPECT_FALSE(r.fitted);
    EXPECT_EQ(r.fit.alpha, (std::vector<double>{1.0, 1.0}));
  }
}

TEST(Adaptive, DetectsTheHarderDirection) {
  const AdaptiveState s =
      run(rational_config(300), builtin_target("rational", 2, {{"c0", {2.0}}, {"c", {1.0, 0.5}}}));
  ASSERT_TRUE(s.history.back().fitted);
  EXPECT_LT(s.fit.alpha[0], s.fit.alpha[1]);
  EXPECT_GT(s.theta.theta.max_entry(1), 0);
  EXPECT_GT(s.theta.theta.max_entry(0), s.theta.theta.max_entry(1));
}

TEST(Adaptive, SetsGrowAndEveryNodeIsSampledOnce) {
  std::size_t calls = 0;
  const TargetSpec t = lambda_target(3, [&](std::span<const double> y) {
    ++calls;
    return std::exp(0.8 * y[0] + 0.3 * y[1] - 0.1 * y[2]);
  });
  AdaptiveConfig cfg = rational_config(400);
  cfg.dim = 3;
  cfg.probe.reset();
  AdaptiveState s;
  std::vector<TensorSet> seen;
  run(s, cfg, t, [&](const AdaptiveState& st) { seen.push_back(st.theta); });
  ASSERT_GT(seen.size(), 3u);
  for (std::size_t n = 1; n < seen.size(); ++n) {
    EXPECT_TRUE(seen[n].theta.includes(seen[n - 1].theta));
    EXPECT_GT(seen[n].theta.size(), seen[n - 1].theta.size());
    EXPECT_EQ(s.history[n].node_count, s.history[n - 1].node_count + s.history[n].new_node_count);
  }
  EXPECT_EQ(calls, s.interp.size());
  EXPECT_EQ(s.cache.size(), s.interp.size());
  EXPECT_LE(s.interp.size(), 400u);
  EXPECT_EQ(s.interp.size(), grid_node_count(s.theta));
}

TEST(Adaptive, BudgetRunImprovesOnInitialError) {
  AdaptiveConfig cfg = rational_config(500);
  cfg.dim = 3;
  const AdaptiveState s = run(cfg, builtin_target("rational", 3, {{"c0", {3.0}}, {"c", {1.0, 0.5, 0.25}}}));
  EXPECT_LT(*s.history.back().probe_error, 1e-2 * *s.history.front().probe_error);
  EXPECT_LE(s.interp.size(), 500u);
}

TEST(Adaptive, InitialSetLargerThanBudgetThrows) {
  AdaptiveConfig cfg = rational_config(3);
  EXPECT_THROW(run(cfg, builtin_target("expsum", 2, {})), BudgetExhausted);
}

TEST(Adaptive, ResumeFromCheckpointIsBitIdentical) {
  const TargetSpec t = builtin_target("rational", 2, {{"c0", {2.2}}, {"c", {1.0, 0.7}}});
  AdaptiveConfig cfg = rational_config(400);
  cfg.max_iterations = 8;
  const AdaptiveState straight = run(cfg, t);

  AdaptiveConfig half = cfg;
  half.max_iterations = 4;
  const AdaptiveState first = run(half, t);
  const std::string text = to_json(first, cfg).dump();
  AdaptiveState resumed = state_from_json(json::parse(text), cfg);
  run(resumed, cfg, t);

  ASSERT_EQ(resumed.history.size(), straight.history.size());
  for (std::size_t n = 0; n < straight.history.size(); ++n) {
    const auto& a = straight.history[n];
    const auto& b = resumed.history[n];
    EXPECT_EQ(a.node_count, b.node_count);
    EXPECT_EQ(a.fit.alpha, b.fit.alpha);
    EXPECT_EQ(a.fit.beta, b.fit.beta);
    EXPECT_EQ(*a.probe_error, *b.probe_error);
  }
  EXPECT_EQ(resumed.interp.surpluses(), straight.interp.surpluses());
  EXPECT_EQ(resumed.theta, straight.theta);
}

TEST(Adaptive, EvaluatorFailureLeavesStateResumable) {
  bool fail = false;
  const TargetSpec t = lambda_target(2, [&](std::span<const double> y) {
    if (fail && y[0] > 0.5) return std::nan("");
    return 1.0 / (2.0 + y[0] + 0.5 * y[1]);
  });
  AdaptiveConfig cfg = rational_config(300);
  cfg.probe.reset();
  cfg.max_iterations = 2;
  AdaptiveState s = run(cfg, t);
  const auto theta = s.theta;
  const auto history = s.history.size();
  const auto cached = s.cache.size();

  fail = true;
  cfg.max_iterations = 6;
  bool threw = false;
  try {
    run(s, cfg, t);
  } catch (const EvaluationError& e) {
    threw = true;
    EXPECT_FALSE(e.failed.empty());
  }
  ASSERT_TRUE(threw);
  EXPECT_EQ(s.theta, theta);
  EXPECT_GE(s.history.size(), history);
  EXPECT_GE(s.cache.size(), cached);

  fail = false;
  run(s, cfg, t);
  AdaptiveState clean = run(cfg, t);
  EXPECT_EQ(s.theta, clean.theta);
  EXPECT_EQ(s.interp.surpluses(), clean.interp.surpluses());
}

TEST(Compare, SchemesShareTheLoop) {
  AdaptiveConfig cfg = rational_config(200);
  const TargetSpec t = builtin_target("rational", 2, {{"c0", {2.0}}, {"c", {1.0, 0.5}}});
  const auto rows = compare_schemes(cfg, t, {"isotropic", "dynamic_td", "dynamic_curved"});
  std::set<std::string> names;
  for (const auto& r : rows) {
    names.insert(r.scheme);
    EXPECT_LE(r.nodes, 200u);
  }
  EXPECT_EQ(names.size(), 3u);
  const AdaptiveState iso = run(scheme_config(cfg, "isotropic"), t);
  for (std::size_t n = 0; n < iso.history.size(); ++n)
    EXPECT_EQ(iso.history[n].node_count, grid_node_count(theta_opt(total_degree(2, 2 + static_cast<int>(n)), RuleKind::leja)));
  EXPECT_THROW(scheme_config(cfg, "bogus"), std::invalid_argument);
}
