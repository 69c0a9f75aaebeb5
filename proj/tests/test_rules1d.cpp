#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "qosg/rules1d.hpp"

using namespace qosg;

namespace {

constexpr double pi = std::numbers::pi;

// Direct Lagrange products; no barycentric formula, no log scaling.
double lebesgue_direct(const std::vector<double>& x, double y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (j != i) p *= (y - x[j]) / (x[i] - x[j]);
    s += std::abs(p);
  }
  return s;
}

double lebesgue_scan(const std::vector<double>& x, int points) {
  double best = 0.0;
  for (int p = 0; p < points; ++p) best = std::max(best, lebesgue_direct(x, -1.0 + 2.0 * p / (points - 1)));
  return best;
}

double omega(const std::vector<double>& x, double y) {
  double p = 1.0;
  for (double v : x) p *= (y - v);
  return p;
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void expect_same_set(std::vector<double> a, std::vector<double> b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  a = sorted(std::move(a));
  b = sorted(std::move(b));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

// Uniform grid argmax with right-most tie-breaking.
template <typename F>
double grid_argmax(F&& f, int points) {
  double best_y = 1.0, best_v = -1.0;
  for (int p = points - 1; p >= 0; --p) {
    const double y = -1.0 + 2.0 * p / (points - 1);
    const double v = f(y);
    if (v > best_v * (1.0 + 1e-12) + 1e-300) {
      best_v = v;
      best_y = y;
    }
  }
  return best_y;
}

}  // namespace

TEST(Growth, TableValues) {
  const std::vector<int> cc{1, 3, 5, 9, 17};
  for (int l = 0; l < 5; ++l) EXPECT_EQ(growth(RuleKind::clenshaw_curtis, l), cc[l]);
  const std::vector<int> d2{1, 3, 5, 7, 9, 13};
  for (int l = 0; l < 6; ++l) EXPECT_EQ(growth(RuleKind::rleja_double2, l), d2[l]);
  const std::vector<int> d4{1, 3, 5, 6, 7, 8, 9};
  for (int l = 0; l < 7; ++l) EXPECT_EQ(growth(RuleKind::rleja_double4, l), d4[l]);
  for (int l = 0; l < 6; ++l) EXPECT_EQ(growth(RuleKind::fejer2, l), (1 << (l + 1)) - 1);
  EXPECT_EQ(growth(RuleKind::leja_odd, 3), 7);
  EXPECT_EQ(growth(RuleKind::min_delta, 3), 4);
}

TEST(Growth, DoublingRelations) {
  for (int l = 2; l < 12; ++l) {
    EXPECT_EQ(growth(RuleKind::rleja_double2, l + 2) - 1, 2 * (growth(RuleKind::rleja_double2, l) - 1)) << l;
    EXPECT_EQ(growth(RuleKind::rleja_double4, l + 4) - 1, 2 * (growth(RuleKind::rleja_double4, l) - 1)) << l;
  }
}

TEST(Growth, StrictlyIncreasingFromZero) {
  for (auto kind : all_rules) {
    EXPECT_EQ(growth(kind, -1), 0);
    EXPECT_GE(growth(kind, 0), 1);
    for (int l = 0; l < 12; ++l) EXPECT_GT(growth(kind, l + 1), growth(kind, l)) << to_string(kind);
  }
  EXPECT_THROW(growth(RuleKind::leja, -2), std::invalid_argument);
}

TEST(ClosedForm, ClenshawCurtisFirstNodes) {
  const std::vector<double> expected{0, 1, -1, -std::sqrt(2.0) / 2, std::sqrt(2.0) / 2, -std::cos(pi / 8)};
  const auto y = rule_nodes(RuleKind::clenshaw_curtis, 6);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(y[j], expected[j], 1e-15);
}

TEST(ClosedForm, RLejaFirstNodes) {
  const std::vector<double> expected{1, -1, 0, std::sqrt(2.0) / 2, -std::sqrt(2.0) / 2,
                                     std::cos(pi / 8), -std::cos(pi / 8)};
  const auto y = rule_nodes(RuleKind::rleja, 7);
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(y[j], expected[j], 1e-15);
}

TEST(ClosedForm, CenteredRLejaStartsAtZero) {
  for (auto kind : {RuleKind::rleja_double2, RuleKind::rleja_double4, RuleKind::rleja_odd}) {
    const auto y = rule_nodes(kind, 3);
    EXPECT_EQ(y, (std::vector<double>{0, 1, -1}));
  }
  // Variants share the sequence and differ only in growth.
  EXPECT_EQ(rule_nodes(RuleKind::rleja_double2, 40), rule_nodes(RuleKind::rleja_odd, 40));
  EXPECT_EQ(rule_nodes(RuleKind::rleja_double4, 40), rule_nodes(RuleKind::rleja_odd, 40));
}

TEST(ClosedForm, ClenshawCurtisLevelsAreExtremaSets) {
  for (int l = 1; l <= 6; ++l) {
    std::vector<double> classical;
    for (int k = 0; k <= (1 << l); ++k) classical.push_back(std::cos(k * pi / (1 << l)));
    expect_same_set(rule_nodes(RuleKind::clenshaw_curtis, growth(RuleKind::clenshaw_curtis, l)),
                    classical, 1e-12);
  }
}

TEST(ClosedForm, FejerLevelsAreInteriorChebyshevSets) {
  for (int l = 0; l <= 6; ++l) {
    const int n = 1 << (l + 1);
    std::vector<double> classical;
    for (int k = 1; k < n; ++k) classical.push_back(std::cos(k * pi / n));
    expect_same_set(rule_nodes(RuleKind::fejer2, growth(RuleKind::fejer2, l)), classical, 1e-12);
  }
}

TEST(ClosedForm, InterpolationOrderKeepsLevelSets) {
  for (auto kind : {RuleKind::clenshaw_curtis, RuleKind::fejer2}) {
    for (int l = 0; l <= 9; ++l) {
      const int m = growth(kind, l);
      const auto seq = rule_nodes(kind, m);
      const auto newton_order = interpolation_nodes(kind, m);
      const int prev = l == 0 ? 0 : growth(kind, l - 1);
      // Each level block holds the same points in both orders.
      expect_same_set(std::vector<double>(seq.begin() + prev, seq.end()),
                      std::vector<double>(newton_order.begin() + prev, newton_order.end()), 1e-14);
    }
  }
  EXPECT_EQ(interpolation_nodes(RuleKind::leja, 30), rule_nodes(RuleKind::leja, 30));
}

TEST(ClosedForm, CenteredRLejaDoublingMatchesClenshawCurtis) {
  // Growth 2^l + 1 on the centered sequence: m = 1, 3, 5, 9, 17.
  const auto y = rule_nodes(RuleKind::rleja_odd, 17);
  for (int l = 0; l <= 4; ++l) {
    const int m = growth(RuleKind::clenshaw_curtis, l);
    expect_same_set(std::vector<double>(y.begin(), y.begin() + m),
                    rule_nodes(RuleKind::clenshaw_curtis, m), 1e-12);
  }
}

TEST(ClosedForm, OddRLejaLevelsAreSymmetric) {
  const auto y = rule_nodes(RuleKind::rleja_odd, growth(RuleKind::rleja_odd, 10));
  for (int l = 1; l <= 10; ++l) {
    const int m = growth(RuleKind::rleja_odd, l);
    std::vector<double> level(y.begin(), y.begin() + m);
    std::vector<double> mirrored;
    for (double v : level) mirrored.push_back(-v);
    expect_same_set(level, mirrored, 1e-14);
  }
}

TEST(Nodes, DistinctAndInDomain) {
  for (auto kind : all_rules) {
    const int count = std::min(growth(kind, 5), 60);
    const auto y = rule_nodes(kind, count);
    for (double v : y) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
    for (int i = 0; i < count; ++i)
      for (int j = i + 1; j < count; ++j) EXPECT_GT(std::abs(y[i] - y[j]), 1e-14) << to_string(kind);
  }
}

TEST(Nodes, Nested) {
  for (auto kind : all_rules) {
    const auto longer = rule_nodes(kind, 20);
    const auto shorter = rule_nodes(kind, 11);
    EXPECT_TRUE(std::equal(shorter.begin(), shorter.end(), longer.begin())) << to_string(kind);
  }
}

TEST(Greedy, LejaExamples) {
  const auto y = greedy_sequence(GreedyKind::leja, 4);
  EXPECT_EQ(y[0], 0.0);
  EXPECT_EQ(y[1], 1.0);
  EXPECT_EQ(y[2], -1.0);
  EXPECT_NEAR(y[3], 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_EQ(greedy_sequence(GreedyKind::leja, 2), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(greedy_sequence(GreedyKind::min_delta, 1), (std::vector<double>{0.0}));
}

TEST(Greedy, LejaAgainstDenseGridOracle) {
  const auto lib = greedy_sequence(GreedyKind::leja, 10);
  std::vector<double> oracle{0.0};
  while (oracle.size() < 10)
    oracle.push_back(grid_argmax([&](double y) { return std::abs(omega(oracle, y)); }, 2000001));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(lib[i], oracle[i], 2e-6) << "node " << i;
}

TEST(Greedy, MaxLebesgueAgainstDenseGridOracle) {
  const auto lib = greedy_sequence(GreedyKind::max_lebesgue, 8);
  for (std::size_t n = 1; n < lib.size(); ++n) {
    const std::vector<double> prefix(lib.begin(), lib.begin() + n);
    const double y = grid_argmax([&](double t) { return lebesgue_direct(prefix, t); }, 400001);
    // Compare the objective values: near-ties may pick mirrored points.
    EXPECT_NEAR(lebesgue_direct(prefix, lib[n]), lebesgue_direct(prefix, y), 1e-8) << "node " << n;
    EXPECT_NEAR(lib[n], y, 1e-4) << "node " << n;
  }
}

TEST(Greedy, MinLebesgueAgainstBruteForce) {
  const auto lib = greedy_sequence(GreedyKind::min_lebesgue, 6);
  for (std::size_t n = 1; n < lib.size(); ++n) {
    std::vector<double> prefix(lib.begin(), lib.begin() + n);
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c <= 2000; ++c) {
      const double y = -1.0 + c / 1000.0;
      if (std::any_of(prefix.begin(), prefix.end(), [&](double x) { return std::abs(x - y) < 1e-9; }))
        continue;
      auto trial = prefix;
      trial.push_back(y);
      best = std::min(best, lebesgue_scan(trial, 4001));
    }
    auto chosen = prefix;
    chosen.push_back(lib[n]);
    // The library optimises continuously; the oracle only on a 1e-3 grid.
    EXPECT_LE(lebesgue_scan(chosen, 4001), best + 1e-3) << "node " << n;
  }
}

TEST(Greedy, MinDeltaAgainstBruteForce) {
  const auto lib = greedy_sequence(GreedyKind::min_delta, 7);
  const int probes = 4001;
  for (std::size_t n = 1; n < lib.size(); ++n) {
    std::vector<double> prefix(lib.begin(), lib.begin() + n);
    double max_omega = 0.0;
    for (int p = 0; p < probes; ++p)
      max_omega = std::max(max_omega, std::abs(omega(prefix, -1.0 + 2.0 * p / (probes - 1))));
    // ||U_{X+y} - U_X|| = (1 + Lambda_X(y)) max|omega_X| / |omega_X(y)|.
    auto delta = [&](double y) { return (1.0 + lebesgue_direct(prefix, y)) * max_omega / std::abs(omega(prefix, y)); };
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c <= 200000; ++c) {
      const double y = -1.0 + c / 100000.0;
      if (omega(prefix, y) != 0.0) best = std::min(best, delta(y));
    }
    EXPECT_LE(delta(lib[n]), best * (1.0 + 1e-4)) << "node " << n;
  }
}

TEST(Greedy, RejectsSmallCandidateGrids) {
  EXPECT_THROW(greedy_sequence(GreedyKind::leja, 3, GreedyOptions{100}), std::invalid_argument);
}

TEST(Lebesgue, Examples) {
  const std::vector<double> one{0.0};
  EXPECT_DOUBLE_EQ(lebesgue_constant(one, default_probe_count), 1.0);
  const std::vector<double> three{0.0, 1.0, -1.0};
  EXPECT_NEAR(lebesgue_constant(three, default_probe_count), 1.25, 1e-9);
}

TEST(Lebesgue, RejectsDuplicates) {
  const std::vector<double> dup{0.0, 0.5, 0.5};
  EXPECT_THROW(lebesgue_constant(dup, default_probe_count), std::invalid_argument);
}

TEST(Lebesgue, AgreesWithDirectScan) {
  for (auto kind : {RuleKind::clenshaw_curtis, RuleKind::leja, RuleKind::rleja, RuleKind::fejer2,
                    RuleKind::min_lebesgue}) {
    const auto y = rule_nodes(kind, 9);
    const double lib = lebesgue_constant(y, default_probe_count);
    const double direct = lebesgue_scan(y, 200001);
    EXPECT_GE(lib, direct - 1e-9) << to_string(kind);
    EXPECT_NEAR(lib, direct, 1e-6 * direct) << to_string(kind);
  }
}

TEST(Lebesgue, ClenshawCurtisLevelFive) {
  const auto y = rule_nodes(RuleKind::clenshaw_curtis, 33);
  const double ref = 2.0 / pi * std::log(32.0) + 1.0;
  EXPECT_NEAR(lebesgue_constant(y, default_probe_count), ref, 0.1 * ref);
}

TEST(Lebesgue, LejaBelowEnvelope) {
  const auto seq = make_node_sequence(RuleKind::leja, 30);
  for (int l = 0; l < seq.levels(); ++l) {
    EXPECT_GE(seq.lambda_table[l], 1.0 - 1e-12);
    EXPECT_LE(seq.lambda_table[l], 4.0 * std::sqrt(l + 1.0)) << "level " << l;
  }
}

TEST(LambdaModel, TableValues) {
  EXPECT_DOUBLE_EQ(lambda_model(RuleKind::leja, 3), 6.0);
  EXPECT_DOUBLE_EQ(lambda_model(RuleKind::rleja, 0), 1.5);
  EXPECT_DOUBLE_EQ(lambda_model(RuleKind::max_lebesgue_odd, 0), 8.0);
  EXPECT_NEAR(lambda_model(RuleKind::clenshaw_curtis, 3), 2.0 / pi * std::log(9.0), 1e-15);
}

TEST(RuleNames, RoundTrip) {
  for (auto kind : all_rules) EXPECT_EQ(parse_rule(to_string(kind)), kind);
  EXPECT_THROW(parse_rule("gauss"), std::invalid_argument);
}
