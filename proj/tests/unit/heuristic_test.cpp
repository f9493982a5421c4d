#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "htile/heuristic.hpp"

using namespace htile;

namespace {

WeightedInstance exp_instance(int n, std::uint64_t seed) {
  return sample_instance(n, WeightDistribution::exponential(), seed);
}

}  // namespace

TEST(DefaultAlpha, QuarterRule) {
  const auto k3 = analyze(graph_from_spec("complete:3"));
  EXPECT_NEAR(default_alpha(k3), 1.0 / 64.0, 1e-15);
  const auto lolli = analyze(graph_from_spec("lollipop:5,2"));
  const double a = default_alpha(lolli);
  EXPECT_NEAR(std::pow(a, 1.0 - 1.0 / 2.5), 0.25, 1e-12);
  EXPECT_THROW(default_alpha(analyze(graph_from_spec("complete:2"))), UsageError);
}

TEST(Greedy, TargetEqualsActive) {
  const auto inst = exp_instance(12, 1);
  const auto s = greedy_partial_factor(inst, graph_from_spec("complete:3"), {}, 12);
  EXPECT_TRUE(s.copies.empty());
  EXPECT_EQ(s.uncovered, 12);
  EXPECT_FALSE(s.optimal);
}

TEST(Greedy, CapBelowEveryEdge) {
  const auto inst = exp_instance(12, 1);
  const double lightest = *std::min_element(inst.weights().begin(), inst.weights().end());
  const auto s = greedy_partial_factor(inst, graph_from_spec("complete:3"), {}, 0, lightest / 2);
  EXPECT_TRUE(s.copies.empty());
  EXPECT_EQ(s.uncovered, 12);
  EXPECT_TRUE(validate_solution(s, inst, graph_from_spec("complete:3")).empty());
}

TEST(Greedy, DominatedByExact) {
  const auto h = graph_from_spec("complete:3");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = exp_instance(30, seed);
    const auto g = greedy_partial_factor(inst, h, {}, 0);
    ASSERT_TRUE(validate_solution(g, inst, h).empty());
    const auto e = min_factor(inst, h, g.uncovered);
    ASSERT_TRUE(e.solved());
    EXPECT_GE(g.total_weight, e.weight()) << "seed " << seed;
  }
}

TEST(Greedy, PicksGloballyCheapestFirst) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = exp_instance(15, 3);
  const auto s = greedy_partial_factor(inst, h, {}, 12);
  ASSERT_EQ(s.copies.size(), 1u);
  EXPECT_EQ(s.copies.front(), cheapest_copy(h, inst));
}

TEST(Greedy, ActiveSubsetOnly) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = exp_instance(18, 3);
  const std::vector<int> active = {1, 3, 5, 7, 9, 11, 13, 15, 17};
  const auto s = greedy_partial_factor(inst, h, active, 3);
  EXPECT_TRUE(validate_solution(s, inst, h).empty());
  for (const auto& c : s.copies)
    for (int v : c.vertices) EXPECT_EQ(v % 2, 1);
  EXPECT_EQ(s.uncovered, 9 + 3);
}

TEST(DivideConquer, DegeneratesToExact) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = exp_instance(24, 9);
  RecursionParams p;
  p.base_size = 24;
  const auto r = divide_conquer_factor(inst, h, p);
  const auto e = min_factor(inst, h, 0);
  EXPECT_TRUE(r.complete);
  EXPECT_TRUE(r.solution.optimal);
  ASSERT_EQ(r.levels.size(), 1u);
  EXPECT_TRUE(r.levels.front().exact);
  EXPECT_EQ(r.solution.total_weight, e.weight());
}

TEST(DivideConquer, LargeInstanceValid) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = exp_instance(60, 17);
  const auto r = divide_conquer_factor(inst, h);
  EXPECT_TRUE(r.complete);
  EXPECT_EQ(r.solution.uncovered, 0);
  EXPECT_TRUE(validate_solution(r.solution, inst, h).empty());
  EXPECT_GE(r.levels.size(), 2u);
  EXPECT_TRUE(r.levels.back().exact);
  double sum = 0.0;
  int placed = 0;
  for (const auto& l : r.levels) {
    sum += l.weight;
    placed += l.placed;
  }
  EXPECT_EQ(placed, 20);
  EXPECT_NEAR(sum, r.solution.total_weight, 1e-9);
}

TEST(DivideConquer, PairedWithExact) {
  const auto h = graph_from_spec("complete:3");
  RecursionParams p;
  p.base_size = 12;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto inst = exp_instance(30, 100 + seed);
    const auto r = divide_conquer_factor(inst, h, p);
    const auto e = min_factor(inst, h, 0);
    ASSERT_TRUE(r.complete);
    ASSERT_TRUE(validate_solution(r.solution, inst, h).empty());
    EXPECT_GE(r.solution.total_weight, e.weight());
    EXPECT_LE(r.solution.total_weight, 3.0 * e.weight());
  }
}

TEST(DivideConquer, Deterministic) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = exp_instance(45, 5);
  const auto a = divide_conquer_factor(inst, h);
  const auto b = divide_conquer_factor(inst, h);
  EXPECT_EQ(solution_to_json(a.solution).dump(), solution_to_json(b.solution).dump());
}

TEST(DivideConquer, Preconditions) {
  const auto inst = exp_instance(30, 5);
  EXPECT_THROW(divide_conquer_factor(inst, graph_from_spec("complete:2")), UsageError);
  EXPECT_THROW(divide_conquer_factor(exp_instance(31, 5), graph_from_spec("complete:3")), UsageError);
  RecursionParams p;
  p.base_size = 2;
  EXPECT_THROW(divide_conquer_factor(inst, graph_from_spec("complete:3"), p), UsageError);
  p.base_size = 24;
  p.alpha = 1.5;
  EXPECT_THROW(divide_conquer_factor(inst, graph_from_spec("complete:3"), p), UsageError);
}

TEST(DivideConquer, StuckUnderTightCap) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = exp_instance(60, 2);
  RecursionParams p;
  p.level_cap = 0.05;
  p.cap_growth = 1.0;
  const auto r = divide_conquer_factor(inst, h, p);
  EXPECT_FALSE(r.complete);
  EXPECT_GT(r.solution.uncovered, 0);
  EXPECT_TRUE(validate_solution(r.solution, inst, h).empty());
}
