#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "htile/graph.hpp"

using namespace htile;

namespace {

// Brute force over all vertex permutations.
std::uint64_t naive_automorphisms(const GraphH& h) {
  std::vector<int> p(static_cast<std::size_t>(h.vertex_count()));
  std::iota(p.begin(), p.end(), 0);
  std::uint64_t count = 0;
  do {
    bool ok = true;
    for (const auto& e : h.edges())
      if (!h.adjacent(p[static_cast<std::size_t>(e.u)], p[static_cast<std::size_t>(e.v)])) {
        ok = false;
        break;
      }
    count += ok ? 1 : 0;
  } while (std::next_permutation(p.begin(), p.end()));
  return count;
}

std::uint64_t factorial(int k) { return k <= 1 ? 1 : static_cast<std::uint64_t>(k) * factorial(k - 1); }

GraphH random_graph(int v, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  for (;;) {
    std::vector<Edge> edges;
    for (int i = 0; i < v; ++i)
      for (int j = i + 1; j < v; ++j)
        if (coin(rng)) edges.push_back({i, j});
    if (!edges.empty()) return GraphH(v, edges, "random");
  }
}

}  // namespace

TEST(ParseGraph, Triangle) {
  const auto h = parse_graph("0 1\n1 2\n0 2");
  EXPECT_EQ(h.vertex_count(), 3);
  EXPECT_EQ(h.edge_count(), 3);
  EXPECT_EQ(h, named_graph("complete", std::vector<int>{3}));
}

TEST(ParseGraph, HeaderAddsIsolatedVertices) {
  const auto h = parse_graph("n 4\n0 1\n");
  EXPECT_EQ(h.vertex_count(), 4);
  EXPECT_EQ(h.edge_count(), 1);
  EXPECT_EQ(h.degree(2), 0);
  EXPECT_EQ(h.degree(3), 0);
}

TEST(ParseGraph, CommentsAndBlankLines) {
  const auto h = parse_graph("# a path\n\n0 1\n  1 2  # trailing\n");
  EXPECT_EQ(h.vertex_count(), 3);
  EXPECT_EQ(h.edge_count(), 2);
}

TEST(ParseGraph, ErrorsNameTheLine) {
  auto line_of = [](const char* text) {
    try {
      parse_graph(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("0 0"), 1);                // self-loop
  EXPECT_EQ(line_of("0 1\n1 x"), 2);           // malformed
  EXPECT_EQ(line_of("0 1\n1 2\n2 1"), 3);      // duplicate
  EXPECT_EQ(line_of("n 2\n0 1\n1 2"), 1);      // header below max endpoint
  EXPECT_EQ(line_of("0 1 2"), 1);              // wrong field count
  try {
    parse_graph("0 0");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
}

TEST(NamedGraph, Families) {
  const auto lolli = graph_from_spec("lollipop:5,2");
  EXPECT_EQ(lolli.vertex_count(), 7);
  EXPECT_EQ(lolli.edge_count(), 12);

  const auto k42 = graph_from_spec("complete:4+complete:2");
  EXPECT_EQ(k42.vertex_count(), 6);
  EXPECT_EQ(k42.edge_count(), 7);
  const std::vector<GraphH> parts = {graph_from_spec("complete:4"), graph_from_spec("complete:2")};
  EXPECT_EQ(named_graph("disjoint_union", {}, parts), k42);

  EXPECT_EQ(graph_from_spec("cycle:3"), graph_from_spec("complete:3"));
  EXPECT_EQ(graph_from_spec("path:3").edge_count(), 2);
}

TEST(NamedGraph, Errors) {
  EXPECT_THROW(graph_from_spec("complete:1"), UsageError);
  EXPECT_THROW(graph_from_spec("cycle:2"), UsageError);
  EXPECT_THROW(graph_from_spec("path:1"), UsageError);
  EXPECT_THROW(graph_from_spec("lollipop:2,1"), UsageError);
  EXPECT_THROW(graph_from_spec("star:4"), UsageError);
  EXPECT_THROW(graph_from_spec("complete:x"), UsageError);
}

TEST(GraphH, Validation) {
  EXPECT_THROW(GraphH(3, {{0, 0}}), UsageError);
  EXPECT_THROW(GraphH(3, {{0, 1}, {1, 0}}), UsageError);
  EXPECT_THROW(GraphH(2, {{0, 2}}), UsageError);
  EXPECT_THROW(GraphH(3, {}), UsageError);
}

TEST(Analyze, Triangle) {
  const auto r = analyze(graph_from_spec("complete:3"));
  EXPECT_EQ(r.d_h, Rational(3, 2));
  EXPECT_EQ(r.d_star, Rational(3, 2));
  EXPECT_EQ(r.delta, Rational(1));
  EXPECT_TRUE(r.strictly_balanced);
  EXPECT_TRUE(r.balanced);
  EXPECT_EQ(r.aut_count, 6u);
}

TEST(Analyze, K4PlusK2) {
  const auto r = analyze(graph_from_spec("complete:4+complete:2"));
  EXPECT_EQ(r.d_h, Rational(7, 5));
  EXPECT_EQ(r.d_star, Rational(2));
  EXPECT_EQ(r.delta, Rational(3, 2));
  EXPECT_FALSE(r.strictly_balanced);
  EXPECT_FALSE(r.balanced);
  EXPECT_EQ(r.h_star_vertices, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(r.aut_count, 48u);
}

TEST(Analyze, Lollipop) {
  const auto r = analyze(graph_from_spec("lollipop:5,2"));
  EXPECT_EQ(r.d_h, Rational(2));
  EXPECT_EQ(r.d_star, Rational(5, 2));
  EXPECT_EQ(r.delta, Rational(2));
  EXPECT_EQ(r.h_star_vertices, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Analyze, TooLarge) {
  EXPECT_THROW(analyze(graph_from_spec("complete:17")), LimitError);
  AnalyzeOptions small;
  small.max_vertices = 4;
  EXPECT_THROW(analyze(graph_from_spec("complete:5"), small), LimitError);
}

TEST(Analyze, IsolatedVerticesCount) {
  const auto r = analyze(parse_graph("n 4\n0 1\n1 2\n0 2"));
  EXPECT_EQ(r.d_h, Rational(1));
  EXPECT_EQ(r.d_star, Rational(3, 2));
  EXPECT_EQ(r.aut_count, 6u);
}

TEST(Analyze, AutomorphismFamilies) {
  for (int k = 2; k <= 7; ++k) EXPECT_EQ(analyze(named_graph("complete", std::vector<int>{k})).aut_count, factorial(k));
  for (int k = 3; k <= 9; ++k)
    EXPECT_EQ(analyze(named_graph("cycle", std::vector<int>{k})).aut_count, static_cast<std::uint64_t>(2 * k));
}

// Exhaustive properties on random patterns with up to 8 vertices.
TEST(AnalyzeProperty, DensitiesDominateEverySubset) {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 200; ++trial) {
    const int v = 2 + trial % 7;
    const auto h = random_graph(v, 0.2 + 0.1 * (trial % 6), rng);
    const auto r = analyze(h);
    bool proper_reaches = false;
    for (std::uint64_t s = 1; s < (std::uint64_t{1} << v); ++s) {
      const int size = std::popcount(s);
      const int e = h.edges_within(s);
      EXPECT_GE(r.delta, Rational(e, size));
      if (size < 2) continue;
      EXPECT_GE(r.d_star, Rational(e, size - 1));
      if (size < v && Rational(e, size - 1) >= r.d_h) proper_reaches = true;
    }
    std::uint64_t star = 0;
    for (int x : r.h_star_vertices) star |= std::uint64_t{1} << x;
    EXPECT_EQ(Rational(h.edges_within(star), std::popcount(star) - 1), r.d_star);
    std::uint64_t wit = 0;
    for (int x : r.delta_witness_vertices) wit |= std::uint64_t{1} << x;
    EXPECT_EQ(Rational(h.edges_within(wit), std::popcount(wit)), r.delta);

    EXPECT_GE(r.d_star, r.d_h);
    EXPECT_GE(r.d_star, r.delta);
    EXPECT_EQ(r.balanced, r.d_star == r.d_h);
    EXPECT_EQ(r.strictly_balanced, !proper_reaches);
    EXPECT_TRUE(!r.strictly_balanced || r.balanced);
    EXPECT_EQ(r.aut_count, naive_automorphisms(h));
    EXPECT_EQ(factorial(v) % r.aut_count, 0u);
    EXPECT_EQ(analyze(h), r);
  }
}

TEST(InducedSubgraph, Relabels) {
  const auto h = graph_from_spec("lollipop:4,1");
  const std::vector<int> keep = {2, 3, 4};
  const auto s = induced_subgraph(h, keep);
  EXPECT_EQ(s.vertex_count(), 3);
  EXPECT_EQ(s.edge_count(), 2);
}
