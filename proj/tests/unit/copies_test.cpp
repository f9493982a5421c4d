#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "htile/copies.hpp"

using namespace htile;

namespace {

using EdgeSet = std::vector<std::pair<int, int>>;

// Every injection of V(H) into {0..n-1}, reduced to its (edge set, vertex set).
std::set<std::pair<EdgeSet, std::vector<int>>> naive_copies(const GraphH& h, const WeightedInstance& inst, double cap) {
  const int n = inst.n();
  const int v = h.vertex_count();
  std::set<std::pair<EdgeSet, std::vector<int>>> out;
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  // Enumerate v-subsets then all orderings of each.
  std::vector<bool> pick(static_cast<std::size_t>(n), false);
  std::fill(pick.end() - v, pick.end(), true);
  do {
    std::vector<int> sub;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) sub.push_back(i);
    do {
      EdgeSet es;
      bool ok = true;
      for (const auto& e : h.edges()) {
        const int a = sub[static_cast<std::size_t>(e.u)], b = sub[static_cast<std::size_t>(e.v)];
        if (inst.weight(a, b) > cap) ok = false;
        es.emplace_back(std::min(a, b), std::max(a, b));
      }
      if (!ok) continue;
      std::sort(es.begin(), es.end());
      auto vs = sub;
      std::sort(vs.begin(), vs.end());
      out.emplace(es, vs);
    } while (std::next_permutation(sub.begin(), sub.end()));
  } while (std::next_permutation(pick.begin(), pick.end()));
  return out;
}

std::uint64_t falling(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 0; i < k; ++i) r *= static_cast<std::uint64_t>(n - i);
  return r;
}

EdgeSet edge_pairs(const PlacedCopy& c) {
  EdgeSet es;
  for (const auto& e : c.edges) es.emplace_back(e.u, e.v);
  return es;
}

}  // namespace

TEST(EnumerateCopies, SmallCounts) {
  const auto inst4 = sample_instance(4, WeightDistribution::exponential(), 1);
  EXPECT_EQ(enumerate_copies(graph_from_spec("complete:3"), inst4).size(), 4u);
  EXPECT_EQ(enumerate_copies(graph_from_spec("cycle:4"), inst4).size(), 3u);
  EXPECT_EQ(enumerate_copies(graph_from_spec("complete:2+complete:2"), inst4).size(), 3u);
}

TEST(EnumerateCopies, CapBelowCheapestTriangle) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = sample_instance(5, WeightDistribution::exponential(), 3);
  const auto best = cheapest_copy(h, inst);
  double max_edge = 0.0;
  for (const auto& e : best.edges) max_edge = std::max(max_edge, inst.weight(e.u, e.v));
  // Every triangle has a max edge >= the cheapest triangle's minimum max edge; use the
  // smallest max edge over all triangles instead, found by brute force.
  double bottleneck = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b)
      for (int c = b + 1; c < 5; ++c)
        bottleneck = std::min(bottleneck, std::max({inst.weight(a, b), inst.weight(a, c), inst.weight(b, c)}));
  EXPECT_LE(bottleneck, max_edge);
  const auto idx = enumerate_copies(h, inst, std::nextafter(bottleneck, 0.0));
  EXPECT_TRUE(idx.empty());
  EXPECT_EQ(idx.postings.size(), 5u);
  EXPECT_EQ(enumerate_copies(h, inst, bottleneck).size(), 1u);
}

TEST(EnumerateCopies, InjectionIdentity) {
  const std::vector<std::string> specs = {"complete:2", "complete:3", "path:3", "path:4", "cycle:4", "complete:4",
                                          "lollipop:3,1"};
  for (const auto& spec : specs) {
    const auto h = graph_from_spec(spec);
    const std::uint64_t aut = analyze(h).aut_count;
    for (int n = h.vertex_count(); n <= 8; ++n) {
      const auto inst = sample_instance(n, WeightDistribution::exponential(), static_cast<std::uint64_t>(n));
      EXPECT_EQ(enumerate_copies(h, inst).size(), falling(n, h.vertex_count()) / aut) << spec << " n=" << n;
    }
  }
}

TEST(EnumerateCopies, MatchesNaiveEnumeration) {
  const std::vector<std::string> specs = {"complete:3", "path:3", "cycle:4", "complete:2+complete:2", "lollipop:3,1"};
  for (const auto& spec : specs) {
    const auto h = graph_from_spec(spec);
    for (int n : {5, 7}) {
      const auto inst = sample_instance(n, WeightDistribution::exponential(), 40 + static_cast<std::uint64_t>(n));
      for (double cap : {kNoCap, 1.0, 0.4}) {
        const auto idx = enumerate_copies(h, inst, cap);
        std::set<std::pair<EdgeSet, std::vector<int>>> got;
        for (const auto& c : idx.copies) got.emplace(edge_pairs(c), c.vertices);
        EXPECT_EQ(got.size(), idx.size()) << "duplicate copies for " << spec;
        EXPECT_EQ(got, naive_copies(h, inst, cap)) << spec << " n=" << n << " cap=" << cap;
      }
    }
  }
}

TEST(EnumerateCopies, IsolatedPatternVertices) {
  // K2 plus one isolated vertex in K5: 10 edges times 3 remaining vertices.
  const auto h = parse_graph("n 3\n0 1");
  const auto inst = sample_instance(5, WeightDistribution::exponential(), 2);
  const auto idx = enumerate_copies(h, inst);
  EXPECT_EQ(idx.size(), 30u);
  for (const auto& c : idx.copies) EXPECT_EQ(c.vertices.size(), 3u);
}

TEST(EnumerateCopies, IndexInvariants) {
  const auto h = graph_from_spec("complete:3");
  const auto inst = sample_instance(9, WeightDistribution::exponential(), 5);
  const double cap = 1.2;
  const auto idx = enumerate_copies(h, inst, cap);
  EXPECT_TRUE(std::is_sorted(idx.copies.begin(), idx.copies.end(), copy_less));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const auto& copy = idx.copies[c];
    double w = 0.0;
    for (const auto& e : copy.edges) {
      EXPECT_LE(inst.weight(e.u, e.v), cap);
      w += inst.weight(e.u, e.v);
    }
    EXPECT_EQ(w, copy.weight);
    EXPECT_TRUE(std::is_sorted(copy.vertices.begin(), copy.vertices.end()));
    for (int v : copy.vertices) {
      const auto& p = idx.postings[static_cast<std::size_t>(v)];
      EXPECT_TRUE(std::binary_search(p.begin(), p.end(), static_cast<std::uint32_t>(c)));
    }
  }
  std::size_t total = 0;
  for (const auto& p : idx.postings) total += p.size();
  EXPECT_EQ(total, 3 * idx.size());
}

TEST(EnumerateCopies, CapMonotone) {
  const auto h = graph_from_spec("path:3");
  const auto inst = sample_instance(8, WeightDistribution::exponential(), 6);
  std::set<EdgeSet> prev;
  for (double cap : {0.2, 0.5, 1.0, 2.0, kNoCap}) {
    std::set<EdgeSet> cur;
    for (const auto& c : enumerate_copies(h, inst, cap).copies) cur.insert(edge_pairs(c));
    EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
    prev = std::move(cur);
  }
}

TEST(EnumerateCopies, Overflow) {
  const auto inst = sample_instance(10, WeightDistribution::exponential(), 1);
  EnumerateOptions opts;
  opts.max_copies = 50;
  EXPECT_THROW(enumerate_copies(graph_from_spec("complete:3"), inst, kNoCap, opts), LimitError);
  try {
    enumerate_copies(graph_from_spec("complete:3"), inst, kNoCap, opts);
  } catch (const LimitError& e) {
    EXPECT_NE(std::string(e.what()).find("cap"), std::string::npos);
  }
  EXPECT_THROW(enumerate_copies(graph_from_spec("complete:3"), inst, 0.0), UsageError);
}

TEST(EnumerateCopies, ActiveSubset) {
  const auto inst = sample_instance(10, WeightDistribution::exponential(), 1);
  EnumerateOptions opts;
  opts.active = {0, 2, 4, 6, 8};
  const auto idx = enumerate_copies(graph_from_spec("complete:3"), inst, kNoCap, opts);
  EXPECT_EQ(idx.size(), 10u);
  for (const auto& c : idx.copies)
    for (int v : c.vertices) EXPECT_EQ(v % 2, 0);
}

TEST(CheapestCopy, Examples) {
  const auto inst = sample_instance(12, WeightDistribution::exponential(), 8);
  const auto k2 = cheapest_copy(graph_from_spec("complete:2"), inst);
  EXPECT_EQ(k2.weight, *std::min_element(inst.weights().begin(), inst.weights().end()));

  const auto tri = sample_instance(3, WeightDistribution::exponential(), 8);
  const auto c = cheapest_copy(graph_from_spec("complete:3"), tri);
  EXPECT_EQ(c.weight, tri.weight(0, 1) + tri.weight(0, 2) + tri.weight(1, 2));
}

TEST(CheapestCopy, K4MatchesBruteForce) {
  const auto h = graph_from_spec("complete:4");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = sample_instance(10, WeightDistribution::exponential(), seed);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 10; ++a)
      for (int b = a + 1; b < 10; ++b)
        for (int c = b + 1; c < 10; ++c)
          for (int d = c + 1; d < 10; ++d) {
            // Sorted-edge summation order, as the library mandates.
            const double w = inst.weight(a, b) + inst.weight(a, c) + inst.weight(a, d) + inst.weight(b, c) +
                             inst.weight(b, d) + inst.weight(c, d);
            best = std::min(best, w);
          }
    EXPECT_EQ(cheapest_copy(h, inst).weight, best) << "seed " << seed;
  }
}

TEST(CheapestCopy, AgreesWithIndexFront) {
  for (const auto& spec : {"path:3", "cycle:4", "lollipop:4,1", "complete:2+complete:2"}) {
    const auto h = graph_from_spec(spec);
    const auto inst = sample_instance(8, WeightDistribution::exponential(), 77);
    const auto idx = enumerate_copies(h, inst);
    EXPECT_EQ(cheapest_copy(h, inst), idx.copies.front()) << spec;
  }
  EXPECT_THROW(cheapest_copy(graph_from_spec("complete:5"), sample_instance(4, WeightDistribution::exponential(), 1)),
               UsageError);
}
