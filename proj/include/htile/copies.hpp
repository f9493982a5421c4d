#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "htile/error.hpp"
#include "htile/graph.hpp"
#include "htile/instance.hpp"

namespace htile {

inline constexpr double kNoCap = std::numeric_limits<double>::infinity();

/// One embedded copy of H in the host graph.
struct PlacedCopy {
  std::vector<int> vertices;   ///< sorted host vertices
  std::vector<int> embedding;  ///< pattern vertex -> host vertex
  std::vector<Edge> edges;     ///< host edges, sorted
  std::vector<double> edge_weights;  ///< aligned with edges
  double weight = 0.0;

  /// Copies are subgraphs: identity is the host edge set (plus the vertex set,
  /// which only matters when H has isolated vertices).
  friend bool operator==(const PlacedCopy& a, const PlacedCopy& b) noexcept {
    return a.edges == b.edges && a.vertices == b.vertices;
  }
};

/// Canonical copy order: weight, then host edge set, then vertex set.
inline bool copy_less(const PlacedCopy& a, const PlacedCopy& b) noexcept {
  if (a.weight != b.weight) return a.weight < b.weight;
  if (a.edges != b.edges) return a.edges < b.edges;
  return a.vertices < b.vertices;
}

/// Sum of edge weights in sorted-edge order, so results are bit-reproducible.
inline double copy_weight(const WeightedInstance& inst, std::span<const Edge> sorted_edges) {
  double w = 0.0;
  for (const auto& e : sorted_edges) w += inst.weight(e.u, e.v);
  return w;
}

/// All copies of H in the cap-filtered host, sorted by copy_less.
struct CopyIndex {
  int n = 0;
  double cap = kNoCap;
  std::vector<PlacedCopy> copies;
  std::vector<std::vector<std::uint32_t>> postings;  ///< per host vertex, ascending copy indices

  std::size_t size() const noexcept { return copies.size(); }
  bool empty() const noexcept { return copies.empty(); }
};

struct EnumerateOptions {
  std::size_t max_copies = 100'000'000;
  /// Restrict the host to these vertices (all of K_n when empty).
  std::vector<int> active;
};

namespace detail {

/// Pattern vertices in search order: every core component grows from its
/// highest-degree vertex through already-placed neighbours; isolated vertices last.
inline std::vector<int> pattern_order(const GraphH& h) {
  const int p = h.vertex_count();
  std::vector<int> order;
  std::vector<bool> placed(static_cast<std::size_t>(p), false);
  std::uint64_t placed_mask = 0;
  for (;;) {
    int best = -1;
    int best_links = -1;
    for (int v = 0; v < p; ++v) {
      if (placed[static_cast<std::size_t>(v)] || h.degree(v) == 0) continue;
      const int links = std::popcount(h.neighbours(v) & placed_mask);
      if (best < 0 || links > best_links || (links == best_links && h.degree(v) > h.degree(best))) {
        best = v;
        best_links = links;
      }
    }
    if (best < 0) break;
    placed[static_cast<std::size_t>(best)] = true;
    placed_mask |= std::uint64_t{1} << best;
    order.push_back(best);
  }
  return order;
}

/// Host graph restricted to active vertices and edges of weight <= cap.
struct FilteredHost {
  int n = 0;
  std::vector<std::uint8_t> adj;          ///< n*n matrix
  std::vector<std::vector<int>> nbrs;     ///< sorted neighbour lists
  std::vector<int> active;                ///< sorted active vertices
  std::vector<std::uint8_t> is_active;

  FilteredHost(const WeightedInstance& inst, double cap, std::span<const int> only) : n(inst.n()) {
    is_active.assign(static_cast<std::size_t>(n), only.empty() ? 1 : 0);
    for (int v : only) {
      if (v < 0 || v >= n) throw UsageError("active vertex out of range");
      is_active[static_cast<std::size_t>(v)] = 1;
    }
    for (int v = 0; v < n; ++v)
      if (is_active[static_cast<std::size_t>(v)]) active.push_back(v);
    adj.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
    nbrs.assign(static_cast<std::size_t>(n), {});
    for (std::size_t a = 0; a < active.size(); ++a)
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const int i = active[a];
        const int j = active[b];
        if (inst.weight(i, j) <= cap) {
          adj[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] = 1;
          adj[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = 1;
          nbrs[static_cast<std::size_t>(i)].push_back(j);
          nbrs[static_cast<std::size_t>(j)].push_back(i);
        }
      }
  }

  bool edge(int i, int j) const noexcept {
    return adj[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] != 0;
  }
};

/// Backtracking over injective maps of H's core into the host. `visit(image, partial)`
/// receives each canonical embedding (one per copy of the core); `prune(partial)`
/// may cut branches whose partial edge weight is already too large.
template <typename Prune, typename Visit>
void enumerate_core_embeddings(const GraphH& h, const WeightedInstance& inst, const FilteredHost& host,
                               Prune&& prune, Visit&& visit) {
  const auto order = pattern_order(h);
  const auto autos = core_automorphisms(h);
  const std::size_t depth_max = order.size();
  std::vector<int> image(static_cast<std::size_t>(h.vertex_count()), -1);
  std::vector<std::uint8_t> used(static_cast<std::size_t>(host.n), 0);

  // back_nbrs[d]: pattern neighbours of order[d] placed before it.
  std::vector<std::vector<int>> back_nbrs(depth_max);
  for (std::size_t d = 0; d < depth_max; ++d)
    for (std::size_t e = 0; e < d; ++e)
      if (h.adjacent(order[d], order[e])) back_nbrs[d].push_back(order[e]);

  std::vector<int> core_sorted = order;
  std::sort(core_sorted.begin(), core_sorted.end());
  auto canonical = [&] {
    for (const auto& sigma : autos) {
      for (int v : core_sorted) {
        const int mine = image[static_cast<std::size_t>(v)];
        const int theirs = image[static_cast<std::size_t>(sigma[static_cast<std::size_t>(v)])];
        if (theirs < mine) return false;
        if (theirs > mine) break;
      }
    }
    return true;
  };

  auto rec = [&](auto&& self, std::size_t depth, double partial) -> void {
    if (depth == depth_max) {
      if (canonical()) visit(std::as_const(image), partial);
      return;
    }
    const int p = order[depth];
    const auto& back = back_nbrs[depth];
    auto try_host = [&](int x) {
      if (used[static_cast<std::size_t>(x)]) return;
      double add = 0.0;
      for (int q : back) {
        const int y = image[static_cast<std::size_t>(q)];
        if (!host.edge(x, y)) return;
        add += inst.weight(x, y);
      }
      if (prune(partial + add)) return;
      image[static_cast<std::size_t>(p)] = x;
      used[static_cast<std::size_t>(x)] = 1;
      self(self, depth + 1, partial + add);
      used[static_cast<std::size_t>(x)] = 0;
      image[static_cast<std::size_t>(p)] = -1;
    };
    if (back.empty()) {
      for (int x : host.active) try_host(x);
    } else {
      for (int x : host.nbrs[static_cast<std::size_t>(image[static_cast<std::size_t>(back.front())])]) try_host(x);
    }
  };
  rec(rec, 0, 0.0);
}

inline PlacedCopy make_copy(const GraphH& h, const WeightedInstance& inst, std::vector<int> embedding) {
  PlacedCopy c;
  c.embedding = std::move(embedding);
  c.vertices = c.embedding;
  std::sort(c.vertices.begin(), c.vertices.end());
  c.edges.reserve(static_cast<std::size_t>(h.edge_count()));
  for (const auto& e : h.edges()) {
    int a = c.embedding[static_cast<std::size_t>(e.u)];
    int b = c.embedding[static_cast<std::size_t>(e.v)];
    if (a > b) std::swap(a, b);
    c.edges.push_back({a, b});
  }
  std::sort(c.edges.begin(), c.edges.end());
  c.edge_weights.reserve(c.edges.size());
  for (const auto& e : c.edges) c.edge_weights.push_back(inst.weight(e.u, e.v));
  c.weight = copy_weight(inst, c.edges);
  return c;
}

inline std::vector<int> isolated_vertices(const GraphH& h) {
  std::vector<int> out;
  for (int v = 0; v < h.vertex_count(); ++v)
    if (h.degree(v) == 0) out.push_back(v);
  return out;
}

}  // namespace detail

/// Every copy of H whose edges all weigh at most `cap`, one entry per copy.
inline CopyIndex enumerate_copies(const GraphH& h, const WeightedInstance& inst, double cap = kNoCap,
                                  const EnumerateOptions& opts = {}) {
  if (!(cap > 0.0)) throw UsageError("cap must be positive");
  const detail::FilteredHost host(inst, cap, opts.active);
  if (h.vertex_count() > inst.n()) throw UsageError("pattern has more vertices than the host");

  CopyIndex index;
  index.n = inst.n();
  index.cap = cap;
  const auto isolated = detail::isolated_vertices(h);
  std::vector<int> unused;
  std::vector<int> chosen(isolated.size());

  auto emit = [&](std::vector<int> embedding) {
    if (index.copies.size() >= opts.max_copies)
      throw LimitError("copy enumeration exceeded " + std::to_string(opts.max_copies) +
                       " copies; use a smaller edge-weight cap");
    index.copies.push_back(detail::make_copy(h, inst, std::move(embedding)));
  };

  detail::enumerate_core_embeddings(
      h, inst, host, [](double) { return false; },
      [&](const std::vector<int>& image, double) {
        if (isolated.empty()) {
          emit(image);
          return;
        }
        unused.clear();
        for (int x : host.active)
          if (std::find(image.begin(), image.end(), x) == image.end()) unused.push_back(x);
        // Isolated pattern vertices take every combination of unused host vertices.
        const std::size_t r = isolated.size();
        if (unused.size() < r) return;
        std::vector<std::size_t> pick(r);
        for (std::size_t i = 0; i < r; ++i) pick[i] = i;
        for (;;) {
          auto embedding = image;
          for (std::size_t i = 0; i < r; ++i)
            embedding[static_cast<std::size_t>(isolated[i])] = unused[pick[i]];
          emit(std::move(embedding));
          std::size_t i = r;
          while (i > 0 && pick[i - 1] == unused.size() - r + (i - 1)) --i;
          if (i == 0) break;
          ++pick[i - 1];
          for (std::size_t j = i; j < r; ++j) pick[j] = pick[j - 1] + 1;
        }
      });

  std::sort(index.copies.begin(), index.copies.end(), copy_less);
  index.postings.assign(static_cast<std::size_t>(inst.n()), {});
  for (std::size_t c = 0; c < index.copies.size(); ++c)
    for (int v : index.copies[c].vertices) index.postings[static_cast<std::size_t>(v)].push_back(static_cast<std::uint32_t>(c));
  return index;
}

/// A minimum-weight copy of `h` in K_n; ties go to the smaller host edge set.
inline PlacedCopy cheapest_copy(const GraphH& h, const WeightedInstance& inst) {
  if (h.vertex_count() > inst.n()) throw UsageError("pattern has more vertices than the host");
  const detail::FilteredHost host(inst, kNoCap, {});
  std::optional<PlacedCopy> best;
  // Partial sums are accumulated in search order, so prune with a little slack and
  // let the canonical weight decide.
  auto prune = [&](double partial) { return best && partial > best->weight * (1.0 + 1e-12); };
  detail::enumerate_core_embeddings(h, inst, host, prune, [&](const std::vector<int>& image, double) {
    auto embedding = image;
    std::vector<std::uint8_t> taken(static_cast<std::size_t>(inst.n()), 0);
    for (int x : image)
      if (x >= 0) taken[static_cast<std::size_t>(x)] = 1;
    int next = 0;
    for (int v = 0; v < h.vertex_count(); ++v) {
      if (embedding[static_cast<std::size_t>(v)] >= 0) continue;
      while (taken[static_cast<std::size_t>(next)]) ++next;
      embedding[static_cast<std::size_t>(v)] = next;
      taken[static_cast<std::size_t>(next)] = 1;
    }
    auto c = detail::make_copy(h, inst, std::move(embedding));
    if (!best || copy_less(c, *best)) best = std::move(c);
  });
  if (!best) throw UsageError("host has no copy of the pattern");
  return *best;
}

}  // namespace htile
