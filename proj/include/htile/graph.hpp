#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "htile/error.hpp"
#include "htile/rational.hpp"

namespace htile {

/// Undirected edge with `u < v`.
struct Edge {
  int u = 0;
  int v = 0;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// The fixed pattern graph H. Immutable once built; vertices are 0..vertex_count()-1.
class GraphH {
 public:
  static constexpr int kMaxVertices = 64;

  GraphH(int vertex_count, std::vector<Edge> edges, std::string label = {})
      : vertex_count_(vertex_count), edges_(std::move(edges)), label_(std::move(label)) {
    if (vertex_count_ < 1) throw UsageError("pattern graph needs at least one vertex");
    if (vertex_count_ > kMaxVertices)
      throw LimitError("pattern graph has " + std::to_string(vertex_count_) +
                       " vertices; at most " + std::to_string(kMaxVertices) + " are supported");
    adjacency_.assign(static_cast<std::size_t>(vertex_count_), 0);
    for (auto& e : edges_) {
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u < 0 || e.v >= vertex_count_)
        throw UsageError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                         ") has an endpoint outside 0.." + std::to_string(vertex_count_ - 1));
      if (e.u == e.v) throw UsageError("self-loop at vertex " + std::to_string(e.u));
      const std::uint64_t bit = std::uint64_t{1} << e.v;
      if (adjacency_[static_cast<std::size_t>(e.u)] & bit)
        throw UsageError("duplicate edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
      adjacency_[static_cast<std::size_t>(e.u)] |= bit;
      adjacency_[static_cast<std::size_t>(e.v)] |= std::uint64_t{1} << e.u;
    }
    if (edges_.empty()) throw UsageError("pattern graph needs at least one edge");
    std::sort(edges_.begin(), edges_.end());
  }

  int vertex_count() const noexcept { return vertex_count_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const std::string& label() const noexcept { return label_; }

  std::uint64_t neighbours(int v) const noexcept { return adjacency_[static_cast<std::size_t>(v)]; }
  bool adjacent(int a, int b) const noexcept { return (neighbours(a) >> b) & 1U; }
  int degree(int v) const noexcept { return std::popcount(neighbours(v)); }

  /// Number of edges with both endpoints in the vertex set `mask`.
  int edges_within(std::uint64_t mask) const noexcept {
    int twice = 0;
    for (std::uint64_t m = mask; m; m &= m - 1) twice += std::popcount(neighbours(std::countr_zero(m)) & mask);
    return twice / 2;
  }

  /// Same vertex count and edge set; labels are ignored.
  friend bool operator==(const GraphH& a, const GraphH& b) noexcept {
    return a.vertex_count_ == b.vertex_count_ && a.edges_ == b.edges_;
  }

 private:
  int vertex_count_;
  std::vector<Edge> edges_;
  std::string label_;
  std::vector<std::uint64_t> adjacency_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

}  // namespace detail

/// Reads an edge list: one "u v" pair per line, with an optional "n <count>" header
/// declaring the vertex count (to include isolated vertices). Blank lines and lines
/// starting with '#' are ignored.
inline GraphH parse_graph(std::string_view text, std::string label = "file") {
  std::vector<Edge> edges;
  std::optional<long long> header;
  int header_line = 0;
  long long max_endpoint = -1;
  std::vector<std::pair<Edge, int>> seen;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto tokens = detail::split_ws(line);
    if (tokens.size() != 2) throw ParseError("expected two fields, got \"" + std::string(line) + "\"", line_no);

    if (tokens[0] == "n") {
      if (header || !edges.empty()) throw ParseError("the \"n\" header must come first and only once", line_no);
      header = detail::parse_int(tokens[1]);
      if (!header || *header < 1) throw ParseError("invalid vertex count \"" + std::string(tokens[1]) + "\"", line_no);
      header_line = line_no;
      continue;
    }
    const auto a = detail::parse_int(tokens[0]);
    const auto b = detail::parse_int(tokens[1]);
    if (!a || !b || *a < 0 || *b < 0)
      throw ParseError("malformed edge \"" + std::string(line) + "\"", line_no);
    if (*a == *b) throw ParseError("self-loop at vertex " + std::to_string(*a), line_no);
    if (std::max(*a, *b) >= GraphH::kMaxVertices) throw ParseError("vertex index too large", line_no);
    Edge e{static_cast<int>(std::min(*a, *b)), static_cast<int>(std::max(*a, *b))};
    for (const auto& [prev, prev_line] : seen)
      if (prev == e)
        throw ParseError("duplicate edge " + std::to_string(e.u) + " " + std::to_string(e.v) +
                             " (first on line " + std::to_string(prev_line) + ")",
                         line_no);
    seen.emplace_back(e, line_no);
    edges.push_back(e);
    max_endpoint = std::max<long long>(max_endpoint, e.v);
  }
  if (edges.empty()) throw ParseError("no edges found");
  long long count = max_endpoint + 1;
  if (header) {
    if (*header < count)
      throw ParseError("header declares " + std::to_string(*header) + " vertices but edges use vertex " +
                           std::to_string(max_endpoint),
                       header_line);
    count = *header;
  }
  if (count > GraphH::kMaxVertices) throw ParseError("too many vertices", header_line);
  return GraphH(static_cast<int>(count), std::move(edges), std::move(label));
}

/// Vertex-disjoint union; `b`'s vertices are shifted past `a`'s.
inline GraphH disjoint_union(const GraphH& a, const GraphH& b) {
  std::vector<Edge> edges(a.edges().begin(), a.edges().end());
  for (const auto& e : b.edges()) edges.push_back({e.u + a.vertex_count(), e.v + a.vertex_count()});
  return GraphH(a.vertex_count() + b.vertex_count(), std::move(edges), a.label() + "+" + b.label());
}

/// Standard families: complete(k), cycle(k), path(k vertices), lollipop(clique, tail)
/// and disjoint_union(parts...).
inline GraphH named_graph(std::string_view name, std::span<const int> params, std::span<const GraphH> parts = {}) {
  auto need = [&](std::size_t count) {
    if (params.size() != count)
      throw UsageError(std::string(name) + " takes " + std::to_string(count) + " parameter(s)");
  };
  auto label = [&] {
    std::string s(name);
    for (std::size_t i = 0; i < params.size(); ++i) s += (i == 0 ? ":" : ",") + std::to_string(params[i]);
    return s;
  };
  std::vector<Edge> edges;
  if (name == "complete") {
    need(1);
    const int k = params[0];
    if (k < 2) throw UsageError("complete needs k >= 2");
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) edges.push_back({i, j});
    return GraphH(k, std::move(edges), label());
  }
  if (name == "cycle") {
    need(1);
    const int k = params[0];
    if (k < 3) throw UsageError("cycle needs k >= 3");
    for (int i = 0; i < k; ++i) edges.push_back({i, (i + 1) % k});
    return GraphH(k, std::move(edges), label());
  }
  if (name == "path") {
    need(1);
    const int k = params[0];
    if (k < 2) throw UsageError("path needs at least 2 vertices");
    for (int i = 0; i + 1 < k; ++i) edges.push_back({i, i + 1});
    return GraphH(k, std::move(edges), label());
  }
  if (name == "lollipop") {
    need(2);
    const int clique = params[0];
    const int tail = params[1];
    if (clique < 3 || tail < 1) throw UsageError("lollipop needs clique >= 3 and tail >= 1");
    for (int i = 0; i < clique; ++i)
      for (int j = i + 1; j < clique; ++j) edges.push_back({i, j});
    for (int i = 0; i < tail; ++i) edges.push_back({clique - 1 + i, clique + i});
    return GraphH(clique + tail, std::move(edges), label());
  }
  if (name == "disjoint_union") {
    if (!params.empty() || parts.size() < 2) throw UsageError("disjoint_union composes at least two graphs");
    GraphH acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) acc = disjoint_union(acc, parts[i]);
    return acc;
  }
  throw UsageError("unknown graph family \"" + std::string(name) + "\"");
}

/// Parses "family:p1,p2" terms joined by '+', e.g. "complete:4+complete:2".
inline GraphH graph_from_spec(std::string_view spec) {
  std::vector<GraphH> parts;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto plus = spec.find('+', pos);
    const auto term = detail::trim(spec.substr(pos, plus == std::string_view::npos ? spec.size() - pos : plus - pos));
    pos = plus == std::string_view::npos ? spec.size() + 1 : plus + 1;

    const auto colon = term.find(':');
    const auto family = term.substr(0, colon);
    std::vector<int> params;
    if (colon != std::string_view::npos) {
      auto rest = term.substr(colon + 1);
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const auto tok = rest.substr(0, comma);
        const auto value = detail::parse_int(detail::trim(tok));
        if (!value) throw UsageError("bad parameter \"" + std::string(tok) + "\" in graph spec \"" + std::string(spec) + "\"");
        params.push_back(static_cast<int>(*value));
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      }
    }
    parts.push_back(named_graph(family, params));
  }
  if (parts.size() == 1) return parts.front();
  return named_graph("disjoint_union", {}, parts);
}

// ---------------------------------------------------------------------------
// Automorphisms

namespace detail {

template <typename Visit>
void for_each_automorphism_of(const GraphH& h, std::span<const int> domain, Visit&& visit) {
  const int n = h.vertex_count();
  std::vector<int> image(static_cast<std::size_t>(n), -1);
  std::uint64_t used = 0;
  std::uint64_t domain_mask = 0;
  for (int v : domain) domain_mask |= std::uint64_t{1} << v;

  auto rec = [&](auto&& self, std::size_t depth) -> bool {
    if (depth == domain.size()) return visit(std::as_const(image));
    const int v = domain[depth];
    for (std::uint64_t cand = domain_mask & ~used; cand; cand &= cand - 1) {
      const int w = std::countr_zero(cand);
      if (h.degree(w) != h.degree(v)) continue;
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d) {
        const int u = domain[d];
        ok = h.adjacent(u, v) == h.adjacent(image[static_cast<std::size_t>(u)], w);
      }
      if (!ok) continue;
      image[static_cast<std::size_t>(v)] = w;
      used |= std::uint64_t{1} << w;
      const bool go_on = self(self, depth + 1);
      used &= ~(std::uint64_t{1} << w);
      image[static_cast<std::size_t>(v)] = -1;
      if (!go_on) return false;
    }
    return true;
  };
  rec(rec, 0);
}

inline std::vector<int> non_isolated_vertices(const GraphH& h) {
  std::vector<int> out;
  for (int v = 0; v < h.vertex_count(); ++v)
    if (h.degree(v) > 0) out.push_back(v);
  return out;
}

}  // namespace detail

/// Automorphisms of the non-isolated part of H, as maps on its vertices
/// (entries for isolated vertices are -1). Used for copy deduplication.
inline std::vector<std::vector<int>> core_automorphisms(const GraphH& h) {
  std::vector<std::vector<int>> out;
  const auto domain = detail::non_isolated_vertices(h);
  detail::for_each_automorphism_of(h, domain, [&](const std::vector<int>& img) {
    out.push_back(img);
    return true;
  });
  return out;
}

/// |Aut(H)|, counting permutations of isolated vertices too.
inline std::uint64_t count_automorphisms(const GraphH& h) {
  std::uint64_t core = 0;
  const auto domain = detail::non_isolated_vertices(h);
  detail::for_each_automorphism_of(h, domain, [&](const std::vector<int>&) {
    ++core;
    return true;
  });
  for (int i = 2; i <= h.vertex_count() - static_cast<int>(domain.size()); ++i) core *= static_cast<std::uint64_t>(i);
  return core;
}

// ---------------------------------------------------------------------------
// Density invariants

struct DensityReport {
  int vertex_count = 0;
  int edge_count = 0;
  Rational d_h;    ///< e_H / (v_H - 1)
  Rational d_star; ///< max 1-density over subgraphs with at least two vertices
  Rational delta;  ///< max 0-density e_G / v_G over subgraphs
  std::vector<int> h_star_vertices;
  std::vector<int> delta_witness_vertices;
  bool strictly_balanced = false;
  bool balanced = false;
  std::uint64_t aut_count = 0;

  friend bool operator==(const DensityReport&, const DensityReport&) = default;
};

struct AnalyzeOptions {
  int max_vertices = 16;
};

/// Exhaustive scan of vertex subsets. Induced subgraphs suffice: dropping edges from a
/// fixed vertex set only lowers both densities.
inline DensityReport analyze(const GraphH& h, AnalyzeOptions opts = {}) {
  const int n = h.vertex_count();
  if (n > opts.max_vertices)
    throw LimitError("pattern too large: " + std::to_string(n) + " vertices exceeds the exhaustive-scan limit of " +
                     std::to_string(opts.max_vertices));
  if (n < 2) throw UsageError("analyze needs at least two vertices");

  auto members = [](std::uint64_t mask) {
    std::vector<int> out;
    for (; mask; mask &= mask - 1) out.push_back(std::countr_zero(mask));
    return out;
  };
  // Smaller subsets win ties, then lexicographically smaller vertex lists.
  auto better_witness = [&](std::uint64_t cand, std::uint64_t best) {
    const int pc = std::popcount(cand);
    const int pb = std::popcount(best);
    if (pc != pb) return pc < pb;
    return members(cand) < members(best);
  };

  DensityReport r;
  r.vertex_count = n;
  r.edge_count = h.edge_count();
  r.d_h = Rational(h.edge_count(), n - 1);

  std::optional<Rational> best_one, best_zero, best_proper;
  std::uint64_t one_mask = 0, zero_mask = 0;
  const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  for (std::uint64_t s = 1; s <= full && s != 0; ++s) {
    const int size = std::popcount(s);
    const int e = h.edges_within(s);
    const Rational zero(e, size);
    if (!best_zero || zero > *best_zero || (zero == *best_zero && better_witness(s, zero_mask))) {
      best_zero = zero;
      zero_mask = s;
    }
    if (size < 2) continue;
    const Rational one(e, size - 1);
    if (!best_one || one > *best_one || (one == *best_one && better_witness(s, one_mask))) {
      best_one = one;
      one_mask = s;
    }
    if (s != full && (!best_proper || one > *best_proper)) best_proper = one;
    if (s == full) break;
  }
  r.d_star = *best_one;
  r.delta = *best_zero;
  r.h_star_vertices = members(one_mask);
  r.delta_witness_vertices = members(zero_mask);
  r.balanced = r.d_star == r.d_h;
  r.strictly_balanced = !best_proper || *best_proper < r.d_h;
  r.aut_count = count_automorphisms(h);
  return r;
}

/// Induced subgraph of H on `vertices` (relabelled in the given order).
inline GraphH induced_subgraph(const GraphH& h, std::span<const int> vertices, std::string label = {}) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (std::size_t j = i + 1; j < vertices.size(); ++j)
      if (h.adjacent(vertices[i], vertices[j])) edges.push_back({static_cast<int>(i), static_cast<int>(j)});
  return GraphH(static_cast<int>(vertices.size()), std::move(edges), std::move(label));
}

}  // namespace htile
