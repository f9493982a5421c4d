#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "htile/copies.hpp"
#include "htile/json_io.hpp"

namespace htile {

enum class Mode { factor, cover };

inline std::string_view to_string(Mode m) { return m == Mode::factor ? "factor" : "cover"; }
inline Mode parse_mode(std::string_view s) {
  if (s == "factor") return Mode::factor;
  if (s == "cover") return Mode::cover;
  throw UsageError("mode must be factor or cover, got \"" + std::string(s) + "\"");
}

/// A partial factor or cover. In cover mode an edge shared by several copies is
/// paid once per copy.
struct TilingSolution {
  Mode mode = Mode::factor;
  int n = 0;
  std::vector<PlacedCopy> copies;  ///< canonical order (host edge set, then vertex set)
  double total_weight = 0.0;
  int uncovered = 0;
  double cap = kNoCap;
  bool optimal = false;
  int allowed_uncovered = 0;
};

enum class SolveStatus { optimal, infeasible, timeout };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::timeout: return "timeout";
  }
  return {};
}

/// Outcome of an exact solve. `solution` is empty when infeasible, and holds the best
/// incumbent (optimal == false) on timeout, if one was found.
struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  std::optional<TilingSolution> solution;
  std::uint64_t nodes = 0;

  bool solved() const noexcept { return status == SolveStatus::optimal; }
  double weight() const { return solution.value().total_weight; }
};

inline bool canonical_copy_less(const PlacedCopy& a, const PlacedCopy& b) noexcept {
  if (a.edges != b.edges) return a.edges < b.edges;
  return a.vertices < b.vertices;
}

/// Sum of every edge weight used, with multiplicity, in sorted edge order. It depends
/// only on the edge multiset, so solutions that group the same edges into copies
/// differently still get bit-equal totals.
inline double canonical_total(std::span<const PlacedCopy> copies) {
  std::vector<std::pair<Edge, double>> all;
  for (const auto& c : copies)
    for (std::size_t i = 0; i < c.edges.size(); ++i) all.emplace_back(c.edges[i], c.edge_weights[i]);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& [e, w] : all) total += w;
  return total;
}

/// Puts copies in canonical order and returns canonical_total. Every solver reports
/// totals this way, so equal solutions have bit-equal weights.
inline double canonicalize(std::vector<PlacedCopy>& copies) {
  std::sort(copies.begin(), copies.end(), canonical_copy_less);
  return canonical_total(copies);
}

inline TilingSolution make_solution(Mode mode, int n, std::vector<PlacedCopy> copies, double cap, int allowed_uncovered,
                                    bool optimal) {
  TilingSolution s;
  s.mode = mode;
  s.n = n;
  s.total_weight = canonicalize(copies);
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(n), 0);
  for (const auto& c : copies)
    for (int v : c.vertices) hit[static_cast<std::size_t>(v)] = 1;
  s.uncovered = n - static_cast<int>(std::count(hit.begin(), hit.end(), std::uint8_t{1}));
  s.copies = std::move(copies);
  s.cap = cap;
  s.optimal = optimal;
  s.allowed_uncovered = allowed_uncovered;
  return s;
}

/// Independent check of every TilingSolution invariant against the instance.
/// Returns a list of violations; empty means valid.
inline std::vector<std::string> validate_solution(const TilingSolution& s, const WeightedInstance& inst, const GraphH& h) {
  std::vector<std::string> problems;
  if (s.n != inst.n()) problems.push_back("solution n differs from instance n");
  std::vector<int> cover_count(static_cast<std::size_t>(inst.n()), 0);
  std::vector<std::pair<Edge, double>> used;
  for (std::size_t i = 0; i < s.copies.size(); ++i) {
    const auto& c = s.copies[i];
    const auto tag = "copy " + std::to_string(i) + ": ";
    if (c.embedding.size() != static_cast<std::size_t>(h.vertex_count())) {
      problems.push_back(tag + "embedding has wrong size");
      continue;
    }
    auto verts = c.embedding;
    std::sort(verts.begin(), verts.end());
    if (std::adjacent_find(verts.begin(), verts.end()) != verts.end()) problems.push_back(tag + "embedding not injective");
    if (verts.front() < 0 || verts.back() >= inst.n()) {
      problems.push_back(tag + "vertex out of range");
      continue;
    }
    if (verts != c.vertices) problems.push_back(tag + "vertex list does not match embedding");
    std::vector<Edge> edges;
    for (const auto& e : h.edges()) {
      const int a = c.embedding[static_cast<std::size_t>(e.u)];
      const int b = c.embedding[static_cast<std::size_t>(e.v)];
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
    std::sort(edges.begin(), edges.end());
    if (edges != c.edges) problems.push_back(tag + "edge list does not match embedding");
    double w = 0.0;
    for (const auto& e : edges) {
      const double x = inst.weight(e.u, e.v);
      if (x > s.cap) problems.push_back(tag + "edge exceeds the cap");
      w += x;
      used.emplace_back(e, x);
    }
    if (w != c.weight) problems.push_back(tag + "weight differs from the recomputed edge sum");
    for (int v : verts) ++cover_count[static_cast<std::size_t>(v)];
    if (i > 0 && !canonical_copy_less(s.copies[i - 1], c)) problems.push_back(tag + "copies not in canonical order (or repeated)");
  }
  int uncovered = 0;
  for (int v = 0; v < inst.n(); ++v) {
    const int k = cover_count[static_cast<std::size_t>(v)];
    if (k == 0) ++uncovered;
    if (s.mode == Mode::factor && k > 1) problems.push_back("vertex " + std::to_string(v) + " covered twice in a factor");
  }
  if (uncovered != s.uncovered) problems.push_back("uncovered count is wrong");
  if (uncovered > s.allowed_uncovered) problems.push_back("more vertices uncovered than allowed");
  std::sort(used.begin(), used.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (const auto& [e, w] : used) total += w;
  if (total != s.total_weight) problems.push_back("total weight differs from the sorted sum of all edge weights");
  return problems;
}

/// Structured record: mode, k, cap, total weight and copies as host-vertex tuples
/// (tuple position = pattern vertex).
inline json solution_to_json(const TilingSolution& s) {
  json copies = json::array();
  for (const auto& c : s.copies) copies.push_back(c.embedding);
  json j;
  j["mode"] = to_string(s.mode);
  j["n"] = s.n;
  j["k"] = s.allowed_uncovered;
  j["cap"] = real_value(s.cap);
  j["total_weight"] = s.total_weight;
  j["uncovered"] = s.uncovered;
  j["optimal"] = s.optimal;
  j["copies"] = std::move(copies);
  return j;
}

/// Rebuilds a solution from its record; weights come from `inst`.
inline TilingSolution solution_from_json(const json& j, const WeightedInstance& inst, const GraphH& h) {
  std::vector<PlacedCopy> copies;
  for (const auto& tuple : j.at("copies")) {
    auto embedding = tuple.get<std::vector<int>>();
    if (embedding.size() != static_cast<std::size_t>(h.vertex_count())) throw ParseError("copy tuple has the wrong length");
    for (int x : embedding)
      if (x < 0 || x >= inst.n()) throw ParseError("copy tuple vertex out of range");
    copies.push_back(detail::make_copy(h, inst, std::move(embedding)));
  }
  auto s = make_solution(parse_mode(j.at("mode").get<std::string>()), inst.n(), std::move(copies), real_from(j.at("cap")),
                         j.at("k").get<int>(), j.at("optimal").get<bool>());
  return s;
}

}  // namespace htile
