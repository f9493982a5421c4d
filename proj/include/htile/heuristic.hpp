#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "htile/exact.hpp"
#include "htile/graph.hpp"

namespace htile {

/// Leftover fraction alpha with alpha^(1 - 1/d*) = 1/4.
inline double default_alpha(const DensityReport& report) {
  const double d = report.d_star.to_double();
  if (!(d > 1.0)) throw UsageError("the recursive construction needs d* > 1");
  return std::pow(0.25, d / (d - 1.0));
}

struct RecursionParams {
  /// Leftover fraction per level; 0 selects default_alpha.
  double alpha = 0.0;
  /// Uncovered sets of at most this many vertices are finished exactly.
  int base_size = 24;
  /// Edge cap at level i is level_cap * cap_growth^i (no cap by default).
  double level_cap = kNoCap;
  double cap_growth = 2.0;
  /// Cheapest copies per active vertex kept as greedy candidates (0 keeps all).
  std::size_t greedy_pool = 0;
  SolverOptions exact;
};

/// One record per level of the recursion.
struct LevelReport {
  int level = 0;
  int active = 0;      ///< uncovered vertices when the level started
  int target = 0;      ///< uncovered vertices the level aimed to leave
  int placed = 0;      ///< copies added by the level
  double weight = 0.0; ///< total weight of those copies
  bool exact = false;  ///< finished by the exact solver
};

struct DivideConquerResult {
  TilingSolution solution;
  std::vector<LevelReport> levels;
  bool complete = false;  ///< every vertex covered
};

namespace detail {

inline int round_down_to(int x, int step) { return x - x % step; }

// Lifts a solution on inst.restrict_to(vertices) back to the host labels.
inline std::vector<PlacedCopy> lift_copies(const std::vector<PlacedCopy>& local, std::span<const int> vertices,
                                           const GraphH& h, const WeightedInstance& inst) {
  std::vector<PlacedCopy> out;
  out.reserve(local.size());
  for (const auto& c : local) {
    std::vector<int> embedding;
    embedding.reserve(c.embedding.size());
    for (int x : c.embedding) embedding.push_back(vertices[static_cast<std::size_t>(x)]);
    out.push_back(make_copy(h, inst, std::move(embedding)));
  }
  return out;
}

}  // namespace detail

/// Repeatedly takes the globally cheapest copy (edges <= cap) inside the still
/// uncovered part of `active` (all of K_n when empty), until at most
/// `target_uncovered` active vertices are left or nothing fits. allowed_uncovered
/// of the result counts inactive vertices plus the target (or plus the actual
/// leftover when the target was missed).
inline TilingSolution greedy_partial_factor(const WeightedInstance& inst, const GraphH& h, std::span<const int> active,
                                            int target_uncovered, double cap = kNoCap, std::size_t pool = 0) {
  const int n = inst.n();
  std::vector<int> act(active.begin(), active.end());
  if (act.empty())
    for (int v = 0; v < n; ++v) act.push_back(v);
  std::sort(act.begin(), act.end());
  act.erase(std::unique(act.begin(), act.end()), act.end());
  const int inactive = n - static_cast<int>(act.size());
  if (target_uncovered < 0) throw UsageError("target_uncovered must be non-negative");

  std::vector<PlacedCopy> chosen;
  int left = static_cast<int>(act.size());
  if (left > target_uncovered && h.vertex_count() <= left) {
    EnumerateOptions eo;
    eo.active = act;
    const auto index = enumerate_copies(h, inst, cap, eo);
    std::vector<std::uint8_t> candidate(index.size(), pool == 0 ? 1 : 0);
    if (pool > 0)
      for (int v : act) {
        const auto& p = index.postings[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < std::min(pool, p.size()); ++i) candidate[p[i]] = 1;
      }
    std::vector<std::uint8_t> used(static_cast<std::size_t>(n), 0);
    for (std::size_t c = 0; c < index.size() && left > target_uncovered; ++c) {
      if (!candidate[c]) continue;
      const auto& copy = index.copies[c];
      if (std::any_of(copy.vertices.begin(), copy.vertices.end(), [&](int v) { return used[static_cast<std::size_t>(v)]; }))
        continue;
      for (int v : copy.vertices) used[static_cast<std::size_t>(v)] = 1;
      left -= h.vertex_count();
      chosen.push_back(copy);
    }
  }
  const int allowed = inactive + std::max(target_uncovered, left);
  return make_solution(Mode::factor, n, std::move(chosen), cap, allowed, false);
}

/// Level i covers greedily down to n_{i+1} uncovered vertices, n_{i+1} the largest
/// multiple of v_H below alpha * n_i; once at most base_size vertices remain, the
/// exact solver completes the factor. Levels never aim below the base size, so the
/// exact finish always gets the tail.
inline DivideConquerResult divide_conquer_factor(const WeightedInstance& inst, const GraphH& h,
                                                 const RecursionParams& params = {}) {
  const auto report = analyze(h);
  const double alpha = params.alpha == 0.0 ? default_alpha(report) : params.alpha;
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (!(report.d_star > Rational(1))) throw UsageError("the recursive construction needs d* > 1");
  const int v_h = h.vertex_count();
  const int n = inst.n();
  if (n % v_h != 0) throw UsageError("n must be a multiple of v_H");
  if (params.base_size < v_h) throw UsageError("base_size must be at least v_H");
  const int base = std::min(detail::round_down_to(params.base_size, v_h), detail::round_down_to(kExactMaxVertices, v_h));

  DivideConquerResult out;
  std::vector<PlacedCopy> copies;
  std::vector<int> uncovered(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) uncovered[static_cast<std::size_t>(v)] = v;
  double cap = params.level_cap;
  bool optimal = false;

  for (int level = 0;; ++level) {
    const int size = static_cast<int>(uncovered.size());
    LevelReport rep;
    rep.level = level;
    rep.active = size;
    if (size == 0) break;
    if (size <= base) {
      rep.exact = true;
      rep.target = 0;
      const auto sub = inst.restrict_to(uncovered);
      const auto r = min_factor(sub, h, 0, kNoCap, params.exact);
      if (r.solution) {
        auto lifted = detail::lift_copies(r.solution->copies, uncovered, h, inst);
        rep.placed = static_cast<int>(lifted.size());
        for (const auto& c : lifted) rep.weight += c.weight;
        std::vector<std::uint8_t> hit(static_cast<std::size_t>(n), 0);
        for (const auto& c : lifted)
          for (int v : c.vertices) hit[static_cast<std::size_t>(v)] = 1;
        std::erase_if(uncovered, [&](int v) { return hit[static_cast<std::size_t>(v)] != 0; });
        copies.insert(copies.end(), lifted.begin(), lifted.end());
      }
      optimal = level == 0 && r.solved();
      out.levels.push_back(rep);
      break;
    }
    const int next = std::max(detail::round_down_to(static_cast<int>(alpha * size), v_h), base);
    rep.target = next;
    const auto partial = greedy_partial_factor(inst, h, uncovered, next, cap, params.greedy_pool);
    rep.placed = static_cast<int>(partial.copies.size());
    for (const auto& c : partial.copies) rep.weight += c.weight;
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(n), 0);
    for (const auto& c : partial.copies)
      for (int v : c.vertices) hit[static_cast<std::size_t>(v)] = 1;
    std::erase_if(uncovered, [&](int v) { return hit[static_cast<std::size_t>(v)] != 0; });
    copies.insert(copies.end(), partial.copies.begin(), partial.copies.end());
    out.levels.push_back(rep);
    if (static_cast<int>(uncovered.size()) > next) break;  // stuck above target and too big to finish exactly
    cap *= params.cap_growth;
  }
  out.complete = uncovered.empty();
  // Level caps only steer the greedy phase; the exact finish runs uncapped.
  out.solution = make_solution(Mode::factor, n, std::move(copies), kNoCap, static_cast<int>(uncovered.size()), optimal);
  return out;
}

}  // namespace htile
