#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "htile/copies.hpp"
#include "htile/solution.hpp"

namespace htile {

struct SolverOptions {
  /// Search nodes before giving up with the incumbent (status timeout).
  std::uint64_t node_limit = 500'000'000;
  std::size_t max_copies = 100'000'000;
  /// Only solutions of weight <= upper_bound are of interest; anything heavier is
  /// reported as infeasible. Used by budget queries.
  double upper_bound = std::numeric_limits<double>::infinity();
};

inline constexpr int kExactMaxVertices = 64;

namespace detail {

// Relative slack on pruning: node bounds are summed in search order, while totals
// are canonical sums, so the two may differ in the last bits.
inline constexpr double kPruneSlack = 1e-12;

class BranchAndBound {
 public:
  BranchAndBound(const CopyIndex& index, int v_h, Mode mode, int allowed_uncovered, const SolverOptions& opts)
      : index_(index), n_(index.n), v_h_(v_h), mode_(mode), k_(allowed_uncovered), opts_(opts) {
    masks_.reserve(index.size());
    weights_.reserve(index.size());
    for (const auto& c : index.copies) {
      std::uint64_t m = 0;
      for (int v : c.vertices) m |= std::uint64_t{1} << v;
      masks_.push_back(m);
      weights_.push_back(c.weight);
    }
    static_charge_.assign(static_cast<std::size_t>(n_), kInf);
    for (int v = 0; v < n_; ++v) {
      const auto& p = index.postings[static_cast<std::size_t>(v)];
      if (!p.empty()) static_charge_[static_cast<std::size_t>(v)] = weights_[p.front()] / v_h_;
    }
    pointers_.assign(static_cast<std::size_t>(n_ + 1) * static_cast<std::size_t>(n_), 0);
    best_value_ = opts.upper_bound;
  }

  SolveResult run() {
    SolveResult out;
    aborted_ = false;
    search(0, 0, 0, k_, 0.0);
    out.nodes = nodes_;
    if (best_.has_value()) {
      std::vector<PlacedCopy> copies;
      for (auto c : *best_) copies.push_back(index_.copies[c]);
      out.solution = make_solution(mode_, n_, std::move(copies), index_.cap, k_, !aborted_);
    }
    out.status = aborted_ ? SolveStatus::timeout : best_ ? SolveStatus::optimal : SolveStatus::infeasible;
    return out;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  std::uint32_t* pointers_at(int depth) {
    return pointers_.data() + static_cast<std::size_t>(depth) * static_cast<std::size_t>(n_);
  }

  // Cheapest copy through v that is still usable, divided by v_H.
  double charge(int v, std::uint64_t covered, std::uint32_t* ptr) const {
    if (mode_ == Mode::cover) return static_charge_[static_cast<std::size_t>(v)];
    const auto& p = index_.postings[static_cast<std::size_t>(v)];
    auto& i = ptr[v];
    while (i < p.size() && (masks_[p[i]] & covered)) ++i;
    return i < p.size() ? weights_[p[i]] / v_h_ : kInf;
  }

  // Sum of the smallest `must` per-vertex charges over undecided vertices; also
  // records the branching vertex (lowest undecided index) in branch_.
  double lower_bound(std::uint64_t decided, std::uint64_t covered, int skips_left, std::uint32_t* ptr) {
    charges_.clear();
    branch_ = -1;
    for (int v = 0; v < n_; ++v) {
      if ((decided >> v) & 1U) continue;
      const double c = charge(v, covered, ptr);
      charges_.push_back(c);
      if (branch_ < 0) branch_ = v;
    }
    const auto must = static_cast<std::ptrdiff_t>(charges_.size()) - skips_left;
    if (must <= 0) return 0.0;
    if (skips_left > 0) {
      std::nth_element(charges_.begin(), charges_.begin() + (must - 1), charges_.end());
      std::sort(charges_.begin(), charges_.begin() + must);
    }
    double lb = 0.0;
    for (std::ptrdiff_t i = 0; i < must; ++i) lb += charges_[static_cast<std::size_t>(i)];
    return lb;
  }

  // Tightens the per-vertex charges by one pass of dual ascent: each undecided
  // vertex takes the smallest slack w(c) - (charges on c) over usable copies c
  // through it. Charges stay dual feasible (no usable copy is charged more than
  // its weight), so the bound remains admissible.
  double ascent_bound(std::uint64_t decided, std::uint64_t covered, int skips_left, std::uint32_t* ptr) {
    pi_.assign(static_cast<std::size_t>(n_), 0.0);
    double pi_max = 0.0;
    for (int v = 0; v < n_; ++v)
      if (!((decided >> v) & 1U)) {
        pi_[static_cast<std::size_t>(v)] = charge(v, covered, ptr);
        pi_max = std::max(pi_max, pi_[static_cast<std::size_t>(v)]);
      }
    charges_.clear();
    for (int v = 0; v < n_; ++v) {
      if ((decided >> v) & 1U) continue;
      const auto& p = index_.postings[static_cast<std::size_t>(v)];
      const double own = pi_[static_cast<std::size_t>(v)];
      double slack = kInf;
      for (std::size_t i = mode_ == Mode::factor ? ptr[v] : 0; i < p.size(); ++i) {
        const auto c = p[i];
        // Copies are sorted by weight and no other vertex charge exceeds pi_max.
        if (weights_[c] - own - (v_h_ - 1) * pi_max >= slack) break;
        if (mode_ == Mode::factor && (masks_[c] & covered)) continue;
        double rest = weights_[c];
        for (std::uint64_t m = masks_[c]; m; m &= m - 1) rest -= pi_[static_cast<std::size_t>(std::countr_zero(m))];
        if (rest < slack) {
          slack = rest;
          if (slack <= 0.0) break;
        }
      }
      if (slack > 0.0 && std::isfinite(slack)) {
        pi_[static_cast<std::size_t>(v)] += slack;
        pi_max = std::max(pi_max, pi_[static_cast<std::size_t>(v)]);
      }
      charges_.push_back(pi_[static_cast<std::size_t>(v)]);
    }
    const auto must = static_cast<std::ptrdiff_t>(charges_.size()) - skips_left;
    if (must <= 0) return 0.0;
    if (skips_left > 0) std::nth_element(charges_.begin(), charges_.begin() + (must - 1), charges_.end());
    double lb = 0.0;
    for (std::ptrdiff_t i = 0; i < must; ++i) lb += charges_[static_cast<std::size_t>(i)];
    return lb;
  }

  bool beaten(double value) const {
    return std::isfinite(best_value_) ? value > best_value_ + kPruneSlack * best_value_ : false;
  }

  void offer_leaf() {
    std::vector<PlacedCopy> copies;
    copies.reserve(path_.size());
    for (auto c : path_) copies.push_back(index_.copies[c]);
    const double total = canonicalize(copies);
    if (total > opts_.upper_bound) return;
    if (!best_ || total < best_value_) {
      best_value_ = total;
      best_ = path_;
    }
  }

  // decided = covered vertices plus vertices the search chose to leave uncovered.
  void search(int depth, std::uint64_t decided, std::uint64_t covered, int skips_left, double partial) {
    if (aborted_) return;
    if (++nodes_ > opts_.node_limit) {
      aborted_ = true;
      return;
    }
    const int remaining = n_ - std::popcount(decided);
    // Every further copy only adds weight, so once all remaining vertices may be
    // skipped the best completion is to stop here.
    if (remaining <= skips_left) {
      offer_leaf();
      return;
    }

    auto* ptr = pointers_at(depth);
    if (depth > 0) std::copy_n(pointers_at(depth - 1), n_, ptr);
    double lb = lower_bound(decided, covered, skips_left, ptr);
    if (!std::isfinite(lb)) return;
    if (beaten(partial + lb)) return;
    if (std::isfinite(best_value_)) {
      lb = ascent_bound(decided, covered, skips_left, ptr);
      if (beaten(partial + lb)) return;
    }
    const int v = branch_;

    const auto& p = index_.postings[static_cast<std::size_t>(v)];
    const std::size_t start = mode_ == Mode::factor ? ptr[v] : 0;
    for (std::size_t i = start; i < p.size(); ++i) {
      const auto c = p[i];
      if (mode_ == Mode::factor && (masks_[c] & covered)) continue;
      if (beaten(partial + weights_[c])) break;
      path_.push_back(c);
      search(depth + 1, decided | masks_[c], covered | masks_[c], skips_left, partial + weights_[c]);
      path_.pop_back();
      if (aborted_) return;
    }
    if (skips_left > 0) search(depth + 1, decided | (std::uint64_t{1} << v), covered, skips_left - 1, partial);
  }

  const CopyIndex& index_;
  int n_;
  double v_h_;
  Mode mode_;
  int k_;
  SolverOptions opts_;
  std::vector<std::uint64_t> masks_;
  std::vector<double> weights_;
  std::vector<double> static_charge_;
  std::vector<std::uint32_t> pointers_;
  std::vector<double> charges_;
  std::vector<std::uint32_t> path_;
  std::optional<std::vector<std::uint32_t>> best_;
  double best_value_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  int branch_ = -1;
  std::vector<double> pi_;
};

inline void check_exact_inputs(const WeightedInstance& inst, const GraphH& h, int k) {
  if (inst.n() > kExactMaxVertices)
    throw LimitError("exact solvers support n <= " + std::to_string(kExactMaxVertices));
  if (k < 0 || k > inst.n()) throw UsageError("allowed_uncovered must lie in [0, n]");
  if (h.vertex_count() > inst.n() && k < inst.n()) throw UsageError("pattern has more vertices than the host");
}

}  // namespace detail

/// Solves on a prebuilt copy index (all copies already respect the cap).
inline SolveResult solve_on_index(const CopyIndex& index, const GraphH& h, Mode mode, int allowed_uncovered,
                                  const SolverOptions& opts = {}) {
  if (index.n > kExactMaxVertices) throw LimitError("exact solvers support n <= " + std::to_string(kExactMaxVertices));
  detail::BranchAndBound bb(index, h.vertex_count(), mode, allowed_uncovered, opts);
  return bb.run();
}

namespace detail {

inline SolveResult solve_exact(const WeightedInstance& inst, const GraphH& h, Mode mode, int k, double cap,
                               const SolverOptions& opts) {
  check_exact_inputs(inst, h, k);
  if (k == inst.n() || h.vertex_count() > inst.n()) {
    SolveResult r;
    if (k == inst.n()) {
      r.status = SolveStatus::optimal;
      r.solution = make_solution(mode, inst.n(), {}, cap, k, true);
    }
    return r;
  }
  EnumerateOptions eo;
  eo.max_copies = opts.max_copies;
  const auto index = enumerate_copies(h, inst, cap, eo);
  return solve_on_index(index, h, mode, k, opts);
}

}  // namespace detail

/// Minimum-weight partial H-factor leaving at most k vertices uncovered, using only
/// edges of weight <= cap. Branch and bound on the lowest free vertex.
inline SolveResult min_factor(const WeightedInstance& inst, const GraphH& h, int allowed_uncovered, double cap = kNoCap,
                              const SolverOptions& opts = {}) {
  return detail::solve_exact(inst, h, Mode::factor, allowed_uncovered, cap, opts);
}

/// Minimum-weight partial H-cover; copies may overlap and pay for shared edges again.
inline SolveResult min_cover(const WeightedInstance& inst, const GraphH& h, int allowed_uncovered, double cap = kNoCap,
                             const SolverOptions& opts = {}) {
  return detail::solve_exact(inst, h, Mode::cover, allowed_uncovered, cap, opts);
}

struct BudgetSolution {
  double budget = 0.0;
  int covered = 0;
  TilingSolution solution;
};

struct BudgetResult {
  SolveStatus status = SolveStatus::optimal;  ///< optimal or timeout
  BudgetSolution value;
};

/// Largest number of vertices coverable by vertex-disjoint copies of total weight
/// <= budget; among maximisers, a minimum-weight one. Binary search on the
/// coverage grid, each probe an exact factor query.
inline BudgetResult max_coverage_under_budget(const WeightedInstance& inst, const GraphH& h, double budget,
                                              double cap = kNoCap, const SolverOptions& opts = {}) {
  if (!(budget >= 0.0)) throw UsageError("budget must be non-negative");
  detail::check_exact_inputs(inst, h, 0);
  const int n = inst.n();
  const int v_h = h.vertex_count();
  EnumerateOptions eo;
  eo.max_copies = opts.max_copies;
  const auto index = enumerate_copies(h, inst, cap, eo);

  BudgetResult out;
  bool timed_out = false;
  auto probe = [&](int copies, double bound) {
    SolverOptions o = opts;
    o.upper_bound = bound;
    auto r = solve_on_index(index, h, Mode::factor, n - copies * v_h, o);
    if (r.status == SolveStatus::timeout) timed_out = true;
    return r;
  };

  int lo = 0;  // copies count known affordable
  int hi = n / v_h;
  while (lo < hi) {
    const int mid = lo + (hi - lo + 1) / 2;
    const auto r = probe(mid, budget);
    if (r.solution && r.solution->total_weight <= budget)
      lo = mid;
    else
      hi = mid - 1;
  }
  auto best = probe(lo, budget);
  out.value.budget = budget;
  if (best.solution) {
    out.value.solution = *best.solution;
  } else {
    out.value.solution = make_solution(Mode::factor, n, {}, cap, n - lo * v_h, !timed_out);
  }
  out.value.covered = n - out.value.solution.uncovered;
  out.value.solution.optimal = !timed_out;
  out.status = timed_out ? SolveStatus::timeout : SolveStatus::optimal;
  return out;
}

struct OracleLimits {
  int max_n = 12;
  std::size_t max_copies = 100'000;
};

/// Exhaustive dynamic programme over covered vertex sets: best[S] is the cheapest
/// family of copies whose union is exactly S (pairwise disjoint in factor mode).
/// Every admissible family is reachable, so the minimum over |S| >= n - k is optimal.
inline SolveResult brute_force_oracle(const WeightedInstance& inst, const GraphH& h, Mode mode, int allowed_uncovered,
                                      double cap = kNoCap, const OracleLimits& limits = {}) {
  const int n = inst.n();
  if (n > limits.max_n)
    throw LimitError("oracle limited to n <= " + std::to_string(limits.max_n) + " (got " + std::to_string(n) + ")");
  if (allowed_uncovered < 0 || allowed_uncovered > n) throw UsageError("allowed_uncovered must lie in [0, n]");
  SolveResult out;
  out.status = SolveStatus::optimal;
  if (h.vertex_count() > n) {
    if (allowed_uncovered == n)
      out.solution = make_solution(mode, n, {}, cap, allowed_uncovered, true);
    else
      out.status = SolveStatus::infeasible;
    return out;
  }
  EnumerateOptions eo;
  eo.max_copies = limits.max_copies;
  CopyIndex index;
  try {
    index = enumerate_copies(h, inst, cap, eo);
  } catch (const LimitError&) {
    throw LimitError("oracle limited to " + std::to_string(limits.max_copies) + " copies");
  }

  const std::size_t states = std::size_t{1} << n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(states, inf);
  std::vector<std::uint32_t> via(states, 0);
  std::vector<std::uint32_t> from(states, 0);
  std::vector<std::uint32_t> masks;
  for (const auto& c : index.copies) {
    std::uint32_t m = 0;
    for (int v : c.vertices) m |= 1U << v;
    masks.push_back(m);
  }
  best[0] = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    if (best[s] == inf) continue;
    const auto cur = static_cast<std::uint32_t>(s);
    for (std::size_t c = 0; c < masks.size(); ++c) {
      const auto m = masks[c];
      if (mode == Mode::factor ? (m & cur) != 0 : (m & ~cur) == 0) continue;
      const auto next = cur | m;
      const double w = best[s] + index.copies[c].weight;
      if (w < best[next]) {
        best[next] = w;
        via[next] = static_cast<std::uint32_t>(c);
        from[next] = cur;
      }
    }
  }

  std::optional<TilingSolution> winner;
  for (std::size_t s = 0; s < states; ++s) {
    if (best[s] == inf || n - std::popcount(static_cast<std::uint32_t>(s)) > allowed_uncovered) continue;
    std::vector<PlacedCopy> copies;
    for (auto cur = static_cast<std::uint32_t>(s); cur != 0; cur = from[cur]) copies.push_back(index.copies[via[cur]]);
    auto sol = make_solution(mode, n, std::move(copies), cap, allowed_uncovered, true);
    if (!winner || sol.total_weight < winner->total_weight) winner = std::move(sol);
  }
  if (!winner) {
    out.status = SolveStatus::infeasible;
    return out;
  }
  out.solution = std::move(winner);
  return out;
}

}  // namespace htile
