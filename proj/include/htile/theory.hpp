#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "htile/error.hpp"
#include "htile/graph.hpp"

namespace htile {

struct ProbabilityBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// Bounds on Pr(X_1 + ... + X_k <= x) for i.i.d. Exp(1) summands:
/// (1 - x) x^k / k! <= Pr <= x^k / k!, lower bound clamped at 0.
inline ProbabilityBounds gamma_cdf_bounds(int k, double x) {
  if (k < 1) throw UsageError("k must be positive");
  if (!(x > 0.0)) throw UsageError("x must be positive");
  const double hi = std::exp(k * std::log(x) - std::lgamma(k + 1.0));
  return {std::max(0.0, (1.0 - x) * hi), hi};
}

/// Scaling exponent 1 - 1/d* of the minimum factor weight (0 when d* = 1).
inline double predicted_exponent(const DensityReport& r) {
  if (r.d_star <= Rational(1)) return 0.0;
  return 1.0 - 1.0 / r.d_star.to_double();
}

/// Exponent of the cover lower bound, 1 - 1/max(d_H, Delta).
inline double cover_lower_exponent(const DensityReport& r) {
  const Rational m = std::max(r.d_h, r.delta);
  return 1.0 - 1.0 / m.to_double();
}

/// Threshold n^{-1/d_H} (ln n)^{1/e_H} for the appearance of an H-factor in G(n, p),
/// valid for strictly balanced H.
inline double jkv_threshold(const DensityReport& r, int n) {
  if (!r.strictly_balanced)
    throw UsageError("threshold formula needs a strictly balanced pattern; use the d* form for general H");
  if (n < 3) throw UsageError("threshold needs n >= 3");
  const double nn = n;
  return std::pow(nn, -1.0 / r.d_h.to_double()) * std::pow(std::log(nn), 1.0 / r.edge_count);
}

/// Constant c of the first-moment lower bound F_H(alpha n, n) >= c n^{1 - 1/d_H}:
/// 1/c = (r/e_H) e^{1 - 1/d_H} (r alpha^{-alpha r} Aut(H))^{-1/e_H}, r = v_H/(1 - alpha).
/// alpha^{-alpha r} is taken as 1 at alpha = 0.
inline double first_moment_constant(const DensityReport& rep, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in [0, 1)");
  const double e_h = rep.edge_count;
  const double r = rep.vertex_count / (1.0 - alpha);
  const double log_alpha_term = alpha > 0.0 ? -alpha * r * std::log(alpha) : 0.0;
  const double log_inner = std::log(r) + log_alpha_term + std::log(static_cast<double>(rep.aut_count));
  const double log_c1c2 = std::log(r / e_h) + (1.0 - 1.0 / rep.d_h.to_double()) - log_inner / e_h;
  return std::exp(-log_c1c2);
}

}  // namespace htile
