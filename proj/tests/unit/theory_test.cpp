#include <cmath>

#include <gtest/gtest.h>

#include "htile/random.hpp"
#include "htile/theory.hpp"

using namespace htile;

namespace {

DensityReport report(const char* spec) { return analyze(graph_from_spec(spec)); }

}  // namespace

TEST(GammaBounds, Examples) {
  auto b = gamma_cdf_bounds(1, 0.5);
  EXPECT_DOUBLE_EQ(b.lo, 0.25);
  EXPECT_DOUBLE_EQ(b.hi, 0.5);
  const double truth = 1.0 - std::exp(-0.5);
  EXPECT_LE(b.lo, truth);
  EXPECT_GE(b.hi, truth);

  b = gamma_cdf_bounds(2, 0.1);
  EXPECT_NEAR(b.lo, 0.0045, 1e-15);
  EXPECT_NEAR(b.hi, 0.005, 1e-15);

  EXPECT_THROW(gamma_cdf_bounds(0, 0.5), UsageError);
  EXPECT_THROW(gamma_cdf_bounds(2, 0.0), UsageError);
  EXPECT_EQ(gamma_cdf_bounds(2, 3.0).lo, 0.0);
}

TEST(GammaBounds, ContainClosedForm) {
  // Pr(Gamma(k, 1) <= x) = e^{-x} sum_{j>=k} x^j / j!, summed as a tail series.
  for (int k = 1; k <= 8; ++k)
    for (double x : {1e-3, 0.05, 0.1, 0.3, 0.5, 0.9}) {
      double term = std::exp(-x);
      for (int j = 1; j <= k; ++j) term *= x / j;
      double p = 0.0;
      for (int j = k; term > 1e-300 && j < k + 200; ++j) {
        p += term;
        term *= x / (j + 1);
      }
      const auto b = gamma_cdf_bounds(k, x);
      EXPECT_LE(b.lo, b.hi);
      EXPECT_LE(b.lo, p * (1 + 1e-9));
      EXPECT_GE(b.hi, p * (1 - 1e-9));
    }
}

TEST(GammaBounds, RatioTendsToOne) {
  for (int k = 1; k <= 5; ++k) {
    const auto b = gamma_cdf_bounds(k, 1e-6);
    EXPECT_NEAR(b.lo / b.hi, 1.0, 2e-6);
  }
}

TEST(GammaBounds, MonteCarlo) {
  const int k = 3;
  const double x = 0.5;
  const int draws = 1'000'000;
  KeyedStream rng(42);
  int hits = 0;
  for (int i = 0; i < draws; ++i) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s -= std::log(rng.next_unit());
    hits += s <= x ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / draws;
  const double sigma = std::sqrt(p * (1 - p) / draws);
  const auto b = gamma_cdf_bounds(k, x);
  EXPECT_GE(p, b.lo - 3 * sigma);
  EXPECT_LE(p, b.hi + 3 * sigma);
}

TEST(Exponents, Predicted) {
  EXPECT_NEAR(predicted_exponent(report("complete:3")), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(predicted_exponent(report("complete:2")), 0.0);
  EXPECT_NEAR(predicted_exponent(report("lollipop:5,2")), 0.6, 1e-15);
}

TEST(Exponents, CoverLower) {
  EXPECT_NEAR(cover_lower_exponent(report("complete:4+complete:2")), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(cover_lower_exponent(report("lollipop:5,2")), 0.5, 1e-15);
  for (const char* spec : {"complete:3", "complete:4", "cycle:5"})
    EXPECT_DOUBLE_EQ(cover_lower_exponent(report(spec)), predicted_exponent(report(spec)));
}

TEST(Exponents, OrderedForManyPatterns) {
  for (const char* spec : {"complete:2", "complete:3", "complete:5", "path:4", "cycle:6", "lollipop:5,2", "lollipop:4,3",
                           "complete:4+complete:2", "complete:3+path:3"}) {
    const auto r = report(spec);
    const double p = predicted_exponent(r);
    EXPECT_GE(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_LE(cover_lower_exponent(r), p + 1e-15) << spec;
  }
}

TEST(Jkv, Threshold) {
  const double expected = std::pow(1000.0, -2.0 / 3.0) * std::cbrt(std::log(1000.0));
  EXPECT_NEAR(jkv_threshold(report("complete:3"), 1000), expected, 1e-15);
  EXPECT_NEAR(jkv_threshold(report("complete:3"), 1000), 0.01906, 2e-5);
  EXPECT_NEAR(jkv_threshold(report("complete:2"), 15), std::log(15.0) / 15.0, 1e-15);
  EXPECT_THROW(jkv_threshold(report("complete:4+complete:2"), 1000), UsageError);
  EXPECT_THROW(jkv_threshold(report("complete:3"), 2), UsageError);
}

TEST(FirstMoment, Triangle) {
  // 1/c = (3/3) e^{1/3} (3 * 6)^{-1/3}
  const double c = 1.0 / (std::exp(1.0 / 3.0) * std::pow(18.0, -1.0 / 3.0));
  EXPECT_NEAR(first_moment_constant(report("complete:3"), 0.0), c, 1e-12);
  EXPECT_NEAR(c, std::cbrt(18.0 / std::exp(1.0)), 1e-12);
  EXPECT_NEAR(c, 1.878, 1e-3);
}

TEST(FirstMoment, ContinuousAtZero) {
  for (const char* spec : {"complete:3", "complete:4", "lollipop:5,2"}) {
    const auto r = report(spec);
    const double a = first_moment_constant(r, 0.0);
    const double b = first_moment_constant(r, 1e-9);
    EXPECT_LT(std::abs(a - b) / a, 1e-6) << spec;
  }
}

TEST(FirstMoment, EdgeDegenerate) {
  const double c = first_moment_constant(report("complete:2"), 0.0);
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_GT(c, 0.0);
  // r = 2, e_H = 1, Aut = 2: 1/c = 2 * 1 * (2 * 2)^{-1}
  EXPECT_NEAR(c, 2.0, 1e-12);
  EXPECT_THROW(first_moment_constant(report("complete:3"), 1.0), UsageError);
  EXPECT_THROW(first_moment_constant(report("complete:3"), -0.1), UsageError);
}

TEST(FirstMoment, PositiveAlpha) {
  // Direct evaluation of the closed form at alpha = 0.2 for K3.
  const double alpha = 0.2, r = 3 / (1 - alpha);
  const double inv = (r / 3) * std::exp(1.0 / 3.0) * std::pow(r * std::pow(alpha, -alpha * r) * 6.0, -1.0 / 3.0);
  EXPECT_NEAR(first_moment_constant(report("complete:3"), alpha), 1.0 / inv, 1e-12);
}
