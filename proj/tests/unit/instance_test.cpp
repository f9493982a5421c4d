#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "htile/instance.hpp"

using namespace htile;

namespace {

// Two-sided KS statistic against the Exp(1) CDF, computed directly.
double ks_vs_exp1(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = 1.0 - std::exp(-xs[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

// 1% asymptotic critical value of the one-sample KS statistic.
double ks_crit_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST(SampleInstance, Deterministic) {
  const auto a = sample_instance(3, WeightDistribution::exponential(), 7);
  const auto b = sample_instance(3, WeightDistribution::exponential(), 7);
  ASSERT_EQ(a.weights().size(), 3u);
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a == sample_instance(3, WeightDistribution::exponential(), 8));
}

TEST(SampleInstance, KeyedByPair) {
  // The weight of {i, j} does not depend on n.
  const auto small = sample_instance(5, WeightDistribution::exponential(), 11);
  const auto big = sample_instance(40, WeightDistribution::exponential(), 11);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) EXPECT_EQ(small.weight(i, j), big.weight(i, j));
  EXPECT_EQ(big.weight(3, 17), big.weight(17, 3));
}

TEST(SampleInstance, UniformInUnitInterval) {
  const auto inst = sample_instance(100, WeightDistribution::uniform(), 1);
  for (double w : inst.weights()) {
    EXPECT_GT(w, 0.0);
    EXPECT_LT(w, 1.0);
  }
}

TEST(SampleInstance, ExponentialMean) {
  const auto inst = sample_instance(1000, WeightDistribution::exponential(), 5);
  double sum = 0.0;
  for (double w : inst.weights()) sum += w;
  const double m = sum / static_cast<double>(inst.weights().size());
  EXPECT_NEAR(m, 1.0, 0.1);
  // 3 sigma of the sample mean is far tighter than the 0.1 band.
  EXPECT_NEAR(m, 1.0, 3.0 / std::sqrt(static_cast<double>(inst.weights().size())));
}

TEST(SampleInstance, RateParameterisation) {
  const auto inst = sample_instance(300, WeightDistribution::exponential(4.0), 9);
  double sum = 0.0;
  for (double w : inst.weights()) sum += w;
  EXPECT_NEAR(sum / static_cast<double>(inst.weights().size()), 0.25, 0.01);
}

TEST(SampleInstance, Errors) {
  EXPECT_THROW(sample_instance(1, WeightDistribution::exponential(), 1), UsageError);
  EXPECT_THROW(sample_instance(3000, WeightDistribution::exponential(), 1), LimitError);
  EXPECT_THROW(WeightDistribution::exponential(0.0), UsageError);
  EXPECT_THROW(WeightDistribution::parse("gamma"), UsageError);
  EXPECT_EQ(WeightDistribution::parse("exp:2.5").rate(), 2.5);
}

TEST(CoupleInstance, Examples) {
  const double ln2 = std::log(2.0);
  WeightedInstance base(2, {ln2}, WeightDistribution::exponential(), 0);
  EXPECT_NEAR(couple_instance(base, WeightDistribution::uniform()).weight(0, 1), 0.5, 1e-15);

  const auto x = sample_instance(30, WeightDistribution::exponential(), 3);
  EXPECT_EQ(couple_instance(x, WeightDistribution::exponential()), x);

  for (double v : {1e-6, 1e-4, 1e-3, 5e-3, 1e-2}) {
    WeightedInstance b(2, {v}, WeightDistribution::exponential(), 0);
    const double z = couple_instance(b, WeightDistribution::uniform()).weight(0, 1);
    EXPECT_LE(std::abs(z - v), v * v);
  }
}

TEST(CoupleInstance, Monotone) {
  const auto x = sample_instance(40, WeightDistribution::exponential(), 21);
  const auto z = couple_instance(x, WeightDistribution::uniform());
  const auto xs = x.weights();
  const auto zs = z.weights();
  EXPECT_EQ(std::min_element(xs.begin(), xs.end()) - xs.begin(), std::min_element(zs.begin(), zs.end()) - zs.begin());
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) EXPECT_EQ(xs[i] < xs[i + 1], zs[i] < zs[i + 1]);
}

TEST(CoupleInstance, RequiresExpBase) {
  const auto u = sample_instance(5, WeightDistribution::uniform(), 1);
  EXPECT_THROW(couple_instance(u, WeightDistribution::uniform()), UsageError);
  const auto x = sample_instance(5, WeightDistribution::exponential(), 1);
  const auto broken = WeightDistribution::custom("broken", [](double u) { return u; }, [](double) { return -1.0; });
  EXPECT_THROW(couple_instance(x, broken), Error);
}

TEST(RedGreen, MergedIsMinimum) {
  for (double t : {0.2, 0.5, 0.8}) {
    const auto rg = red_green_instance(20, t, 4);
    for (std::size_t e = 0; e < rg.merged.weights().size(); ++e) {
      const double g = rg.green.weights()[e];
      const double r = rg.red.weights()[e];
      EXPECT_EQ(rg.merged.weights()[e], std::min(g, r));
      EXPECT_EQ(rg.green_is_min[e] != 0, g <= r);
    }
  }
  EXPECT_THROW(red_green_instance(10, 0.0, 1), UsageError);
  EXPECT_THROW(red_green_instance(10, 1.0, 1), UsageError);
}

TEST(RedGreen, LayersIndependentOfBase) {
  const auto rg = red_green_instance(10, 0.5, 4);
  const auto base = sample_instance(10, WeightDistribution::exponential(), 4);
  EXPECT_FALSE(rg.merged == base);
  EXPECT_FALSE(std::equal(rg.green.weights().begin(), rg.green.weights().end(), rg.red.weights().begin()));
}

TEST(RedGreen, MergedPassesKs) {
  for (double t : {0.3, 0.5}) {
    std::vector<double> pooled;
    for (std::uint64_t seed = 0; pooled.size() < 100'000; ++seed) {
      const auto rg = red_green_instance(50, t, seed);
      pooled.insert(pooled.end(), rg.merged.weights().begin(), rg.merged.weights().end());
    }
    EXPECT_LT(ks_vs_exp1(pooled), ks_crit_1pct(pooled.size())) << "t=" << t;
  }
}

TEST(RedGreen, ScaledGreenIsExp1) {
  const double t = 0.3;
  std::vector<double> pooled;
  for (std::uint64_t seed = 100; pooled.size() < 50'000; ++seed) {
    const auto g = scaled(red_green_instance(50, t, seed).green, t);
    pooled.insert(pooled.end(), g.weights().begin(), g.weights().end());
  }
  EXPECT_LT(ks_vs_exp1(pooled), ks_crit_1pct(pooled.size()));
}

TEST(WeightedInstance, IndexAndRestrict) {
  const auto inst = sample_instance(8, WeightDistribution::exponential(), 2);
  std::vector<int> seen(inst.weights().size(), 0);
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j) ++seen[inst.index(i, j)];
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  const std::vector<int> keep = {1, 4, 6};
  const auto sub = inst.restrict_to(keep);
  EXPECT_EQ(sub.n(), 3);
  EXPECT_EQ(sub.weight(0, 2), inst.weight(1, 6));
  EXPECT_EQ(sub.weight(1, 2), inst.weight(4, 6));

  EXPECT_THROW(inst.with_weight(0, 1, 0.0), UsageError);
  EXPECT_EQ(inst.with_weight(0, 1, 9.0).weight(0, 1), 9.0);
  EXPECT_THROW(WeightedInstance(3, {1.0, 2.0}, WeightDistribution::exponential(), 0), UsageError);
}

TEST(InstanceIo, RoundTrip) {
  for (const auto& d : {WeightDistribution::exponential(), WeightDistribution::exponential(2.0), WeightDistribution::uniform()}) {
    const auto inst = sample_instance(17, d, 99);
    std::stringstream ss;
    save_instance(ss, inst);
    EXPECT_EQ(ss.str().size(), 4u + 4 + 4 + 4 + 8 + 8 + 8 * inst.weights().size());
    EXPECT_EQ(load_instance(ss), inst);
  }
}

TEST(InstanceIo, Corrupt) {
  std::stringstream bad("XXXX");
  EXPECT_THROW(load_instance(bad), ParseError);
  const auto inst = sample_instance(5, WeightDistribution::exponential(), 1);
  std::stringstream ss;
  save_instance(ss, inst);
  std::string s = ss.str();
  s.resize(s.size() - 3);
  std::stringstream cut(s);
  EXPECT_THROW(load_instance(cut), ParseError);
}
