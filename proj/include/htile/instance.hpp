#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "htile/distribution.hpp"
#include "htile/error.hpp"
#include "htile/random.hpp"

namespace htile {

/// Complete graph K_n with a positive weight on every unordered pair, stored as the
/// row-major upper triangle. A weight of +inf marks an edge no solution may use.
class WeightedInstance {
 public:
  static constexpr int kDefaultMaxVertices = 2048;

  WeightedInstance(int n, std::vector<double> weights, WeightDistribution distribution, std::uint64_t seed)
      : n_(n), weights_(std::move(weights)), distribution_(std::move(distribution)), seed_(seed) {
    if (n_ < 2) throw UsageError("an instance needs n >= 2");
    if (weights_.size() != pair_count(n_))
      throw UsageError("expected " + std::to_string(pair_count(n_)) + " weights, got " + std::to_string(weights_.size()));
    for (double w : weights_)
      if (!(w > 0.0)) throw UsageError("edge weights must be strictly positive");
  }

  static constexpr std::size_t pair_count(int n) noexcept {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  }

  int n() const noexcept { return n_; }
  const WeightDistribution& distribution() const noexcept { return distribution_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::span<const double> weights() const noexcept { return weights_; }

  std::size_t index(int i, int j) const noexcept {
    if (i > j) std::swap(i, j);
    const auto a = static_cast<std::size_t>(i);
    return a * static_cast<std::size_t>(n_) - a * (a + 1) / 2 + static_cast<std::size_t>(j - i - 1);
  }
  double weight(int i, int j) const noexcept { return weights_[index(i, j)]; }

  /// Copy with one edge weight replaced.
  WeightedInstance with_weight(int i, int j, double w) const {
    auto copy = *this;
    if (!(w > 0.0)) throw UsageError("edge weights must be strictly positive");
    copy.weights_[index(i, j)] = w;
    return copy;
  }

  /// Instance induced on `vertices`; vertex r of the result is vertices[r].
  WeightedInstance restrict_to(std::span<const int> vertices) const {
    const int m = static_cast<int>(vertices.size());
    std::vector<double> w;
    w.reserve(pair_count(m));
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) w.push_back(weight(vertices[static_cast<std::size_t>(a)], vertices[static_cast<std::size_t>(b)]));
    return WeightedInstance(m, std::move(w), distribution_, seed_);
  }

  friend bool operator==(const WeightedInstance& a, const WeightedInstance& b) {
    if (a.n_ != b.n_ || a.seed_ != b.seed_ || !(a.distribution_ == b.distribution_)) return false;
    return std::equal(a.weights_.begin(), a.weights_.end(), b.weights_.begin(), b.weights_.end(),
                      [](double x, double y) { return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y); });
  }

 private:
  int n_;
  std::vector<double> weights_;
  WeightDistribution distribution_;
  std::uint64_t seed_;
};

namespace detail {

inline void check_size(int n, int max_vertices) {
  if (n < 2) throw UsageError("an instance needs n >= 2");
  if (n > max_vertices)
    throw LimitError("n = " + std::to_string(n) + " exceeds the dense-storage limit of " + std::to_string(max_vertices));
}

inline double keyed_unit(std::uint64_t seed, int i, int j, std::uint64_t stream) {
  return open_unit(hash_key({seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j), stream}));
}

}  // namespace detail

/// I.i.d. weights; the weight of {i, j} depends only on (seed, i, j).
inline WeightedInstance sample_instance(int n, const WeightDistribution& dist, std::uint64_t seed,
                                        int max_vertices = WeightedInstance::kDefaultMaxVertices) {
  detail::check_size(n, max_vertices);
  std::vector<double> w;
  w.reserve(WeightedInstance::pair_count(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) w.push_back(dist.from_unit(detail::keyed_unit(seed, i, j, 0)));
  return WeightedInstance(n, std::move(w), dist, seed);
}

/// Monotone coupling of an Exp(1) instance to `target`: Z_e = G~^{-1}(1 - exp(-X_e)).
inline WeightedInstance couple_instance(const WeightedInstance& base, const WeightDistribution& target) {
  if (!(base.distribution() == WeightDistribution::exponential(1.0)))
    throw UsageError("coupling requires an Exp(1) base instance, got " + base.distribution().name());
  std::vector<double> z;
  z.reserve(base.weights().size());
  for (double x : base.weights()) {
    const double v = target.from_exp1(x);
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error("target distribution " + target.name() + " is not invertible at the quantile of weight " +
                  std::to_string(x));
    z.push_back(v);
  }
  return WeightedInstance(base.n(), std::move(z), target, base.seed());
}

/// Two independent weight layers on K_n, Exp(t) ("green") and Exp(1-t) ("red"),
/// and their edge-wise minimum, which is Exp(1).
struct RedGreenInstance {
  WeightedInstance green;
  WeightedInstance red;
  WeightedInstance merged;
  double t = 0.5;
  std::vector<std::uint8_t> green_is_min;  ///< per edge, 1 when the green weight is the minimum
};

inline RedGreenInstance red_green_instance(int n, double t, std::uint64_t seed,
                                           int max_vertices = WeightedInstance::kDefaultMaxVertices) {
  if (!(t > 0.0 && t < 1.0)) throw UsageError("split parameter t must lie in (0, 1)");
  detail::check_size(n, max_vertices);
  const auto green_dist = WeightDistribution::exponential(t);
  const auto red_dist = WeightDistribution::exponential(1.0 - t);
  const auto size = WeightedInstance::pair_count(n);
  std::vector<double> g, r, m;
  std::vector<std::uint8_t> green_min;
  g.reserve(size);
  r.reserve(size);
  m.reserve(size);
  green_min.reserve(size);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      g.push_back(green_dist.from_unit(detail::keyed_unit(seed, i, j, 1)));
      r.push_back(red_dist.from_unit(detail::keyed_unit(seed, i, j, 2)));
      green_min.push_back(g.back() <= r.back() ? 1 : 0);
      m.push_back(std::min(g.back(), r.back()));
    }
  return RedGreenInstance{WeightedInstance(n, std::move(g), green_dist, seed),
                          WeightedInstance(n, std::move(r), red_dist, seed),
                          WeightedInstance(n, std::move(m), WeightDistribution::exponential(1.0), seed), t,
                          std::move(green_min)};
}

/// Multiplies every weight by `factor`; n, seed and distribution label are kept.
inline WeightedInstance scaled(const WeightedInstance& inst, double factor) {
  std::vector<double> w(inst.weights().begin(), inst.weights().end());
  for (double& x : w) x *= factor;
  return WeightedInstance(inst.n(), std::move(w), inst.distribution(), inst.seed());
}

// ---------------------------------------------------------------------------
// Binary dump: "HTWI", u32 version, u32 n, u8 family, 3 pad bytes, f64 rate,
// u64 seed, then the upper triangle as f64. Everything little-endian.

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 8);
}
inline void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b.data(), 4);
}
inline std::uint64_t get_u(std::istream& is, int bytes) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), bytes);
  if (!is) throw ParseError("truncated instance file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

}  // namespace detail

inline void save_instance(std::ostream& os, const WeightedInstance& inst) {
  const auto& d = inst.distribution();
  if (d.family() == WeightDistribution::Family::custom) throw UsageError("custom distributions cannot be serialised");
  os.write("HTWI", 4);
  detail::put_u32(os, 1);
  detail::put_u32(os, static_cast<std::uint32_t>(inst.n()));
  const char family[4] = {static_cast<char>(d.family()), 0, 0, 0};
  os.write(family, 4);
  detail::put_u64(os, std::bit_cast<std::uint64_t>(d.rate()));
  detail::put_u64(os, inst.seed());
  for (double w : inst.weights()) detail::put_u64(os, std::bit_cast<std::uint64_t>(w));
}

inline WeightedInstance load_instance(std::istream& is, int max_vertices = WeightedInstance::kDefaultMaxVertices) {
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "HTWI", 4) != 0) throw ParseError("not an instance file (bad magic)");
  if (detail::get_u(is, 4) != 1) throw ParseError("unsupported instance file version");
  const auto n = static_cast<int>(detail::get_u(is, 4));
  detail::check_size(n, max_vertices);
  const auto family = detail::get_u(is, 4) & 0xff;
  const double rate = std::bit_cast<double>(detail::get_u(is, 8));
  const auto seed = detail::get_u(is, 8);
  WeightDistribution dist = family == 0   ? WeightDistribution::exponential(rate)
                            : family == 1 ? WeightDistribution::uniform()
                                          : throw ParseError("unknown distribution tag in instance file");
  std::vector<double> w(WeightedInstance::pair_count(n));
  for (double& x : w) x = std::bit_cast<double>(detail::get_u(is, 8));
  return WeightedInstance(n, std::move(w), std::move(dist), seed);
}

}  // namespace htile
