#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>

#include "htile/error.hpp"

namespace htile {

/// Edge-weight law. Exponential uses the rate parameterisation (mean 1/rate).
/// Custom laws supply a strictly increasing CDF and its inverse on (0, 1).
class WeightDistribution {
 public:
  enum class Family : std::uint8_t { exponential = 0, uniform = 1, custom = 2 };

  static WeightDistribution exponential(double rate = 1.0) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw UsageError("exponential rate must be positive");
    WeightDistribution d;
    d.family_ = Family::exponential;
    d.rate_ = rate;
    return d;
  }

  static WeightDistribution uniform() {
    WeightDistribution d;
    d.family_ = Family::uniform;
    return d;
  }

  static WeightDistribution custom(std::string name, std::function<double(double)> cdf,
                                   std::function<double(double)> inverse_cdf) {
    if (!cdf || !inverse_cdf) throw UsageError("custom distribution needs a CDF and its inverse");
    WeightDistribution d;
    d.family_ = Family::custom;
    d.custom_ = std::make_shared<const Custom>(Custom{std::move(name), std::move(cdf), std::move(inverse_cdf)});
    return d;
  }

  /// "exp", "exp:<rate>" or "uniform".
  static WeightDistribution parse(std::string_view text) {
    if (text == "uniform") return uniform();
    if (text == "exp") return exponential(1.0);
    if (text.starts_with("exp:")) {
      try {
        std::size_t used = 0;
        const std::string rest(text.substr(4));
        const double rate = std::stod(rest, &used);
        if (used == rest.size()) return exponential(rate);
      } catch (const std::exception&) {
      }
    }
    throw UsageError("unknown distribution \"" + std::string(text) + "\" (use exp, exp:<rate> or uniform)");
  }

  Family family() const noexcept { return family_; }
  double rate() const noexcept { return rate_; }

  std::string name() const {
    switch (family_) {
      case Family::exponential: {
        if (rate_ == 1.0) return "exp";
        std::ostringstream os;
        os.precision(17);
        os << "exp:" << rate_;
        return os.str();
      }
      case Family::uniform: return "uniform";
      case Family::custom: return custom_->name;
    }
    return {};
  }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    switch (family_) {
      case Family::exponential: return -std::expm1(-rate_ * x);
      case Family::uniform: return x >= 1.0 ? 1.0 : x;
      case Family::custom: return custom_->cdf(x);
    }
    return 0.0;
  }

  double inverse_cdf(double u) const {
    switch (family_) {
      case Family::exponential: return -std::log1p(-u) / rate_;
      case Family::uniform: return u;
      case Family::custom: return custom_->inverse_cdf(u);
    }
    return 0.0;
  }

  /// Draw from a uniform variate in (0, 1). Exponential draws use -log(u) so the
  /// result is strictly positive for every u the generator produces.
  double from_unit(double u) const {
    switch (family_) {
      case Family::exponential: return -std::log(u) / rate_;
      case Family::uniform: return u;
      case Family::custom: return custom_->inverse_cdf(u);
    }
    return 0.0;
  }

  /// inverse_cdf(1 - exp(-x)): the monotone image of an Exp(1) variate.
  /// Known families use closed forms so that Exp(1) maps to itself bit-exactly.
  double from_exp1(double x) const {
    switch (family_) {
      case Family::exponential: return rate_ == 1.0 ? x : x / rate_;
      case Family::uniform: return -std::expm1(-x);
      case Family::custom: return custom_->inverse_cdf(-std::expm1(-x));
    }
    return 0.0;
  }

  friend bool operator==(const WeightDistribution& a, const WeightDistribution& b) noexcept {
    return a.family_ == b.family_ && a.rate_ == b.rate_ && a.custom_ == b.custom_;
  }

 private:
  struct Custom {
    std::string name;
    std::function<double(double)> cdf;
    std::function<double(double)> inverse_cdf;
  };

  WeightDistribution() = default;

  Family family_ = Family::exponential;
  double rate_ = 1.0;
  std::shared_ptr<const Custom> custom_;
};

}  // namespace htile
