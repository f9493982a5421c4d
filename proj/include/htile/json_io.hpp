#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <json.hpp>

namespace htile {

using json = nlohmann::ordered_json;

/// %.17g, with non-finite values spelled "inf", "-inf" and "nan".
inline std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Real-valued field that may be infinite: non-finite values become strings.
inline json real_value(double x) {
  if (std::isfinite(x)) return x;
  return format_real(x);
}

/// Reads a number or one of the strings "inf"/"infinity".
inline double real_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "+inf") return std::numeric_limits<double>::infinity();
  }
  throw nlohmann::json::type_error::create(302, "expected a number or \"inf\"", &j);
}

namespace detail {

inline void dump_into(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += json(k).dump();
        out += ':';
        dump_into(v, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_into(j[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x))
        out += format_real(x);
      else
        out += json(format_real(x)).dump();
      break;
    }
    default: out += j.dump(); break;
  }
}

}  // namespace detail

/// Compact single-line JSON with every float printed at 17 significant digits.
inline std::string dump_line(const json& j) {
  std::string out;
  detail::dump_into(j, out);
  return out;
}

}  // namespace htile
