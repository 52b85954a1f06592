#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace epiportrait {

using Json = nlohmann::ordered_json;

// Formats a double with 17 significant digits (round-trip exact).
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {
inline void dump_into(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        dump_into(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        dump_into(v, out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    default:
      out += j.dump();
  }
}
}  // namespace detail

// Compact serialization with every float written at 17 significant digits.
inline std::string dump(const Json& j) {
  std::string out;
  detail::dump_into(j, out);
  return out;
}

}  // namespace epiportrait
