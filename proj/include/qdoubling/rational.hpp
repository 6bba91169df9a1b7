#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "qdoubling/errors.hpp"

namespace qdoubling {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw InvalidArgument("rational with zero denominator");
  return Rational(BigInt(num), BigInt(den));
}

/// Canonical exact text form, always "p/q" (integers carry "/1").
inline std::string to_pq(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

/// Accepts "p/q", "p", or "-p/q". Whitespace is not allowed.
inline Rational parse_rational(std::string_view text) {
  auto parse_int = [&](std::string_view s) {
    if (s.empty()) throw InvalidArgument("malformed rational '" + std::string(text) + "'");
    std::size_t start = (s.front() == '-' || s.front() == '+') ? 1 : 0;
    if (start == s.size()) throw InvalidArgument("malformed rational '" + std::string(text) + "'");
    for (std::size_t i = start; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9')
        throw InvalidArgument("malformed rational '" + std::string(text) + "'");
    }
    return BigInt(std::string(s));
  };
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_int(text));
  BigInt num = parse_int(text.substr(0, slash));
  BigInt den = parse_int(text.substr(slash + 1));
  if (den == 0) throw InvalidArgument("rational with zero denominator");
  return Rational(num, den);
}

/// Non-authoritative decimal shadow for human-readable output.
inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace qdoubling
