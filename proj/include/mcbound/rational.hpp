#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "mcbound/errors.hpp"

namespace mcb {

using Rational = mpq_class;

// Parses "p/q" or an integer "p". Whitespace and decimals are rejected so
// that serialized matrices stay exact.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw InvalidArgument("empty rational");
  for (char c : text) {
    if (!(c == '-' || c == '+' || c == '/' || (c >= '0' && c <= '9'))) {
      throw InvalidArgument("malformed rational '" + std::string(text) + "'");
    }
  }
  Rational q;
  if (q.set_str(std::string(text), 10) != 0) {
    throw InvalidArgument("malformed rational '" + std::string(text) + "'");
  }
  if (q.get_den() == 0) throw InvalidArgument("zero denominator in '" + std::string(text) + "'");
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

}  // namespace mcb
