#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <string>

#include "timedeq/errors.hpp"

namespace timedeq {

using Rat = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

// Parses "p/q", "p", or a plain decimal like "0.25" into an exact rational.
inline Rat parse_rat(const std::string& text) {
  if (text.empty()) throw ValidationError("empty rational literal");
  try {
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      BigInt num(text.substr(0, slash));
      BigInt den(text.substr(slash + 1));
      if (den == 0) throw ValidationError("zero denominator in '" + text + "'");
      return Rat(num, den);
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      size_t frac_len = text.size() - dot - 1;
      BigInt num(digits.empty() || digits == "-" ? "0" : digits);
      BigInt den = 1;
      for (size_t i = 0; i < frac_len; ++i) den *= 10;
      return Rat(num, den);
    }
    return Rat(BigInt(text));
  } catch (const std::exception& e) {
    throw ValidationError("bad rational literal '" + text + "'");
  }
}

inline std::string format_rat(const Rat& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

}  // namespace timedeq
