#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <string>

#include "jpool/error.hpp"

namespace jpool {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// double -> cpp_rational is exact in boost.multiprecision; wrap it anyway so
// non-finite inputs fail loudly instead of asserting deep inside boost.
inline Rational to_rational(double x) {
  require(std::isfinite(x), Errc::invalid_argument,
          "to_rational: non-finite value");
  return Rational(x);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string rational_num_str(const Rational& r) {
  return boost::multiprecision::numerator(r).str();
}

inline std::string rational_den_str(const Rational& r) {
  return boost::multiprecision::denominator(r).str();
}

inline Rational rational_from_strings(const std::string& num,
                                      const std::string& den) {
  try {
    BigInt n(num), d(den);
    require(d != 0, Errc::parse_failure, "rational: zero denominator");
    return Rational(n, d);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(Errc::parse_failure, std::string("rational: bad integer: ") + e.what());
  }
}

}  // namespace jpool
