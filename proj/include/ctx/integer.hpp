#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace ctx {

using Integer = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::rational_adaptor<
                                                   boost::multiprecision::cpp_int_backend<>>,
                                               boost::multiprecision::et_off>;

/// Least non-negative residue of `value` modulo `modulus` (modulus > 0).
inline Integer mod_floor(const Integer& value, const Integer& modulus) {
  Integer r = value % modulus;
  if (r < 0) r += modulus;
  return r;
}

inline long long mod_floor(long long value, long long modulus) {
  long long r = value % modulus;
  return r < 0 ? r + modulus : r;
}

inline bool is_integral(const Rational& q) {
  return boost::multiprecision::denominator(q) == 1;
}

}  // namespace ctx
