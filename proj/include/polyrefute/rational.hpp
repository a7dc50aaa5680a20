#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <string_view>

namespace polyrefute {

// Arbitrary-precision rational kept in lowest terms with a positive
// denominator (GMP canonical form).
using Rational = mpq_class;
using BigInt = mpz_class;

// "numerator/denominator", always with an explicit denominator.
std::string to_string(const Rational& q);

// Accepts "p/q", "p", or a finite decimal such as "-0.125".
Rational parse_rational(std::string_view text);

// Bit complexity of p/q: (1 + ceil(log2 |p|)) + (1 + ceil(log2 q)).
std::size_t bit_complexity(const Rational& q);

inline bool is_zero(const Rational& q) { return sgn(q) == 0; }
inline bool is_zero(double x) { return x == 0.0; }

}  // namespace polyrefute
