#include "polyrefute/rational.hpp"

#include <stdexcept>

namespace polyrefute {

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("parse_rational: empty string");
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    std::size_t frac_len = s.size() - dot - 1;
    if (digits == "-" || digits == "+" || digits.empty())
      throw std::invalid_argument("parse_rational: bad decimal '" + s + "'");
    if (digits[0] == '+') digits.erase(0, 1);
    mpz_class num;
    if (num.set_str(digits, 10) != 0)
      throw std::invalid_argument("parse_rational: bad decimal '" + s + "'");
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac_len);
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  if (s[0] == '+') s.erase(0, 1);
  Rational q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("parse_rational: bad rational '" + s + "'");
  if (sgn(q.get_den()) == 0) throw std::invalid_argument("parse_rational: zero denominator");
  q.canonicalize();
  return q;
}

namespace {

std::size_t ceil_log2(const mpz_class& v) {
  // v >= 1
  if (v <= 1) return 0;
  mpz_class w = v - 1;
  return mpz_sizeinbase(w.get_mpz_t(), 2);
}

}  // namespace

std::size_t bit_complexity(const Rational& q) {
  mpz_class a = abs(q.get_num());
  std::size_t num_bits = 1 + (a == 0 ? 0 : ceil_log2(a));
  return num_bits + 1 + ceil_log2(q.get_den());
}

}  // namespace polyrefute
