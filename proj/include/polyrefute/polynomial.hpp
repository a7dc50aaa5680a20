#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "polyrefute/multiset.hpp"
#include "polyrefute/rational.hpp"

namespace polyrefute {

// Rationals built from (num, den) pairs are not reduced by gmpxx; every
// coefficient entering a polynomial is brought to lowest terms here.
template <class T>
T canonical(T v) {
  if constexpr (std::is_same_v<T, Rational>) v.canonicalize();
  return v;
}

template <class T>
using TermMap = std::map<MultisetIndex, T, GrlexLess>;

// Polynomial in n variables with terms of arbitrary degree. Zero
// coefficients are never stored.
template <class T>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t num_vars) : num_vars_(num_vars) {}

  std::size_t num_vars() const { return num_vars_; }
  const TermMap<T>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Highest degree of a stored term; -1 for the zero polynomial.
  int degree() const { return terms_.empty() ? -1 : static_cast<int>(terms_.rbegin()->first.degree()); }

  T coeff(const MultisetIndex& a) const {
    auto it = terms_.find(a);
    return it == terms_.end() ? T(0) : it->second;
  }

  void set(const MultisetIndex& a, const T& value) {
    check_vars(a);
    const T v = canonical(value);
    if (is_zero(v))
      terms_.erase(a);
    else
      terms_[a] = v;
  }

  void add(const MultisetIndex& a, const T& value) {
    check_vars(a);
    const T v = canonical(value);
    if (is_zero(v)) return;
    auto [it, inserted] = terms_.try_emplace(a, v);
    if (!inserted) {
      it->second += v;
      if (is_zero(it->second)) terms_.erase(it);
    }
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [a, v] : o.terms_) add(a, v);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [a, v] : o.terms_) add(a, T(-v));
    return *this;
  }

  Polynomial& operator*=(const T& factor) {
    const T s = canonical(factor);
    if (is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [a, v] : terms_) v *= s;
    return *this;
  }

  // Terms of exactly degree k.
  Polynomial layer(unsigned k) const {
    Polynomial out(num_vars_);
    for (const auto& [a, v] : terms_)
      if (a.degree() == k) out.terms_.emplace(a, v);
    return out;
  }

  bool operator==(const Polynomial& o) const { return num_vars_ == o.num_vars_ && terms_ == o.terms_; }

 protected:
  void check_vars(const MultisetIndex& a) const {
    if (a.num_vars() != num_vars_) throw std::invalid_argument("polynomial: variable count mismatch");
  }
  void check_same(const Polynomial& o) const {
    if (o.num_vars_ != num_vars_) throw std::invalid_argument("polynomial: variable count mismatch");
  }

  std::size_t num_vars_ = 0;
  TermMap<T> terms_;
};

// Polynomial whose terms all have one fixed degree.
template <class T>
class HomogeneousPolynomial : public Polynomial<T> {
 public:
  HomogeneousPolynomial() = default;
  HomogeneousPolynomial(std::size_t num_vars, unsigned degree)
      : Polynomial<T>(num_vars), degree_(degree) {}

  // Throws unless p is homogeneous of the given degree (or zero).
  static HomogeneousPolynomial from(const Polynomial<T>& p, unsigned degree) {
    HomogeneousPolynomial h(p.num_vars(), degree);
    for (const auto& [a, v] : p.terms()) h.set(a, v);
    return h;
  }

  unsigned degree() const { return degree_; }

  void set(const MultisetIndex& a, const T& v) {
    check_degree(a);
    Polynomial<T>::set(a, v);
  }
  void add(const MultisetIndex& a, const T& v) {
    check_degree(a);
    Polynomial<T>::add(a, v);
  }

 private:
  void check_degree(const MultisetIndex& a) const {
    if (a.degree() != degree_) throw std::invalid_argument("homogeneous polynomial: term degree mismatch");
  }
  unsigned degree_ = 0;
};

template <class T>
Polynomial<T> poly_mul(const Polynomial<T>& p, const Polynomial<T>& q) {
  if (p.num_vars() != q.num_vars()) throw std::invalid_argument("poly_mul: variable count mismatch");
  Polynomial<T> out(p.num_vars());
  for (const auto& [a, u] : p.terms())
    for (const auto& [b, v] : q.terms()) out.add(a + b, T(u * v));
  return out;
}

template <class T>
HomogeneousPolynomial<T> poly_mul(const HomogeneousPolynomial<T>& p, const HomogeneousPolynomial<T>& q) {
  const Polynomial<T>& pp = p;
  const Polynomial<T>& qq = q;
  return HomogeneousPolynomial<T>::from(poly_mul(pp, qq), p.degree() + q.degree());
}

template <class T>
Polynomial<T> poly_pow(const Polynomial<T>& p, unsigned k) {
  Polynomial<T> out(p.num_vars());
  out.set(MultisetIndex(p.num_vars()), T(1));
  for (unsigned i = 0; i < k; ++i) out = poly_mul(out, p);
  return out;
}

template <class T>
T poly_eval(const Polynomial<T>& p, const std::vector<T>& x) {
  if (x.size() != p.num_vars()) throw std::invalid_argument("poly_eval: dimension mismatch");
  T acc(0);
  for (const auto& [a, c] : p.terms()) {
    T mono(c);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::uint32_t e = 0; e < a[i]; ++e) mono *= x[i];
    acc += mono;
  }
  return acc;
}

// {num_vars, degree, terms: [{exponents, coeff}]}; rational coefficients
// are "p/q" strings, floating coefficients are numbers.
template <class T>
nlohmann::json poly_to_json(const Polynomial<T>& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [a, v] : p.terms()) {
    nlohmann::json t;
    t["exponents"] = a.exponents();
    if constexpr (std::is_same_v<T, Rational>)
      t["coeff"] = to_string(v);
    else
      t["coeff"] = v;
    terms.push_back(std::move(t));
  }
  return {{"num_vars", p.num_vars()}, {"degree", std::max(p.degree(), 0)}, {"terms", std::move(terms)}};
}

template <class T>
Polynomial<T> poly_from_json(const nlohmann::json& j) {
  Polynomial<T> p(j.at("num_vars").get<std::size_t>());
  for (const auto& t : j.at("terms")) {
    MultisetIndex a(t.at("exponents").get<std::vector<std::uint32_t>>());
    const auto& c = t.at("coeff");
    if constexpr (std::is_same_v<T, Rational>) {
      p.add(a, c.is_string() ? parse_rational(c.get<std::string>()) : Rational(c.get<long>()));
    } else {
      p.add(a, c.is_string() ? parse_rational(c.get<std::string>()).get_d() : c.get<double>());
    }
  }
  return p;
}

}  // namespace polyrefute
