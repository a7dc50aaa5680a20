#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "polyrefute/multiset.hpp"
#include "polyrefute/polynomial.hpp"

namespace polyrefute {

// Dense order-D tensor with n entries per axis, stored row-major.
template <class T>
struct CoefficientTensor {
  unsigned order = 0;
  std::size_t dim = 0;
  std::vector<T> entries;

  CoefficientTensor() = default;
  CoefficientTensor(unsigned D, std::size_t n) : order(D), dim(n), entries(ipow(n, D), T(0)) {}

  static std::size_t ipow(std::size_t n, unsigned D) {
    std::size_t r = 1;
    for (unsigned k = 0; k < D; ++k) r *= n;
    return r;
  }

  std::size_t size() const { return entries.size(); }

  // Flat offset of the index tuple idx (length D).
  std::size_t offset(const std::vector<std::size_t>& idx) const {
    if (idx.size() != order) throw std::invalid_argument("tensor: index arity mismatch");
    std::size_t off = 0;
    for (std::size_t i : idx) {
      if (i >= dim) throw std::out_of_range("tensor: index out of range");
      off = off * dim + i;
    }
    return off;
  }

  T& at(const std::vector<std::size_t>& idx) { return entries[offset(idx)]; }
  const T& at(const std::vector<std::size_t>& idx) const { return entries[offset(idx)]; }

  // Decodes a flat offset back into its index tuple.
  std::vector<std::size_t> tuple(std::size_t off) const {
    std::vector<std::size_t> idx(order);
    for (unsigned k = order; k-- > 0;) {
      idx[k] = off % dim;
      off /= dim;
    }
    return idx;
  }
};

// Coefficient at monomial alpha is the sum of the entries over all index
// tuples whose multiset is alpha.
template <class T>
HomogeneousPolynomial<T> tensor_to_poly(const CoefficientTensor<T>& G) {
  HomogeneousPolynomial<T> p(G.dim, G.order);
  for (std::size_t off = 0; off < G.size(); ++off) {
    if (is_zero(G.entries[off])) continue;
    auto idx = G.tuple(off);
    p.add(MultisetIndex::from_variables(G.dim, idx), G.entries[off]);
  }
  return p;
}

// <G, z^{(x)D}>.
inline double tensor_contract(const CoefficientTensor<double>& G, const std::vector<double>& z) {
  if (z.size() != G.dim) throw std::invalid_argument("tensor_contract: dimension mismatch");
  // Contract the last axis repeatedly.
  std::vector<double> cur(G.entries);
  for (unsigned k = 0; k < G.order; ++k) {
    std::vector<double> next(cur.size() / G.dim, 0.0);
    for (std::size_t r = 0; r < next.size(); ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < G.dim; ++i) s += cur[r * G.dim + i] * z[i];
      next[r] = s;
    }
    cur.swap(next);
  }
  return cur[0];
}

// Order-2 tensor as a matrix, and (G + G^T)/2.
inline Eigen::MatrixXd tensor_matrix(const CoefficientTensor<double>& G) {
  if (G.order != 2) throw std::invalid_argument("tensor_matrix: order must be 2");
  const auto n = static_cast<Eigen::Index>(G.dim);
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) M(i, j) = G.entries[static_cast<std::size_t>(i * n + j)];
  return M;
}

inline Eigen::MatrixXd symmetrized(const CoefficientTensor<double>& G) {
  Eigen::MatrixXd M = tensor_matrix(G);
  return 0.5 * (M + M.transpose());
}

}  // namespace polyrefute
