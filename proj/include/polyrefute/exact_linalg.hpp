#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "polyrefute/rational.hpp"

namespace polyrefute {

// Column-major sparse matrix over Q. Each column lists (row, value) with
// distinct rows and nonzero values.
struct SparseRationalMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> columns;

  SparseRationalMatrix() = default;
  SparseRationalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), columns(c) {}

  Rational at(std::size_t r, std::size_t c) const;
  std::size_t nonzeros() const;
  std::vector<std::vector<Rational>> dense() const;
};

// Pivot columns of a row echelon form of M modulo the prime p. Empty
// optional when p divides some denominator of M.
struct ModPEchelon {
  std::uint64_t prime = 0;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_cols;
};
std::optional<ModPEchelon> modp_echelon(const SparseRationalMatrix& M, std::uint64_t p);

inline constexpr std::uint64_t kLiftPrimes[] = {2147483647ULL, 2147483629ULL, 2147483587ULL, 2147483579ULL};

// Exact rank by fraction-free (Bareiss) elimination on the row-integerized
// matrix.
std::size_t bareiss_rank(const SparseRationalMatrix& M);

// Some solution of M x = f, or nullopt when inconsistent. Fraction-free
// forward elimination followed by rational back substitution.
std::optional<std::vector<Rational>> bareiss_solve(const SparseRationalMatrix& M, const std::vector<Rational>& f);

struct RankCertificate {
  std::size_t rank = 0;
  bool full_row_rank = false;
  // Set when full_row_rank: columns whose square submatrix is nonsingular.
  std::vector<std::size_t> pivot_cols;
  // "modp" when a prime proved full rank, "bareiss" when exact elimination
  // was needed, "dimension" when cols < rows.
  const char* method = "";
};

// Full rank modulo a prime proves full rank over Q; a deficient answer is
// confirmed with Bareiss before being reported.
RankCertificate certify_row_rank(const SparseRationalMatrix& M);

// Solves M[:, pivots] y = f for the square nonsingular pivot submatrix by
// p-adic (Dixon) lifting with rational reconstruction, and scatters y into a
// full-length vector with zeros off the pivots. Returns nullopt only if the
// submatrix turns out to be singular modulo every lifting prime.
std::optional<std::vector<Rational>> dixon_solve(const SparseRationalMatrix& M, const std::vector<std::size_t>& pivots,
                                                 const std::vector<Rational>& f);

// Euclidean rational reconstruction of u mod modulus with |num|, den <= bound.
std::optional<Rational> rational_reconstruct(const mpz_class& u, const mpz_class& modulus, const mpz_class& bound);

}  // namespace polyrefute
