#include "polyrefute/exact_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polyrefute {

Rational SparseRationalMatrix::at(std::size_t r, std::size_t c) const {
  for (const auto& [row, v] : columns.at(c))
    if (row == r) return v;
  return Rational(0);
}

std::size_t SparseRationalMatrix::nonzeros() const {
  std::size_t nz = 0;
  for (const auto& col : columns) nz += col.size();
  return nz;
}

std::vector<std::vector<Rational>> SparseRationalMatrix::dense() const {
  std::vector<std::vector<Rational>> a(rows, std::vector<Rational>(cols));
  for (std::size_t c = 0; c < cols; ++c)
    for (const auto& [r, v] : columns[c]) a[r][c] = v;
  return a;
}

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 powmod(u64 a, u64 e, u64 p) {
  u64 r = 1;
  a %= p;
  while (e) {
    if (e & 1) r = static_cast<u64>(static_cast<u128>(r) * a % p);
    a = static_cast<u64>(static_cast<u128>(a) * a % p);
    e >>= 1;
  }
  return r;
}

u64 invmod(u64 a, u64 p) { return powmod(a, p - 2, p); }

u64 mpz_mod(const mpz_class& z, u64 p) { return mpz_fdiv_ui(z.get_mpz_t(), p); }

// a/b mod p, or nullopt when p | b.
std::optional<u64> rational_mod(const Rational& q, u64 p) {
  u64 den = mpz_mod(q.get_den(), p);
  if (den == 0) return std::nullopt;
  return static_cast<u64>(static_cast<u128>(mpz_mod(q.get_num(), p)) * invmod(den, p) % p);
}

// Row r scaled by the lcm of its denominators (and of extra[r] if given).
std::vector<mpz_class> row_scales(const SparseRationalMatrix& M, const std::vector<Rational>* extra) {
  std::vector<mpz_class> L(M.rows, 1);
  for (const auto& col : M.columns)
    for (const auto& [r, v] : col) mpz_lcm(L[r].get_mpz_t(), L[r].get_mpz_t(), v.get_den().get_mpz_t());
  if (extra)
    for (std::size_t r = 0; r < M.rows; ++r)
      mpz_lcm(L[r].get_mpz_t(), L[r].get_mpz_t(), (*extra)[r].get_den().get_mpz_t());
  return L;
}

mpz_class scaled(const Rational& v, const mpz_class& L) { return v.get_num() * (L / v.get_den()); }

using IntMatrix = std::vector<std::vector<mpz_class>>;

IntMatrix integerize(const SparseRationalMatrix& M, const std::vector<Rational>* extra) {
  auto L = row_scales(M, extra);
  IntMatrix a(M.rows, std::vector<mpz_class>(M.cols + (extra ? 1 : 0)));
  for (std::size_t c = 0; c < M.cols; ++c)
    for (const auto& [r, v] : M.columns[c]) a[r][c] = scaled(v, L[r]);
  if (extra)
    for (std::size_t r = 0; r < M.rows; ++r) a[r][M.cols] = scaled((*extra)[r], L[r]);
  return a;
}

// Fraction-free row echelon over the first `pivot_limit` columns. Returns
// the pivot columns; row k of the result holds pivot k.
std::vector<std::size_t> bareiss_echelon(IntMatrix& a, std::size_t pivot_limit) {
  const std::size_t R = a.size();
  if (R == 0) return {};
  const std::size_t C = a[0].size();
  std::vector<std::size_t> pivots;
  mpz_class prev = 1, t;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_limit && r < R; ++c) {
    std::size_t piv = R;
    for (std::size_t i = r; i < R; ++i)
      if (sgn(a[i][c]) != 0) {
        piv = i;
        break;
      }
    if (piv == R) continue;
    std::swap(a[r], a[piv]);
    const mpz_class& p = a[r][c];
    for (std::size_t i = r + 1; i < R; ++i) {
      for (std::size_t j = c + 1; j < C; ++j) {
        t = p * a[i][j];
        mpz_submul(t.get_mpz_t(), a[i][c].get_mpz_t(), a[r][j].get_mpz_t());
        mpz_divexact(a[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      a[i][c] = 0;
    }
    prev = a[r][c];
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

// Dense LU with partial pivoting modulo p: P A = L U, stored in place.
struct ModLU {
  u64 p = 0;
  std::size_t n = 0;
  std::vector<u64> lu;
  std::vector<std::size_t> perm;

  bool factor(std::vector<u64> a, std::size_t dim, u64 prime) {
    p = prime;
    n = dim;
    lu = std::move(a);
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = n;
      for (std::size_t i = k; i < n; ++i)
        if (lu[i * n + k]) {
          piv = i;
          break;
        }
      if (piv == n) return false;
      if (piv != k) {
        std::swap_ranges(lu.begin() + k * n, lu.begin() + (k + 1) * n, lu.begin() + piv * n);
        std::swap(perm[k], perm[piv]);
      }
      const u64 inv = invmod(lu[k * n + k], p);
      for (std::size_t i = k + 1; i < n; ++i) {
        u64& lik = lu[i * n + k];
        if (!lik) continue;
        lik = static_cast<u64>(static_cast<u128>(lik) * inv % p);
        const u64 f = p - lik;
        u64* ri = &lu[i * n];
        const u64* rk = &lu[k * n];
        for (std::size_t j = k + 1; j < n; ++j) ri[j] = (ri[j] + f * rk[j]) % p;
      }
    }
    return true;
  }

  // In-place solve; b has length n with entries in [0, p).
  void solve(std::vector<u64>& b) const {
    std::vector<u64> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = b[perm[i]];
    for (std::size_t i = 0; i < n; ++i) {
      const u64* row = &lu[i * n];
      u128 sub = 0;
      for (std::size_t j = 0; j < i; ++j) sub += static_cast<u128>(row[j]) * y[j];
      y[i] = (y[i] + p - static_cast<u64>(sub % p)) % p;
    }
    for (std::size_t i = n; i-- > 0;) {
      const u64* row = &lu[i * n];
      u128 sub = 0;
      for (std::size_t j = i + 1; j < n; ++j) sub += static_cast<u128>(row[j]) * y[j];
      u64 v = (y[i] + p - static_cast<u64>(sub % p)) % p;
      y[i] = static_cast<u64>(static_cast<u128>(v) * invmod(row[i], p) % p);
    }
    b.swap(y);
  }
};

double log2_abs(const mpz_class& z) {
  if (sgn(z) == 0) return -1e300;
  long e;
  double m = mpz_get_d_2exp(&e, z.get_mpz_t());
  return std::log2(std::abs(m)) + static_cast<double>(e);
}

// log2 of the Euclidean norm of a list of integers.
double log2_norm(const std::vector<const mpz_class*>& v) {
  double mx = -1e300;
  for (auto* z : v) mx = std::max(mx, log2_abs(*z));
  if (mx < -1e299) return -1e300;
  double s = 0.0;
  for (auto* z : v) s += std::exp2(2.0 * (log2_abs(*z) - mx));
  return mx + 0.5 * std::log2(s);
}

}  // namespace

std::optional<ModPEchelon> modp_echelon(const SparseRationalMatrix& M, std::uint64_t p) {
  const std::size_t R = M.rows, C = M.cols;
  std::vector<u64> a(R * C, 0);
  for (std::size_t c = 0; c < C; ++c)
    for (const auto& [r, v] : M.columns[c]) {
      auto m = rational_mod(v, p);
      if (!m) return std::nullopt;
      a[r * C + c] = *m;
    }
  ModPEchelon out;
  out.prime = p;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < C && rank < R; ++c) {
    std::size_t piv = R;
    for (std::size_t i = rank; i < R; ++i)
      if (a[i * C + c]) {
        piv = i;
        break;
      }
    if (piv == R) continue;
    if (piv != rank) std::swap_ranges(a.begin() + piv * C, a.begin() + (piv + 1) * C, a.begin() + rank * C);
    const u64 inv = invmod(a[rank * C + c], p);
    const u64* rk = &a[rank * C];
    for (std::size_t i = rank + 1; i < R; ++i) {
      u64* ri = &a[i * C];
      if (!ri[c]) continue;
      const u64 f = p - static_cast<u64>(static_cast<u128>(ri[c]) * inv % p);
      for (std::size_t j = c; j < C; ++j)
        if (rk[j]) ri[j] = (ri[j] + f * rk[j]) % p;
    }
    out.pivot_cols.push_back(c);
    ++rank;
  }
  out.rank = rank;
  return out;
}

std::size_t bareiss_rank(const SparseRationalMatrix& M) {
  if (M.rows == 0 || M.cols == 0) return 0;
  IntMatrix a = integerize(M, nullptr);
  // Eliminate along the shorter side.
  if (M.cols < M.rows) {
    IntMatrix t(M.cols, std::vector<mpz_class>(M.rows));
    for (std::size_t r = 0; r < M.rows; ++r)
      for (std::size_t c = 0; c < M.cols; ++c) t[c][r] = a[r][c];
    a.swap(t);
  }
  const std::size_t limit = a[0].size();
  return bareiss_echelon(a, limit).size();
}

std::optional<std::vector<Rational>> bareiss_solve(const SparseRationalMatrix& M, const std::vector<Rational>& f) {
  if (f.size() != M.rows) throw std::invalid_argument("bareiss_solve: rhs length mismatch");
  IntMatrix a = integerize(M, &f);
  auto pivots = bareiss_echelon(a, M.cols);
  for (std::size_t r = pivots.size(); r < M.rows; ++r)
    if (sgn(a[r][M.cols]) != 0) return std::nullopt;
  std::vector<Rational> x(M.cols, Rational(0));
  for (std::size_t k = pivots.size(); k-- > 0;) {
    Rational acc(a[k][M.cols]);
    for (std::size_t j = pivots[k] + 1; j < M.cols; ++j)
      if (sgn(a[k][j]) != 0 && sgn(x[j]) != 0) acc -= Rational(a[k][j]) * x[j];
    x[pivots[k]] = acc / Rational(a[k][pivots[k]]);
  }
  return x;
}

RankCertificate certify_row_rank(const SparseRationalMatrix& M) {
  RankCertificate cert;
  if (M.cols < M.rows) {
    cert.rank = bareiss_rank(M);
    cert.method = "dimension";
    return cert;
  }
  std::size_t best = 0;
  for (u64 p : kLiftPrimes) {
    auto e = modp_echelon(M, p);
    if (!e) continue;
    best = std::max(best, e->rank);
    if (e->rank == M.rows) {
      cert.rank = M.rows;
      cert.full_row_rank = true;
      cert.pivot_cols = std::move(e->pivot_cols);
      cert.method = "modp";
      return cert;
    }
  }
  (void)best;
  cert.rank = bareiss_rank(M);
  cert.full_row_rank = cert.rank == M.rows;
  cert.method = "bareiss";
  if (cert.full_row_rank) {
    // Every lifting prime was unlucky; recover pivots exactly.
    IntMatrix a = integerize(M, nullptr);
    cert.pivot_cols = bareiss_echelon(a, M.cols);
  }
  return cert;
}

std::optional<Rational> rational_reconstruct(const mpz_class& u, const mpz_class& modulus, const mpz_class& bound) {
  mpz_class r0 = modulus, r1 = u % modulus;
  if (r1 < 0) r1 += modulus;
  mpz_class t0 = 0, t1 = 1, q, tmp;
  while (r1 > bound) {
    mpz_fdiv_q(q.get_mpz_t(), r0.get_mpz_t(), r1.get_mpz_t());
    tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (sgn(t1) == 0 || abs(t1) > bound) return std::nullopt;
  Rational out(r1, t1);
  out.canonicalize();
  return out;
}

std::optional<std::vector<Rational>> dixon_solve(const SparseRationalMatrix& M, const std::vector<std::size_t>& pivots,
                                                 const std::vector<Rational>& f) {
  const std::size_t n = M.rows;
  if (pivots.size() != n) throw std::invalid_argument("dixon_solve: pivot count must equal row count");
  if (f.size() != n) throw std::invalid_argument("dixon_solve: rhs length mismatch");

  // Row-integerized square system A y = F.
  SparseRationalMatrix sub(n, n);
  for (std::size_t k = 0; k < n; ++k) sub.columns[k] = M.columns.at(pivots[k]);
  const auto L = row_scales(sub, &f);
  std::vector<std::vector<std::pair<std::size_t, mpz_class>>> A(n);
  for (std::size_t k = 0; k < n; ++k)
    for (const auto& [r, v] : sub.columns[k]) A[k].emplace_back(r, scaled(v, L[r]));
  std::vector<mpz_class> F(n);
  for (std::size_t r = 0; r < n; ++r) F[r] = scaled(f[r], L[r]);

  std::vector<Rational> full(M.cols, Rational(0));
  if (std::all_of(F.begin(), F.end(), [](const mpz_class& z) { return sgn(z) == 0; })) return full;

  // Hadamard-type bound on numerators and denominators of the solution.
  double logH = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<const mpz_class*> col;
    for (const auto& e : A[k]) col.push_back(&e.second);
    logH += std::max(0.0, log2_norm(col));
  }
  {
    std::vector<const mpz_class*> col;
    for (const auto& z : F) col.push_back(&z);
    logH += std::max(0.0, log2_norm(col));
  }

  for (u64 p : kLiftPrimes) {
    std::vector<u64> dense(n * n, 0);
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k)
      for (const auto& [r, v] : A[k]) dense[r * n + k] = mpz_mod(v, p);
    ModLU lu;
    if (!lu.factor(std::move(dense), n, p)) continue;

    const double log2p = std::log2(static_cast<double>(p));
    const std::size_t kmax = static_cast<std::size_t>(std::ceil((2.0 * logH + 2.0) / log2p)) + 2;

    std::vector<mpz_class> res(F), X(n, 0);
    mpz_class pk = 1;
    std::vector<u64> xk(n);
    std::size_t next_check = 16;

    auto attempt = [&](const mpz_class& mod) -> std::optional<std::vector<Rational>> {
      mpz_class bound;
      mpz_class half = mod / 2;
      mpz_sqrt(bound.get_mpz_t(), half.get_mpz_t());
      mpz_class den = 1, v;
      for (std::size_t k = 0; k < n; ++k) {
        v = den * X[k] % mod;
        if (v > half) v -= mod;
        if (abs(v) <= bound) continue;
        auto q = rational_reconstruct(v, mod, bound);
        if (!q) return std::nullopt;
        den *= q->get_den();
        if (den > bound) return std::nullopt;
      }
      std::vector<mpz_class> num(n);
      for (std::size_t k = 0; k < n; ++k) {
        num[k] = den * X[k] % mod;
        if (num[k] > half) num[k] -= mod;
      }
      // Exact check A num = den F.
      std::vector<mpz_class> acc(n, 0);
      for (std::size_t k = 0; k < n; ++k) {
        if (sgn(num[k]) == 0) continue;
        for (const auto& [r, a] : A[k]) mpz_addmul(acc[r].get_mpz_t(), a.get_mpz_t(), num[k].get_mpz_t());
      }
      for (std::size_t r = 0; r < n; ++r)
        if (acc[r] != den * F[r]) return std::nullopt;
      std::vector<Rational> sol(M.cols, Rational(0));
      for (std::size_t k = 0; k < n; ++k) {
        sol[pivots[k]] = Rational(num[k], den);
        sol[pivots[k]].canonicalize();
      }
      return sol;
    };

    for (std::size_t K = 1;; ++K) {
      for (std::size_t r = 0; r < n; ++r) xk[r] = mpz_mod(res[r], p);
      lu.solve(xk);
      for (std::size_t k = 0; k < n; ++k) {
        if (!xk[k]) continue;
        for (const auto& [r, a] : A[k]) mpz_submul_ui(res[r].get_mpz_t(), a.get_mpz_t(), xk[k]);
        mpz_addmul_ui(X[k].get_mpz_t(), pk.get_mpz_t(), xk[k]);
      }
      for (auto& z : res) mpz_divexact_ui(z.get_mpz_t(), z.get_mpz_t(), p);
      pk *= p;
      const bool done = std::all_of(res.begin(), res.end(), [](const mpz_class& z) { return sgn(z) == 0; });
      if (done || K >= next_check || K >= kmax) {
        if (auto sol = attempt(pk)) return sol;
        if (K >= kmax) break;
        next_check = std::max(K + 1, K + K / 4);
      }
    }
  }
  return std::nullopt;
}

}  // namespace polyrefute
