#include "polyrefute/refuter.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace polyrefute {

std::size_t LinearizationMatrix::row_of(const MultisetIndex& alpha) const {
  if (alpha.degree() == d) {
    std::size_t r = high.find(alpha);
    return r == high.size() ? rows() : r;
  }
  if (alpha.degree() == d - D) {
    std::size_t r = low.find(alpha);
    return r == low.size() ? rows() : high.size() + r;
  }
  return rows();
}

LinearizationMatrix build_linearization(const RationalSystem& sys, unsigned d) {
  sys.validate();
  if (sys.D > d) throw std::invalid_argument("build_linearization: need D <= d");
  if (d % sys.D != 0) throw std::invalid_argument("build_linearization: d must be a multiple of D");
  LinearizationMatrix lin;
  lin.n = sys.n;
  lin.m = sys.m;
  lin.D = sys.D;
  lin.d = d;
  lin.high = MultisetIndexer(enumerate_multisets(sys.n, d));
  lin.low = MultisetIndexer(enumerate_multisets(sys.n, d - sys.D));
  const std::size_t H = lin.high.size(), L = lin.low.size();
  lin.mat = SparseRationalMatrix(H + L, sys.m * L);
  const auto polys = sys.polynomials();
  for (std::size_t i = 0; i < sys.m; ++i) {
    for (std::size_t pos = 0; pos < L; ++pos) {
      auto& col = lin.mat.columns[lin.col_of(i, pos)];
      const MultisetIndex& beta = lin.low.at(pos);
      for (const auto& [gamma, v] : polys[i].terms()) col.emplace_back(lin.high.find(beta + gamma), v);
      if (!is_zero(sys.rhs[i])) col.emplace_back(H + pos, Rational(-sys.rhs[i]));
      std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    }
  }
  return lin;
}

namespace {

std::size_t bucket_count(unsigned D, unsigned d) { return D == 2 ? d - 1 : (d - 1) / (D - 1); }

void check_covering_args(std::size_t n, unsigned D, unsigned d) {
  if (D < 2 || D > d) throw std::invalid_argument("covering: need 2 <= D <= d");
  if (d > n) throw std::invalid_argument("covering: need d <= n");
}

}  // namespace

CoveringPlan build_covering(std::size_t n, unsigned D, unsigned d) {
  check_covering_args(n, D, d);
  CoveringPlan plan;
  plan.n = n;
  plan.D = D;
  plan.d = d;
  plan.buckets_requested = bucket_count(D, d);
  const std::size_t size = (n + plan.buckets_requested - 1) / plan.buckets_requested;
  for (std::size_t start = 0; start < n; start += size) {
    std::vector<std::size_t> bucket;
    for (std::size_t v = start; v < std::min(n, start + size); ++v) bucket.push_back(v);
    for (const auto& local : enumerate_multisets(bucket.size(), D)) {
      MultisetIndex g(n);
      for (std::size_t k = 0; k < bucket.size(); ++k)
        for (std::uint32_t e = 0; e < local[k]; ++e) g.increment(bucket[k]);
      plan.gammas.push_back(std::move(g));
    }
    plan.buckets.push_back(std::move(bucket));
  }
  return plan;
}

bool covering_is_complete(const CoveringPlan& plan) {
  // Look up every size-D sub-multiset of alpha instead of scanning gammas.
  const std::unordered_set<MultisetIndex, MultisetHash> gammas(plan.gammas.begin(), plan.gammas.end());
  std::vector<std::uint32_t> sub(plan.n);
  std::function<bool(const MultisetIndex&, std::size_t, unsigned)> search = [&](const MultisetIndex& alpha,
                                                                               std::size_t var, unsigned left) {
    if (left == 0) return gammas.count(MultisetIndex(sub)) > 0;
    if (var == plan.n) return false;
    for (std::uint32_t e = std::min<std::uint32_t>(alpha[var], left) + 1; e-- > 0;) {
      sub[var] = e;
      const bool hit = search(alpha, var + 1, left - e);
      sub[var] = 0;
      if (hit) return true;
    }
    return false;
  };
  for (const auto& alpha : enumerate_multisets(plan.n, plan.d))
    if (!search(alpha, 0, plan.D)) return false;
  return true;
}

std::size_t required_m(std::size_t n, unsigned D, unsigned d) {
  check_covering_args(n, D, d);
  const std::size_t t = bucket_count(D, d);
  const std::size_t cap = (n + t - 1) / t;
  return t * static_cast<std::size_t>(multiset_count(cap, D)) + 1;
}

double covering_count_bound(std::size_t n, unsigned D, unsigned d) {
  const double nn = static_cast<double>(n);
  if (D == 2) return nn * nn / (2.0 * (d - 1)) + 3.0 * nn;
  return std::pow(4.0 * std::numbers::e, D) / D * std::pow(nn, D) / std::pow(static_cast<double>(d), D - 1) + 1.0;
}

const char* to_string(RefuteStatus s) {
  switch (s) {
    case RefuteStatus::Refuted:
      return "refuted";
    case RefuteStatus::NotFound:
      return "not_found";
    case RefuteStatus::AllRhsZero:
      return "all_rhs_zero";
  }
  return "?";
}

IdealMembership::IdealMembership(const RationalSystem& sys, unsigned d)
    : lin_(build_linearization(sys, d)), rank_(certify_row_rank(lin_.mat)) {}

std::optional<std::vector<Polynomial<Rational>>> IdealMembership::express(const Polynomial<Rational>& f,
                                                                         SolveMethod method) const {
  std::vector<Rational> rhs(lin_.rows(), Rational(0));
  for (const auto& [alpha, v] : f.terms()) {
    std::size_t r = lin_.row_of(alpha);
    if (r == lin_.rows()) return std::nullopt;
    rhs[r] = v;
  }
  std::optional<std::vector<Rational>> sol;
  if (method == SolveMethod::Dixon && rank_.full_row_rank)
    sol = dixon_solve(lin_.mat, rank_.pivot_cols, rhs);
  else
    sol = bareiss_solve(lin_.mat, rhs);
  if (!sol) return std::nullopt;
  std::vector<Polynomial<Rational>> a(lin_.m, Polynomial<Rational>(lin_.n));
  for (std::size_t i = 0; i < lin_.m; ++i)
    for (std::size_t pos = 0; pos < lin_.low.size(); ++pos) a[i].set(lin_.low.at(pos), (*sol)[lin_.col_of(i, pos)]);
  return a;
}

RefutationResult find_refutation(const RationalSystem& sys, unsigned d, SolveMethod method) {
  sys.validate();
  RefutationResult out;
  std::size_t istar = sys.m;
  for (std::size_t i = 0; i < sys.m; ++i)
    if (!is_zero(sys.rhs[i])) {
      istar = i;
      break;
    }
  if (istar == sys.m) {
    out.status = RefuteStatus::AllRhsZero;
    return out;
  }
  out.pivot_equation = istar;

  IdealMembership ideal(sys, d);
  out.rank = ideal.rank();
  out.matrix_rows = ideal.matrix().rows();
  out.matrix_cols = ideal.matrix().cols();
  if (!out.rank.full_row_rank) return out;

  // p = g/b, so (g - b) * (1/b) sum_{k<d/D} p^k = p^{d/D} - 1.
  const Rational inv_b = 1 / sys.rhs[istar];
  Polynomial<Rational> p = tensor_to_poly(sys.tensors[istar]);
  p *= inv_b;
  const unsigned r = d / sys.D;
  Polynomial<Rational> q(sys.n), pk(sys.n);
  pk.set(MultisetIndex(sys.n), Rational(1));
  for (unsigned k = 0; k < r; ++k) {
    q += pk;
    pk = poly_mul(pk, p);
  }
  q *= inv_b;
  Polynomial<Rational> f = pk;  // p^{d/D}
  f *= Rational(-1);

  auto a = ideal.express(f, method);
  if (!a) return out;
  (*a)[istar] += q;
  out.status = RefuteStatus::Refuted;
  out.cert = RefutationCertificate{d, sys.n, std::move(*a)};
  return out;
}

namespace {

using IntPoly = std::map<MultisetIndex, mpz_class, GrlexLess>;

mpz_class common_denominator(const Polynomial<Rational>& p) {
  mpz_class l = 1;
  for (const auto& [a, v] : p.terms()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den().get_mpz_t());
  return l;
}

std::vector<std::pair<MultisetIndex, mpz_class>> integer_terms(const Polynomial<Rational>& p, const mpz_class& den) {
  std::vector<std::pair<MultisetIndex, mpz_class>> out;
  out.reserve(p.terms().size());
  for (const auto& [a, v] : p.terms()) out.emplace_back(a, v.get_num() * (den / v.get_den()));
  return out;
}

}  // namespace

VerifyReport verify_refutation(const RationalSystem& sys, const RefutationCertificate& cert) {
  VerifyReport rep;
  if (cert.a.size() != sys.m) {
    rep.diagnostic = "certificate has " + std::to_string(cert.a.size()) + " multipliers for " +
                     std::to_string(sys.m) + " equations";
    return rep;
  }
  for (std::size_t i = 0; i < sys.m; ++i) {
    if (cert.a[i].num_vars() != sys.n) {
      rep.diagnostic = "multiplier " + std::to_string(i) + " has the wrong number of variables";
      return rep;
    }
    const int deg = cert.a[i].degree();
    if (deg >= 0 && static_cast<unsigned>(deg) + sys.D > cert.d) {
      rep.diagnostic = "degree bound violated: deg a_" + std::to_string(i) + " = " + std::to_string(deg) +
                       " exceeds d - D = " + std::to_string(static_cast<int>(cert.d) - static_cast<int>(sys.D));
      return rep;
    }
  }

  // Clear denominators per equation, then bring all products over one lcm.
  const auto polys = sys.polynomials();
  std::vector<Polynomial<Rational>> shifted;
  std::vector<mpz_class> dens(sys.m);
  mpz_class lambda = 1;
  for (std::size_t i = 0; i < sys.m; ++i) {
    Polynomial<Rational> g = polys[i];
    g.add(MultisetIndex(sys.n), Rational(-sys.rhs[i]));
    dens[i] = common_denominator(cert.a[i]) * common_denominator(g);
    mpz_lcm(lambda.get_mpz_t(), lambda.get_mpz_t(), dens[i].get_mpz_t());
    shifted.push_back(std::move(g));
  }
  IntPoly acc;
  for (std::size_t i = 0; i < sys.m; ++i) {
    if (cert.a[i].empty()) continue;
    const mpz_class da = common_denominator(cert.a[i]), dg = common_denominator(shifted[i]);
    const auto at = integer_terms(cert.a[i], da), gt = integer_terms(shifted[i], dg);
    const mpz_class w = lambda / dens[i];
    IntPoly prod;
    for (const auto& [x, u] : at)
      for (const auto& [y, v] : gt) {
        auto& slot = prod[x + y];
        mpz_addmul(slot.get_mpz_t(), u.get_mpz_t(), v.get_mpz_t());
      }
    for (auto& [mono, c] : prod) {
      auto& slot = acc[mono];
      mpz_addmul(slot.get_mpz_t(), c.get_mpz_t(), w.get_mpz_t());
    }
  }
  acc[MultisetIndex(sys.n)] += lambda;
  for (const auto& [mono, c] : acc) {
    if (sgn(c) != 0) {
      Rational resid(c, lambda);
      resid.canonicalize();
      rep.diagnostic = "identity fails at monomial " + mono.to_string() + ": residual " + to_string(resid);
      return rep;
    }
  }
  rep.ok = true;
  return rep;
}

RowRankDecomposition build_row_rank_decomposition(const LinearizationMatrix& lin, const CoveringPlan& plan) {
  const std::size_t N = plan.gammas.size();
  if (lin.m < N + 1) throw std::invalid_argument("row-rank decomposition: need m >= |gammas| + 1");
  if (plan.n != lin.n || plan.D != lin.D || plan.d != lin.d)
    throw std::invalid_argument("row-rank decomposition: plan does not match the matrix");
  RowRankDecomposition dec;
  const std::size_t L = lin.low.size();
  for (std::size_t k = 0; k < N; ++k) {
    DecompositionBlock blk;
    blk.equation = k;
    for (std::size_t pos = 0; pos < L; ++pos) {
      blk.rows.push_back(lin.row_of(lin.low.at(pos) + plan.gammas[k]));
      blk.cols.push_back(lin.col_of(k, pos));
    }
    dec.blocks.push_back(std::move(blk));
  }
  // The rhs block uses the first remaining equation with b != 0.
  std::size_t e = N;
  const std::size_t H = lin.high.size();
  auto b_of = [&](std::size_t eq) { return lin.mat.at(H, lin.col_of(eq, 0)); };
  while (e < lin.m && is_zero(b_of(e))) ++e;
  if (e == lin.m) throw std::invalid_argument("row-rank decomposition: no spare equation with nonzero rhs");
  DecompositionBlock blk;
  blk.equation = e;
  for (std::size_t pos = 0; pos < L; ++pos) {
    blk.rows.push_back(H + pos);
    blk.cols.push_back(lin.col_of(e, pos));
  }
  dec.blocks.push_back(std::move(blk));
  return dec;
}

DecompositionCheck check_decomposition(const LinearizationMatrix& lin, const RowRankDecomposition& dec) {
  DecompositionCheck chk;
  std::vector<char> row_hit(lin.rows(), 0), col_used(lin.cols(), 0);
  chk.disjoint_columns = true;
  chk.blocks_nonsingular = true;
  for (const auto& blk : dec.blocks) {
    for (std::size_t r : blk.rows) row_hit.at(r) = 1;
    for (std::size_t c : blk.cols) {
      if (col_used.at(c)) chk.disjoint_columns = false;
      col_used[c] = 1;
    }
    if (blk.rows.size() != blk.cols.size()) {
      chk.blocks_nonsingular = false;
      continue;
    }
    std::vector<std::size_t> local(lin.rows(), blk.rows.size());
    for (std::size_t k = 0; k < blk.rows.size(); ++k) local[blk.rows[k]] = k;
    SparseRationalMatrix sub(blk.rows.size(), blk.cols.size());
    for (std::size_t k = 0; k < blk.cols.size(); ++k)
      for (const auto& [r, v] : lin.mat.columns[blk.cols[k]])
        if (local[r] < blk.rows.size()) sub.columns[k].emplace_back(local[r], v);
    if (!certify_row_rank(sub).full_row_rank) chk.blocks_nonsingular = false;
  }
  chk.covers_rows = std::all_of(row_hit.begin(), row_hit.end(), [](char c) { return c != 0; });
  return chk;
}

bool check_full_row_rank(const LinearizationMatrix& lin) { return certify_row_rank(lin.mat).full_row_rank; }

nlohmann::json certificate_to_json(const RefutationCertificate& cert) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : cert.a) a.push_back(poly_to_json(p));
  return {{"d", cert.d}, {"num_vars", cert.num_vars}, {"a", std::move(a)}};
}

RefutationCertificate certificate_from_json(const nlohmann::json& j) {
  RefutationCertificate cert;
  cert.d = j.at("d").get<unsigned>();
  for (const auto& p : j.at("a")) cert.a.push_back(poly_from_json<Rational>(p));
  cert.num_vars = j.contains("num_vars") ? j.at("num_vars").get<std::size_t>()
                                         : (cert.a.empty() ? 0 : cert.a.front().num_vars());
  return cert;
}

}  // namespace polyrefute
