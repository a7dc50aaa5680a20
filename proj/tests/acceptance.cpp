// End-to-end checks at desk scale. One line per criterion; exit status is the
// number of failures (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "polyrefute/distributions.hpp"
#include "polyrefute/harness.hpp"
#include "polyrefute/hermite.hpp"
#include "polyrefute/lowdeg.hpp"
#include "polyrefute/multiset.hpp"
#include "polyrefute/polynomial.hpp"
#include "polyrefute/pseudocal.hpp"
#include "polyrefute/refuter.hpp"
#include "polyrefute/rng.hpp"
#include "polyrefute/sos2.hpp"

using namespace polyrefute;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --- 1: refutation at n=8 ------------------------------------------------

Outcome refutation_rate() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.command = "refute";
  c.n = 8;
  c.D = 2;
  c.d = 4;
  c.coeff_bits = 32;
  c.m = required_m(8, 2, 4);
  c.trials = 100;
  c.seed = 1;
  const RunRecord rec = dispatch(validate(c));
  const auto verified = rec.summary.at("verified").get<std::size_t>();
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "m=" << *c.m << " verified " << verified << "/100 in " << secs << " s";
  return {*c.m == 19 && verified >= 95 && secs <= 300.0, os.str()};
}

// --- 2: covering arithmetic ---------------------------------------------

Outcome covering_bounds() {
  const auto t0 = Clock::now();
  std::size_t cases = 0, naive = 0;
  for (std::size_t n = 2; n <= 10; ++n)
    for (unsigned D = 2; D <= n; ++D)
      for (unsigned d = D; d <= n; ++d) {
        ++cases;
        const CoveringPlan plan = build_covering(n, D, d);
        if (!covering_is_complete(plan))
          return {false, "incomplete at n=" + std::to_string(n) + " D=" + std::to_string(D) + " d=" + std::to_string(d)};
        // Independent pairwise scan where it stays cheap.
        if (static_cast<double>(multiset_count(n, d)) * static_cast<double>(plan.gammas.size()) < 2e7) {
          ++naive;
          for (const auto& alpha : enumerate_multisets(n, d))
            if (std::none_of(plan.gammas.begin(), plan.gammas.end(), [&](const auto& g) { return alpha.contains(g); }))
              return {false, "naive scan found a gap at n=" + std::to_string(n)};
        }
        const double k = static_cast<double>(plan.gammas.size() + 1);
        if (k > covering_count_bound(n, D, d) || plan.gammas.size() + 1 > required_m(n, D, d))
          return {false, "bound exceeded at n=" + std::to_string(n) + " D=" + std::to_string(D) + " d=" + std::to_string(d)};
      }
  std::ostringstream os;
  os << cases << " cases (" << naive << " also scanned pairwise) in " << seconds_since(t0) << " s";
  return {true, os.str()};
}

// --- 3: degree-2 phase transition ---------------------------------------

Outcome phase_transition() {
  const auto t0 = Clock::now();
  const auto grid = parse_grid("40:200:10");
  const SweepResult r = phase_sweep(20, grid, 50, 1, 1, 5000);
  double feas60 = -1, infeas160 = -1;
  for (const auto& row : r.rows) {
    if (row.m == 60) feas60 = row.feasible;
    if (row.m == 160) infeas160 = row.infeasible;
  }
  const double secs = seconds_since(t0);
  const bool cross_ok = r.crossover && *r.crossover >= 70 && *r.crossover <= 130;
  std::ostringstream os;
  os << "feasible@60=" << feas60 << " infeasible@160=" << infeas160 << " crossover="
     << (r.crossover ? std::to_string(*r.crossover) : "none") << " in " << secs << " s";
  return {feas60 >= 0.9 && infeas160 >= 0.45 && cross_ok && secs <= 1800.0, os.str()};
}

// --- 4: closed-form coefficients vs Monte Carlo -------------------------

Outcome coefficient_oracle() {
  const auto t0 = Clock::now();
  struct Case {
    std::size_t n, m;
    unsigned d, D;
  };
  const Case suite[] = {{2, 1, 2, 2}, {2, 2, 2, 2}, {3, 1, 2, 2}, {2, 1, 2, 3}};
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  std::uint64_t seed = 900;
  for (const auto& cs : suite) {
    std::vector<std::pair<AlphaGraph, std::vector<unsigned>>> pairs;
    for (const auto& a : enumerate_valid_alphas(cs.n, cs.m, cs.d, cs.D))
      for (const auto& b : compatible_betas(a, cs.d)) pairs.emplace_back(a, b);
    for (double c : {default_scaling(cs.n, cs.m, cs.d), 0.5}) {
      const auto est = planted_coeff_mc(pairs, cs.n, cs.m, cs.D, c, 1'000'000, seed++, 1);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double exact = planted_hermite_coeff(pairs[k].first, pairs[k].second, cs.n, c, cs.D);
        const double z = std::abs(est[k].mean - exact) / std::max(est[k].stderr_, 1e-300);
        worst = std::max(worst, z);
        ++checked;
        if (std::abs(est[k].mean - exact) > 4.0 * est[k].stderr_) ++bad;
      }
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << checked << " coefficients, " << bad << " outside 4 se, worst |z|=" << worst << " in " << secs << " s";
  return {checked > 0 && bad == 0 && secs <= 600.0, os.str()};
}

// --- 5: spectral distinguisher ------------------------------------------

Outcome distinguisher() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.command = "distinguish";
  c.n = 30;
  c.m = 200;
  c.trials = 50;
  c.seed = 1;
  const RunRecord rec = dispatch(validate(c));
  const double a = rec.summary.at("auc").get<double>(), a0 = rec.summary.at("auc_default").get<double>();
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "AUC(c=1)=" << a << " AUC(default c)=" << a0 << " in " << secs << " s";
  return {a >= 0.95 && a0 <= 0.7 && secs <= 300.0, os.str()};
}

// --- 6: pseudo-calibration ----------------------------------------------

Outcome pseudocalibration() {
  const auto t0 = Clock::now();
  const std::size_t n = 12, m = 20, tau = 4, seeds = 20;
  std::size_t band = 0, odd = 0, resid = 0, restricted = 0, idem = 0;
  double m00_lo = 1e300, m00_hi = -1e300;
  for (std::uint64_t s = 1; s <= seeds; ++s) {
    const PseudocalRun run = run_pseudocal(n, m, tau, s);
    const auto& rp = run.report;
    m00_lo = std::min(m00_lo, rp.M00);
    m00_hi = std::max(m00_hi, rp.M00);
    if (rp.M00 >= 0.9 && rp.M00 <= 1.1) ++band;
    if (rp.odd_blocks_zero && run.repaired.odd_blocks_zero()) ++odd;
    if (rp.repair.residual_after <= 1e-8 * rp.repair.q_norm * std::max(run.pe.values.norm(), 1e-300)) ++resid;
    if (rp.min_restricted_eig >= -1e-6 * rp.norm) ++restricted;
    Rng rng = make_rng(s);
    const RealSystem sys = sample_null_gaussian_system(n, m, 2, rng);
    const ConstraintOperator Q = build_constraint_operator(n, sys.tensors);
    const RepairResult again = repair_constraints(rp.repair.fixed, Q);
    const double scale = std::max(1.0, rp.repair.fixed.values.norm());
    if ((again.fixed.values - rp.repair.fixed.values).norm() <= 1e-12 * scale) ++idem;
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "M00 in band " << band << "/20 (range " << m00_lo << ".." << m00_hi << "), odd zero " << odd
     << "/20, residual " << resid << "/20, restricted eig " << restricted << "/20, idempotent " << idem << "/20 in "
     << secs << " s";
  const bool pass = band == seeds && odd == seeds && resid == seeds && restricted * 5 >= seeds * 4 && idem == seeds &&
                    secs <= 1200.0;
  return {pass, os.str()};
}

// --- 7: invariant suites ------------------------------------------------

bool hermite_orthogonal() {
  constexpr int K = 6;
  constexpr std::size_t N = 1'000'000;
  Rng rng = make_rng(4242);
  std::normal_distribution<double> g;
  double s[K + 1][K + 1] = {}, ss[K + 1][K + 1] = {};
  for (std::size_t t = 0; t < N; ++t) {
    const auto h = hermite_all(K, g(rng));
    for (int k = 0; k <= K; ++k)
      for (int l = k; l <= K; ++l) {
        s[k][l] += h[k] * h[l];
        ss[k][l] += h[k] * h[l] * h[k] * h[l];
      }
  }
  for (int k = 0; k <= K; ++k)
    for (int l = k; l <= K; ++l) {
      const double mean = s[k][l] / N, se = std::sqrt((ss[k][l] / N - mean * mean) / N);
      if (std::abs(mean - (k == l ? factorial(static_cast<unsigned>(k)) : 0.0)) > 4.0 * se) return false;
    }
  return true;
}

Rational canonical_q(long a, long b) {
  Rational q(a, b);
  q.canonicalize();
  return q;
}

bool ring_laws() {
  using P = Polynomial<Rational>;
  Rng rng = make_rng(99);
  std::uniform_int_distribution<int> coef(-9, 9), deg(0, 3), terms(1, 4), var(0, 2);
  auto random_poly = [&] {
    P p(3);
    for (int t = terms(rng); t > 0; --t) {
      MultisetIndex a(3);
      for (int k = deg(rng); k > 0; --k) a.increment(static_cast<std::size_t>(var(rng)));
      p.add(a, canonical_q(coef(rng), 1 + std::abs(coef(rng))));
    }
    return p;
  };
  for (int t = 0; t < 200; ++t) {
    const P p = random_poly(), q = random_poly(), r = random_poly();
    if (!(poly_mul(p, q) == poly_mul(q, p))) return false;
    if (!(poly_mul(poly_mul(p, q), r) == poly_mul(p, poly_mul(q, r)))) return false;
    P pq = p;
    pq += q;
    P split = poly_mul(p, r);
    split += poly_mul(q, r);
    if (!(poly_mul(pq, r) == split)) return false;
    const std::vector<Rational> x{canonical_q(coef(rng), 3), canonical_q(coef(rng), 1), canonical_q(coef(rng), 7)};
    if (poly_eval(poly_mul(p, q), x) != poly_eval(p, x) * poly_eval(q, x)) return false;
  }
  return true;
}

bool lambda_zero_laws() {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t m = 1; m <= 2; ++m) {
      std::vector<Subset> sets{{}};
      for (std::size_t i = 0; i < n; ++i) sets.push_back({i});
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) sets.push_back({i, j});
      for (const auto& a : enumerate_all_alphas(n, m, 2, 2)) {
        std::vector<unsigned> lab(m, 0), deg(n, 0);
        for (const auto& [key, mult] : a.entries()) {
          lab[key[0]] += mult;
          for (std::size_t k = 1; k < key.size(); ++k) deg[key[k]] += mult;
        }
        for (const auto& I : sets)
          for (const auto& J : sets) {
            auto v = deg;
            for (auto i : I) ++v[i];
            for (auto j : J) ++v[j];
            const bool allowed = std::all_of(lab.begin(), lab.end(), [](unsigned x) { return x % 2 == 0; }) &&
                                 std::all_of(v.begin(), v.end(), [](unsigned x) { return x % 2 == 0; });
            if ((lambda_coeff(a, I, J, n) != 0.0) != allowed) return false;
          }
      }
    }
  // The planted coefficient obeys the same kind of parity law in beta.
  for (const auto& a : enumerate_all_alphas(2, 2, 3, 2))
    for (unsigned b0 = 0; b0 <= 3; ++b0)
      for (unsigned b1 = 0; b1 <= 3; ++b1) {
        const std::vector<unsigned> beta{b0, b1};
        bool ok = a.degrees_even();
        for (std::size_t s = 0; s < 2; ++s)
          ok = ok && beta[s] <= a.label_sizes()[s] && (beta[s] + a.label_sizes()[s]) % 2 == 0;
        if ((planted_hermite_coeff(a, beta, 2, 0.6, 2) != 0.0) != ok) return false;
      }
  return true;
}

bool projection_idempotent() {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng = make_rng(seed);
    const auto G = sample_null_gaussian_system(8, 2, 2, rng).tensors;
    const auto Q = build_constraint_operator(8, G);
    const auto once = repair_constraints(pseudo_calibrate(8, 4, G), Q);
    if (once.null_dim == 0) return false;
    const auto twice = repair_constraints(once.fixed, Q);
    if ((twice.fixed.values - once.fixed.values).norm() > 1e-10 * std::max(1.0, once.fixed.values.norm())) return false;
    if (once.residual_after > 1e-8 * once.q_norm * std::max(once.fixed.values.norm(), 1e-300)) return false;
  }
  return true;
}

bool ldlr_permutation_symmetry() {
  Rng rng = make_rng(41);
  const std::size_t n = 3, m = 2;
  for (double c : {0.0, 0.3}) {
    const double base = ldlr_norm_squared(n, m, 4, 2, c).total;
    for (int t = 0; t < 4; ++t) {
      LdlrOptions opt;
      opt.vertex_perm.resize(n);
      opt.label_perm.resize(m);
      std::iota(opt.vertex_perm.begin(), opt.vertex_perm.end(), 0);
      std::iota(opt.label_perm.begin(), opt.label_perm.end(), 0);
      std::shuffle(opt.vertex_perm.begin(), opt.vertex_perm.end(), rng);
      std::shuffle(opt.label_perm.begin(), opt.label_perm.end(), rng);
      if (ldlr_norm_squared(n, m, 4, 2, c, opt).total != base) return false;
    }
  }
  return true;
}

Outcome invariants() {
  const auto t0 = Clock::now();
  const std::pair<const char*, std::function<bool()>> suites[] = {{"hermite", hermite_orthogonal},
                                                                   {"ring", ring_laws},
                                                                   {"zero-laws", lambda_zero_laws},
                                                                   {"projection", projection_idempotent},
                                                                   {"ldlr-symmetry", ldlr_permutation_symmetry}};
  bool all = true;
  std::ostringstream os;
  for (const auto& [name, fn] : suites) {
    const bool ok = fn();
    all = all && ok;
    os << name << (ok ? " ok, " : " FAILED, ");
  }
  const double secs = seconds_since(t0);
  os << "in " << secs << " s";
  return {all && secs <= 900.0, os.str()};
}

}  // namespace

int main() {
  const std::pair<const char*, Outcome (*)()> criteria[] = {
      {"1 refutation n=8 m=19, >=95/100 verified", refutation_rate},
      {"2 covering completeness and bounds, n<=10", covering_bounds},
      {"3 degree-2 phase transition n=20", phase_transition},
      {"4 planted coefficients vs Monte Carlo", coefficient_oracle},
      {"5 spectral distinguisher n=30 m=200", distinguisher},
      {"6 pseudo-calibration n=12 m=20 tau=4", pseudocalibration},
      {"7 invariant suites", invariants},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of 7 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
