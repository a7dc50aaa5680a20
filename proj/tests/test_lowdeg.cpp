#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "polyrefute/hermite.hpp"
#include "polyrefute/lowdeg.hpp"

using namespace polyrefute;

namespace {

// E[h_k(c g) h_l(g)] by trapezoid quadrature against the Gaussian density.
double scaled_coeff_quadrature(unsigned k, unsigned l, double c) {
  const double lo = -14.0, hi = 14.0;
  const int steps = 200'000;
  const double h = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    acc += w * hermite_eval(k, c * x) * hermite_eval(l, x) * std::exp(-0.5 * x * x);
  }
  return acc * h / std::sqrt(2.0 * M_PI);
}

AlphaGraph parallel_pair(std::size_t n) {
  AlphaGraph a(n, 1, 2);
  a.add_edge(0, {0, 1}, 2);
  return a;
}

// Frozen once: mean statistic over 200 null draws (n=30, m=200, seeds disjoint from the test's).
constexpr double kNullBaseline = 7.15894;

}  // namespace

TEST(ScaledCoeff, Examples) {
  EXPECT_DOUBLE_EQ(scaled_coeff(2, 0, 0.0), -1.0);
  for (double c : {0.0, 0.3, 1.0}) EXPECT_EQ(scaled_coeff(3, 2, c), 0.0);
  for (unsigned k = 0; k <= 6; ++k)
    for (double c : {0.2, 0.7}) EXPECT_NEAR(scaled_coeff(k, k, c), std::pow(c, k) * factorial(k), 1e-12);
  EXPECT_EQ(scaled_coeff(1, 3, 0.5), 0.0);
}

TEST(ScaledCoeff, MatchesQuadrature) {
  for (unsigned k = 0; k <= 6; ++k)
    for (unsigned l = 0; l <= 6; ++l)
      for (double c : {0.0, 0.25, 0.8}) EXPECT_NEAR(scaled_coeff(k, l, c), scaled_coeff_quadrature(k, l, c), 1e-8) << k << l << c;
}

TEST(PlantedHermiteCoeff, Examples) {
  AlphaGraph empty(3, 2, 2);
  EXPECT_EQ(planted_hermite_coeff(empty, {0, 0}, 3, 0.4, 2), 1.0);
  EXPECT_DOUBLE_EQ(planted_hermite_coeff(parallel_pair(3), {0}, 3, 0.0, 2), -1.0 / 9.0);
  AlphaGraph odd(3, 1, 2);
  odd.add_edge(0, {0, 1});
  odd.add_edge(0, {1, 2});
  EXPECT_EQ(planted_hermite_coeff(odd, {0}, 3, 0.5, 2), 0.0);
  EXPECT_EQ(planted_hermite_coeff(odd, {2}, 3, 0.5, 2), 0.0);
}

TEST(PlantedHermiteCoeff, ParallelPairMatchesMonteCarlo) {
  const std::size_t n = 2;
  const auto est = planted_coeff_mc({{parallel_pair(n), {0}}}, n, 1, 2, 0.0, 1'000'000, 17, 1);
  const double closed = planted_hermite_coeff(parallel_pair(n), {0}, n, 0.0, 2);
  EXPECT_DOUBLE_EQ(closed, -0.25);
  EXPECT_LE(std::abs(est[0].mean - closed), 4.0 * est[0].stderr_) << est[0].mean << " +- " << est[0].stderr_;
}

TEST(PlantedHermiteCoeff, ZeroLaw) {
  for (unsigned D : {2u, 3u}) {
    const std::size_t n = 2, m = 2;
    for (const auto& a : enumerate_all_alphas(n, m, D == 2 ? 3 : 2, D)) {
      for (unsigned b0 = 0; b0 <= 3; ++b0)
        for (unsigned b1 = 0; b1 <= 3; ++b1) {
          const std::vector<unsigned> beta{b0, b1};
          bool compatible = a.degrees_even();
          for (std::size_t s = 0; s < m; ++s)
            compatible = compatible && beta[s] <= a.label_sizes()[s] && (beta[s] + a.label_sizes()[s]) % 2 == 0;
          const double v = planted_hermite_coeff(a, beta, n, 0.6, D);
          if (!compatible) ASSERT_EQ(v, 0.0);
          else ASSERT_NE(v, 0.0);
        }
    }
  }
}

TEST(EnumerateValidAlphas, SingleEdgeOnTwoVertices) {
  const auto v = enumerate_valid_alphas(2, 1, 1, 2);
  ASSERT_EQ(v.size(), 2u);
  std::set<AlphaGraph::Key> keys;
  for (const auto& a : v) {
    ASSERT_EQ(a.entries().size(), 1u);
    keys.insert(a.entries().begin()->first);
  }
  EXPECT_TRUE(keys.count({0, 0, 0}));
  EXPECT_TRUE(keys.count({0, 1, 1}));
}

TEST(EnumerateValidAlphas, ZeroEdgesIsEmpty) { EXPECT_TRUE(enumerate_valid_alphas(3, 2, 0, 2).empty()); }

TEST(EnumerateValidAlphas, TwoEdgesMatchesBruteForce) {
  // Slots (i, j) for i, j in {0, 1}; multisets of 1 or 2 slots with even degrees.
  std::vector<std::pair<int, int>> slots{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::size_t expect = 0;
  auto even = [](const std::vector<std::pair<int, int>>& edges) {
    int deg[2] = {0, 0};
    for (auto [i, j] : edges) ++deg[i], ++deg[j];
    return deg[0] % 2 == 0 && deg[1] % 2 == 0;
  };
  for (std::size_t a = 0; a < 4; ++a) {
    expect += even({slots[a]});
    for (std::size_t b = a; b < 4; ++b) expect += even({slots[a], slots[b]});
  }
  EXPECT_EQ(expect, 8u);
  EXPECT_EQ(enumerate_valid_alphas(2, 1, 2, 2).size(), expect);
}

TEST(EnumerateValidAlphas, CapIsEnforced) {
  EXPECT_GT(alpha_enumeration_size(10, 10, 6, 2), static_cast<double>(kEnumerationCap));
  EXPECT_THROW(enumerate_valid_alphas(10, 10, 6, 2), std::length_error);
  EXPECT_THROW(ldlr_norm_squared(10, 10, 6, 2, 0.1), std::length_error);
}

TEST(Ldlr, DegreeZeroIsOne) {
  const auto r = ldlr_norm_squared(3, 2, 0, 2, 0.3);
  EXPECT_EQ(r.total, 1.0);
  EXPECT_EQ(r.terms, 0u);
  EXPECT_EQ(r.advantage_bound(), 1.0);
}

TEST(Ldlr, SmallCaseMatchesMonteCarlo) {
  for (double c : {0.0, 0.5}) {
    const auto exact = ldlr_norm_squared(2, 1, 2, 2, c);
    const auto mc = ldlr_monte_carlo(2, 1, 2, 2, c, 1'000'000, 31, 1);
    EXPECT_LE(std::abs(mc.total - exact.total), 4.0 * mc.stderr_) << c << ": " << mc.total << " vs " << exact.total;
  }
  // Hand count at (2,1,2,2): 1 + 1/4 + c^4/4.
  EXPECT_DOUBLE_EQ(ldlr_norm_squared(2, 1, 2, 2, 0.0).total, 1.25);
  EXPECT_DOUBLE_EQ(ldlr_norm_squared(2, 1, 2, 2, 0.5).total, 1.25 + 0.0625 / 4.0);
}

TEST(Ldlr, NonDecreasingInDegree) {
  for (double c : {0.0, 0.2}) {
    double prev = 1.0;
    for (unsigned d = 0; d <= 4; ++d) {
      const double t = ldlr_norm_squared(3, 2, d, 2, c).total;
      EXPECT_GE(t, prev) << d;
      EXPECT_GE(t, 1.0);
      prev = t;
    }
  }
}

TEST(Ldlr, BreakdownSumsToTotal) {
  const auto r = ldlr_norm_squared(3, 2, 4, 2, 0.3);
  double s = 1.0;
  for (const auto& [k, v] : r.per_edge_count) s += v;
  EXPECT_NEAR(s, r.total, 1e-14 * r.total);
}

TEST(Ldlr, PermutationSymmetryIsExact) {
  Rng rng = make_rng(40);
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
      EXPECT_EQ(ldlr_norm_squared(n, m, 4, 2, c, opt).total, base);
    }
  }
  // Relabeling preserves the closed-form coefficient as well.
  AlphaGraph a(3, 2, 2);
  a.add_edge(0, {0, 1}, 2);
  a.add_edge(1, {2, 2});
  const auto b = a.relabeled({2, 0, 1}, {1, 0});
  EXPECT_EQ(planted_hermite_coeff(a, {0, 1}, 3, 0.4, 2), planted_hermite_coeff(b, {1, 0}, 3, 0.4, 2));
}

TEST(Ldlr, NonDecreasingInScaling) {
  const std::size_t n = 3, m = 2;
  const unsigned d = 4;
  const double cmax = 1.0 / (d * std::sqrt(static_cast<double>(m)));
  double prev = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const double t = ldlr_norm_squared(n, m, d, 2, cmax * k / 10.0).total;
    EXPECT_GE(t, prev) << k;
    prev = t;
  }
}

TEST(Ldlr, CubicTensorsSupported) {
  const auto r = ldlr_norm_squared(2, 1, 2, 3, 0.5);
  EXPECT_GE(r.total, 1.0);
  const auto mc = ldlr_monte_carlo(2, 1, 2, 3, 0.5, 400'000, 41, 1);
  EXPECT_LE(std::abs(mc.total - r.total), 4.0 * mc.stderr_);
}

TEST(Auc, Basics) {
  EXPECT_EQ(auc({1, 2}, {3, 4}), 1.0);
  EXPECT_EQ(auc({3, 4}, {1, 2}), 0.0);
  EXPECT_EQ(auc({1, 2}, {1, 2}), 0.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.5), 3.0);
}

TEST(Distinguisher, RejectsNonQuadratic) {
  Rng rng = make_rng(50);
  EXPECT_THROW(spectral_distinguisher(sample_null_gaussian_system(4, 3, 3, rng)), std::invalid_argument);
}

TEST(Distinguisher, NullPlantedSeparation) {
  const std::size_t n = 30, m = 200, seeds = 50;
  std::vector<double> null_s, strong, tiny;
  for (std::size_t t = 0; t < seeds; ++t) {
    Rng r0 = make_rng(900, 3 * t), r1 = make_rng(900, 3 * t + 1), r2 = make_rng(900, 3 * t + 2);
    null_s.push_back(spectral_distinguisher(sample_null_gaussian_system(n, m, 2, r0)));
    strong.push_back(spectral_distinguisher(sample_planted_system(n, m, 2, 1.0, r1).first));
    tiny.push_back(spectral_distinguisher(sample_planted_system(n, m, 2, default_scaling(n, m, 2), r2).first));
  }
  const double mean = std::accumulate(null_s.begin(), null_s.end(), 0.0) / seeds;
  EXPECT_LE(std::abs(mean - kNullBaseline), 0.15 * kNullBaseline);
  const double q99 = quantile(null_s, 0.99), q05 = quantile(null_s, 0.05), q95 = quantile(null_s, 0.95);
  const auto above = std::count_if(strong.begin(), strong.end(), [&](double v) { return v > q99; });
  EXPECT_GE(above, 48);  // >= 95% of 50
  const auto inside = std::count_if(tiny.begin(), tiny.end(), [&](double v) { return v >= q05 && v <= q95; });
  EXPECT_GE(inside, 40);  // >= 80% of 50
}
