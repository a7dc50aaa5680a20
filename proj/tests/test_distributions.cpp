#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "polyrefute/distributions.hpp"
#include "polyrefute/tensor.hpp"

using namespace polyrefute;

namespace {

// q * 2^B must be an integer in [-2^B, 2^B].
void expect_on_grid(const Rational& q, unsigned B) {
  Rational scaled = q * Rational(mpz_class(1) << B);
  EXPECT_EQ(scaled.get_den(), 1) << to_string(q);
  EXPECT_LE(abs(scaled.get_num()), mpz_class(1) << B);
}

double dot_zz(const CoefficientTensor<double>& G, const std::vector<double>& z) { return tensor_contract(G, z); }

}  // namespace

TEST(NiceRational, GridAndRange) {
  Rng rng = make_rng(1);
  for (int t = 0; t < 1000; ++t) {
    Rational q = sample_nice_rational({8}, rng);
    EXPECT_LE(abs(q), 1);
    expect_on_grid(q, 8);
  }
  EXPECT_THROW(sample_nice_rational({7}, rng), std::invalid_argument);
}

TEST(NiceRational, DistinctSeedsRarelyCollide) {
  const NiceRationalSpec spec{8};
  EXPECT_DOUBLE_EQ(spec.atom_mass(), 1.0 / 513.0);
  int equal = 0;
  const int pairs = 2000;
  for (int t = 0; t < pairs; ++t) {
    Rng a = make_rng(10'000 + 2 * t), b = make_rng(10'001 + 2 * t);
    equal += sample_nice_rational(spec, a) == sample_nice_rational(spec, b);
  }
  // Expected 2000/513 ~ 3.9 collisions; 2^-8 bound gives ~7.8.
  EXPECT_LE(equal, 16);
}

TEST(NiceRational, Deterministic) {
  Rng a = make_rng(42), b = make_rng(42);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(sample_nice_rational({32}, a), sample_nice_rational({32}, b));
}

TEST(NullSystem, ShapesAndProvenance) {
  Rng rng = make_rng(3);
  auto sys = sample_null_gaussian_system(2, 1, 2, rng);
  EXPECT_NO_THROW(sys.validate());
  EXPECT_EQ(sys.tensors.size(), 1u);
  EXPECT_EQ(sys.tensors[0].entries.size(), 4u);
  EXPECT_EQ(sys.rhs.size(), 1u);
  EXPECT_EQ(sys.provenance.kind, ProvenanceKind::Null);
  EXPECT_THROW(sample_null_gaussian_system(2, 1, 1, rng), std::invalid_argument);
}

TEST(NullSystem, RationalDenominators) {
  Rng rng = make_rng(4);
  auto sys = sample_null_rational_system(3, 4, 2, {16}, rng);
  for (const auto& G : sys.tensors)
    for (const auto& e : G.entries) expect_on_grid(e, 16);
  for (const auto& b : sys.rhs) expect_on_grid(b, 16);
}

TEST(NullSystem, EntryMeanAndVariance) {
  Rng rng = make_rng(5);
  std::vector<double> v;
  while (v.size() < 100'000) {
    auto sys = sample_null_gaussian_system(10, 10, 2, rng);
    for (const auto& G : sys.tensors) v.insert(v.end(), G.entries.begin(), G.entries.end());
  }
  const double N = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / N;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= N - 1;
  EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(var / N));
  // Var of the sample variance for N(0,1) is 2/N.
  EXPECT_LE(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / N));
}

TEST(NullSystem, DeterministicReplay) {
  Rng a = make_rng(99, 3), b = make_rng(99, 3);
  auto s1 = sample_null_rational_system(4, 3, 2, {32}, a);
  auto s2 = sample_null_rational_system(4, 3, 2, {32}, b);
  EXPECT_EQ(system_to_json(s1).dump(), system_to_json(s2).dump());
}

TEST(PlantedSystem, ConstraintIdentity) {
  for (unsigned D : {2u, 3u}) {
    Rng rng = make_rng(6, D);
    auto [sys, w] = sample_planted_system(5, 8, D, 0.3, rng);
    EXPECT_EQ(sys.provenance.kind, ProvenanceKind::Planted);
    double norm = 0.0;
    for (double zi : w.z) {
      EXPECT_NEAR(std::abs(zi), 1.0 / std::sqrt(5.0), 1e-15);
      norm += zi * zi;
    }
    EXPECT_NEAR(norm, 1.0, 1e-12);
    for (std::size_t s = 0; s < sys.m; ++s) EXPECT_NEAR(dot_zz(sys.tensors[s], w.z), 0.3 * sys.rhs[s], 1e-10);
  }
}

TEST(PlantedSystem, ZeroScalingIsHomogeneous) {
  Rng rng = make_rng(7);
  auto [sys, w] = sample_planted_system(6, 5, 2, 0.0, rng);
  // Exact in real arithmetic; double rounding leaves ~1e-16.
  for (const auto& G : sys.tensors) EXPECT_LE(std::abs(dot_zz(G, w.z)), 1e-13);
}

TEST(PlantedSystem, OffWitnessVarianceIsOne) {
  // u = e_1 e_2^T - e_2 e_1^T is orthogonal to z (x) z for any z.
  Rng rng = make_rng(8);
  std::vector<double> vals;
  for (int t = 0; t < 20'000; ++t) {
    auto [sys, w] = sample_planted_system(3, 5, 2, 0.5, rng);
    for (const auto& G : sys.tensors) vals.push_back((G.at({0, 1}) - G.at({1, 0})) / std::sqrt(2.0));
  }
  const double N = static_cast<double>(vals.size());
  double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / N, var = 0.0;
  for (double x : vals) var += (x - mean) * (x - mean);
  var /= N - 1;
  EXPECT_LE(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / N));
}

TEST(PlantedSystem, EntryVarianceMatchesConditionalLaw) {
  // Conditioning on <G, z (x) z> = c b shrinks Var G_01 to 1 - (1 - c^2) n^-2.
  const std::size_t n = 4;
  const double c = 0.5;
  Rng rng = make_rng(12);
  double s = 0, ss = 0;
  const int N = 100'000;
  for (int t = 0; t < N; ++t) {
    auto [pl, w] = sample_planted_system(n, 1, 2, c, rng);
    const double b = pl.tensors[0].at({0, 1});
    s += b, ss += b * b;
  }
  const double mean = s / N, var = ss / N - mean * mean;
  const double expect = 1.0 - (1.0 - c * c) / static_cast<double>(n * n);
  EXPECT_LE(std::abs(mean), 4.0 * std::sqrt(expect / N));
  EXPECT_LE(std::abs(var - expect), 4.0 * std::sqrt(2.0 * expect * expect / N));
}

TEST(PlantedSystem, MarginalsMatchNull) {
  const std::size_t n = 20;
  Rng rng = make_rng(13);
  double s_null = 0, ss_null = 0, s_pl = 0, ss_pl = 0;
  const int N = 50'000;
  for (int t = 0; t < N; ++t) {
    auto null_sys = sample_null_gaussian_system(n, 1, 2, rng);
    auto [pl, w] = sample_planted_system(n, 1, 2, default_scaling(n, 1, 2), rng);
    const double a = null_sys.tensors[0].at({0, 1}), b = pl.tensors[0].at({0, 1});
    s_null += a, ss_null += a * a, s_pl += b, ss_pl += b * b;
  }
  EXPECT_LE(std::abs(s_null / N - s_pl / N), 4.0 * std::sqrt(2.0 / N));
  EXPECT_LE(std::abs(ss_null / N - ss_pl / N), 4.0 * std::sqrt(4.0 / N));
}

TEST(SolvePlanted, Examples) {
  {
    Rng rng = make_rng(20);
    auto [sys, w] = sample_planted_system(6, 4, 2, 1.0, rng);
    auto x = solve_planted(sys);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(x[i], w.z[i]);
    EXPECT_LE(max_relative_residual(sys, x), 1e-6);
  }
  auto norm = [](const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  };
  {
    Rng rng = make_rng(21);
    auto [sys, w] = sample_planted_system(6, 4, 2, 0.25, rng);
    auto x = solve_planted(sys);
    EXPECT_NEAR(norm(x), 2.0, 1e-12);
    EXPECT_LE(max_relative_residual(sys, x), 1e-6);
  }
  {
    Rng rng = make_rng(22);
    auto [sys, w] = sample_planted_system(4, 3, 3, 0.125, rng);
    auto x = solve_planted(sys);
    EXPECT_NEAR(norm(x), 2.0, 1e-12);
    EXPECT_LE(max_relative_residual(sys, x), 1e-6);
  }
}

TEST(SolvePlanted, AlwaysSatisfiable) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng = make_rng(seed);
    auto [sys, w] = sample_planted_system(7, 10, 2, default_scaling(7, 10, 2), rng);
    EXPECT_LE(max_relative_residual(sys, solve_planted(sys)), 1e-6) << seed;
  }
}

TEST(SolvePlanted, ZeroScaling) {
  Rng rng = make_rng(23);
  auto [sys, w] = sample_planted_system(4, 2, 2, 0.0, rng);
  EXPECT_THROW(solve_planted(sys), std::invalid_argument);
  for (auto& b : sys.rhs) b = 0.0;
  EXPECT_EQ(solve_planted(sys), w.z);
  Rng r2 = make_rng(24);
  EXPECT_THROW(solve_planted(sample_null_gaussian_system(3, 2, 2, r2)), std::invalid_argument);
}

TEST(SystemJson, RoundTrip) {
  Rng rng = make_rng(30);
  auto rs = sample_null_rational_system(3, 2, 2, {32}, rng);
  EXPECT_EQ(system_to_json(rational_system_from_json(system_to_json(rs))).dump(), system_to_json(rs).dump());
  auto [ps, w] = sample_planted_system(3, 2, 2, 0.1, rng);
  auto back = real_system_from_json(system_to_json(ps));
  EXPECT_EQ(back.provenance.kind, ProvenanceKind::Planted);
  EXPECT_EQ(back.rhs, ps.rhs);
  EXPECT_EQ(back.tensors[1].entries, ps.tensors[1].entries);
}

TEST(DefaultScaling, Formula) {
  EXPECT_DOUBLE_EQ(default_scaling(8, 16, 2), 1.0 / (10.0 * 2 * 4.0 * std::log(9.0)));
}
