#include "polyrefute/pseudocal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "polyrefute/hermite.hpp"
#include "polyrefute/parallel.hpp"

namespace polyrefute {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void add_combinations(std::size_t n, std::size_t k, std::vector<Subset>& out) {
  Subset cur(k);
  for (std::size_t i = 0; i < k; ++i) cur[i] = i;
  if (k > n) return;
  while (true) {
    out.push_back(cur);
    std::size_t pos = k;
    while (pos > 0 && cur[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++cur[pos - 1];
    for (std::size_t j = pos; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
}

// Reduce the multiset I + J under x_i^2 = 1/n: returns the factor and the
// surviving odd part.
std::pair<double, Subset> reduce(const std::vector<std::size_t>& multiset, std::size_t n) {
  std::vector<std::size_t> v(multiset);
  std::sort(v.begin(), v.end());
  Subset odd;
  double coef = 1.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const std::size_t cnt = j - i;
    coef *= std::pow(1.0 / static_cast<double>(n), static_cast<double>(cnt / 2));
    if (cnt % 2) odd.push_back(v[i]);
    i = j;
  }
  return {coef, odd};
}

std::vector<Subset> moment_basis(std::size_t n) {
  std::vector<Subset> b{{}};
  for (std::size_t i = 0; i < n; ++i) b.push_back({i});
  add_combinations(n, 2, b);
  return b;
}

double min_eig(const MatrixXd& S) {
  if (S.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double spectral_norm(const MatrixXd& S) {
  if (S.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(S.rows() - 1)));
}

}  // namespace

std::vector<Subset> even_subsets(std::size_t n) {
  std::vector<Subset> out{{}};
  add_combinations(n, 2, out);
  add_combinations(n, 4, out);
  return out;
}

PseudoExpectationVector PseudoExpectationVector::zeros(std::size_t n) {
  PseudoExpectationVector pe;
  pe.n = n;
  pe.sets = even_subsets(n);
  for (std::size_t k = 0; k < pe.sets.size(); ++k) pe.index.emplace(pe.sets[k], k);
  pe.values = VectorXd::Zero(static_cast<Index>(pe.sets.size()));
  return pe;
}

double PseudoExpectationVector::operator[](const Subset& S) const {
  if (S.size() % 2) return 0.0;
  auto it = index.find(S);
  if (it == index.end()) throw std::out_of_range("pseudo-expectation: monomial degree above 4");
  return values(static_cast<Index>(it->second));
}

double reduced_moment(const PseudoExpectationVector& pe, const Subset& I, const Subset& J) {
  if ((I.size() + J.size()) % 2) return 0.0;
  std::vector<std::size_t> ms(I);
  ms.insert(ms.end(), J.begin(), J.end());
  auto [coef, S] = reduce(ms, pe.n);
  return coef * pe[S];
}

MatrixXd MomentMatrix4::block(int left, int right) const {
  const Index nn = static_cast<Index>(n);
  const Index off[4] = {0, 1, 1 + nn, static_cast<Index>(basis.size())};
  return M.block(off[left], off[right], off[left + 1] - off[left], off[right + 1] - off[right]);
}

bool MomentMatrix4::odd_blocks_zero() const {
  for (auto [a, b] : {std::pair{0, 1}, {1, 0}, {1, 2}, {2, 1}})
    if ((block(a, b).array() != 0.0).any()) return false;
  return true;
}

MomentMatrix4 moment_matrix(const PseudoExpectationVector& pe) {
  MomentMatrix4 mm;
  mm.n = pe.n;
  mm.basis = moment_basis(pe.n);
  const Index N = static_cast<Index>(mm.basis.size());
  mm.M = MatrixXd::Zero(N, N);
  for (Index a = 0; a < N; ++a)
    for (Index b = a; b < N; ++b) {
      const double v = reduced_moment(pe, mm.basis[a], mm.basis[b]);
      mm.M(a, b) = v;
      mm.M(b, a) = v;
    }
  return mm;
}

double lambda_coeff(const AlphaGraph& alpha, const Subset& I, const Subset& J, std::size_t n) {
  if (alpha.D() != 2) throw std::invalid_argument("lambda_coeff: alpha must be a graph (D = 2)");
  if (I.size() > 2 || J.size() > 2) throw std::invalid_argument("lambda_coeff: |I|, |J| must be at most 2");
  for (unsigned k : alpha.label_sizes())
    if (k % 2) return 0.0;
  std::vector<unsigned> deg(alpha.degrees());
  for (std::size_t i : I) ++deg.at(i);
  for (std::size_t j : J) ++deg.at(j);
  for (unsigned d : deg)
    if (d % 2) return 0.0;
  const unsigned e = alpha.size();
  double v = (e / 2) % 2 ? -1.0 : 1.0;
  v *= std::pow(static_cast<double>(n), -static_cast<double>(e) - 0.5 * static_cast<double>(I.size() + J.size()));
  for (unsigned k : alpha.label_sizes()) v *= double_factorial(static_cast<int>(k) - 1);
  return v / alpha.factorial();
}

CoeffEstimate lambda_coeff_mc(const AlphaGraph& alpha, const Subset& I, const Subset& J, std::size_t n,
                              std::size_t samples, std::uint64_t seed, unsigned jobs) {
  if (samples < 2) throw std::invalid_argument("lambda_coeff_mc: need at least two samples");
  const std::size_t blocks = std::min<std::size_t>(64, samples);
  std::vector<double> sum(blocks, 0.0), sumsq(blocks, 0.0);
  const double afact = alpha.factorial();
  parallel_for(blocks, jobs, [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    const std::size_t count = samples / blocks + (b < samples % blocks ? 1 : 0);
    for (std::size_t t = 0; t < count; ++t) {
      auto [sys, w] = sample_planted_system(n, alpha.m(), 2, 0.0, rng);
      double v = alpha.hermite_product(sys.tensors) / afact;
      for (std::size_t i : I) v *= w.z[i];
      for (std::size_t j : J) v *= w.z[j];
      sum[b] += v;
      sumsq[b] += v * v;
    }
  });
  double s = 0.0, ss = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    s += sum[b];
    ss += sumsq[b];
  }
  const double N = static_cast<double>(samples), mean = s / N;
  return {mean, std::sqrt(std::max(0.0, (ss - N * mean * mean) / (N - 1.0)) / N)};
}

PseudoExpectationVector pseudo_calibrate(std::size_t n, std::size_t tau, const std::vector<CoefficientTensor<double>>& G) {
  if (n < 1 || n > 22) throw std::invalid_argument("pseudo_calibrate: n must lie in [1, 22]");
  for (const auto& g : G)
    if (g.order != 2 || g.dim != n) throw std::invalid_argument("pseudo_calibrate: tensors must be n x n");
  PseudoExpectationVector pe = PseudoExpectationVector::zeros(n);
  const std::size_t m = G.size();
  const double r = 1.0 / std::sqrt(static_cast<double>(n));

  std::vector<double> h0(tau + 1), inv_fact(tau + 1);
  for (std::size_t k = 0; k <= tau; ++k) {
    h0[k] = hermite_at_zero(static_cast<unsigned>(k));
    inv_fact[k] = 1.0 / factorial(static_cast<unsigned>(k));
  }
  std::vector<double> scale(pe.sets.size());
  std::vector<std::uint32_t> masks(pe.sets.size());
  for (std::size_t k = 0; k < pe.sets.size(); ++k) {
    scale[k] = std::pow(r, static_cast<double>(pe.sets[k].size()));
    for (std::size_t i : pe.sets[k]) masks[k] |= 1u << i;
  }

  // z and -z contribute equally to even moments, so fix the last sign.
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  const double weight = 1.0 / static_cast<double>(half);
  std::vector<double> z(n), poly(tau + 1), next(tau + 1), series(tau + 1);
  for (std::uint64_t mask = 0; mask < half; ++mask) {
    for (std::size_t i = 0; i < n; ++i) z[i] = (mask >> i) & 1 ? -r : r;
    std::fill(poly.begin(), poly.end(), 0.0);
    poly[0] = 1.0;
    for (std::size_t s = 0; s < m; ++s) {
      double w = 0.0;
      const auto& e = G[s].entries;
      for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += e[i * n + j] * z[j];
        w += z[i] * row;
      }
      const auto hw = hermite_all(static_cast<unsigned>(tau), w);
      for (std::size_t k = 0; k <= tau; ++k) series[k] = h0[k] * hw[k] * inv_fact[k];
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t a = 0; a <= tau; ++a) {
        if (poly[a] == 0.0) continue;
        for (std::size_t b = 0; a + b <= tau; ++b) next[a + b] += poly[a] * series[b];
      }
      poly.swap(next);
    }
    double F = 0.0;
    for (double v : poly) F += v;
    F *= weight;
    const auto neg = static_cast<std::uint32_t>(mask);
    for (std::size_t k = 0; k < pe.sets.size(); ++k) {
      const double sign = std::popcount(neg & masks[k]) % 2 ? -1.0 : 1.0;
      pe.values(static_cast<Index>(k)) += sign * scale[k] * F;
    }
  }
  return pe;
}

PseudoExpectationVector pseudo_calibrate_enumerated(std::size_t n, std::size_t tau,
                                                    const std::vector<CoefficientTensor<double>>& G) {
  PseudoExpectationVector pe = PseudoExpectationVector::zeros(n);
  const auto alphas = enumerate_all_alphas(n, G.size(), tau, 2);
  for (std::size_t k = 0; k < pe.sets.size(); ++k) {
    const Subset& S = pe.sets[k];
    const std::size_t cut = std::min<std::size_t>(2, S.size());
    const Subset I(S.begin(), S.begin() + static_cast<std::ptrdiff_t>(cut)), J(S.begin() + static_cast<std::ptrdiff_t>(cut), S.end());
    double acc = 0.0;
    for (const auto& a : alphas) {
      const double lam = lambda_coeff(a, I, J, n);
      if (lam != 0.0) acc += lam * a.hermite_product(G);
    }
    pe.values(static_cast<Index>(k)) = acc;
  }
  return pe;
}

MomentMatrix4 build_moment_matrix(std::size_t n, std::size_t tau, const std::vector<CoefficientTensor<double>>& G) {
  return moment_matrix(pseudo_calibrate(n, tau, G));
}

ConstraintOperator build_constraint_operator(std::size_t n, const std::vector<CoefficientTensor<double>>& G) {
  ConstraintOperator op;
  op.n = n;
  op.m = G.size();
  const auto cols = even_subsets(n);
  std::map<Subset, std::size_t> col_of;
  for (std::size_t k = 0; k < cols.size(); ++k) col_of.emplace(cols[k], k);
  std::vector<Subset> row_sets{{}};
  add_combinations(n, 2, row_sets);
  std::vector<MatrixXd> sym;
  for (const auto& g : G) sym.push_back(symmetrized(g));
  for (const auto& I : row_sets)
    for (std::size_t s = 0; s < op.m; ++s) op.rows.emplace_back(I, s);
  op.Q = MatrixXd::Zero(static_cast<Index>(op.rows.size()), static_cast<Index>(cols.size()));
  std::vector<std::size_t> ms;
  for (std::size_t r = 0; r < op.rows.size(); ++r) {
    const auto& [I, s] = op.rows[r];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        ms.assign(I.begin(), I.end());
        ms.push_back(a);
        ms.push_back(b);
        auto [coef, S] = reduce(ms, n);
        op.Q(static_cast<Index>(r), static_cast<Index>(col_of.at(S))) +=
            sym[s](static_cast<Index>(a), static_cast<Index>(b)) * coef;
      }
  }
  return op;
}

RepairResult repair_constraints(const PseudoExpectationVector& pe, const ConstraintOperator& Q, double svd_cutoff) {
  if (Q.Q.cols() != pe.values.size()) throw std::invalid_argument("repair_constraints: dimension mismatch");
  RepairResult res;
  res.fixed = pe;
  const VectorXd r0 = Q.Q * pe.values;
  res.residual_before = r0.norm();
  Eigen::BDCSVD<MatrixXd> svd(Q.Q, Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  res.q_norm = sv.size() ? sv(0) : 0.0;
  while (res.rank < static_cast<std::size_t>(sv.size()) && sv(static_cast<Index>(res.rank)) > svd_cutoff * res.q_norm)
    ++res.rank;
  res.null_dim = static_cast<std::size_t>(Q.Q.cols()) - res.rank;
  if (res.rank > 0) {
    const MatrixXd V = svd.matrixV().leftCols(static_cast<Index>(res.rank));
    res.fixed.values = pe.values - V * (V.transpose() * pe.values);
    const double smin = sv(static_cast<Index>(res.rank) - 1);
    res.qqt_gap = smin * smin;
    res.correction_bound = res.q_norm * res.residual_before / res.qqt_gap;
  }
  res.correction_norm = (res.fixed.values - pe.values).norm();
  res.residual_after = (Q.Q * res.fixed.values).norm();
  return res;
}

MatrixXd constraint_directions(std::size_t n, const std::vector<CoefficientTensor<double>>& G) {
  const auto basis = moment_basis(n);
  MatrixXd W = MatrixXd::Zero(static_cast<Index>(basis.size()), static_cast<Index>(G.size()));
  for (std::size_t s = 0; s < G.size(); ++s) {
    const MatrixXd S = symmetrized(G[s]);
    W(0, static_cast<Index>(s)) = S.trace() / static_cast<double>(n);
    for (std::size_t k = 1 + n; k < basis.size(); ++k)
      W(static_cast<Index>(k), static_cast<Index>(s)) =
          2.0 * S(static_cast<Index>(basis[k][0]), static_cast<Index>(basis[k][1]));
  }
  return W;
}

SpectrumReport spectrum_report(const MomentMatrix4& candidate, const MomentMatrix4& repaired, const MatrixXd& W) {
  SpectrumReport rep;
  rep.M00 = candidate.M00();
  rep.M00_repaired = repaired.M00();
  rep.norm = spectral_norm(candidate.M);
  rep.norm_repaired = spectral_norm(repaired.M);
  rep.min_eig = min_eig(candidate.M);
  rep.min_eig_repaired = min_eig(repaired.M);
  rep.odd_blocks_zero = candidate.odd_blocks_zero() && repaired.odd_blocks_zero();
  rep.block_min_eig["00"] = min_eig(candidate.block(0, 0));
  rep.block_min_eig["11"] = min_eig(candidate.block(1, 1));
  rep.block_min_eig["22"] = min_eig(candidate.block(2, 2));

  // Orthogonal complement of span{w_s}.
  Eigen::ColPivHouseholderQR<MatrixXd> qr(W);
  const Index N = W.rows();
  const Index r = qr.rank();
  MatrixXd Qfull = qr.householderQ() * MatrixXd::Identity(N, N);
  const MatrixXd B = Qfull.rightCols(N - r);
  rep.min_restricted_eig = min_eig(B.transpose() * repaired.M * B);
  return rep;
}

double normalization_tail_bound(std::size_t n, std::size_t tau, const std::vector<CoefficientTensor<double>>& G) {
  if (tau > 4) return std::numeric_limits<double>::quiet_NaN();
  if (n > 31) throw std::invalid_argument("normalization_tail_bound: n must be below 32");
  const std::size_t m = G.size(), slots = n * n;
  const double nd = static_cast<double>(n);
  std::vector<std::uint32_t> par(slots);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) par[i * n + j] = (1u << i) ^ (1u << j);

  // F2[s][p]: sum over two-edge multisets in label s with parity p of
  // prod |h_mult| / mult!.
  std::vector<std::map<std::uint32_t, double>> F2(m);
  std::vector<double> F4(m, 0.0);
  for (std::size_t s = 0; s < m; ++s) {
    const auto& g = G[s].entries;
    std::vector<double> h1(slots), h2(slots), h3(slots), h4(slots);
    for (std::size_t e = 0; e < slots; ++e) {
      h1[e] = std::abs(g[e]);
      h2[e] = std::abs(hermite_eval(2, g[e])) / 2.0;
      h3[e] = std::abs(hermite_eval(3, g[e])) / 6.0;
      h4[e] = std::abs(hermite_eval(4, g[e])) / 24.0;
    }
    for (std::size_t a = 0; a < slots; ++a) {
      F2[s][0] += h2[a];
      for (std::size_t b = a + 1; b < slots; ++b) F2[s][par[a] ^ par[b]] += h1[a] * h1[b];
    }
    if (tau < 4) continue;
    const double* hs[5] = {nullptr, h1.data(), h2.data(), h3.data(), h4.data()};
    auto weight = [&](std::size_t e1, std::size_t e2, std::size_t e3, std::size_t e4) {
      const std::size_t e[4] = {e1, e2, e3, e4};
      double w = 1.0;
      for (int i = 0; i < 4;) {
        int j = i;
        while (j < 4 && e[j] == e[i]) ++j;
        w *= hs[j - i][e[i]];
        i = j;
      }
      return w;
    };
    for (std::size_t a = 0; a < slots; ++a)
      for (std::size_t b = a; b < slots; ++b)
        for (std::size_t c = b; c < slots; ++c) {
          const std::uint32_t p = par[a] ^ par[b] ^ par[c];
          if (p == 0) {
            for (std::size_t i = 0; i < n; ++i) {
              const std::size_t d = i * n + i;
              if (d >= c) F4[s] += weight(a, b, c, d);
            }
          } else if (std::popcount(p) == 2) {
            const auto i = static_cast<std::size_t>(std::countr_zero(p));
            const auto j = static_cast<std::size_t>(31 - std::countl_zero(p));
            for (std::size_t d : {i * n + j, j * n + i})
              if (d >= c) F4[s] += weight(a, b, c, d);
          }
        }
  }
  double total = 0.0;
  if (tau >= 2)
    for (std::size_t s = 0; s < m; ++s) total += F2[s][0] / (nd * nd);
  if (tau >= 4) {
    double four = 0.0;
    for (std::size_t s = 0; s < m; ++s) four += 3.0 * F4[s];
    for (std::size_t s = 0; s < m; ++s)
      for (std::size_t t = s + 1; t < m; ++t)
        for (const auto& [p, v] : F2[s]) {
          auto it = F2[t].find(p);
          if (it != F2[t].end()) four += v * it->second;
        }
    total += four / std::pow(nd, 4);
  }
  return total;
}

PseudocalRun run_pseudocal(std::size_t n, std::size_t m, std::size_t tau, std::uint64_t seed, double svd_cutoff) {
  PseudocalRun run;
  run.n = n;
  run.m = m;
  run.tau = tau;
  run.seed = seed;
  Rng rng = make_rng(seed);
  const RealSystem sys = sample_null_gaussian_system(n, m, 2, rng);
  run.pe = pseudo_calibrate(n, tau, sys.tensors);
  run.candidate = moment_matrix(run.pe);
  const ConstraintOperator Q = build_constraint_operator(n, sys.tensors);
  RepairResult repair = repair_constraints(run.pe, Q, svd_cutoff);
  run.repaired = moment_matrix(repair.fixed);
  run.report = spectrum_report(run.candidate, run.repaired, constraint_directions(n, sys.tensors));
  run.report.repair = std::move(repair);
  run.report.tail_bound = normalization_tail_bound(n, tau, sys.tensors);
  return run;
}

nlohmann::json spectrum_json(const PseudocalRun& run) {
  const auto& r = run.report;
  nlohmann::json blocks = {{"M00", r.M00}, {"M00_repaired", r.M00_repaired}, {"odd_blocks_zero", r.odd_blocks_zero}};
  for (const auto& [k, v] : r.block_min_eig) blocks["min_eig_" + k] = v;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"n", run.n},
          {"m", run.m},
          {"tau", run.tau},
          {"seed", run.seed},
          {"blocks", blocks},
          {"norm", r.norm},
          {"norm_repaired", r.norm_repaired},
          {"min_eig", r.min_eig},
          {"min_eig_repaired", r.min_eig_repaired},
          {"min_restricted_eig", r.min_restricted_eig},
          {"constraint_residual_before", r.repair.residual_before},
          {"constraint_residual_after", r.repair.residual_after},
          {"q_norm", r.repair.q_norm},
          {"qqt_gap", r.repair.qqt_gap},
          {"q_rank", r.repair.rank},
          {"null_dim", r.repair.null_dim},
          {"correction_norm", r.repair.correction_norm},
          {"correction_bound", r.repair.correction_bound},
          {"tail_bound", num(r.tail_bound)}};
}

}  // namespace polyrefute
