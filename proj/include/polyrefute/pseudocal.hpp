#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "polyrefute/lowdeg.hpp"

namespace polyrefute {

using Subset = std::vector<std::size_t>;  // sorted, distinct

// Even subsets of [n] with at most four elements: the empty set, pairs, then
// quadruples, each group in lexicographic order.
std::vector<Subset> even_subsets(std::size_t n);

// Values pE[x^S] for even |S| <= 4. Odd moments are zero and never stored.
struct PseudoExpectationVector {
  std::size_t n = 0;
  std::vector<Subset> sets;
  std::map<Subset, std::size_t> index;
  Eigen::VectorXd values;

  static PseudoExpectationVector zeros(std::size_t n);
  double operator[](const Subset& S) const;
};

// pE[x^I x^J] with x_i^2 = 1/n; zero when |I|+|J| is odd.
double reduced_moment(const PseudoExpectationVector& pe, const Subset& I, const Subset& J);

// Rows and columns indexed by the empty set, singletons, then pairs.
struct MomentMatrix4 {
  std::size_t n = 0;
  std::vector<Subset> basis;
  Eigen::MatrixXd M;

  double M00() const { return M(0, 0); }
  Eigen::MatrixXd block(int left, int right) const;  // left/right in {0,1,2}
  bool odd_blocks_zero() const;
};

MomentMatrix4 moment_matrix(const PseudoExpectationVector& pe);

// (-1)^{|a|/2} n^{-|a|-(|I|+|J|)/2} prod_s (|a_s|-1)!! / a! when every
// |a_s| is even and every Delta_i + I_i + J_i is even; zero otherwise.
double lambda_coeff(const AlphaGraph& alpha, const Subset& I, const Subset& J, std::size_t n);

// Monte-Carlo oracle (1/a!) E[z^{I+J} h_a(G)] over the planted law with c = 0.
CoeffEstimate lambda_coeff_mc(const AlphaGraph& alpha, const Subset& I, const Subset& J, std::size_t n,
                              std::size_t samples, std::uint64_t seed, unsigned jobs = 1);

// Pseudo-calibrated pE truncated at |alpha| <= tau. Sums over the hypercube
// using sum_{|a|=k} v^a h_a(G)/a! = h_k(<v,G>)/k! for unit v, so the cost is
// 2^n rather than the number of graphs. Requires n <= 22.
PseudoExpectationVector pseudo_calibrate(std::size_t n, std::size_t tau, const std::vector<CoefficientTensor<double>>& G);

// Same quantity by explicit enumeration of alpha and lambda_coeff; subject to
// the global enumeration cap.
PseudoExpectationVector pseudo_calibrate_enumerated(std::size_t n, std::size_t tau,
                                                    const std::vector<CoefficientTensor<double>>& G);

MomentMatrix4 build_moment_matrix(std::size_t n, std::size_t tau, const std::vector<CoefficientTensor<double>>& G);

// Rows (I, s) with |I| in {0, 2}; columns follow even_subsets(n).
struct ConstraintOperator {
  std::size_t n = 0, m = 0;
  std::vector<std::pair<Subset, std::size_t>> rows;
  Eigen::MatrixXd Q;
};

ConstraintOperator build_constraint_operator(std::size_t n, const std::vector<CoefficientTensor<double>>& G);

struct RepairResult {
  PseudoExpectationVector fixed;
  std::size_t rank = 0, null_dim = 0;
  double q_norm = 0.0;   // sigma_max(Q)
  double qqt_gap = 0.0;  // smallest kept eigenvalue of Q Q^T
  double residual_before = 0.0, residual_after = 0.0;
  double correction_norm = 0.0, correction_bound = 0.0;
};

// pE - Q^T (Q Q^T)^+ Q pE, with singular values below cutoff * sigma_max
// treated as zero.
RepairResult repair_constraints(const PseudoExpectationVector& pe, const ConstraintOperator& Q,
                                double svd_cutoff = 1e-8);

// Columns w_s: the constraint polynomial g_s written in the moment basis.
Eigen::MatrixXd constraint_directions(std::size_t n, const std::vector<CoefficientTensor<double>>& G);

struct SpectrumReport {
  double M00 = 0.0, M00_repaired = 0.0;
  double norm = 0.0, norm_repaired = 0.0;  // spectral norms
  double min_eig = 0.0, min_eig_repaired = 0.0, min_restricted_eig = 0.0;
  bool odd_blocks_zero = false;
  std::map<std::string, double> block_min_eig;
  RepairResult repair;
  double tail_bound = 0.0;  // sum |lambda| |h_alpha| over alpha != empty, tau <= 4 only
};

SpectrumReport spectrum_report(const MomentMatrix4& candidate, const MomentMatrix4& repaired,
                               const Eigen::MatrixXd& directions);

// End-to-end run for one seed.
struct PseudocalRun {
  std::size_t n = 0, m = 0, tau = 0;
  std::uint64_t seed = 0;
  PseudoExpectationVector pe;
  MomentMatrix4 candidate, repaired;
  SpectrumReport report;
};
PseudocalRun run_pseudocal(std::size_t n, std::size_t m, std::size_t tau, std::uint64_t seed,
                           double svd_cutoff = 1e-8);

// Exact sum of |lambda(a, {}, {})| |h_a(G)| over 1 <= |a| <= tau, tau <= 4.
double normalization_tail_bound(std::size_t n, std::size_t tau, const std::vector<CoefficientTensor<double>>& G);

nlohmann::json spectrum_json(const PseudocalRun& run);

}  // namespace polyrefute
