#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "polyrefute/distributions.hpp"

namespace polyrefute {

// Labeled directed multigraph (hypergraph for D > 2) on [n] with edge labels
// in [m]. An edge is (label, ordered D-tuple of vertices).
class AlphaGraph {
 public:
  using Key = std::vector<std::size_t>;  // {s, v_1, ..., v_D}

  AlphaGraph() = default;
  AlphaGraph(std::size_t n, std::size_t m, unsigned D) : n_(n), m_(m), D_(D), label_size_(m, 0), degree_(n, 0) {}

  void add_edge(std::size_t s, const std::vector<std::size_t>& tuple, unsigned multiplicity = 1);

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  unsigned D() const { return D_; }
  const std::map<Key, unsigned>& entries() const { return entries_; }

  unsigned size() const { return size_; }
  const std::vector<unsigned>& label_sizes() const { return label_size_; }
  // Vertex occurrence counts; a self-loop contributes 2.
  const std::vector<unsigned>& degrees() const { return degree_; }
  bool degrees_even() const;
  // Product of multiplicity factorials.
  double factorial() const;

  // prod over edges of h_mult(G^{(s)}[tuple]).
  double hermite_product(const std::vector<CoefficientTensor<double>>& G) const;

  // Image under vertex map v -> vperm[v] and label map s -> lperm[s].
  AlphaGraph relabeled(const std::vector<std::size_t>& vperm, const std::vector<std::size_t>& lperm) const;

 private:
  std::size_t n_ = 0, m_ = 0;
  unsigned D_ = 2;
  std::map<Key, unsigned> entries_;
  unsigned size_ = 0;
  std::vector<unsigned> label_size_, degree_;
};

// E[h_k(c g) h_l(g)] for g ~ N(0,1).
double scaled_coeff(unsigned k, unsigned l, double c);

// E_P[h_alpha(G) h_beta(b)] under the planted distribution.
double planted_hermite_coeff(const AlphaGraph& alpha, const std::vector<unsigned>& beta, std::size_t n, double c,
                             unsigned D);

inline constexpr std::uint64_t kEnumerationCap = 10'000'000;

// Number of edge multisets with 1..max_edges edges over m n^D edge slots.
double alpha_enumeration_size(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D);

// Streams every alpha with 1 <= |alpha| <= max_edges and all vertex degrees
// even. Throws std::length_error when the raw enumeration exceeds the cap.
void for_each_valid_alpha(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D,
                          const std::function<void(const AlphaGraph&)>& fn);
std::vector<AlphaGraph> enumerate_valid_alphas(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D);

// Every alpha with |alpha| <= max_edges, including the empty graph and odd
// degrees.
std::vector<AlphaGraph> enumerate_all_alphas(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D);

// beta in N^m with beta_s <= |alpha_s|, matching parity, |alpha|+|beta| <= d.
std::vector<std::vector<unsigned>> compatible_betas(const AlphaGraph& alpha, unsigned d);

struct LdlrReport {
  std::size_t n = 0, m = 0;
  unsigned d = 0, D = 0;
  double scaling = 0.0;
  double total = 1.0;
  std::map<unsigned, double> per_edge_count;  // |alpha| -> contribution
  std::uint64_t terms = 0;
  // sqrt(total), bound on the distinguishing advantage functional.
  double advantage_bound() const;
};

struct LdlrOptions {
  std::vector<std::size_t> vertex_perm, label_perm;  // optional relabeling
};

LdlrReport ldlr_norm_squared(std::size_t n, std::size_t m, unsigned d, unsigned D, double c,
                             const LdlrOptions& opts = {});

struct CoeffEstimate {
  double mean = 0.0, stderr_ = 0.0;
};

// Monte-Carlo estimates of E_P[h_alpha(G) h_beta(b)] for each (alpha, beta).
std::vector<CoeffEstimate> planted_coeff_mc(const std::vector<std::pair<AlphaGraph, std::vector<unsigned>>>& pairs,
                                            std::size_t n, std::size_t m, unsigned D, double c, std::size_t samples,
                                            std::uint64_t seed, unsigned jobs = 1);

struct LdlrMonteCarlo {
  double total = 1.0, stderr_ = 0.0;
  std::size_t samples = 0;
};

// 1 + sum of unbiased estimates of E_P[h_alpha h_beta]^2 / (alpha! beta!).
LdlrMonteCarlo ldlr_monte_carlo(std::size_t n, std::size_t m, unsigned d, unsigned D, double c, std::size_t samples,
                                std::uint64_t seed, unsigned jobs = 1);

// lambda_max of the symmetrization of sum_i sgn(b_i) G_i, divided by sqrt(m).
double spectral_distinguisher(const RealSystem& sys);

// P(alt > null) + P(alt = null)/2.
double auc(const std::vector<double>& null_stats, const std::vector<double>& alt_stats);

// Linear-interpolated empirical quantile, q in [0,1].
double quantile(std::vector<double> v, double q);

}  // namespace polyrefute
