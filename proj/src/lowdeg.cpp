#include "polyrefute/lowdeg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "polyrefute/hermite.hpp"
#include "polyrefute/parallel.hpp"

namespace polyrefute {

void AlphaGraph::add_edge(std::size_t s, const std::vector<std::size_t>& tuple, unsigned multiplicity) {
  if (s >= m_) throw std::out_of_range("AlphaGraph: label out of range");
  if (tuple.size() != D_) throw std::invalid_argument("AlphaGraph: edge arity must equal D");
  if (multiplicity == 0) return;
  Key key{s};
  for (std::size_t v : tuple) {
    if (v >= n_) throw std::out_of_range("AlphaGraph: vertex out of range");
    key.push_back(v);
    degree_[v] += multiplicity;
  }
  entries_[key] += multiplicity;
  label_size_[s] += multiplicity;
  size_ += multiplicity;
}

bool AlphaGraph::degrees_even() const {
  return std::all_of(degree_.begin(), degree_.end(), [](unsigned d) { return d % 2 == 0; });
}

double AlphaGraph::factorial() const {
  double f = 1.0;
  for (const auto& [k, mult] : entries_) f *= polyrefute::factorial(mult);
  return f;
}

double AlphaGraph::hermite_product(const std::vector<CoefficientTensor<double>>& G) const {
  double p = 1.0;
  std::vector<std::size_t> tuple(D_);
  for (const auto& [key, mult] : entries_) {
    std::copy(key.begin() + 1, key.end(), tuple.begin());
    p *= hermite_eval(mult, G.at(key[0]).at(tuple));
  }
  return p;
}

AlphaGraph AlphaGraph::relabeled(const std::vector<std::size_t>& vperm, const std::vector<std::size_t>& lperm) const {
  AlphaGraph out(n_, m_, D_);
  std::vector<std::size_t> tuple(D_);
  for (const auto& [key, mult] : entries_) {
    for (unsigned k = 0; k < D_; ++k) tuple[k] = vperm.empty() ? key[k + 1] : vperm.at(key[k + 1]);
    out.add_edge(lperm.empty() ? key[0] : lperm.at(key[0]), tuple, mult);
  }
  return out;
}

double scaled_coeff(unsigned k, unsigned l, double c) {
  if (l > k || (k + l) % 2) return 0.0;
  const unsigned i = (k - l) / 2;
  return std::pow(c, l) * factorial(k) / factorial(i) * std::pow(-(1.0 - c * c) / 2.0, i);
}

namespace {

using Pairs = std::vector<std::pair<unsigned, unsigned>>;

// Coefficient from the sorted (|alpha_s|, beta_s) pairs; the fixed product
// order keeps the value identical across relabelings.
double coeff_from_pairs(unsigned edges, const Pairs& pairs, std::size_t n, double c, unsigned D) {
  double v = std::pow(static_cast<double>(n), -0.5 * D * edges);
  for (const auto& [k, l] : pairs) v *= scaled_coeff(k, l, c);
  return v;
}

// Sorted nonempty (k, l) pairs, or nullopt-like empty flag when beta is
// incompatible with alpha.
bool label_pairs(const AlphaGraph& alpha, const std::vector<unsigned>& beta, Pairs& out) {
  out.clear();
  const auto& ks = alpha.label_sizes();
  for (std::size_t s = 0; s < ks.size(); ++s) {
    const unsigned k = ks[s], l = beta[s];
    if (l > k || (k + l) % 2) return false;
    if (k > 0) out.emplace_back(k, l);
  }
  std::sort(out.begin(), out.end());
  return true;
}

std::size_t ipow(std::size_t n, unsigned D) {
  std::size_t r = 1;
  for (unsigned k = 0; k < D; ++k) r *= n;
  return r;
}

AlphaGraph graph_from_slots(std::size_t n, std::size_t m, unsigned D, const std::vector<std::size_t>& slots) {
  AlphaGraph g(n, m, D);
  const std::size_t per_label = ipow(n, D);
  std::vector<std::size_t> tuple(D);
  for (std::size_t slot : slots) {
    std::size_t off = slot % per_label;
    for (unsigned k = D; k-- > 0;) {
      tuple[k] = off % n;
      off /= n;
    }
    g.add_edge(slot / per_label, tuple);
  }
  return g;
}

void check_cap(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D) {
  const double est = alpha_enumeration_size(n, m, max_edges, D);
  if (est > static_cast<double>(kEnumerationCap)) {
    std::ostringstream os;
    os << "alpha enumeration refused: about " << est << " graphs exceeds the cap of " << kEnumerationCap;
    throw std::length_error(os.str());
  }
}

// Nondecreasing slot sequences of length k.
void slot_sequences(std::size_t slots, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> cur(k, 0);
  if (k == 0) {
    fn(cur);
    return;
  }
  while (true) {
    fn(cur);
    std::size_t pos = k;
    while (pos > 0 && cur[pos - 1] == slots - 1) --pos;
    if (pos == 0) return;
    const std::size_t v = cur[pos - 1] + 1;
    for (std::size_t j = pos - 1; j < k; ++j) cur[j] = v;
  }
}

}  // namespace

double planted_hermite_coeff(const AlphaGraph& alpha, const std::vector<unsigned>& beta, std::size_t n, double c,
                             unsigned D) {
  if (beta.size() != alpha.m()) throw std::invalid_argument("planted_hermite_coeff: beta must have m entries");
  if (alpha.n() != n || alpha.D() != D) throw std::invalid_argument("planted_hermite_coeff: alpha shape mismatch");
  if (!alpha.degrees_even()) return 0.0;
  Pairs pairs;
  if (!label_pairs(alpha, beta, pairs)) return 0.0;
  return coeff_from_pairs(alpha.size(), pairs, n, c, D);
}

double alpha_enumeration_size(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D) {
  const double E = static_cast<double>(m) * std::pow(static_cast<double>(n), D);
  double total = 0.0, term = 1.0;
  for (std::size_t k = 1; k <= max_edges; ++k) {
    term *= (E + static_cast<double>(k) - 1.0) / static_cast<double>(k);
    total += term;
  }
  return total;
}

void for_each_valid_alpha(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D,
                          const std::function<void(const AlphaGraph&)>& fn) {
  check_cap(n, m, max_edges, D);
  const std::size_t slots = m * ipow(n, D);
  for (std::size_t k = 1; k <= max_edges; ++k)
    slot_sequences(slots, k, [&](const std::vector<std::size_t>& seq) {
      AlphaGraph g = graph_from_slots(n, m, D, seq);
      if (g.degrees_even()) fn(g);
    });
}

std::vector<AlphaGraph> enumerate_valid_alphas(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D) {
  std::vector<AlphaGraph> out;
  for_each_valid_alpha(n, m, max_edges, D, [&](const AlphaGraph& g) { out.push_back(g); });
  return out;
}

std::vector<AlphaGraph> enumerate_all_alphas(std::size_t n, std::size_t m, std::size_t max_edges, unsigned D) {
  check_cap(n, m, max_edges, D);
  const std::size_t slots = m * ipow(n, D);
  std::vector<AlphaGraph> out;
  for (std::size_t k = 0; k <= max_edges; ++k)
    slot_sequences(slots, k, [&](const std::vector<std::size_t>& seq) { out.push_back(graph_from_slots(n, m, D, seq)); });
  return out;
}

std::vector<std::vector<unsigned>> compatible_betas(const AlphaGraph& alpha, unsigned d) {
  std::vector<std::vector<unsigned>> out;
  if (alpha.size() > d) return out;
  const auto& ks = alpha.label_sizes();
  std::vector<unsigned> cur(ks.size(), 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t s, unsigned budget) {
    if (s == ks.size()) {
      out.push_back(cur);
      return;
    }
    for (unsigned l = ks[s] % 2; l <= ks[s] && l <= budget; l += 2) {
      cur[s] = l;
      rec(s + 1, budget - l);
    }
    cur[s] = 0;
  };
  rec(0, d - alpha.size());
  return out;
}

double LdlrReport::advantage_bound() const { return std::sqrt(total); }

LdlrReport ldlr_norm_squared(std::size_t n, std::size_t m, unsigned d, unsigned D, double c, const LdlrOptions& opts) {
  auto check_perm = [](const std::vector<std::size_t>& p, std::size_t size) {
    if (p.empty()) return;
    std::vector<std::size_t> s(p);
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < size; ++i)
      if (s.size() != size || s[i] != i) throw std::invalid_argument("ldlr_norm_squared: not a permutation");
  };
  check_perm(opts.vertex_perm, n);
  check_perm(opts.label_perm, m);

  LdlrReport rep;
  rep.n = n;
  rep.m = m;
  rep.d = d;
  rep.D = D;
  rep.scaling = c;
  if (d == 0) return rep;

  // Contributions depend only on (|alpha|, alpha!, sorted label pairs), so
  // terms are tallied per signature and summed in signature order.
  std::map<std::vector<double>, std::uint64_t> tally;
  Pairs pairs;
  const bool relabel = !opts.vertex_perm.empty() || !opts.label_perm.empty();
  for_each_valid_alpha(n, m, d, D, [&](const AlphaGraph& raw) {
    const AlphaGraph alpha = relabel ? raw.relabeled(opts.vertex_perm, opts.label_perm) : raw;
    for (const auto& beta : compatible_betas(alpha, d)) {
      if (!label_pairs(alpha, beta, pairs)) continue;
      std::vector<double> key{static_cast<double>(alpha.size()), alpha.factorial()};
      for (const auto& [k, l] : pairs) {
        key.push_back(k);
        key.push_back(l);
      }
      ++tally[key];
      ++rep.terms;
    }
  });
  for (const auto& [key, count] : tally) {
    const unsigned edges = static_cast<unsigned>(key[0]);
    Pairs p;
    double beta_fact = 1.0;
    for (std::size_t i = 2; i < key.size(); i += 2) {
      p.emplace_back(static_cast<unsigned>(key[i]), static_cast<unsigned>(key[i + 1]));
      beta_fact *= factorial(static_cast<unsigned>(key[i + 1]));
    }
    const double coeff = coeff_from_pairs(edges, p, n, c, D);
    const double contrib = static_cast<double>(count) * coeff * coeff / (key[1] * beta_fact);
    rep.total += contrib;
    rep.per_edge_count[edges] += contrib;
  }
  return rep;
}

namespace {

struct FlatPair {
  std::vector<std::pair<std::size_t, unsigned>> edges;  // (flat slot, multiplicity)
  std::vector<std::pair<std::size_t, unsigned>> betas;  // (label, degree)
};

FlatPair flatten(const AlphaGraph& a, const std::vector<unsigned>& beta, std::size_t n, unsigned D) {
  FlatPair fp;
  const std::size_t per_label = ipow(n, D);
  for (const auto& [key, mult] : a.entries()) {
    std::size_t off = 0;
    for (unsigned k = 0; k < D; ++k) off = off * n + key[k + 1];
    fp.edges.emplace_back(key[0] * per_label + off, mult);
  }
  for (std::size_t s = 0; s < beta.size(); ++s)
    if (beta[s]) fp.betas.emplace_back(s, beta[s]);
  return fp;
}

struct BlockSums {
  std::vector<double> sum, sumsq;
  std::size_t count = 0;
};

std::vector<BlockSums> mc_blocks(const std::vector<FlatPair>& flat, std::size_t n, std::size_t m, unsigned D, double c,
                                 std::size_t samples, std::uint64_t seed, unsigned jobs, std::size_t blocks) {
  std::vector<BlockSums> out(blocks);
  parallel_for(blocks, jobs, [&](std::size_t b) {
    BlockSums& bs = out[b];
    bs.sum.assign(flat.size(), 0.0);
    bs.sumsq.assign(flat.size(), 0.0);
    bs.count = samples / blocks + (b < samples % blocks ? 1 : 0);
    Rng rng = make_rng(seed, b);
    std::vector<double> entries;
    for (std::size_t t = 0; t < bs.count; ++t) {
      auto [sys, w] = sample_planted_system(n, m, D, c, rng);
      entries.clear();
      for (const auto& G : sys.tensors) entries.insert(entries.end(), G.entries.begin(), G.entries.end());
      for (std::size_t p = 0; p < flat.size(); ++p) {
        double v = 1.0;
        for (const auto& [slot, mult] : flat[p].edges) v *= hermite_eval(mult, entries[slot]);
        for (const auto& [s, l] : flat[p].betas) v *= hermite_eval(l, sys.rhs[s]);
        bs.sum[p] += v;
        bs.sumsq[p] += v * v;
      }
    }
  });
  return out;
}

}  // namespace

std::vector<CoeffEstimate> planted_coeff_mc(const std::vector<std::pair<AlphaGraph, std::vector<unsigned>>>& pairs,
                                            std::size_t n, std::size_t m, unsigned D, double c, std::size_t samples,
                                            std::uint64_t seed, unsigned jobs) {
  if (samples < 2) throw std::invalid_argument("planted_coeff_mc: need at least two samples");
  std::vector<FlatPair> flat;
  for (const auto& [a, beta] : pairs) flat.push_back(flatten(a, beta, n, D));
  const std::size_t blocks = std::min<std::size_t>(64, samples);
  auto bl = mc_blocks(flat, n, m, D, c, samples, seed, jobs, blocks);
  std::vector<CoeffEstimate> out(flat.size());
  const double N = static_cast<double>(samples);
  for (std::size_t p = 0; p < flat.size(); ++p) {
    double s = 0.0, ss = 0.0;
    for (const auto& b : bl) {
      s += b.sum[p];
      ss += b.sumsq[p];
    }
    const double mean = s / N;
    const double var = std::max(0.0, (ss - N * mean * mean) / (N - 1.0));
    out[p] = {mean, std::sqrt(var / N)};
  }
  return out;
}

LdlrMonteCarlo ldlr_monte_carlo(std::size_t n, std::size_t m, unsigned d, unsigned D, double c, std::size_t samples,
                                std::uint64_t seed, unsigned jobs) {
  LdlrMonteCarlo res;
  res.samples = samples;
  if (d == 0) return res;
  std::vector<FlatPair> flat;
  std::vector<double> weight;  // 1 / (alpha! beta!)
  for_each_valid_alpha(n, m, d, D, [&](const AlphaGraph& a) {
    for (const auto& beta : compatible_betas(a, d)) {
      double bf = 1.0;
      for (unsigned l : beta) bf *= factorial(l);
      flat.push_back(flatten(a, beta, n, D));
      weight.push_back(1.0 / (a.factorial() * bf));
    }
  });
  const std::size_t blocks = std::min<std::size_t>(50, samples / 2);
  if (blocks < 2) throw std::invalid_argument("ldlr_monte_carlo: need at least four samples");
  auto bl = mc_blocks(flat, n, m, D, c, samples, seed, jobs, blocks);

  auto unbiased_sq = [](double s, double ss, double N) {
    const double mean = s / N;
    const double var = (ss - N * mean * mean) / (N - 1.0);
    return mean * mean - var / N;
  };
  std::vector<double> block_totals;
  for (const auto& b : bl) {
    double t = 1.0;
    for (std::size_t p = 0; p < flat.size(); ++p)
      t += weight[p] * unbiased_sq(b.sum[p], b.sumsq[p], static_cast<double>(b.count));
    block_totals.push_back(t);
  }
  double total = 1.0;
  for (std::size_t p = 0; p < flat.size(); ++p) {
    double s = 0.0, ss = 0.0;
    for (const auto& b : bl) {
      s += b.sum[p];
      ss += b.sumsq[p];
    }
    total += weight[p] * unbiased_sq(s, ss, static_cast<double>(samples));
  }
  const double B = static_cast<double>(blocks);
  const double mu = std::accumulate(block_totals.begin(), block_totals.end(), 0.0) / B;
  double var = 0.0;
  for (double t : block_totals) var += (t - mu) * (t - mu);
  var /= (B - 1.0);
  res.total = total;
  res.stderr_ = std::sqrt(var / B);
  return res;
}

double spectral_distinguisher(const RealSystem& sys) {
  sys.validate();
  if (sys.D != 2) throw std::invalid_argument("spectral_distinguisher: D must be 2");
  const auto n = static_cast<Eigen::Index>(sys.n);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < sys.m; ++s) {
    const double b = sys.rhs[s];
    const double sg = b > 0 ? 1.0 : (b < 0 ? -1.0 : 0.0);
    if (sg != 0.0) Q += sg * symmetrized(sys.tensors[s]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(n - 1) / std::sqrt(static_cast<double>(sys.m));
}

double auc(const std::vector<double>& null_stats, const std::vector<double>& alt_stats) {
  if (null_stats.empty() || alt_stats.empty()) throw std::invalid_argument("auc: empty sample");
  double wins = 0.0;
  for (double a : alt_stats)
    for (double z : null_stats) wins += a > z ? 1.0 : (a == z ? 0.5 : 0.0);
  return wins / (static_cast<double>(null_stats.size()) * static_cast<double>(alt_stats.size()));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace polyrefute
