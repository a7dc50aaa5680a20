#include "polyrefute/sos2.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "polyrefute/parallel.hpp"

namespace polyrefute {

Sdp2Instance make_sdp2_instance(const RealSystem& sys) {
  sys.validate();
  if (sys.D != 2) throw std::invalid_argument("make_sdp2_instance: D must be 2");
  Sdp2Instance inst;
  inst.n = sys.n;
  inst.b = Eigen::VectorXd(static_cast<Eigen::Index>(sys.m));
  for (std::size_t s = 0; s < sys.m; ++s) {
    inst.G.push_back(symmetrized(sys.tensors[s]));
    inst.b(static_cast<Eigen::Index>(s)) = sys.rhs[s];
  }
  return inst;
}

const char* to_string(Sdp2Verdict v) {
  switch (v) {
    case Sdp2Verdict::Feasible:
      return "feasible";
    case Sdp2Verdict::Infeasible:
      return "infeasible";
    case Sdp2Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double min_eig(const MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

MatrixXd psd_clip(const MatrixXd& S, double floor) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  VectorXd w = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

// The m x n^2 operator X -> (tr(G_i X))_i with its Gram matrix.
struct AffineOperator {
  Index n = 0;
  MatrixXd A;
  Eigen::LDLT<MatrixXd> K;
  bool regularized = false;

  explicit AffineOperator(const Sdp2Instance& inst) : n(static_cast<Index>(inst.n)) {
    const Index m = static_cast<Index>(inst.m());
    A.resize(m, n * n);
    for (Index s = 0; s < m; ++s) A.row(s) = Eigen::Map<const VectorXd>(inst.G[s].data(), n * n).transpose();
    MatrixXd gram = A * A.transpose();
    K.compute(gram);
    if (K.info() != Eigen::Success || K.rcond() < 1e-12) {
      regularized = true;
      const double delta = 1e-10 * std::max(1.0, gram.trace() / std::max<Index>(m, 1));
      gram.diagonal().array() += delta;
      K.compute(gram);
    }
  }

  VectorXd apply(const MatrixXd& X) const { return A * Eigen::Map<const VectorXd>(X.data(), n * n); }

  MatrixXd adjoint(const VectorXd& y) const {
    VectorXd flat = A.transpose() * y;
    return Eigen::Map<MatrixXd>(flat.data(), n, n);
  }
};

}  // namespace

Sdp2Outcome decide_feasibility(const Sdp2Instance& inst, std::size_t budget, const Sdp2Tolerances& tol) {
  Sdp2Outcome out;
  const Index n = static_cast<Index>(inst.n);
  if (inst.m() == 0) {
    out.verdict = Sdp2Verdict::Feasible;
    out.X = MatrixXd::Zero(n, n);
    return out;
  }
  AffineOperator op(inst);
  out.gram_regularized = op.regularized;
  const VectorXd& b = inst.b;
  const double nd = static_cast<double>(n);

  // Primal starts at the least-norm affine point.
  MatrixXd X = op.adjoint(op.K.solve(b));
  auto primal_ok = [&](const MatrixXd& Y) { return min_eig(Y) >= -tol.psd_rel * Y.norm(); };

  // Dual affine set {sum c_i G_i : c.b = -1}; projection of M onto it.
  const VectorXd Kib = op.K.solve(b);
  const double bKb = b.dot(Kib);
  const bool dual_possible = bKb > 0.0;
  auto dual_aff = [&](const MatrixXd& M, VectorXd& c) {
    VectorXd Kr = op.K.solve(op.apply(M));
    const double mu = (b.dot(Kr) + 1.0) / bKb;
    c = Kr - mu * Kib;
    return op.adjoint(c);
  };
  VectorXd c;
  MatrixXd M;
  if (dual_possible) M = dual_aff(MatrixXd::Identity(n, n), c);

  auto finish_primal = [&](std::size_t it) {
    out.verdict = Sdp2Verdict::Feasible;
    out.X = X;
    out.iterations = it;
    out.affine_residual = (op.apply(X) - b).norm();
    out.min_eig = min_eig(X);
  };

  if (primal_ok(X)) {
    finish_primal(0);
    return out;
  }
  for (std::size_t it = 1; it <= budget; ++it) {
    MatrixXd P = psd_clip(X, tol.shift_rel * X.norm() / nd);
    X = P - op.adjoint(op.K.solve(op.apply(P) - b));
    if (primal_ok(X)) {
      finish_primal(it);
      return out;
    }
    if (dual_possible) {
      MatrixXd Pd = psd_clip(M, tol.shift_rel * M.norm() / nd);
      M = dual_aff(Pd, c);
      const double cn = c.norm();
      if (cn > 0.0) {
        const double lam = min_eig(M / cn);
        if (lam >= tol.eps && c.dot(b) < 0.0) {
          out.verdict = Sdp2Verdict::Infeasible;
          out.c = c / cn;
          out.iterations = it;
          out.min_eig = lam;
          return out;
        }
      }
    }
  }
  out.iterations = budget;
  return out;
}

bool verify_outcome(const Sdp2Instance& inst, const Sdp2Outcome& out, const Sdp2Tolerances& tol) {
  const Index n = static_cast<Index>(inst.n);
  switch (out.verdict) {
    case Sdp2Verdict::Feasible: {
      if (out.X.rows() != n || out.X.cols() != n) return false;
      const MatrixXd S = 0.5 * (out.X + out.X.transpose());
      if (min_eig(S) < -tol.psd_rel * S.norm()) return false;
      const double aff_tol = tol.aff_rel * inst.b.norm();
      for (std::size_t i = 0; i < inst.m(); ++i) {
        const double r = (inst.G[i].cwiseProduct(S)).sum() - inst.b(static_cast<Index>(i));
        if (std::abs(r) > aff_tol) return false;
      }
      return true;
    }
    case Sdp2Verdict::Infeasible: {
      if (out.c.size() != static_cast<Index>(inst.m()) || inst.m() == 0) return false;
      MatrixXd S = MatrixXd::Zero(n, n);
      for (std::size_t i = 0; i < inst.m(); ++i) S += out.c(static_cast<Index>(i)) * inst.G[i];
      return min_eig(S) >= tol.eps && out.c.dot(inst.b) < 0.0;
    }
    case Sdp2Verdict::Inconclusive:
      return false;
  }
  return false;
}

Sdp2Instance sweep_instance(std::size_t n, std::size_t m, std::size_t trial, std::uint64_t seed) {
  Rng rng = make_rng(seed, (static_cast<std::uint64_t>(m) << 32) ^ trial);
  return make_sdp2_instance(sample_null_gaussian_system(n, m, 2, rng));
}

SweepResult phase_sweep(std::size_t n, const std::vector<std::size_t>& m_grid, std::size_t trials, std::uint64_t seed,
                        unsigned jobs, std::size_t budget) {
  if (m_grid.empty()) throw std::invalid_argument("phase_sweep: empty m grid");
  if (trials == 0) throw std::invalid_argument("phase_sweep: trials must be positive");
  struct Cell {
    Sdp2Verdict v = Sdp2Verdict::Inconclusive;
    std::size_t iters = 0;
  };
  std::vector<Cell> cells(m_grid.size() * trials);
  parallel_for(cells.size(), jobs, [&](std::size_t k) {
    const std::size_t g = k / trials, t = k % trials;
    auto inst = sweep_instance(n, m_grid[g], t, seed);
    auto out = decide_feasibility(inst, budget);
    // Only verified certificates count.
    cells[k] = {verify_outcome(inst, out) ? out.verdict : Sdp2Verdict::Inconclusive, out.iterations};
  });
  SweepResult res;
  res.n = n;
  for (std::size_t g = 0; g < m_grid.size(); ++g) {
    SweepRow row;
    row.m = m_grid[g];
    row.trials = trials;
    double iters = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const Cell& c = cells[g * trials + t];
      (c.v == Sdp2Verdict::Feasible ? row.feasible : c.v == Sdp2Verdict::Infeasible ? row.infeasible : row.inconclusive) +=
          1.0;
      iters += static_cast<double>(c.iters);
    }
    row.feasible /= static_cast<double>(trials);
    row.infeasible /= static_cast<double>(trials);
    row.inconclusive /= static_cast<double>(trials);
    row.mean_iters = iters / static_cast<double>(trials);
    if (!res.crossover && row.infeasible > row.feasible) res.crossover = row.m;
    res.rows.push_back(row);
  }
  return res;
}

std::string sweep_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "m,feasible,infeasible,inconclusive,mean_iters\n";
  os << std::setprecision(6);
  for (const auto& row : r.rows)
    os << row.m << ',' << row.feasible << ',' << row.infeasible << ',' << row.inconclusive << ',' << row.mean_iters
       << '\n';
  return os.str();
}

}  // namespace polyrefute
