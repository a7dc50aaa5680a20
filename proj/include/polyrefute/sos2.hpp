#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyrefute/distributions.hpp"

namespace polyrefute {

// Degree-2 relaxation: X PSD with tr(G_i X) = b_i, G_i symmetric.
struct Sdp2Instance {
  std::size_t n = 0;
  std::vector<Eigen::MatrixXd> G;
  Eigen::VectorXd b;

  std::size_t m() const { return G.size(); }
};

Sdp2Instance make_sdp2_instance(const RealSystem& sys);

enum class Sdp2Verdict { Feasible, Infeasible, Inconclusive };
const char* to_string(Sdp2Verdict v);

struct Sdp2Tolerances {
  double psd_rel = 1e-7;  // min eig X >= -psd_rel * |X|_F
  double aff_rel = 1e-7;  // |tr(G_i X) - b_i| <= aff_rel * |b|_2
  double eps = 1e-6;      // min eig sum c_i G_i >= eps for unit c
  double shift_rel = 1e-3;
};

struct Sdp2Outcome {
  Sdp2Verdict verdict = Sdp2Verdict::Inconclusive;
  Eigen::MatrixXd X;  // Feasible
  Eigen::VectorXd c;  // Infeasible, unit norm
  std::size_t iterations = 0;
  double affine_residual = 0.0;
  double min_eig = 0.0;
  bool gram_regularized = false;
};

// Alternating projections. The primal walks between {X >= shift I} and the
// affine set tr(G_i X) = b_i; the dual walks between {M >= shift I} and
// {sum c_i G_i : c.b = -1}. Whichever certificate appears first is returned.
Sdp2Outcome decide_feasibility(const Sdp2Instance& inst, std::size_t budget = 5000, const Sdp2Tolerances& tol = {});

bool verify_outcome(const Sdp2Instance& inst, const Sdp2Outcome& out, const Sdp2Tolerances& tol = {});

struct SweepRow {
  std::size_t m = 0;
  std::size_t trials = 0;
  double feasible = 0.0, infeasible = 0.0, inconclusive = 0.0;
  double mean_iters = 0.0;
};

struct SweepResult {
  std::size_t n = 0;
  std::vector<SweepRow> rows;
  // First grid point whose infeasible fraction exceeds its feasible fraction.
  std::optional<std::size_t> crossover;
};

// Gaussian instance for trial t at grid point m.
Sdp2Instance sweep_instance(std::size_t n, std::size_t m, std::size_t trial, std::uint64_t seed);

SweepResult phase_sweep(std::size_t n, const std::vector<std::size_t>& m_grid, std::size_t trials, std::uint64_t seed,
                        unsigned jobs = 1, std::size_t budget = 5000);

std::string sweep_csv(const SweepResult& r);

}  // namespace polyrefute
