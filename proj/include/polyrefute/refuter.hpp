#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyrefute/distributions.hpp"
#include "polyrefute/exact_linalg.hpp"
#include "polyrefute/multiset.hpp"
#include "polyrefute/polynomial.hpp"

namespace polyrefute {

// Rows: multisets of size d, then multisets of size d-D. Column
// k = i * |low| + pos(beta) stands for the coefficient of x^beta in a_i.
struct LinearizationMatrix {
  std::size_t n = 0, m = 0;
  unsigned D = 0, d = 0;
  MultisetIndexer high;  // |alpha| = d
  MultisetIndexer low;   // |alpha| = d - D
  SparseRationalMatrix mat;

  std::size_t rows() const { return mat.rows; }
  std::size_t cols() const { return mat.cols; }
  // Row of alpha, or rows() if alpha has the wrong degree.
  std::size_t row_of(const MultisetIndex& alpha) const;
  std::size_t col_of(std::size_t equation, std::size_t beta_pos) const { return equation * low.size() + beta_pos; }
};

LinearizationMatrix build_linearization(const RationalSystem& sys, unsigned d);

struct CoveringPlan {
  std::size_t n = 0;
  unsigned D = 0, d = 0;
  std::size_t buckets_requested = 0;
  std::vector<std::vector<std::size_t>> buckets;  // 0-based variables
  std::vector<MultisetIndex> gammas;
};

// Contiguous buckets of size ceil(n/t), t = d-1 for D = 2 and
// floor((d-1)/(D-1)) otherwise; every size-D multiset inside a bucket.
CoveringPlan build_covering(std::size_t n, unsigned D, unsigned d);

// Brute force over all size-d multisets.
bool covering_is_complete(const CoveringPlan& plan);

// t * C(ceil(n/t) + D - 1, D) + 1: one fresh equation per gamma slot at full
// bucket capacity plus one for the identity block of the rhs.
std::size_t required_m(std::size_t n, unsigned D, unsigned d);

// Right-hand sides of the counting bounds on |gammas| + 1.
double covering_count_bound(std::size_t n, unsigned D, unsigned d);

struct RefutationCertificate {
  unsigned d = 0;
  std::size_t num_vars = 0;
  std::vector<Polynomial<Rational>> a;
};

enum class RefuteStatus { Refuted, NotFound, AllRhsZero };
const char* to_string(RefuteStatus s);

enum class SolveMethod { Dixon, Bareiss };

struct RefutationResult {
  RefuteStatus status = RefuteStatus::NotFound;
  std::optional<RefutationCertificate> cert;
  std::size_t pivot_equation = 0;
  std::size_t matrix_rows = 0, matrix_cols = 0;
  RankCertificate rank;
};

// Membership queries in the degree-d generated ideal sharing one rank
// certificate of the linearization matrix.
class IdealMembership {
 public:
  IdealMembership(const RationalSystem& sys, unsigned d);

  const LinearizationMatrix& matrix() const { return lin_; }
  const RankCertificate& rank() const { return rank_; }

  // Homogeneous a'_i of degree d-D with sum a'_i (g_i - b_i) = f, where f has
  // only degree-d and degree-(d-D) parts. nullopt when f is outside the span.
  std::optional<std::vector<Polynomial<Rational>>> express(const Polynomial<Rational>& f,
                                                           SolveMethod method = SolveMethod::Dixon) const;

 private:
  LinearizationMatrix lin_;
  RankCertificate rank_;
};

RefutationResult find_refutation(const RationalSystem& sys, unsigned d, SolveMethod method = SolveMethod::Dixon);

struct VerifyReport {
  bool ok = false;
  std::string diagnostic;
  explicit operator bool() const { return ok; }
};

// Exact check of sum a_i (g_i - b_i) + 1 = 0 and deg a_i + D <= d.
VerifyReport verify_refutation(const RationalSystem& sys, const RefutationCertificate& cert);

// Row-rank decomposition: one square block A_gamma per gamma using a fresh
// equation, plus B = -b_i Id on the degree d-D rows.
struct DecompositionBlock {
  std::vector<std::size_t> rows, cols;  // indices into the linearization matrix
  std::size_t equation = 0;
};
struct RowRankDecomposition {
  std::vector<DecompositionBlock> blocks;
};

// Needs m >= |gammas| + 1 and a nonzero rhs at the equation used for B.
RowRankDecomposition build_row_rank_decomposition(const LinearizationMatrix& lin, const CoveringPlan& plan);

struct DecompositionCheck {
  bool covers_rows = false;
  bool disjoint_columns = false;
  bool blocks_nonsingular = false;
  bool ok() const { return covers_rows && disjoint_columns && blocks_nonsingular; }
};
DecompositionCheck check_decomposition(const LinearizationMatrix& lin, const RowRankDecomposition& dec);

bool check_full_row_rank(const LinearizationMatrix& lin);

nlohmann::json certificate_to_json(const RefutationCertificate& cert);
RefutationCertificate certificate_from_json(const nlohmann::json& j);

}  // namespace polyrefute
