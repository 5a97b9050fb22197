#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qsk/core.hpp"
#include "qsk/random.hpp"

namespace qsk {

// --- standard-form core -------------------------------------------------------
//
//   minimize <C, X>  s.t.  <A_i, X> = b_i,  X = diag(X_1..X_k), X_j >= 0
//   maximize b^T y   s.t.  C - sum_i y_i A_i = Z >= 0
//
// Each X_j is a complex Hermitian block; constraint matrices are stored
// sparsely per block.

namespace sdp {

enum class Status { optimal, primal_infeasible_suspected, dual_infeasible_suspected, max_iter };
std::string to_string(Status s);

struct Entry {
  int row;
  int col;
  cplx v;
};

struct ConstraintPart {
  int block;
  std::vector<Entry> entries;
};

struct Constraint {
  std::vector<ConstraintPart> parts;
  double rhs = 0.0;
};

struct StandardForm {
  std::vector<int> block_dims;
  std::vector<Mat> c;
  std::vector<Constraint> cons;
};

struct CoreResult {
  Status status = Status::max_iter;
  std::vector<Mat> x;
  std::vector<Mat> z;
  Eigen::VectorXd y;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
};

struct Options {
  double tol = kDefaultTol;
  int max_iter = 500;
};

CoreResult solve_standard(const StandardForm& p, const Options& opt);

// Orthonormal basis of Herm(n) as sparse matrices: diagonal units, then
// (E_jk + E_kj)/sqrt2 and i(E_jk - E_kj)/sqrt2 for j < k.
std::vector<std::vector<Entry>> hermitian_basis_sparse(int n);
Mat dense(const std::vector<Entry>& e, int n);

// Assembles a standard form from block variables and operator-valued
// equality constraints sum_t L_t(X_{b_t}) = R. Each L_t is given by its
// adjoint, which is all the constraint matrices need.
class Builder {
 public:
  using Adjoint = std::function<Mat(const Mat&)>;
  struct Term {
    int block;
    Adjoint adjoint;
  };

  int add_block(int dim);
  void set_cost(int block, const Mat& c);
  // Returns the group id used to read back the multiplier operator.
  int add_equality(int out_dim, const Mat& rhs, const std::vector<Term>& terms);

  const StandardForm& form() const { return form_; }
  int block_dim(int b) const { return form_.block_dims[b]; }
  // sum_k y_k E_k over the basis of a constraint group.
  Mat multiplier(int group, const Eigen::VectorXd& y) const;

 private:
  struct Group {
    int first;
    int dim;
  };
  StandardForm form_;
  std::vector<Group> groups_;
};

}  // namespace sdp

// --- super-operator form -------------------------------------------------------

using BlockShapes = std::vector<Dims>;
using BlockOps = std::vector<Mat>;

long block_dim(const Dims& d);
Mat block_diag(const BlockOps& blocks);
BlockOps split_blocks(const Mat& m, const BlockShapes& shapes);

// Hermitian-preserving map between block-diagonal operator spaces, stored
// as one Choi matrix (on out_block (x) in_block) per connected block pair.
struct LinearOperatorMap {
  struct Part {
    int out_block;
    int in_block;
    Mat choi;
  };
  BlockShapes in_blocks;
  BlockShapes out_blocks;
  std::vector<Part> parts;

  BlockOps apply(const BlockOps& x) const;
  // Builds the Choi parts by evaluating fn on matrix units of each block.
  static LinearOperatorMap from_function(const BlockShapes& in, const BlockShapes& out,
                                         const std::function<BlockOps(const BlockOps&)>& fn);
  // Largest ||Phi(H) - Phi(H)^*||_F over `samples` random Hermitian H.
  double hermiticity_residual(Rng& rng, int samples = 5) const;
  // Single Choi matrix on (sum of out) (x) (sum of in).
  Mat full_choi() const;
  static LinearOperatorMap from_full_choi(const Mat& j, const BlockShapes& in, const BlockShapes& out);
};

LinearOperatorMap adjoint_map(const LinearOperatorMap& phi);

// max <A,X> s.t. Phi(X) <= B, X >= 0   /   min <B,Y> s.t. Phi*(Y) >= A, Y >= 0
struct SdpProblem {
  LinearOperatorMap phi;
  HermitianOperator a;  // block-diagonal on the input side
  HermitianOperator b;  // block-diagonal on the output side
};

struct SdpResiduals {
  double primal_min_eig = 0.0;        // lambda_min(X)
  double primal_slack_min_eig = 0.0;  // lambda_min(B - Phi(X))
  double dual_min_eig = 0.0;          // lambda_min(Y)
  double dual_slack_min_eig = 0.0;    // lambda_min(Phi*(Y) - A)
};

struct SdpSolution {
  sdp::Status status = sdp::Status::max_iter;
  HermitianOperator primal_x;
  HermitianOperator dual_y;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  SdpResiduals residuals;
  int iterations = 0;
};

SdpSolution solve(const SdpProblem& p, double tol = kDefaultTol, int max_iter = 500);

struct VerifyReport {
  bool ok = false;
  bool primal_psd = false;
  bool primal_feasible = false;
  bool dual_psd = false;
  bool dual_feasible = false;
  bool gap_ok = false;
  SdpResiduals residuals;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
};

VerifyReport verify_solution(const SdpProblem& p, const SdpSolution& s, double tol = kDefaultTol);

}  // namespace qsk
