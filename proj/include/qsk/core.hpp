#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qsk {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Dims = std::vector<int>;

inline constexpr double kDefaultTol = 1e-8;

// Base for every library error. Domain failures are reported in return
// values; exceptions signal misuse (bad shapes, malformed input).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};

long dims_product(const Dims& d);

struct TensorShape {
  Dims dims;

  TensorShape() : dims{1} {}
  explicit TensorShape(Dims d);
  long total() const { return dims_product(dims); }
  int size() const { return static_cast<int>(dims.size()); }
  bool operator==(const TensorShape& o) const { return dims == o.dims; }
};

TensorShape concat(const TensorShape& a, const TensorShape& b);

struct ComplexMatrix {
  Mat mat;
  TensorShape row_shape;
  TensorShape col_shape;

  ComplexMatrix() : mat(Mat::Zero(1, 1)) {}
  ComplexMatrix(Mat m, TensorShape rows, TensorShape cols);
  // Flat shapes: a single factor per side.
  explicit ComplexMatrix(Mat m);

  long rows() const { return mat.rows(); }
  long cols() const { return mat.cols(); }
};

// Square operator that is Hermitian after construction. The input is
// symmetrized to (M + M^*)/2 and the pre-symmetrization residual kept.
class HermitianOperator {
 public:
  HermitianOperator() : mat_(Mat::Zero(1, 1)), dims_{1} {}
  HermitianOperator(const Mat& m, Dims dims, double herm_tol = kDefaultTol);

  static HermitianOperator identity(const Dims& dims);
  static HermitianOperator zero(const Dims& dims);
  static HermitianOperator scalar(double v);

  const Mat& mat() const { return mat_; }
  const Dims& dims() const { return dims_; }
  TensorShape shape() const { return TensorShape(dims_); }
  long dim() const { return mat_.rows(); }
  double herm_residual() const { return herm_residual_; }
  ComplexMatrix as_matrix() const { return {mat_, shape(), shape()}; }

 private:
  Mat mat_;
  Dims dims_;
  double herm_residual_ = 0.0;
};

struct KrausPair {
  std::vector<Mat> a;
  std::vector<Mat> b;
};

struct SuperOperator {
  TensorShape in_shape;
  TensorShape out_shape;
  std::variant<KrausPair, ComplexMatrix> repr;

  // Completely positive map X -> sum_i K_i X K_i^*.
  static SuperOperator from_kraus(std::vector<Mat> kraus, Dims in, Dims out);
  static SuperOperator from_kraus_pair(std::vector<Mat> a, std::vector<Mat> b, Dims in, Dims out);
  static SuperOperator from_choi(ComplexMatrix j, Dims in, Dims out);

  bool is_kraus() const { return std::holds_alternative<KrausPair>(repr); }
};

// --- Kronecker products, partial traces, permutations -------------------

Mat kron(const Mat& a, const Mat& b);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b);

Mat partial_trace(const Mat& x, const Dims& dims, const std::vector<int>& traced);
HermitianOperator partial_trace(const HermitianOperator& x, const std::vector<int>& traced);

// Output factor j is input factor perm[j].
Mat permute_systems(const Mat& x, const Dims& dims, const std::vector<int>& perm);
HermitianOperator permute_systems(const HermitianOperator& x, const std::vector<int>& perm);
Dims permute_dims(const Dims& dims, const std::vector<int>& perm);
std::vector<int> inverse_permutation(const std::vector<int>& perm);

// x (on dims) tensored with I_{id_dim}, the identity factor placed at
// position pos of the result.
Mat embed_identity(const Mat& x, const Dims& dims, int id_dim, int pos);

// --- vec / Choi -----------------------------------------------------------

// col(A): row-major flatten, so col(A)[y*cols + x] = A(y, x).
ComplexMatrix vec_col(const ComplexMatrix& a);
Vec col(const Mat& a);
Mat uncol(const Vec& v, long rows, long cols);

ComplexMatrix choi(const SuperOperator& phi);
// Phi(X) = Tr_in[(I (x) X^T) J] for J on out (x) in.
Mat apply_choi(const Mat& j, long dim_out, long dim_in, const Mat& x);
HermitianOperator apply_via_choi(const HermitianOperator& j, const HermitianOperator& x);
// Applies a super-operator through its own representation.
Mat apply(const SuperOperator& phi, const Mat& x);
// Kraus pair form of any super-operator; Choi inputs are split by SVD.
KrausPair kraus_pair(const SuperOperator& phi);

// Operator on factors `dims` with the channel applied to the factors listed
// in `targets` (in that order). The channel's output factors are appended
// after the untouched factors, whose order is kept.
struct Placed {
  Mat mat;
  Dims dims;
};
Placed apply_on(const Mat& rho, const Dims& dims, const std::vector<int>& targets, const SuperOperator& phi);
Placed apply_on(const Mat& rho, const Dims& dims, const std::vector<int>& targets, const KrausPair& k,
                const Dims& out_dims);

// Choi matrix of the adjoint map: conj of J with out/in factors swapped.
Mat choi_adjoint(const Mat& j, long dim_out, long dim_in);

// --- spectral tools and norms ------------------------------------------------

struct Jordan {
  HermitianOperator pos;
  HermitianOperator neg;
};
Jordan jordan_decompose(const HermitianOperator& x);
Mat abs_hermitian(const Mat& x);

struct Norms {
  double trace_norm;
  double frobenius_norm;
  double operator_norm;
};
Norms norms(const ComplexMatrix& x);
Norms norms(const Mat& x);
double trace_norm_hermitian(const Mat& x);
double operator_norm_hermitian(const Mat& x);

struct PsdReport {
  bool ok;
  double min_eigenvalue;
};
PsdReport psd_check(const HermitianOperator& x, double tol = kDefaultTol);
PsdReport psd_check(const Mat& x, double tol = kDefaultTol);

double min_eigenvalue(const Mat& h);

// Re Tr(a^* b).
double inner(const Mat& a, const Mat& b);
Mat hermitian_part(const Mat& x);
double hermiticity_residual(const Mat& x);

}  // namespace qsk
