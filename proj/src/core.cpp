#include "qsk/core.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qsk/kernels.hpp"

namespace qsk {

long dims_product(const Dims& d) {
  long p = 1;
  for (int x : d) p *= x;
  return p;
}

TensorShape::TensorShape(Dims d) : dims(std::move(d)) {
  if (dims.empty()) dims = {1};
  for (int x : dims)
    if (x < 1) throw ShapeError("tensor factor dimension must be >= 1");
}

TensorShape concat(const TensorShape& a, const TensorShape& b) {
  Dims d = a.dims;
  d.insert(d.end(), b.dims.begin(), b.dims.end());
  return TensorShape(d);
}

ComplexMatrix::ComplexMatrix(Mat m, TensorShape rows, TensorShape cols)
    : mat(std::move(m)), row_shape(std::move(rows)), col_shape(std::move(cols)) {
  if (mat.rows() != row_shape.total() || mat.cols() != col_shape.total())
    throw ShapeError("matrix size does not match its tensor shape");
}

ComplexMatrix::ComplexMatrix(Mat m)
    : mat(std::move(m)),
      row_shape(Dims{static_cast<int>(mat.rows())}),
      col_shape(Dims{static_cast<int>(mat.cols())}) {}

HermitianOperator::HermitianOperator(const Mat& m, Dims dims, double herm_tol) : dims_(std::move(dims)) {
  if (dims_.empty()) dims_ = {1};
  TensorShape check(dims_);
  if (m.rows() != m.cols()) throw ShapeError("Hermitian operator must be square");
  if (m.rows() != check.total()) throw ShapeError("Hermitian operator size does not match dims");
  herm_residual_ = (m - m.adjoint()).norm();
  if (herm_residual_ > herm_tol * std::max(1.0, m.norm())) throw Error("operator is not Hermitian within tolerance");
  mat_ = (m + m.adjoint()) * 0.5;
}

HermitianOperator HermitianOperator::identity(const Dims& dims) {
  const long n = dims_product(dims);
  return HermitianOperator(Mat::Identity(n, n), dims);
}

HermitianOperator HermitianOperator::zero(const Dims& dims) {
  const long n = dims_product(dims);
  return HermitianOperator(Mat::Zero(n, n), dims);
}

HermitianOperator HermitianOperator::scalar(double v) { return HermitianOperator(Mat::Constant(1, 1, v), {1}); }

SuperOperator SuperOperator::from_kraus(std::vector<Mat> kraus, Dims in, Dims out) {
  auto copy = kraus;
  return from_kraus_pair(std::move(kraus), std::move(copy), std::move(in), std::move(out));
}

SuperOperator SuperOperator::from_kraus_pair(std::vector<Mat> a, std::vector<Mat> b, Dims in, Dims out) {
  SuperOperator s;
  s.in_shape = TensorShape(std::move(in));
  s.out_shape = TensorShape(std::move(out));
  if (a.size() != b.size()) throw ShapeError("Kraus pair lists differ in length");
  for (size_t i = 0; i < a.size(); ++i) {
    for (const Mat* k : {&a[i], &b[i]})
      if (k->rows() != s.out_shape.total() || k->cols() != s.in_shape.total())
        throw ShapeError("Kraus operator shape does not match in/out dims");
  }
  s.repr = KrausPair{std::move(a), std::move(b)};
  return s;
}

SuperOperator SuperOperator::from_choi(ComplexMatrix j, Dims in, Dims out) {
  SuperOperator s;
  s.in_shape = TensorShape(std::move(in));
  s.out_shape = TensorShape(std::move(out));
  const TensorShape want = concat(s.out_shape, s.in_shape);
  if (j.row_shape.total() != want.total() || j.col_shape.total() != want.total())
    throw ShapeError("Choi matrix size does not match out (x) in");
  j.row_shape = want;
  j.col_shape = want;
  s.repr = std::move(j);
  return s;
}

Mat kron(const Mat& a, const Mat& b) { return par::kron(a, b); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return {par::kron(a.mat, b.mat), concat(a.row_shape, b.row_shape), concat(a.col_shape, b.col_shape)};
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
  Dims d = a.dims();
  d.insert(d.end(), b.dims().begin(), b.dims().end());
  return HermitianOperator(par::kron(a.mat(), b.mat()), d);
}

Mat partial_trace(const Mat& x, const Dims& dims, const std::vector<int>& traced) {
  return par::partial_trace(x, dims, traced);
}

HermitianOperator partial_trace(const HermitianOperator& x, const std::vector<int>& traced) {
  Mat m = par::partial_trace(x.mat(), x.dims(), traced);
  Dims kept;
  for (int f = 0; f < static_cast<int>(x.dims().size()); ++f)
    if (std::find(traced.begin(), traced.end(), f) == traced.end()) kept.push_back(x.dims()[f]);
  if (kept.empty()) kept = {1};
  return HermitianOperator(m, kept, 1.0);
}

Dims permute_dims(const Dims& dims, const std::vector<int>& perm) {
  Dims out(perm.size());
  for (size_t j = 0; j < perm.size(); ++j) {
    if (perm[j] < 0 || static_cast<size_t>(perm[j]) >= dims.size()) throw ShapeError("malformed permutation");
    out[j] = dims[perm[j]];
  }
  return out;
}

std::vector<int> inverse_permutation(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (size_t j = 0; j < perm.size(); ++j) inv[perm[j]] = static_cast<int>(j);
  return inv;
}

Mat permute_systems(const Mat& x, const Dims& dims, const std::vector<int>& perm) {
  return par::permute_systems(x, dims, dims, perm);
}

HermitianOperator permute_systems(const HermitianOperator& x, const std::vector<int>& perm) {
  return HermitianOperator(par::permute_systems(x.mat(), x.dims(), x.dims(), perm), permute_dims(x.dims(), perm),
                           1.0);
}

Mat embed_identity(const Mat& x, const Dims& dims, int id_dim, int pos) {
  const int k = static_cast<int>(dims.size());
  if (pos < 0 || pos > k) throw ShapeError("identity position out of range");
  Mat big = par::kron(x, Mat::Identity(id_dim, id_dim));
  if (pos == k) return big;
  Dims bd = dims;
  bd.push_back(id_dim);
  std::vector<int> perm;
  for (int f = 0; f < pos; ++f) perm.push_back(f);
  perm.push_back(k);
  for (int f = pos; f < k; ++f) perm.push_back(f);
  return par::permute_systems(big, bd, bd, perm);
}

Vec col(const Mat& a) {
  Vec v(a.size());
  for (long y = 0; y < a.rows(); ++y)
    for (long x = 0; x < a.cols(); ++x) v(y * a.cols() + x) = a(y, x);
  return v;
}

Mat uncol(const Vec& v, long rows, long cols) {
  if (v.size() != rows * cols) throw ShapeError("uncol: size mismatch");
  Mat a(rows, cols);
  for (long y = 0; y < rows; ++y)
    for (long x = 0; x < cols; ++x) a(y, x) = v(y * cols + x);
  return a;
}

ComplexMatrix vec_col(const ComplexMatrix& a) {
  return {col(a.mat), concat(a.row_shape, a.col_shape), TensorShape(Dims{1})};
}

ComplexMatrix choi(const SuperOperator& phi) {
  const long din = phi.in_shape.total(), dout = phi.out_shape.total();
  const TensorShape shape = concat(phi.out_shape, phi.in_shape);
  if (const auto* kp = std::get_if<KrausPair>(&phi.repr)) {
    Mat j = Mat::Zero(din * dout, din * dout);
    for (size_t i = 0; i < kp->a.size(); ++i) j.noalias() += col(kp->a[i]) * col(kp->b[i]).adjoint();
    return {j, shape, shape};
  }
  const auto& c = std::get<ComplexMatrix>(phi.repr);
  return {c.mat, shape, shape};
}

Mat apply_choi(const Mat& j, long dim_out, long dim_in, const Mat& x) {
  if (j.rows() != dim_out * dim_in || j.cols() != dim_out * dim_in) throw ShapeError("Choi size mismatch");
  if (x.rows() != dim_in || x.cols() != dim_in) throw ShapeError("input does not match Choi input factors");
  Mat out = Mat::Zero(dim_out, dim_out);
  for (long yp = 0; yp < dim_out; ++yp)
    for (long y = 0; y < dim_out; ++y) {
      cplx acc = 0.0;
      for (long xi = 0; xi < dim_in; ++xi)
        for (long z = 0; z < dim_in; ++z) acc += x(z, xi) * j(y * dim_in + z, yp * dim_in + xi);
      out(y, yp) = acc;
    }
  return out;
}

HermitianOperator apply_via_choi(const HermitianOperator& j, const HermitianOperator& x) {
  const long din = x.dim();
  if (din == 0 || j.dim() % din != 0) throw ShapeError("input does not match Choi input factors");
  const long dout = j.dim() / din;
  // Output dims are the leading factors of j whose product is dout.
  Dims od;
  long acc = 1;
  for (int d : j.dims()) {
    if (acc == dout) break;
    od.push_back(d);
    acc *= d;
  }
  if (acc != dout) od = {static_cast<int>(dout)};
  return HermitianOperator(apply_choi(j.mat(), dout, din, x.mat()), od, 1.0);
}

Mat apply(const SuperOperator& phi, const Mat& x) {
  if (const auto* kp = std::get_if<KrausPair>(&phi.repr)) {
    Mat out = Mat::Zero(phi.out_shape.total(), phi.out_shape.total());
    for (size_t i = 0; i < kp->a.size(); ++i) out.noalias() += kp->a[i] * x * kp->b[i].adjoint();
    return out;
  }
  return apply_choi(std::get<ComplexMatrix>(phi.repr).mat, phi.out_shape.total(), phi.in_shape.total(), x);
}

KrausPair kraus_pair(const SuperOperator& phi) {
  if (const auto* kp = std::get_if<KrausPair>(&phi.repr)) return *kp;
  const long din = phi.in_shape.total(), dout = phi.out_shape.total();
  const Mat& j = std::get<ComplexMatrix>(phi.repr).mat;
  Eigen::JacobiSVD<Mat> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cut = 1e-14 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  KrausPair out;
  for (long i = 0; i < svd.singularValues().size(); ++i) {
    const double sv = svd.singularValues()(i);
    if (sv <= cut) break;
    out.a.push_back(uncol(svd.matrixU().col(i) * sv, dout, din));
    out.b.push_back(uncol(svd.matrixV().col(i), dout, din));
  }
  return out;
}

namespace {

// (I_R (x) K) M for M with the acted-on factor last; M has `cols` columns.
Mat left_local(const Mat& m, const Mat& k, long r, long cols) {
  const long din = k.cols(), dout = k.rows();
  Eigen::Map<const Mat> view(m.data(), din, r * cols);
  Mat out(r * dout, cols);
  Eigen::Map<Mat>(out.data(), dout, r * cols).noalias() = k * view;
  return out;
}

}  // namespace

Placed apply_on(const Mat& rho, const Dims& dims, const std::vector<int>& targets, const KrausPair& k,
                const Dims& out_dims) {
  const int n = static_cast<int>(dims.size());
  std::vector<bool> hit(n, false);
  std::vector<int> perm;
  for (int t : targets) {
    if (t < 0 || t >= n || hit[t]) throw ShapeError("bad target factor list");
    hit[t] = true;
  }
  Dims rest;
  for (int i = 0; i < n; ++i)
    if (!hit[i]) {
      perm.push_back(i);
      rest.push_back(dims[i]);
    }
  perm.insert(perm.end(), targets.begin(), targets.end());
  const Mat moved = par::permute_systems(rho, dims, dims, perm);
  const long r = dims_product(rest), din = moved.rows() / r, dout = dims_product(out_dims);
  Mat out = Mat::Zero(r * dout, r * dout);
  for (size_t i = 0; i < k.a.size(); ++i) {
    if (k.a[i].cols() != din || k.a[i].rows() != dout) throw ShapeError("channel does not fit target factors");
    const Mat w = left_local(moved, k.a[i], r, r * din);
    const Mat wa = w.adjoint();
    out.noalias() += left_local(wa, k.b[i], r, r * dout).adjoint();
  }
  Dims nd = rest;
  nd.insert(nd.end(), out_dims.begin(), out_dims.end());
  return {out, nd};
}

Placed apply_on(const Mat& rho, const Dims& dims, const std::vector<int>& targets, const SuperOperator& phi) {
  return apply_on(rho, dims, targets, kraus_pair(phi), phi.out_shape.dims);
}

Mat choi_adjoint(const Mat& j, long dim_out, long dim_in) {
  Dims d{static_cast<int>(dim_out), static_cast<int>(dim_in)};
  return par::permute_systems(j.conjugate(), d, d, {1, 0});
}

Jordan jordan_decompose(const HermitianOperator& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(x.mat());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Mat& v = es.eigenvectors();
  Eigen::VectorXd p = ev.cwiseMax(0.0), n = (-ev).cwiseMax(0.0);
  Mat pos = v * p.asDiagonal() * v.adjoint();
  Mat neg = v * n.asDiagonal() * v.adjoint();
  return {HermitianOperator(pos, x.dims(), 1.0), HermitianOperator(neg, x.dims(), 1.0)};
}

Mat abs_hermitian(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(x));
  return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() * es.eigenvectors().adjoint();
}

Norms norms(const Mat& x) {
  Eigen::JacobiSVD<Mat> svd(x);
  const Eigen::VectorXd& s = svd.singularValues();
  return {s.sum(), s.norm(), s.size() ? s.maxCoeff() : 0.0};
}

Norms norms(const ComplexMatrix& x) { return norms(x.mat); }

double trace_norm_hermitian(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double operator_norm_hermitian(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

PsdReport psd_check(const Mat& x, double tol) {
  const double lmin = min_eigenvalue(x);
  return {lmin >= -tol * std::max(1.0, x.norm()), lmin};
}

PsdReport psd_check(const HermitianOperator& x, double tol) { return psd_check(x.mat(), tol); }

double inner(const Mat& a, const Mat& b) { return (a.conjugate().cwiseProduct(b)).sum().real(); }

Mat hermitian_part(const Mat& x) { return (x + x.adjoint()) * 0.5; }

double hermiticity_residual(const Mat& x) { return (x - x.adjoint()).norm(); }

}  // namespace qsk
