#include "qsk/random.hpp"

#include <Eigen/QR>

namespace qsk {

Mat random_ginibre(long rows, long cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) {
      const double re = n(rng);
      const double im = n(rng);
      g(i, j) = cplx(re, im);
    }
  return g;
}

Mat random_unitary(long d, Rng& rng) {
  Mat g = random_ginibre(d, d, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(d, d);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (long i = 0; i < d; ++i) {
    const cplx ph = r(i, i) / std::abs(r(i, i));
    q.col(i) *= ph;
  }
  return q;
}

Mat random_isometry(long din, long dout, Rng& rng) {
  if (dout < din) throw ShapeError("isometry needs dout >= din");
  return random_unitary(dout, rng).leftCols(din);
}

Vec random_pure_state(long d, Rng& rng) {
  Vec v = random_ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

Mat random_density(long d, Rng& rng) {
  Mat g = random_ginibre(d, d, rng);
  Mat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

Mat random_hermitian(long d, Rng& rng) {
  Mat g = random_ginibre(d, d, rng);
  return (g + g.adjoint()) * 0.5;
}

SuperOperator random_channel(const Dims& in, const Dims& out, Rng& rng, long env) {
  const long din = dims_product(in), dout = dims_product(out);
  if (env <= 0) env = din * dout;
  Mat v = random_isometry(din, dout * env, rng);
  std::vector<Mat> kraus;
  for (long e = 0; e < env; ++e) {
    Mat k(dout, din);
    for (long y = 0; y < dout; ++y) k.row(y) = v.row(y * env + e);
    kraus.push_back(k);
  }
  return SuperOperator::from_kraus(kraus, in, out);
}

std::vector<Mat> random_povm(long d, int k, Rng& rng) {
  std::vector<Mat> g;
  Mat s = Mat::Zero(d, d);
  for (int i = 0; i < k; ++i) {
    Mat a = random_ginibre(d, d, rng);
    g.push_back(a * a.adjoint());
    s += g.back();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  Mat sinv = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
  for (auto& m : g) m = hermitian_part(sinv * m * sinv);
  return g;
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace qsk
