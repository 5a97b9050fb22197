#pragma once

#include <string>
#include <vector>

#include "qsk/core.hpp"

namespace qsk {

// Party i maps X_i to Y_i. Global Choi matrices use the factor order
// Y_1..Y_m X_1..X_m; per-party operators live on Y_i (x) X_i, and product
// operators use the party order (Y_1 X_1)..(Y_m X_m).
struct PartySpaces {
  int m = 0;
  Dims in_dims;
  Dims out_dims;

  PartySpaces() = default;
  PartySpaces(Dims in, Dims out);
  Dims global_dims() const;
  Dims party_dims() const;
  long party_dim(int i) const { return static_cast<long>(in_dims[i]) * out_dims[i]; }
  long total_dim() const { return dims_product(in_dims) * dims_product(out_dims); }
};

inline constexpr int kMaxParties = 8;

Mat to_party_order(const Mat& global, const PartySpaces& ps);
Mat to_global_order(const Mat& party, const PartySpaces& ps);

// Q = {X in Herm(Y (x) X) : Tr_Y X = lambda I}.
struct QSubspaceBasis {
  int party = 0;
  int d_in = 1;
  int d_out = 1;
  std::vector<Mat> basis;  // basis[0] = I / sqrt(d_out d_in)
  int dim() const { return static_cast<int>(basis.size()); }
};
QSubspaceBasis q_basis(int party, int d_in, int d_out);
// ||Tr_Y E - (Tr E / d_in) I||_F
double q_membership_residual(const Mat& e, int d_in, int d_out);

enum class ConeTag { full_hermitian, q_subspace };
std::string to_string(ConeTag t);
ConeTag cone_from_string(const std::string& s);

// Per-party cone S_i^+ inside Herm(Y_i (x) X_i). For full_hermitian the
// split into Y and X only matters for bookkeeping.
struct PartyCone {
  ConeTag tag = ConeTag::full_hermitian;
  int d_in = 1;
  int d_out = 1;
  long dim() const { return static_cast<long>(d_in) * d_out; }
};
std::vector<PartyCone> q_cones(const PartySpaces& ps);
std::vector<PartyCone> hermitian_cones(const PartySpaces& ps);
// Orthonormal basis of the subspace S_i, identity direction first.
std::vector<Mat> cone_basis(const PartyCone& c);

struct SepTerm {
  double weight = 0.0;
  std::vector<Mat> factors;  // unit trace, one per party
};

struct SeparableDecomposition {
  std::vector<PartyCone> cones;
  std::vector<SepTerm> terms;

  // Sum of weight * (factor_1 (x) ... (x) factor_m), in party order.
  Mat reconstruct() const;
  double total_weight() const;
  // Appends w * (f_1 (x) ... (x) f_m) after normalizing each factor; terms
  // with a zero factor are skipped.
  void add(double w, std::vector<Mat> factors);
  void append(const SeparableDecomposition& other, double scale = 1.0);
};

struct DecompositionCheck {
  bool ok = false;
  double reconstruction_residual = 0.0;
  double min_factor_eigenvalue = 0.0;
  double max_cone_residual = 0.0;
  double min_weight = 0.0;
  int terms = 0;
};
// Re-checks a decomposition against a target in party order.
DecompositionCheck verify_decomposition(const SeparableDecomposition& d, const Mat& target, double tol = kDefaultTol);

struct SepGeneration {
  SeparableDecomposition plus;
  SeparableDecomposition minus;
  int n = 0;             // dim of the product space
  double bound = 0.0;    // 2^{m-1} sqrt(n) ||x||_F
  double span_residual = 0.0;
};
// x = X^+ - X^- with X^+- separable over the cones, built from split
// product bases. Throws Error if x is outside the product space.
SepGeneration sep_generate(const Mat& x, const std::vector<PartyCone>& cones, double tol = kDefaultTol);

// ||P|| I - P for P = P_1 (x) ... (x) P_m with P_i in S_i^+.
SeparableDecomposition product_complement(const std::vector<Mat>& p, const std::vector<PartyCone>& cones);

struct IdentityMinusSep {
  double c = 0.0;  // 2^{m-1} sqrt(n) (n+1) ||x||_F
  SeparableDecomposition decomposition;
};
// Separable decomposition of c I - x.
IdentityMinusSep identity_minus_sep(const Mat& x, const std::vector<PartyCone>& cones, double tol = kDefaultTol);

struct LosrBallCertificate {
  bool in_ball = false;
  bool in_span = false;
  double span_residual = 0.0;
  double norm_a = 0.0;  // ||I - d J||_F
  double radius = 0.0;  // 1/k
  double k = 0.0;
  int n = 0;
  SeparableDecomposition decomposition;  // reconstructs J in party order
};
LosrBallCertificate losr_ball_certificate(const Mat& lambda_choi, const PartySpaces& ps, double tol = kDefaultTol);

// Rescales a decomposition over the Q cones into product channels: term t
// becomes probs[t] times the product of channel Choi matrices channels[t].
struct LosrMixture {
  std::vector<double> probs;
  std::vector<std::vector<Mat>> channels;
};
LosrMixture to_losr_mixture(const SeparableDecomposition& d);

struct NoSignalingReport {
  bool ok = false;
  double max_residual = 0.0;
  std::vector<unsigned> subsets;  // bit i set = party i in K
  std::vector<double> residuals;
};
// Tr_{Y_K} J = Q (x) I_{X_K} for every subset K. Subsets are checked on
// OpenMP threads.
NoSignalingReport no_signaling_check(const Mat& lambda_choi, const PartySpaces& ps, double tol = kDefaultTol);

struct NonlocalBox {
  PartySpaces spaces;
  SuperOperator channel;
  Mat choi;  // global order
  SeparableDecomposition decomposition;
};
NonlocalBox nonlocal_box();

}  // namespace qsk
