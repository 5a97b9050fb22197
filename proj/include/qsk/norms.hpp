#pragma once

#include <vector>

#include "qsk/random.hpp"
#include "qsk/sdp.hpp"
#include "qsk/strategies.hpp"

namespace qsk {

// Choi matrix of a Hermitian-preserving map on the strategy layout
// Y_1..Y_r X_1..X_r.
struct HermitianPreservingMap {
  RoundSpaces spaces;
  HermitianOperator j;

  static HermitianPreservingMap from_super_operator(const SuperOperator& phi);
  // Throws ShapeError if j does not fit the spaces.
  void check() const;
};

HermitianPreservingMap operator-(const HermitianPreservingMap& a, const HermitianPreservingMap& b);

struct NormResult {
  sdp::Status status = sdp::Status::max_iter;
  double value = 0.0;
  MeasuringStrategy optimizer;  // {T_0, T_1}, outcomes "0" and "1"
  double gap = 0.0;
  int iterations = 0;
};

// max <T_0 - T_1, J> over measuring co-strategies {T_0, T_1}, or over
// measuring strategies when `dual` is set.
NormResult snorm(const HermitianPreservingMap& phi, bool dual = false, double tol = kDefaultTol,
                 int max_iter = 500);
NormResult snorm(const Mat& j, const RoundSpaces& spaces, bool dual = false, double tol = kDefaultTol,
                 int max_iter = 500);

// Diamond norm lower bound for r = 1: sampled inputs u = col(M), refined by
// alternating between the Helstrom sign operator and the best M for it.
// Sample evaluation runs on OpenMP threads; the result does not depend on
// the thread count.
struct DiamondEstimate {
  double value = 0.0;
  Mat input;  // M with ||M||_F = 1, u = col(M) on X (x) X'
};
DiamondEstimate diamond_brute_force(const HermitianPreservingMap& phi, Rng& rng, int samples = 10000,
                                    int refine = 16);
// Trace norm of (I (x) M^T) J (I (x) conj M), the output on u = col(M).
double diamond_objective(const Mat& j, int dx, int dy, const Mat& m);

struct DiamondAgreement {
  double snorm = 0.0;
  double brute_force = 0.0;
  double difference = 0.0;
};
DiamondAgreement diamond_agreement_check(const HermitianPreservingMap& phi, double tol = kDefaultTol,
                                         int samples = 10000, unsigned long seed = 0);

struct UnitBallCertificate {
  bool inside = false;
  double norm = 0.0;
  // min p with |J| <= p S over strategies S (co-strategies when dual).
  double abs_bound = 0.0;
  bool certified = false;
  Strategy dominating;
  double domination_min_eigenvalue = 0.0;  // lambda_min(S - |J|)
  // Split form: J = P - N with P, N >= 0 and P + N <= split_bound * S'.
  // split_bound equals the norm, so this certificate exists whenever
  // inside holds even if the Jordan one does not.
  double split_bound = 0.0;
  Mat pos;
  Mat neg;
  Strategy split_dominating;
};
UnitBallCertificate unit_ball_certificate(const HermitianPreservingMap& phi, bool dual = false,
                                          double tol = kDefaultTol, int max_iter = 500);

struct StrategySetHull {
  Kind kind = Kind::strategy;
  RoundSpaces spaces;
  std::vector<Strategy> generators;

  void check() const;
};

struct Distinguisher {
  sdp::Status status = sdp::Status::max_iter;
  double d = 0.0;
  MeasuringStrategy t;  // opposite kind to the hulls, outcomes "0" and "1"
  double gap = 0.0;
  int iterations = 0;
};
// max_T min_{j,k} <T_0 - T_1, S0_j - S1_k>; the inner minimum over the two
// hulls is attained at generator pairs.
Distinguisher distinguish_sets(const StrategySetHull& s0, const StrategySetHull& s1, double tol = kDefaultTol,
                               int max_iter = 500);

}  // namespace qsk
