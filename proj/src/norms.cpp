#include "qsk/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace qsk {

HermitianPreservingMap HermitianPreservingMap::from_super_operator(const SuperOperator& phi) {
  const ComplexMatrix j = choi(phi);
  const int din = static_cast<int>(phi.in_shape.total()), dout = static_cast<int>(phi.out_shape.total());
  RoundSpaces s({din}, {dout});
  return {s, HermitianOperator(j.mat, s.layout())};
}

void HermitianPreservingMap::check() const {
  if (j.dim() != spaces.dim()) throw ShapeError("Choi matrix does not match the round spaces");
}

HermitianPreservingMap operator-(const HermitianPreservingMap& a, const HermitianPreservingMap& b) {
  if (!(a.spaces == b.spaces)) throw ShapeError("maps act on different spaces");
  return {a.spaces, HermitianOperator(Mat(a.j.mat() - b.j.mat()), a.spaces.layout())};
}

namespace {

MeasuringStrategy binary_measuring(const RoundSpaces& s, Kind kind, const Mat& t0, const Mat& t1) {
  MeasuringStrategy m;
  m.spaces = s;
  m.kind = kind;
  m.outcomes = {"0", "1"};
  m.qs = {HermitianOperator(hermitian_part(t0), s.layout(), 1.0), HermitianOperator(hermitian_part(t1), s.layout(), 1.0)};
  return m;
}

sdp::Builder::Adjoint identity_term() {
  return [](const Mat& e) { return e; };
}

}  // namespace

NormResult snorm(const Mat& j, const RoundSpaces& s, bool dual, double tol, int max_iter) {
  if (j.rows() != s.dim() || j.cols() != s.dim()) throw ShapeError("Choi matrix does not match the round spaces");
  const Kind kind = dual ? Kind::strategy : Kind::costrategy;
  const Mat h = hermitian_part(j);
  NormResult res;
  if (s.r == 0) {
    const double v = h(0, 0).real();
    res.status = sdp::Status::optimal;
    res.value = std::abs(v);
    const Mat one = Mat::Identity(1, 1), zero = Mat::Zero(1, 1);
    res.optimizer = v >= 0 ? binary_measuring(s, kind, one, zero) : binary_measuring(s, kind, zero, one);
    return res;
  }
  const int n = static_cast<int>(s.dim());
  sdp::Builder b;
  const int t0 = b.add_block(n), t1 = b.add_block(n);
  b.set_cost(t0, -h);
  b.set_cost(t1, h);
  chain::add_constraints(b, s, kind, {{t0, identity_term()}, {t1, identity_term()}}, Mat::Zero(n, n), -1, 1.0);
  const sdp::CoreResult core = sdp::solve_standard(b.form(), {tol, max_iter});
  res.status = core.status;
  res.iterations = core.iterations;
  res.optimizer = binary_measuring(s, kind, core.x[t0], core.x[t1]);
  res.value = inner(res.optimizer.qs[0].mat() - res.optimizer.qs[1].mat(), h);
  res.gap = core.primal_objective - core.dual_objective;
  return res;
}

NormResult snorm(const HermitianPreservingMap& phi, bool dual, double tol, int max_iter) {
  phi.check();
  return snorm(phi.j.mat(), phi.spaces, dual, tol, max_iter);
}

double diamond_objective(const Mat& j, int dx, int dy, const Mat& m) {
  if (m.rows() != dx) throw ShapeError("input matrix does not match the map");
  const Mat left = kron(Mat::Identity(dy, dy), Mat(m.transpose()));
  return trace_norm_hermitian(hermitian_part(left * j * left.adjoint()));
}

namespace {

// Alternating ascent: S = sign of the output, then M = top eigenvector of
// the quadratic form m -> Tr(S H(m)). Never decreases the objective.
double see_saw(const Mat& j, int dx, int dy, Mat& m, int max_steps = 500) {
  const int dxp = dx;  // ancilla as large as the input
  double best = diamond_objective(j, dx, dy, m);
  for (int step = 0; step < max_steps; ++step) {
    const Mat left = kron(Mat::Identity(dy, dy), Mat(m.transpose()));
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(left * j * left.adjoint()));
    Eigen::VectorXd sg = es.eigenvalues();
    for (long i = 0; i < sg.size(); ++i) sg(i) = sg(i) >= 0 ? 1.0 : -1.0;
    const Mat sgn = es.eigenvectors() * sg.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    // K[(k,l),(i,jj)] = sum_{y,y'} J[(y,i),(y',k)] S[(y',l),(y,jj)]
    Mat k = Mat::Zero(dx * dxp, dx * dxp);
    for (int y = 0; y < dy; ++y)
      for (int yp = 0; yp < dy; ++yp)
        for (int kk = 0; kk < dx; ++kk)
          for (int i = 0; i < dx; ++i) {
            const cplx jv = j(y * dx + i, yp * dx + kk);
            if (jv == 0.0) continue;
            for (int l = 0; l < dxp; ++l)
              for (int jj = 0; jj < dxp; ++jj) k(kk * dxp + l, i * dxp + jj) += jv * sgn(yp * dxp + l, y * dxp + jj);
          }
    Eigen::SelfAdjointEigenSolver<Mat> ks(hermitian_part(k));
    const Mat next = uncol(ks.eigenvectors().col(ks.eigenvalues().size() - 1), dx, dxp);
    const double v = diamond_objective(j, dx, dy, next);
    if (v <= best + 1e-14) break;
    best = v;
    m = next;
  }
  return best;
}

}  // namespace

DiamondEstimate diamond_brute_force(const HermitianPreservingMap& phi, Rng& rng, int samples, int refine) {
  phi.check();
  if (phi.spaces.r != 1) throw Error("the diamond oracle needs a one-round map");
  if (samples < 1) throw Error("need at least one sample");
  const int dx = phi.spaces.in_dims[0], dy = phi.spaces.out_dims[0];
  const Mat& j = phi.j.mat();

  // Inputs are drawn serially so the sample set depends only on the seed.
  std::vector<Mat> inputs(samples);
  for (auto& m : inputs) {
    m = random_ginibre(dx, dx, rng);
    m /= m.norm();
  }
  std::vector<double> vals(samples);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < samples; ++i) vals[i] = diamond_objective(j, dx, dy, inputs[i]);

  std::vector<int> order(samples);
  std::iota(order.begin(), order.end(), 0);
  const int top = std::clamp(refine, 1, samples);
  std::partial_sort(order.begin(), order.begin() + top, order.end(),
                    [&vals](int a, int b) { return vals[a] != vals[b] ? vals[a] > vals[b] : a < b; });
  std::vector<double> refined(top);
  std::vector<Mat> starts(top);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < top; ++i) {
    starts[i] = inputs[order[i]];
    refined[i] = see_saw(j, dx, dy, starts[i]);
  }
  DiamondEstimate est;
  est.value = -1.0;
  for (int i = 0; i < top; ++i)
    if (refined[i] > est.value) {
      est.value = refined[i];
      est.input = starts[i];
    }
  return est;
}

DiamondAgreement diamond_agreement_check(const HermitianPreservingMap& phi, double tol, int samples,
                                         unsigned long seed) {
  phi.check();
  if (phi.spaces.r != 1) throw Error("diamond agreement is defined for one-round maps");
  DiamondAgreement a;
  a.snorm = snorm(phi, false, tol).value;
  Rng rng(seed);
  a.brute_force = diamond_brute_force(phi, rng, samples).value;
  a.difference = std::abs(a.snorm - a.brute_force);
  return a;
}

UnitBallCertificate unit_ball_certificate(const HermitianPreservingMap& phi, bool dual, double tol, int max_iter) {
  phi.check();
  UnitBallCertificate c;
  c.norm = snorm(phi, dual, tol, max_iter).value;
  c.inside = c.norm <= 1.0 + tol;
  const Kind kind = dual ? Kind::costrategy : Kind::strategy;
  const Mat a = abs_hermitian(hermitian_part(phi.j.mat()));
  const MaxProbResult mp =
      max_output_probability(HermitianOperator(a, phi.spaces.layout(), 1.0), phi.spaces, kind, tol, max_iter);
  c.abs_bound = mp.p;
  c.dominating = mp.witness;
  c.domination_min_eigenvalue = min_eigenvalue(hermitian_part(c.dominating.q.mat() - a));
  c.certified = c.inside && mp.p <= 1.0 + tol;

  const int n = static_cast<int>(phi.spaces.dim());
  if (phi.spaces.r == 0) {
    const double v = hermitian_part(phi.j.mat())(0, 0).real();
    c.split_bound = std::abs(v);
    c.pos = Mat::Constant(1, 1, std::max(v, 0.0));
    c.neg = Mat::Constant(1, 1, std::max(-v, 0.0));
    c.split_dominating = Strategy{phi.spaces, kind, HermitianOperator::scalar(1.0)};
    return c;
  }
  sdp::Builder b;
  const int pb = b.add_block(1);
  b.set_cost(pb, Mat::Identity(1, 1));
  const int pp = b.add_block(n), nn = b.add_block(n), ww = b.add_block(n);
  b.add_equality(n, hermitian_part(phi.j.mat()), {{pp, identity_term()}, {nn, [](const Mat& e) { return Mat(-e); }}});
  const std::vector<sdp::Builder::Term> top{{pp, identity_term()}, {nn, identity_term()}, {ww, identity_term()}};
  chain::add_constraints(b, phi.spaces, kind, top, Mat::Zero(n, n), pb);
  const sdp::CoreResult core = sdp::solve_standard(b.form(), {tol, max_iter});
  c.split_bound = core.x[pb](0, 0).real();
  c.pos = hermitian_part(core.x[pp]);
  c.neg = hermitian_part(core.x[nn]);
  if (c.split_bound > 1e-12)
    c.split_dominating = Strategy{phi.spaces, kind,
                                  HermitianOperator(hermitian_part(c.pos + c.neg + core.x[ww]) / c.split_bound,
                                                    phi.spaces.layout(), 1.0)};
  else
    c.split_dominating = uniform_strategy(phi.spaces, kind);
  return c;
}

void StrategySetHull::check() const {
  if (generators.empty()) throw Error("a hull needs at least one generator");
  for (const auto& g : generators) {
    if (g.kind != kind || !(g.spaces == spaces)) throw ShapeError("generator shape or kind differs from the hull");
    if (!validate(g, 1e-6).valid) throw Error("hull generator is not a valid " + to_string(kind));
  }
}

Distinguisher distinguish_sets(const StrategySetHull& s0, const StrategySetHull& s1, double tol, int max_iter) {
  s0.check();
  s1.check();
  if (s0.kind != s1.kind || !(s0.spaces == s1.spaces)) throw ShapeError("hulls differ in kind or shape");
  const RoundSpaces& s = s0.spaces;
  const Kind tk = opposite(s0.kind);
  const int n = static_cast<int>(s.dim());

  sdp::Builder b;
  const int t0 = b.add_block(n), t1 = b.add_block(n);
  const int db = b.add_block(1);
  b.set_cost(db, -Mat::Identity(1, 1));
  for (const auto& g0 : s0.generators)
    for (const auto& g1 : s1.generators) {
      // <T_0 - T_1, D> - d - slack = 0
      const Mat diff = hermitian_part(g0.q.mat() - g1.q.mat());
      const int slack = b.add_block(1);
      std::vector<sdp::Builder::Term> terms{
          {t0, [diff](const Mat& e) { return Mat(e(0, 0) * diff); }},
          {t1, [diff](const Mat& e) { return Mat(-e(0, 0) * diff); }},
          {db, [](const Mat& e) { return Mat(-e); }},
          {slack, [](const Mat& e) { return Mat(-e); }},
      };
      b.add_equality(1, Mat::Zero(1, 1), terms);
    }
  if (s.r > 0)
    chain::add_constraints(b, s, tk, {{t0, identity_term()}, {t1, identity_term()}}, Mat::Zero(n, n), -1, 1.0);
  else
    b.add_equality(1, Mat::Identity(1, 1), {{t0, identity_term()}, {t1, identity_term()}});

  const sdp::CoreResult core = sdp::solve_standard(b.form(), {tol, max_iter});
  Distinguisher d;
  d.status = core.status;
  d.iterations = core.iterations;
  d.t = binary_measuring(s, tk, core.x[t0], core.x[t1]);
  d.d = -core.primal_objective;
  d.gap = core.primal_objective - core.dual_objective;
  return d;
}

}  // namespace qsk
