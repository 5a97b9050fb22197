#include "qsk/games.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace qsk {

using chain::co_dims;
using chain::strat_dims;

void GameSpec::check_shapes() const {
  const int r = rounds;
  auto len_ok = [r](const Dims& d) { return static_cast<int>(d.size()) == r; };
  if (!len_ok(alice.questions) || !len_ok(alice.answers) || !len_ok(bob.questions) || !len_ok(bob.answers))
    throw ShapeError("player dims must list one entry per round");
  if (referee.kind != Kind::costrategy) throw ShapeError("referee must be a measuring co-strategy");
  if (referee.spaces.r != r) throw ShapeError("referee round count differs from the game");
  for (int i = 0; i < r; ++i) {
    if (referee.spaces.in_dims[i] != alice.questions[i] * bob.questions[i])
      throw ShapeError("referee question space is not A_i (x) B_i");
    if (referee.spaces.out_dims[i] != alice.answers[i] * bob.answers[i])
      throw ShapeError("referee answer space is not C_i (x) D_i");
  }
  if (payout.size() != referee.qs.size()) throw ShapeError("need one payout per referee outcome");
}

Rescaled rescale_payouts(const std::vector<double>& v) {
  Rescaled out;
  if (v.empty()) return out;
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end());
  const double denom = std::abs(hi) + std::abs(lo);
  if (hi == lo || denom == 0.0) {
    const double c = std::clamp(lo, 0.0, 1.0);
    out.v.assign(v.size(), c);
    out.scale = 1.0;
    out.shift = lo - c;
    return out;
  }
  for (double x : v) out.v.push_back((x + std::abs(lo)) / denom);
  out.scale = denom;
  out.shift = -std::abs(lo);
  return out;
}

namespace {

// Factor list [C1 D1 .. Cr Dr A1 B1 .. Ar Br] of the referee operator.
Dims referee_factors(const GameSpec& g) {
  Dims d;
  for (int i = 0; i < g.rounds; ++i) {
    d.push_back(g.alice.answers[i]);
    d.push_back(g.bob.answers[i]);
  }
  for (int i = 0; i < g.rounds; ++i) {
    d.push_back(g.alice.questions[i]);
    d.push_back(g.bob.questions[i]);
  }
  return d;
}

std::vector<int> to_player_order(int r) {
  std::vector<int> p;
  for (int i = 0; i < r; ++i) p.push_back(2 * i);
  for (int i = 0; i < r; ++i) p.push_back(2 * r + 2 * i);
  for (int i = 0; i < r; ++i) p.push_back(2 * i + 1);
  for (int i = 0; i < r; ++i) p.push_back(2 * r + 2 * i + 1);
  return p;
}

Mat psd_power(const Mat& m, double p) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m));
  Eigen::VectorXd ev = es.eigenvalues();
  const double cut = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (long i = 0; i < ev.size(); ++i) ev(i) = ev(i) > cut ? std::pow(ev(i), p) : 0.0;
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Shrinks Bob's chain (Tr_{D_k} B_k >= B_{k-1} (x) I) onto an exact strategy.
Strategy normalize_bob(const std::vector<Mat>& b, const RoundSpaces& s) {
  Mat prev = Mat::Identity(1, 1);
  for (int k = 1; k <= s.r; ++k) {
    const Dims cd = co_dims(s, k);
    const int last = static_cast<int>(cd.size()) - 1;
    const Mat target = k == 1 ? Mat(Mat::Identity(s.in_dims[0], s.in_dims[0]))
                              : embed_identity(prev, strat_dims(s, k - 1), s.in_dims[k - 1], last);
    const Mat m = partial_trace(hermitian_part(b[k - 1]), strat_dims(s, k), {k - 1});
    const Mat g = psd_power(target, 0.5) * psd_power(m, -0.5);
    const Mat l = embed_identity(g, cd, s.out_dims[k - 1], k - 1);
    prev = hermitian_part(l * b[k - 1] * l.adjoint());
  }
  return Strategy{s, Kind::strategy, HermitianOperator(prev, s.layout(), 1.0)};
}

}  // namespace

Mat player_referee(const GameSpec& g, const std::vector<double>& w) {
  if (w.size() != g.referee.qs.size()) throw ShapeError("need one weight per referee outcome");
  const long n = g.referee.spaces.dim();
  Mat r = Mat::Zero(n, n);
  for (size_t m = 0; m < w.size(); ++m) r += w[m] * g.referee.qs[m].mat();
  return permute_systems(r, referee_factors(g), to_player_order(g.rounds));
}

Mat omega_map(const Mat& r, long dim_alice, const Mat& x) {
  const long n = x.rows();
  if (r.rows() != dim_alice * n) throw ShapeError("Bob operator does not match the referee");
  Mat out = Mat::Zero(dim_alice, dim_alice);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) {
      const cplx c = x(i, j);
      if (c == 0.0) continue;
      for (long v = 0; v < dim_alice; ++v)
        for (long u = 0; u < dim_alice; ++u) out(u, v) += c * r(u * n + j, v * n + i);
    }
  return out;
}

double game_payout(const GameSpec& g, const Strategy& alice, const Strategy& bob) {
  const Mat r = player_referee(g, g.payout);
  return inner(kron(alice.q.mat(), bob.q.mat()), r);
}

GameSdp game_sdp(const GameSpec& g, const std::vector<double>& weights, double t) {
  g.check_shapes();
  const int r = g.rounds;
  if (r < 1) throw ShapeError("games need at least one round");
  const RoundSpaces as = g.alice.spaces(), bs = g.bob.spaces();
  const Mat rt = player_referee(g, weights);
  const long da = as.dim();

  BlockShapes in, out;
  for (int k = 1; k <= r; ++k) in.push_back(strat_dims(bs, k));
  for (int k = 1; k <= r; ++k) in.push_back(co_dims(as, k));
  for (int k = 1; k <= r; ++k) out.push_back(co_dims(bs, k));
  for (int k = 1; k <= r; ++k) out.push_back(strat_dims(as, k));
  out.push_back({1});

  auto fn = [=](const BlockOps& x) {
    BlockOps y;
    for (int k = 1; k <= r; ++k) {
      Mat v = partial_trace(x[k - 1], strat_dims(bs, k), {k - 1});
      if (k > 1) v -= embed_identity(x[k - 2], strat_dims(bs, k - 1), bs.in_dims[k - 1], 2 * (k - 1));
      y.push_back(v);
    }
    for (int k = 1; k <= r; ++k) {
      Mat v = embed_identity(x[r + k - 1], co_dims(as, k), as.out_dims[k - 1], k - 1);
      if (k < r)
        v -= partial_trace(x[r + k], co_dims(as, k + 1), {2 * k});
      else
        v -= omega_map(rt, da, x[r - 1]);
      y.push_back(v);
    }
    cplx tr = 0.0;
    for (const auto& b : x) tr += b.trace();
    y.push_back(Mat::Constant(1, 1, -tr));
    return y;
  };

  GameSdp s;
  s.phi = LinearOperatorMap::from_function(in, out, fn);
  s.t = t;
  for (const auto& d : out) s.e.push_back(Mat::Zero(block_dim(d), block_dim(d)));
  s.e[0] = Mat::Identity(bs.in_dims[0], bs.in_dims[0]);
  s.e.back()(0, 0) = -t;
  for (const auto& d : in) s.f.push_back(Mat::Zero(block_dim(d), block_dim(d)));
  s.f[r] = Mat::Identity(as.in_dims[0], as.in_dims[0]);
  return s;
}

namespace {

double cap_for(const GameSpec& g) {
  const int r = g.rounds;
  const double dims = static_cast<double>(dims_product(g.referee.spaces.layout())) *
                      static_cast<double>(dims_product(g.alice.answers));
  return 2.0 * std::pow(r + 2.0, 3) * dims;
}

}  // namespace

GameValueResult game_value(const GameSpec& g, double tol, int max_iter) {
  g.check_shapes();
  const int r = g.rounds;
  const Rescaled rs = rescale_payouts(g.payout);
  const GameSdp gs = game_sdp(g, rs.v, cap_for(g));

  long ne = 0, nf = 0;
  for (const auto& b : gs.e) ne += b.rows();
  for (const auto& b : gs.f) nf += b.rows();
  const SdpProblem p{adjoint_map(gs.phi), HermitianOperator(block_diag(gs.e), {static_cast<int>(ne)}, 1.0),
                     HermitianOperator(block_diag(gs.f), {static_cast<int>(nf)}, 1.0)};

  const SdpSolution sol = solve(p, tol, max_iter);
  GameValueResult res;
  res.status = sol.status;
  res.iterations = sol.iterations;
  res.primal_value = rs.scale * sol.primal_value + rs.shift;
  res.dual_value = rs.scale * sol.dual_value + rs.shift;
  res.gap = res.dual_value - res.primal_value;
  res.value = 0.5 * (res.primal_value + res.dual_value);

  const RoundSpaces as = g.alice.spaces(), bs = g.bob.spaces();
  const BlockOps y = split_blocks(sol.dual_y.mat(), gs.phi.in_blocks);
  const BlockOps x = split_blocks(sol.primal_x.mat(), gs.phi.out_blocks);
  res.bob_strategy = normalize_bob(std::vector<Mat>(y.begin(), y.begin() + r), bs);
  std::vector<Mat> alice_chain(x.begin() + r, x.begin() + 2 * r);
  res.alice_strategy = complete_strategy(alice_chain, as);
  return res;
}

WellBoundedness well_boundedness_constants(const GameSpec& g, int samples) {
  g.check_shapes();
  const int r = g.rounds;
  const RoundSpaces as = g.alice.spaces(), bs = g.bob.spaces();
  WellBoundedness w;
  const double dim_d = static_cast<double>(dims_product(g.bob.answers));
  w.delta = 1.0 / (3.0 * dim_d);
  w.t = cap_for(g);
  w.gamma = (r + 4.0 / 3.0) * static_cast<double>(dims_product(g.referee.spaces.out_dims)) *
            static_cast<double>(dims_product(g.bob.questions));

  for (int i = 1; i <= r; ++i) {
    const long n = dims_product(strat_dims(bs, i));
    const double dd = static_cast<double>(dims_product(Dims(bs.out_dims.begin(), bs.out_dims.begin() + i)));
    w.x0.push_back(Mat::Identity(n, n) * ((i + 1) / dd));
  }
  for (int i = 1; i <= r; ++i) {
    const long n = dims_product(co_dims(as, i));
    const double da = static_cast<double>(dims_product(Dims(as.in_dims.begin() + i, as.in_dims.end())));
    w.x0.push_back(Mat::Identity(n, n) * ((r - i + 2) * da * w.gamma));
  }
  for (const auto& b : w.x0) w.trace_x0 += b.trace().real();

  const Rescaled rs = rescale_payouts(g.payout);
  const GameSdp gs = game_sdp(g, rs.v, w.t);
  auto margin_of = [&](const BlockOps& x) {
    const BlockOps y = gs.phi.apply(x);
    double m = std::numeric_limits<double>::infinity();
    for (size_t b = 0; b < y.size(); ++b) m = std::min(m, min_eigenvalue(hermitian_part(y[b] - gs.e[b])));
    return m;
  };
  w.margin = margin_of(w.x0);
  w.ball_margin = w.margin;
  Rng rng(0);
  for (int s = 0; s < samples; ++s) {
    BlockOps h;
    double norm2 = 0.0;
    for (const auto& b : w.x0) {
      h.push_back(random_hermitian(b.rows(), rng));
      norm2 += h.back().squaredNorm();
    }
    BlockOps x = w.x0;
    for (size_t b = 0; b < x.size(); ++b) x[b] += h[b] * (w.delta / std::sqrt(norm2));
    w.ball_margin = std::min(w.ball_margin, margin_of(x));
  }
  w.strictly_feasible = w.margin > 0.0 && w.ball_margin > 0.0;
  return w;
}

CoinFlipAudit coinflip_audit(const CoinFlipProtocol& p, double tol, int max_iter) {
  if (p.alice.kind != Kind::strategy || p.bob.kind != Kind::costrategy)
    throw Error("coin flip needs Alice as a strategy and Bob as a co-strategy");
  if (!validate(p.alice, 1e-6).valid || !validate(p.bob, 1e-6).valid) throw Error("invalid coin-flipping protocol");
  CoinFlipAudit a;
  a.solved = true;
  a.honest_ok = true;
  a.kitaev_ok = true;
  const double bound = 1.0 / std::sqrt(2.0);
  for (int b = 0; b < 2; ++b) {
    const std::string label = std::to_string(b);
    const auto& qa = p.alice.qs.at(p.alice.index_of(label));
    const auto& qb = p.bob.qs.at(p.bob.index_of(label));
    a.honest[b] = inner(qa.mat(), qb.mat());
    if (std::abs(a.honest[b] - 0.5) > 1e-6) a.honest_ok = false;
    const MaxProbResult ra = max_output_probability(qa, p.alice.spaces, Kind::strategy, tol, max_iter);
    const MaxProbResult rb = max_output_probability(qb, p.bob.spaces, Kind::costrategy, tol, max_iter);
    a.solved = a.solved && ra.status == sdp::Status::optimal && rb.status == sdp::Status::optimal;
    a.p_alice[b] = ra.p;
    a.p_bob[b] = rb.p;
    if (std::max(ra.p, rb.p) < bound - tol) a.kitaev_ok = false;
  }
  return a;
}

ParallelRepReport parallel_repetition_check(const HermitianOperator& r_accept, const Strategy& r, double s, int k,
                                            double tol) {
  if (k < 1) throw Error("repetition count must be positive");
  if (r_accept.dim() != r.q.dim()) throw ShapeError("accepting operator does not match the strategy");
  ParallelRepReport rep;
  const PsdReport hyp = psd_check(Mat(s * r.q.mat() - r_accept.mat()), tol);
  rep.hypothesis_ok = hyp.ok;
  rep.hypothesis_min_eigenvalue = hyp.min_eigenvalue;
  if (!hyp.ok) return rep;

  double total = 1.0;
  for (int i = 0; i < k; ++i) total *= static_cast<double>(r.q.dim());
  if (total > static_cast<double>(kParallelRepDimCap))
    throw Error("k-fold operator dimension " + std::to_string(static_cast<long>(total)) + " exceeds the cap of " +
                std::to_string(kParallelRepDimCap));

  Mat sr = s * r.q.mat(), ra = r_accept.mat();
  Mat big_s = sr, big_a = ra;
  for (int i = 1; i < k; ++i) {
    big_s = kron(big_s, sr);
    big_a = kron(big_a, ra);
  }
  const int rr = r.spaces.r;
  Dims dims;
  for (int c = 0; c < k; ++c) {
    const Dims l = r.spaces.layout();
    dims.insert(dims.end(), l.begin(), l.end());
  }
  std::vector<int> perm;
  if (rr > 0) {
    for (int i = 0; i < rr; ++i)
      for (int c = 0; c < k; ++c) perm.push_back(c * 2 * rr + i);
    for (int i = 0; i < rr; ++i)
      for (int c = 0; c < k; ++c) perm.push_back(c * 2 * rr + rr + i);
  }
  Mat diff = big_s - big_a;
  if (rr > 0) diff = permute_systems(diff, dims, perm);
  const PsdReport out = psd_check(diff, tol);
  rep.ok = out.ok;
  rep.min_eigenvalue = out.min_eigenvalue;
  return rep;
}

}  // namespace qsk
