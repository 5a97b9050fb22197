#pragma once

// Test-only generators and independent oracles.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "qsk/core.hpp"
#include "qsk/random.hpp"
#include "qsk/games.hpp"
#include "qsk/localops.hpp"
#include "qsk/strategies.hpp"

namespace qsk::testing {

inline SuperOperator small_channel(const Dims& in, const Dims& out, Rng& rng) {
  const long din = dims_product(in), dout = dims_product(out);
  const long env = 2 * ((din + dout - 1) / dout);
  return random_channel(in, out, rng, env);
}

// Random operational (co-)strategy with memory dims drawn from 1..max_mem.
inline OperationalStrategy random_operational(const RoundSpaces& s, Kind kind, int max_mem, int outcomes, Rng& rng) {
  std::uniform_int_distribution<int> mem(1, max_mem);
  OperationalStrategy op;
  op.spaces = s;
  op.kind = kind;
  int prev = 1;
  if (kind == Kind::strategy) {
    for (int k = 0; k < s.r; ++k) {
      const int next = mem(rng);
      op.channels.push_back(small_channel({s.in_dims[k], prev}, {s.out_dims[k], next}, rng));
      prev = next;
    }
  } else {
    for (int k = 0; k <= s.r; ++k) {
      const int msg_in = k == 0 ? 1 : s.out_dims[k - 1];
      const int msg_out = k == s.r ? 1 : s.in_dims[k];
      const int next = mem(rng);
      op.channels.push_back(small_channel({msg_in, prev}, {msg_out, next}, rng));
      prev = next;
    }
  }
  if (outcomes > 0) {
    op.measurement = random_povm(prev, outcomes, rng);
    for (int a = 0; a < outcomes; ++a) op.labels.push_back(std::to_string(a));
  }
  return op;
}

// Exact outcome distribution of an operational strategy interacting with
// an operational co-strategy, computed by running the physical message
// exchange round by round (no Choi matrices involved).
inline Eigen::MatrixXd simulate_interaction(const OperationalStrategy& a, const OperationalStrategy& b) {
  const RoundSpaces& s = a.spaces;
  enum : int { kMsg = 100, kZ = 200, kW = 300 };
  // Factor labels: kMsg is the single message in flight.
  Dims dims{1, 1};
  std::vector<int> labels{kZ, kW};
  Mat rho = Mat::Ones(1, 1);
  auto find = [&labels](int l) {
    return static_cast<int>(std::find(labels.begin(), labels.end(), l) - labels.begin());
  };
  auto step = [&](const SuperOperator& ch, int mem_label) {
    std::vector<int> t{find(kMsg), find(mem_label)};
    const int out_msg = ch.out_shape.dims[0];
    const int out_mem = static_cast<int>(ch.out_shape.total() / out_msg);
    Placed p = apply_on(rho, dims, t, kraus_pair(ch), {out_msg, out_mem});
    std::vector<int> nl;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i)
      if (i != t[0] && i != t[1]) nl.push_back(labels[i]);
    nl.push_back(kMsg);
    nl.push_back(mem_label);
    rho = std::move(p.mat);
    dims = std::move(p.dims);
    labels = std::move(nl);
  };
  // The co-strategy opens with a message out of nothing.
  dims.push_back(1);
  labels.push_back(kMsg);
  step(b.channels[0], kW);
  for (int k = 0; k < s.r; ++k) {
    step(a.channels[k], kZ);
    step(b.channels[k + 1], kW);
  }
  const int zi = find(kZ), wi = find(kW), mi = find(kMsg);
  Mat zw = partial_trace(rho, dims, {mi});
  Dims zwd;
  for (int i = 0; i < static_cast<int>(dims.size()); ++i)
    if (i != mi) zwd.push_back(dims[i]);
  if (zi > wi) zw = permute_systems(zw, zwd, {1, 0});
  Eigen::MatrixXd p(a.measurement.size(), b.measurement.size());
  for (size_t i = 0; i < a.measurement.size(); ++i)
    for (size_t j = 0; j < b.measurement.size(); ++j)
      p(i, j) = (kron(a.measurement[i], b.measurement[j]) * zw).trace().real();
  return p;
}

// Multinomial sample counts for a joint distribution.
inline Eigen::MatrixXd sample_counts(const Eigen::MatrixXd& p, int shots, Rng& rng) {
  std::vector<double> w(p.data(), p.data() + p.size());
  for (auto& x : w) x = std::max(0.0, x);
  std::discrete_distribution<int> dist(w.begin(), w.end());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p.rows(), p.cols());
  for (int i = 0; i < shots; ++i) c.data()[dist(rng)] += 1.0;
  return c;
}

inline Strategy random_strategy(const RoundSpaces& s, Kind kind, Rng& rng, int max_mem = 2) {
  return build_strategy(random_operational(s, kind, max_mem, 0, rng));
}

inline MeasuringStrategy random_measuring(const RoundSpaces& s, Kind kind, int outcomes, Rng& rng, int max_mem = 2) {
  return build_measuring_strategy(random_operational(s, kind, max_mem, outcomes, rng));
}

// Maximizes <J(channel), k> over one-round channels X -> Y (k on Y (x) X)
// by polar iteration on a Stinespring isometry. Returns the Choi matrix.
inline Mat best_channel(const Mat& k, int dx, int dy, Rng& rng, int restarts = 4, int iters = 300) {
  const int de = dx * dy;
  const double shift = std::max(0.0, -min_eigenvalue(k));
  const Mat kk = k + shift * Mat::Identity(k.rows(), k.cols());
  Mat best_j;
  double best = -1e300;
  for (int rs = 0; rs < restarts; ++rs) {
    Mat v = random_isometry(dx, dy * de, rng);
    double last = -1e300;
    Mat j;
    for (int it = 0; it < iters; ++it) {
      j = Mat::Zero(dx * dy, dx * dy);
      Mat g(dy * de, dx);
      for (int e = 0; e < de; ++e) {
        Mat ke(dy, dx);
        for (int y = 0; y < dy; ++y) ke.row(y) = v.row(y * de + e);
        const Vec c = col(ke);
        j += c * c.adjoint();
        const Mat grad = uncol(kk * c, dy, dx);
        for (int y = 0; y < dy; ++y) g.row(y * de + e) = grad.row(y);
      }
      const double val = inner(j, kk);
      if (val < last + 1e-13) break;
      last = val;
      Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
      v = svd.matrixU() * svd.matrixV().adjoint();
    }
    const double val = inner(j, k);
    if (val > best) {
      best = val;
      best_j = j;
    }
  }
  return best_j;
}

struct FictitiousPlay {
  double lower = 0.0;  // Bob's best response against Alice's average
  double upper = 0.0;  // Alice's best response against Bob's average
};

// Alternating best responses with averaged opponents for one-round games.
// Both bounds rely on the heuristic best responses being optimal. Stops
// early once upper - lower <= bracket (when bracket > 0).
inline FictitiousPlay fictitious_play(const GameSpec& g, int rounds, Rng& rng, double bracket = 0.0) {
  const int da = g.alice.questions[0], dc = g.alice.answers[0];
  const int db = g.bob.questions[0], dd = g.bob.answers[0];
  const Mat r = player_referee(g, g.payout);
  const long na = static_cast<long>(da) * dc, nb = static_cast<long>(db) * dd;
  // Tr_{CA}[(A (x) I) R], Bob's payout operator for a fixed Alice.
  auto omega_bob = [&](const Mat& a) {
    const Mat rp = permute_systems(r, {static_cast<int>(na), static_cast<int>(nb)}, {1, 0});
    return omega_map(rp, nb, a);
  };
  Mat abar = Mat::Identity(na, na) / dc, bbar = Mat::Identity(nb, nb) / dd;
  FictitiousPlay fp{-1e300, 1e300};
  for (int t = 0; t < rounds; ++t) {
    const Mat ka = omega_map(r, na, bbar);
    const Mat a = best_channel(ka, da, dc, rng);
    fp.upper = std::min(fp.upper, inner(a, ka));
    const Mat kb = omega_bob(abar);
    const double c = std::max(0.0, operator_norm_hermitian(kb));
    const Mat b = best_channel(Mat(c * Mat::Identity(nb, nb) - kb), db, dd, rng);
    fp.lower = std::max(fp.lower, inner(b, kb));
    const double w = 1.0 / (t + 2.0);
    abar = (1 - w) * abar + w * a;
    bbar = (1 - w) * bbar + w * b;
    if (bracket > 0.0 && fp.upper - fp.lower <= bracket) break;
  }
  return fp;
}

// One-round game on qubit players with a random referee and payouts {1, 0}.
inline GameSpec random_game(Rng& rng, int mem = 3) {
  GameSpec g;
  g.rounds = 1;
  g.alice = {{2}, {2}};
  g.bob = {{2}, {2}};
  g.referee = random_measuring(RoundSpaces({4}, {4}), Kind::costrategy, 2, rng, mem);
  g.payout = {1.0, 0.0};
  return g;
}

// Referee accepting with probability p regardless of the players.
inline GameSpec constant_game(double p, Rng& rng) {
  GameSpec g;
  g.rounds = 1;
  g.alice = {{2}, {2}};
  g.bob = {{2}, {2}};
  const Strategy r = random_strategy(RoundSpaces({4}, {4}), Kind::costrategy, rng);
  g.referee.spaces = r.spaces;
  g.referee.kind = Kind::costrategy;
  g.referee.outcomes = {"accept", "reject"};
  g.referee.qs = {HermitianOperator(p * r.q.mat(), r.q.dims()), HermitianOperator((1 - p) * r.q.mat(), r.q.dims())};
  g.payout = {1.0, 0.0};
  return g;
}

// Referee sends Alice psi and accepts iff she returns it; Bob is trivial.
inline GameSpec pure_qubit_game(const Vec& psi) {
  OperationalStrategy op;
  op.spaces = RoundSpaces({2}, {2});
  op.kind = Kind::costrategy;
  op.channels.push_back(SuperOperator::from_kraus({Mat(psi)}, {1, 1}, {2, 1}));
  op.channels.push_back(SuperOperator::from_kraus({Mat::Identity(2, 2)}, {2, 1}, {1, 2}));
  const Mat proj = psi * psi.adjoint();
  op.measurement = {proj, Mat(Mat::Identity(2, 2) - proj)};
  op.labels = {"accept", "reject"};
  GameSpec g;
  g.rounds = 1;
  g.alice = {{2}, {2}};
  g.bob = {{1}, {1}};
  g.referee = build_measuring_strategy(op);
  g.payout = {1.0, 0.0};
  return g;
}

// Honest coin flip with qubit messages: Alice ignores Bob's random states
// and sends psi_c for a uniform c from a random orthonormal pair on
// Y_1..Y_r; Bob measures {psi_0 psi_0^*, I - psi_0 psi_0^*}.
inline CoinFlipProtocol coinflip_with(const Mat& u, int r, Rng& rng) {
  const long dy = u.rows();
  Dims ones(r, 2);
  RoundSpaces s(ones, ones);
  OperationalStrategy a;
  a.spaces = s;
  a.kind = Kind::strategy;
  a.labels = {"0", "1"};
  std::vector<Mat> prep;
  for (int c = 0; c < 2; ++c) {
    Vec tag = Vec::Zero(2);
    tag(c) = 1.0;
    const Vec out = kron(Mat(u.col(c)), Mat(tag)) / std::sqrt(2.0);
    for (int x = 0; x < 2; ++x) {
      Mat k = Mat::Zero(out.size(), 2);
      k.col(x) = out;
      prep.push_back(k);
    }
  }
  const int zdim = static_cast<int>(dy);  // r = 1: tag; r = 2: (Y_2, tag)
  a.channels.push_back(SuperOperator::from_kraus(prep, {2, 1}, {2, zdim}));
  if (r == 2) {
    std::vector<Mat> fwd;
    for (int x = 0; x < 2; ++x) {
      Mat bra = Mat::Zero(1, 2);
      bra(0, x) = 1.0;
      fwd.push_back(kron(bra, Mat::Identity(4, 4)));
    }
    a.channels.push_back(SuperOperator::from_kraus(fwd, {2, 4}, {2, 2}));
  }
  Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  a.measurement = {p0, p1};

  OperationalStrategy b;
  b.spaces = s;
  b.kind = Kind::costrategy;
  b.labels = {"0", "1"};
  b.channels.push_back(SuperOperator::from_kraus({Mat(random_pure_state(2, rng))}, {1, 1}, {2, 1}));
  if (r == 1) {
    b.channels.push_back(SuperOperator::from_kraus({Mat::Identity(2, 2)}, {2, 1}, {1, 2}));
  } else {
    const Mat k1 = kron(Mat(random_pure_state(2, rng)), Mat::Identity(2, 2));
    b.channels.push_back(SuperOperator::from_kraus({k1}, {2, 1}, {2, 2}));
    // (Y_2, Y_1) -> (Y_1, Y_2)
    Mat swap = Mat::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) swap(j * 2 + i, i * 2 + j) = 1.0;
    b.channels.push_back(SuperOperator::from_kraus({swap}, {2, 2}, {1, 4}));
  }
  const Mat proj = u.col(0) * u.col(0).adjoint();
  b.measurement = {proj, Mat(Mat::Identity(dy, dy) - proj)};
  return {build_measuring_strategy(a), build_measuring_strategy(b)};
}

inline CoinFlipProtocol random_coinflip(int r, Rng& rng) {
  const Mat u = random_unitary(r == 1 ? 2 : 4, rng);
  return coinflip_with(u, r, rng);
}

// Global-order Choi matrix of a random mixture of product channels.
inline Mat random_losr(const PartySpaces& ps, int terms, Rng& rng) {
  std::vector<double> w;
  double total = 0.0;
  for (int t = 0; t < terms; ++t) total += w.emplace_back(uniform01(rng) + 0.05);
  Mat j = Mat::Zero(ps.total_dim(), ps.total_dim());
  for (int t = 0; t < terms; ++t) {
    Mat p = Mat::Identity(1, 1);
    for (int i = 0; i < ps.m; ++i) p = kron(p, choi(small_channel({ps.in_dims[i]}, {ps.out_dims[i]}, rng)).mat);
    j += (w[t] / total) * p;
  }
  return to_global_order(j, ps);
}

// Sum of c_k (E_{k_1} (x) ... (x) E_{k_m}) over the product of the cone bases
// with the all-identity coefficient zero, scaled to Frobenius norm `norm`.
inline Mat random_traceless_product(const std::vector<PartyCone>& cones, double norm, Rng& rng) {
  std::vector<std::vector<Mat>> bases;
  for (const auto& c : cones) bases.push_back(cone_basis(c));
  std::normal_distribution<double> g;
  std::vector<std::pair<std::vector<size_t>, double>> terms{{{}, 1.0}};
  for (const auto& b : bases) {
    std::vector<std::pair<std::vector<size_t>, double>> next;
    for (const auto& [idx, c] : terms)
      for (size_t k = 0; k < b.size(); ++k) {
        auto i2 = idx;
        i2.push_back(k);
        next.push_back({i2, c});
      }
    terms = std::move(next);
  }
  Mat a;
  double sq = 0.0;
  std::vector<double> coeffs;
  for (size_t t = 0; t < terms.size(); ++t) {
    const double c = t == 0 ? 0.0 : g(rng);
    coeffs.push_back(c);
    sq += c * c;
  }
  for (size_t t = 0; t < terms.size(); ++t) {
    Mat p = bases[0][terms[t].first[0]];
    for (size_t i = 1; i < bases.size(); ++i) p = kron(p, bases[i][terms[t].first[i]]);
    const Mat term = (coeffs[t] * norm / std::sqrt(sq)) * p;
    a = t == 0 ? term : Mat(a + term);
  }
  return a;
}

}  // namespace qsk::testing
