// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "oracles.hpp"
#include "qsk/games.hpp"
#include "qsk/localops.hpp"
#include "qsk/norms.hpp"
#include "qsk/strategies.hpp"

using namespace qsk;
using namespace qsk::testing;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Tracks the worst value seen for a quantity and whether a bound held.
struct Tracker {
  bool pass = true;
  std::string first_failure;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) first_failure = what;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Verdict choi_trace_norm() {
  Rng rng(101);
  std::uniform_int_distribution<int> dim(2, 4);
  Tracker t;
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const int din = dim(rng), dout = dim(rng);
    const Mat j = choi(small_channel({din}, {dout}, rng)).mat;
    const double err = std::abs(norms(j).trace_norm - din);
    worst = std::max(worst, err);
    t.require(err <= 1e-8, fmt("map %g: |tnorm - dim| = %g", n, err));
  }
  return {t.pass, t.pass ? fmt("50 maps, max |tnorm(J) - dim X| = %.3g", worst) : t.first_failure};
}

Verdict characterization_round_trip() {
  Rng rng(102);
  std::uniform_int_distribution<int> rounds(1, 3);
  Tracker t;
  double worst = 0.0;
  int rejected = 0;
  for (int n = 0; n < 200; ++n) {
    const Kind kind = n % 2 == 0 ? Kind::strategy : Kind::costrategy;
    const int r = rounds(rng);
    const RoundSpaces s(Dims(r, 2), Dims(r, 2));
    const Strategy q = random_strategy(s, kind, rng, 4);
    const ValidationReport rep = validate(q);
    worst = std::max(worst, rep.residual);
    t.require(rep.valid && rep.residual <= 1e-8, fmt("valid %g failed, residual %g", n, rep.residual));
  }
  for (int n = 0; n < 200; ++n) {
    const Kind kind = n % 2 == 0 ? Kind::strategy : Kind::costrategy;
    const int r = rounds(rng);
    const RoundSpaces s(Dims(r, 2), Dims(r, 2));
    const long d = s.dim();
    // Same trace as a valid operator (2^r), so only the chain tells them apart.
    const Mat g = random_ginibre(d, d, rng);
    Mat psd = g * g.adjoint();
    psd *= std::pow(2.0, r) / psd.trace().real();
    const bool valid = validate(HermitianOperator(psd, s.layout()), s, kind).valid;
    if (!valid) ++rejected;
    t.require(!valid, fmt("random PSD %g accepted", n));
  }
  return {t.pass, t.pass ? fmt("200 valid (max residual %.3g), %g/200 random PSD rejected", worst, rejected)
                         : t.first_failure};
}

Verdict interaction_law() {
  Rng rng(103);
  std::uniform_int_distribution<int> rounds(1, 2);
  const int shots = 100000;
  Tracker t;
  int cells = 0, outside = 0;
  double worst_sum = 0.0, min_p = 1.0, worst_sigma = 0.0;
  for (int n = 0; n < 100; ++n) {
    const int r = rounds(rng);
    const RoundSpaces s(Dims(r, 2), Dims(r, 2));
    const auto oa = random_operational(s, Kind::strategy, 3, 2, rng);
    const auto ob = random_operational(s, Kind::costrategy, 3, 2, rng);
    const Eigen::MatrixXd p = interaction_probability(build_measuring_strategy(oa), build_measuring_strategy(ob));
    const Eigen::MatrixXd freq = sample_counts(simulate_interaction(oa, ob), shots, rng) / shots;
    min_p = std::min(min_p, p.minCoeff());
    worst_sum = std::max(worst_sum, std::abs(p.sum() - 1.0));
    t.require(p.minCoeff() >= -1e-10, fmt("pair %g: negative probability %g", n, p.minCoeff()));
    t.require(std::abs(p.sum() - 1.0) <= 1e-8, fmt("pair %g: probabilities sum to %.12g", n, p.sum()));
    for (long i = 0; i < p.size(); ++i) {
      const double pi = std::clamp(p.data()[i], 0.0, 1.0);
      const double sigma = std::sqrt(pi * (1.0 - pi) / shots);
      const double z = sigma > 0 ? std::abs(freq.data()[i] - pi) / sigma : (freq.data()[i] == pi ? 0.0 : INFINITY);
      worst_sigma = std::max(worst_sigma, z);
      ++cells;
      if (z > 3.0) ++outside;
      t.require(z <= 3.0, fmt("pair %g: Monte-Carlo deviation %.3g sigma (cell %g)", n, z, double(i)));
    }
  }
  std::string d = fmt("min p %.3g, max |sum - 1| %.3g, worst deviation %.3g sigma", min_p, worst_sum, worst_sigma) +
                  fmt(", %g of %g cells beyond 3 sigma", outside, cells);
  return {t.pass, t.pass ? d : t.first_failure + "; " + d};
}

MeasuringStrategy measurement_strategy(const std::vector<Mat>& povm) {
  const int d = static_cast<int>(povm[0].rows());
  MeasuringStrategy m;
  m.spaces = RoundSpaces({d}, {1});
  m.kind = Kind::strategy;
  for (size_t a = 0; a < povm.size(); ++a) {
    m.qs.emplace_back(Mat(povm[a].transpose()), m.spaces.layout());
    m.outcomes.push_back(std::to_string(a));
  }
  return m;
}

Verdict max_prob_closed_form() {
  Rng rng(104);
  std::uniform_int_distribution<int> dim(2, 4), outcomes(2, 3);
  Tracker t;
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const auto povm = random_povm(dim(rng), outcomes(rng), rng);
    const MaxProbResult r = max_output_probability(measurement_strategy(povm), "0");
    const double err = std::abs(r.p - operator_norm_hermitian(povm[0]));
    worst = std::max(worst, err);
    t.require(r.status == sdp::Status::optimal && err <= 1e-6, fmt("measurement %g: |p - ||P_0|||| = %g", n, err));
  }
  return {t.pass, t.pass ? fmt("50 measurements, max |p - ||P_a|| | = %.3g", worst) : t.first_failure};
}

Verdict game_values() {
  Rng rng(105);
  Tracker t;
  double worst_const = 0.0, worst_gap = 0.0, worst_oracle = 0.0;
  for (double p : {0.0, 0.25, 0.5, 1.0}) {
    const GameValueResult r = game_value(constant_game(p, rng));
    worst_const = std::max(worst_const, std::abs(r.value - p));
    t.require(r.status == sdp::Status::optimal && std::abs(r.value - p) <= 1e-6,
              fmt("constant game %g returned %.9g", p, r.value));
  }
  for (int n = 0; n < 20; ++n) {
    const GameSpec g = random_game(rng);
    const GameValueResult r = game_value(g);
    const double gap = std::abs(r.primal_value - r.dual_value);
    worst_gap = std::max(worst_gap, gap);
    t.require(r.status == sdp::Status::optimal && gap <= 1e-6, fmt("random game %g: gap %g", n, gap));
    if (n < 10) {
      // Run until the oracle's own bracket is 1e-3 wide, independent of the SDP.
      const FictitiousPlay fp = fictitious_play(g, 4000, rng, 1e-3);
      const double miss = r.value - fp.lower;
      worst_oracle = std::max(worst_oracle, std::abs(miss));
      t.require(fp.lower <= r.value + 1e-6 && miss <= 1e-3,
                fmt("game %g: oracle lower bound %.6g vs value %.6g", n, fp.lower, r.value));
    }
  }
  return {t.pass, t.pass ? fmt("constant max err %.3g, max gap %.3g, oracle max miss %.3g", worst_const, worst_gap,
                               worst_oracle)
                         : t.first_failure};
}

Verdict kitaev_bound() {
  Rng rng(106);
  Tracker t;
  double worst_max = 1.0, worst_prod = 1.0;
  for (int n = 0; n < 50; ++n) {
    const CoinFlipAudit a = coinflip_audit(random_coinflip(1 + n % 2, rng));
    t.require(a.solved && a.honest_ok, fmt("protocol %g: audit not solved or dishonest", n));
    for (int b = 0; b < 2; ++b) {
      const double mx = std::max(a.p_alice[b], a.p_bob[b]), prod = a.p_alice[b] * a.p_bob[b];
      worst_max = std::min(worst_max, mx);
      worst_prod = std::min(worst_prod, prod);
      t.require(mx >= 0.70711 - 1e-6, fmt("protocol %g outcome %g: max forcing %.9g", n, b, mx));
      t.require(prod >= 0.5 - 1e-6, fmt("protocol %g outcome %g: product %.9g", n, b, prod));
    }
  }
  return {t.pass, t.pass ? fmt("min max-forcing %.9g, min product %.9g", worst_max, worst_prod) : t.first_failure};
}

Verdict diamond_agreement() {
  Rng rng(107);
  Tracker t;
  double worst = 0.0;
  const RoundSpaces q1({2}, {2});
  for (int n = 0; n < 30; ++n) {
    const HermitianPreservingMap m{q1, HermitianOperator(random_hermitian(4, rng), q1.layout())};
    const DiamondAgreement a = diamond_agreement_check(m, kDefaultTol, 10000, 1000 + n);
    worst = std::max(worst, a.difference);
    t.require(a.difference <= 1e-4, fmt("map %g: snorm %.9g vs brute force %.9g", n, a.snorm, a.brute_force));
  }
  // Identity minus the completely noisy channel.
  const Mat omega = col(Mat::Identity(2, 2)) * col(Mat::Identity(2, 2)).adjoint();
  const HermitianPreservingMap idn{q1, HermitianOperator(Mat(omega - Mat::Identity(4, 4) / 2.0), q1.layout())};
  const DiamondAgreement a = diamond_agreement_check(idn, kDefaultTol, 10000, 7);
  t.require(a.difference <= 1e-4 && std::abs(a.snorm - 1.5) <= 1e-6,
            fmt("(id, noisy): snorm %.9g vs brute force %.9g", a.snorm, a.brute_force));
  return {t.pass, t.pass ? fmt("30 maps, max |snorm - diamond| = %.3g; (id, noisy) %.9g vs %.9g", worst, a.snorm,
                               a.brute_force)
                         : t.first_failure};
}

Verdict parallel_repetition() {
  Rng rng(108);
  Tracker t;
  double worst = INFINITY;
  for (int n = 0; n < 20; ++n) {
    const MeasuringStrategy m = random_measuring(RoundSpaces({2}, {2}), Kind::strategy, 2, rng);
    const MaxProbResult mp = max_output_probability(m.qs[0], m.spaces, Kind::strategy);
    const ParallelRepReport rep = parallel_repetition_check(m.qs[0], mp.witness, mp.p, 2);
    worst = std::min(worst, rep.min_eigenvalue);
    t.require(mp.status == sdp::Status::optimal && rep.min_eigenvalue >= -1e-8,
              fmt("strategy %g: min eig %g", n, rep.min_eigenvalue));
  }
  return {t.pass, t.pass ? fmt("20 strategies, min eig(s^2 R^2 - Q_a^2) = %.3g", worst) : t.first_failure};
}

Verdict losr_ball() {
  Rng rng(109);
  const PartySpaces ps({2, 2}, {2, 2});
  const auto cones = q_cones(ps);
  Tracker t;
  double k = 0.0, rec = 0.0, min_eig = INFINITY, cone = 0.0, wsum = 0.0;
  for (int n = 0; n < 100; ++n) {
    const Mat party = (Mat::Identity(16, 16) - random_traceless_product(cones, 1.0, rng) / 4420.0) / 4.0;
    const LosrBallCertificate cert = losr_ball_certificate(to_global_order(party, ps), ps);
    k = cert.k;
    t.require(cert.in_ball, fmt("perturbation %g: not certified, ||A|| = %.12g vs 1/k = %.12g", n, cert.norm_a,
                                cert.radius));
    if (!cert.in_ball) continue;
    const DecompositionCheck c = verify_decomposition(cert.decomposition, party, 1e-8);
    double total = 0.0;
    for (double p : to_losr_mixture(cert.decomposition).probs) total += p;
    rec = std::max(rec, c.reconstruction_residual);
    min_eig = std::min(min_eig, c.min_factor_eigenvalue);
    cone = std::max(cone, c.max_cone_residual);
    wsum = std::max(wsum, std::abs(total - 1.0));
    t.require(c.reconstruction_residual <= 1e-8, fmt("perturbation %g: residual %g", n, c.reconstruction_residual));
    t.require(c.min_factor_eigenvalue >= -1e-10, fmt("perturbation %g: factor eig %g", n, c.min_factor_eigenvalue));
    t.require(c.max_cone_residual <= 1e-8, fmt("perturbation %g: cone residual %g", n, c.max_cone_residual));
    t.require(std::abs(total - 1.0) <= 1e-8, fmt("perturbation %g: weights sum to %.12g", n, total));
  }
  t.require(std::abs(k - 4420.0) <= 1e-9, fmt("k = %.12g", k));
  std::string d = fmt("k = %g, max residual %.3g, min factor eig %.3g", k, rec, min_eig) +
                  fmt(", max cone residual %.3g, max |sum w - 1| %.3g", cone, wsum);
  return {t.pass, t.pass ? d : t.first_failure};
}

Mat swap_channel_choi() {
  std::vector<Mat> kraus;
  for (int x2 = 0; x2 < 2; ++x2) {
    Mat e0 = Mat::Zero(2, 1);
    e0(0, 0) = 1.0;
    Mat bra = Mat::Zero(1, 2);
    bra(0, x2) = 1.0;
    kraus.push_back(kron(e0, Mat::Identity(2, 2)) * kron(Mat::Identity(2, 2), bra));
  }
  return choi(SuperOperator::from_kraus(kraus, {2, 2}, {2, 2})).mat;
}

Verdict no_signaling() {
  Rng rng(110);
  Tracker t;
  const NonlocalBox box = nonlocal_box();
  const NoSignalingReport rb = no_signaling_check(box.choi, box.spaces);
  t.require(rb.residuals.size() == 4 && rb.ok && rb.max_residual <= 1e-12,
            fmt("nonlocal box residual %g", rb.max_residual));
  const double rec = (box.decomposition.reconstruct() - to_party_order(box.choi, box.spaces)).norm();
  t.require(box.decomposition.terms.size() == 8 && rec <= 1e-15, fmt("box reconstruction residual %g", rec));
  const NoSignalingReport rs = no_signaling_check(swap_channel_choi(), box.spaces);
  t.require(!rs.ok && rs.residuals[1] >= 0.5, fmt("swap residual on K = {1}: %g", rs.residuals[1]));
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const NoSignalingReport r = no_signaling_check(random_losr(box.spaces, 1 + n % 4, rng), box.spaces);
    worst = std::max(worst, r.max_residual);
    t.require(r.ok, fmt("LOSR mixture %g rejected, residual %g", n, r.max_residual));
  }
  std::string d = fmt("box residual %.3g, reconstruction %.3g, swap residual %.6g", rb.max_residual, rec,
                      rs.residuals[1]) +
                  fmt(", LOSR max residual %.3g", worst);
  return {t.pass, t.pass ? d : t.first_failure};
}

Verdict duality_and_distinguishability() {
  Rng rng(111);
  const RoundSpaces q1({2}, {2});
  Tracker t;
  double worst = 0.0, worst_grid = INFINITY;
  for (int n = 0; n < 20; ++n) {
    const Kind kind = n % 2 == 0 ? Kind::strategy : Kind::costrategy;
    const Strategy a = random_strategy(q1, kind, rng), b = random_strategy(q1, kind, rng);
    const Distinguisher d = distinguish_sets({kind, q1, {a}}, {kind, q1, {b}});
    const double v = snorm(Mat(a.q.mat() - b.q.mat()), q1, kind == Kind::costrategy).value;
    worst = std::max(worst, std::abs(d.d - v));
    t.require(std::abs(d.d - v) <= 1e-6, fmt("pair %g: distinguish %.9g vs snorm %.9g", n, d.d, v));
  }
  for (int n = 0; n < 10; ++n) {
    StrategySetHull h0{Kind::strategy, q1, {}}, h1{Kind::strategy, q1, {}};
    for (int g = 0; g < 2; ++g) {
      h0.generators.push_back(random_strategy(q1, Kind::strategy, rng));
      h1.generators.push_back(random_strategy(q1, Kind::strategy, rng));
    }
    const Distinguisher d = distinguish_sets(h0, h1);
    const Mat tm = d.t.qs[0].mat() - d.t.qs[1].mat();
    for (int i = 0; i <= 20; ++i)
      for (int k = 0; k <= 20; ++k) {
        const double x = i / 20.0, y = k / 20.0;
        const Mat s0 = x * h0.generators[0].q.mat() + (1 - x) * h0.generators[1].q.mat();
        const Mat s1 = y * h1.generators[0].q.mat() + (1 - y) * h1.generators[1].q.mat();
        const double margin = inner(tm, s0 - s1) - d.d;
        worst_grid = std::min(worst_grid, margin);
        t.require(margin >= -1e-7, fmt("hull %g: grid point below d by %g", n, -margin));
      }
  }
  return {t.pass, t.pass ? fmt("max |d - snorm| = %.3g, min grid margin %.3g", worst, worst_grid) : t.first_failure};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"1 choi trace norm", choi_trace_norm},
      {"2 characterization round trip", characterization_round_trip},
      {"3 interaction law", interaction_law},
      {"4 max-prob closed form", max_prob_closed_form},
      {"5 game value", game_values},
      {"6 kitaev bound", kitaev_bound},
      {"7 diamond agreement", diamond_agreement},
      {"8 parallel repetition", parallel_repetition},
      {"9 LOSR ball", losr_ball},
      {"10 no-signaling", no_signaling},
      {"11 duality and distinguishability", duality_and_distinguishability},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%s] %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed;
}
