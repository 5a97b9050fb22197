#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qsk/localops.hpp"

using namespace qsk;
using namespace qsk::testing;

namespace {

const PartySpaces kQubits({2, 2}, {2, 2});

double product_norm(const SepTerm& t) {
  double n = t.weight;
  for (const auto& f : t.factors) n *= operator_norm_hermitian(f);
  return n;
}

void expect_valid(const SeparableDecomposition& d, const Mat& target, double tol) {
  const DecompositionCheck c = verify_decomposition(d, target, tol);
  EXPECT_LE(c.reconstruction_residual, tol * std::max(1.0, target.norm()));
  EXPECT_GE(c.min_factor_eigenvalue, -1e-10);
  EXPECT_LE(c.max_cone_residual, tol);
  EXPECT_GE(c.min_weight, 0.0);
  EXPECT_TRUE(c.ok);
}

// Random element of Q_1 (x) Q_2 with the identity coefficient included.
Mat random_product_space(const std::vector<PartyCone>& cones, Rng& rng) {
  Mat a = random_traceless_product(cones, 1.0, rng);
  return Mat(a + uniform01(rng) * Mat::Identity(a.rows(), a.cols()) / 4.0);
}

Mat swap_channel_choi() {
  // Party 1 outputs |0>, party 2 outputs party 1's input.
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

}  // namespace

TEST(QBasis, Dimensions) {
  EXPECT_EQ(q_basis(0, 2, 2).dim(), 13);
  EXPECT_EQ(q_basis(0, 1, 3).dim(), 9);
  EXPECT_EQ(q_basis(0, 3, 1).dim(), 1);
  EXPECT_EQ(q_basis(0, 2, 3).dim(), 33);
}

TEST(QBasis, OrthonormalMembers) {
  for (int din = 1; din <= 3; ++din)
    for (int dout = 1; dout <= 3; ++dout) {
      const auto q = q_basis(0, din, dout);
      EXPECT_NEAR((q.basis[0] - Mat::Identity(din * dout, din * dout) / std::sqrt(double(din * dout))).norm(), 0.0,
                  1e-14);
      for (int i = 0; i < q.dim(); ++i) {
        EXPECT_LE(q_membership_residual(q.basis[i], din, dout), 1e-10);
        EXPECT_LE(hermiticity_residual(q.basis[i]), 1e-14);
        for (int j = 0; j < q.dim(); ++j) EXPECT_NEAR(inner(q.basis[i], q.basis[j]), i == j ? 1.0 : 0.0, 1e-10);
      }
    }
}

TEST(PartyOrder, RoundTripAndProducts) {
  Rng rng(3);
  const Mat j = random_hermitian(16, rng);
  EXPECT_NEAR((to_global_order(to_party_order(j, kQubits), kQubits) - j).norm(), 0.0, 1e-13);
  const auto c1 = small_channel({2}, {2}, rng), c2 = small_channel({2}, {2}, rng);
  const Mat j1 = choi(c1).mat, j2 = choi(c2).mat;
  const Mat product = kron(j1, j2);
  // Choi of the tensor product channel, built from its global-order Kraus form.
  std::vector<Mat> k;
  for (const auto& a : std::get<KrausPair>(c1.repr).a)
    for (const auto& b : std::get<KrausPair>(c2.repr).a) k.push_back(kron(a, b));
  const Mat global = choi(SuperOperator::from_kraus(k, {2, 2}, {2, 2})).mat;
  EXPECT_NEAR((to_party_order(global, kQubits) - product).norm(), 0.0, 1e-12);
}

TEST(SepGenerate, PauliZ) {
  Mat z = Mat::Zero(2, 2);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  const std::vector<PartyCone> cones{{ConeTag::full_hermitian, 1, 2}};
  const auto g = sep_generate(z, cones);
  Mat p = Mat::Zero(2, 2), m = Mat::Zero(2, 2);
  p(0, 0) = 1.0;
  m(1, 1) = 1.0;
  EXPECT_NEAR((g.plus.reconstruct() - p).norm(), 0.0, 1e-12);
  EXPECT_NEAR((g.minus.reconstruct() - m).norm(), 0.0, 1e-12);
  EXPECT_EQ(g.n, 4);
  EXPECT_NEAR(g.bound, 2.0 * std::sqrt(2.0), 1e-12);
}

TEST(SepGenerate, Identity) {
  for (int m = 1; m <= 3; ++m) {
    const PartySpaces ps(Dims(m, 2), Dims(m, 2));
    const auto cones = q_cones(ps);
    const long d = ps.total_dim();
    const auto g = sep_generate(Mat::Identity(d, d), cones);
    EXPECT_NEAR((g.plus.reconstruct() - Mat::Identity(d, d)).norm(), 0.0, 1e-10);
    EXPECT_NEAR(g.minus.reconstruct().norm(), 0.0, 1e-10);
  }
}

TEST(SepGenerate, RandomQubitPairs) {
  Rng rng(11);
  const auto cones = q_cones(kQubits);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat x = random_product_space(cones, rng);
    const auto g = sep_generate(x, cones);
    EXPECT_EQ(g.n, 169);
    EXPECT_LE((g.plus.reconstruct() - g.minus.reconstruct() - x).norm(), 1e-9 * x.norm());
    EXPECT_NEAR(g.bound, 2.0 * 13.0 * x.norm(), 1e-12);
    for (const auto* part : {&g.plus, &g.minus}) {
      const DecompositionCheck c = verify_decomposition(*part, part->reconstruct(), 1e-9);
      EXPECT_GE(c.min_factor_eigenvalue, -1e-10);
      EXPECT_LE(c.max_cone_residual, 1e-9);
      EXPECT_LE(operator_norm_hermitian(part->reconstruct()), g.bound + 1e-8);
    }
  }
}

TEST(SepGenerate, RejectsOutsideSpan) {
  Rng rng(5);
  // Generic Hermitian operators are signaling.
  EXPECT_THROW(sep_generate(random_hermitian(16, rng), q_cones(kQubits)), Error);
  EXPECT_THROW(sep_generate(Mat::Identity(8, 8), q_cones(kQubits)), ShapeError);
}

TEST(ProductComplement, ItemOneRecursion) {
  Rng rng(7);
  const auto cones = q_cones(kQubits);
  for (int trial = 0; trial < 20; ++trial) {
    // P_i = I + small element of Q_i, positive by construction.
    std::vector<Mat> p;
    for (const auto& c : cones) {
      const auto b = cone_basis(c);
      Mat e = Mat::Identity(4, 4);
      for (size_t k = 1; k < b.size(); ++k) e += 0.1 * (uniform01(rng) - 0.5) * b[k];
      p.push_back(e);
    }
    const Mat prod = kron(p[0], p[1]);
    const Mat target = operator_norm_hermitian(prod) * Mat::Identity(16, 16) - prod;
    const auto d = product_complement(p, cones);
    expect_valid(d, target, 1e-9);
  }
}

TEST(ProductComplement, ThreeParties) {
  Rng rng(8);
  const PartySpaces ps({2, 1, 2}, {2, 2, 1});
  const auto cones = q_cones(ps);
  std::vector<Mat> p;
  for (const auto& c : cones) p.push_back(choi(small_channel({c.d_in}, {c.d_out}, rng)).mat);
  const Mat prod = kron(kron(p[0], p[1]), p[2]);
  const Mat target = operator_norm_hermitian(prod) * Mat::Identity(prod.rows(), prod.cols()) - prod;
  expect_valid(product_complement(p, cones), target, 1e-9);
}

TEST(IdentityMinusSep, Zero) {
  const auto r = identity_minus_sep(Mat::Zero(16, 16), q_cones(kQubits));
  EXPECT_EQ(r.c, 0.0);
  EXPECT_TRUE(r.decomposition.terms.empty());
}

TEST(IdentityMinusSep, SinglePartyIsPsd) {
  Rng rng(9);
  const std::vector<PartyCone> cones{{ConeTag::full_hermitian, 1, 3}};
  const Mat x = random_hermitian(3, rng);
  const auto r = identity_minus_sep(x, cones);
  EXPECT_NEAR(r.c, std::sqrt(9.0) * 10.0 * x.norm(), 1e-12);
  const Mat target = r.c * Mat::Identity(3, 3) - x;
  EXPECT_GE(min_eigenvalue(target), 0.0);
  expect_valid(r.decomposition, target, 1e-9);
}

TEST(IdentityMinusSep, RandomQubitPairs) {
  Rng rng(10);
  const auto cones = q_cones(kQubits);
  for (int trial = 0; trial < 5; ++trial) {
    const Mat x = random_product_space(cones, rng);
    const auto r = identity_minus_sep(x, cones);
    EXPECT_NEAR(r.c, 4420.0 * x.norm(), 1e-9 * r.c);
    expect_valid(r.decomposition, r.c * Mat::Identity(16, 16) - x, 1e-8);
  }
}

TEST(IdentityMinusSep, HermitianCones) {
  Rng rng(12);
  const auto cones = hermitian_cones(PartySpaces({1, 1}, {2, 2}));
  const Mat x = random_hermitian(4, rng);
  const auto r = identity_minus_sep(x, cones);
  expect_valid(r.decomposition, r.c * Mat::Identity(4, 4) - x, 1e-8);
  double s = 0.0;
  const auto g = sep_generate(x, cones);
  for (const auto& t : g.plus.terms) s += product_norm(t);
  EXPECT_LE(s, g.bound + 1e-9);
}

TEST(LosrBall, CompletelyNoisyChannel) {
  const Mat j = Mat::Identity(16, 16) / 4.0;
  const auto cert = losr_ball_certificate(j, kQubits);
  EXPECT_TRUE(cert.in_span);
  EXPECT_TRUE(cert.in_ball);
  EXPECT_NEAR(cert.norm_a, 0.0, 1e-12);
  EXPECT_NEAR(cert.k, 4420.0, 1e-9);
  ASSERT_EQ(cert.decomposition.terms.size(), 1u);
  for (const auto& f : cert.decomposition.terms[0].factors) EXPECT_NEAR((f - Mat::Identity(4, 4) / 4.0).norm(), 0.0, 1e-14);
  expect_valid(cert.decomposition, to_party_order(j, kQubits), 1e-12);
  const auto mix = to_losr_mixture(cert.decomposition);
  ASSERT_EQ(mix.probs.size(), 1u);
  EXPECT_NEAR(mix.probs[0], 1.0, 1e-14);
}

TEST(LosrBall, BoundaryPerturbations) {
  Rng rng(13);
  const auto cones = q_cones(kQubits);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat b = random_traceless_product(cones, 1.0, rng);
    const Mat party = (Mat::Identity(16, 16) - b / 4420.0) / 4.0;
    const Mat j = to_global_order(party, kQubits);
    const auto cert = losr_ball_certificate(j, kQubits);
    EXPECT_TRUE(cert.in_span);
    ASSERT_TRUE(cert.in_ball) << cert.norm_a << " vs " << cert.radius;
    expect_valid(cert.decomposition, party, 1e-8);
    double total = 0.0;
    for (double p : to_losr_mixture(cert.decomposition).probs) total += p;
    EXPECT_NEAR(total, 1.0, 1e-8);
  }
}

TEST(LosrBall, IdentityChannelOutside) {
  const Mat omega = col(Mat::Identity(4, 4)) * col(Mat::Identity(4, 4)).adjoint();
  const auto cert = losr_ball_certificate(omega, kQubits);
  EXPECT_TRUE(cert.in_span);
  EXPECT_FALSE(cert.in_ball);
  EXPECT_GT(cert.norm_a, 100.0 * cert.radius);
  EXPECT_TRUE(cert.decomposition.terms.empty());
}

TEST(LosrBall, SignalingOutsideSpan) {
  const auto cert = losr_ball_certificate(swap_channel_choi(), kQubits);
  EXPECT_FALSE(cert.in_span);
  EXPECT_FALSE(cert.in_ball);
  EXPECT_GT(cert.span_residual, 1e-3);
}

TEST(LosrBall, RejectsNonTracePreserving) {
  EXPECT_THROW(losr_ball_certificate(Mat::Identity(16, 16), kQubits), Error);
}

TEST(LosrBall, MixtureChannelsAreProducts) {
  Rng rng(14);
  const auto cones = q_cones(kQubits);
  const Mat party = (Mat::Identity(16, 16) - random_traceless_product(cones, 0.5, rng) / 4420.0) / 4.0;
  const auto cert = losr_ball_certificate(to_global_order(party, kQubits), kQubits);
  ASSERT_TRUE(cert.in_ball);
  const auto mix = to_losr_mixture(cert.decomposition);
  Mat rec = Mat::Zero(16, 16);
  double total = 0.0;
  for (size_t t = 0; t < mix.probs.size(); ++t) {
    EXPECT_GE(mix.probs[t], 0.0);
    total += mix.probs[t];
    for (const auto& c : mix.channels[t]) {
      EXPECT_GE(min_eigenvalue(c), -1e-10);
      EXPECT_NEAR((partial_trace(c, {2, 2}, {0}) - Mat::Identity(2, 2)).norm(), 0.0, 1e-9);
    }
    rec += mix.probs[t] * kron(mix.channels[t][0], mix.channels[t][1]);
  }
  EXPECT_NEAR(total, 1.0, 1e-8);
  EXPECT_LE((rec - party).norm(), 1e-9);
}

TEST(NoSignaling, ProductChannel) {
  Rng rng(15);
  const auto c1 = small_channel({2}, {2}, rng), c2 = small_channel({2}, {2}, rng);
  const Mat j = to_global_order(kron(choi(c1).mat, choi(c2).mat), kQubits);
  const auto rep = no_signaling_check(j, kQubits);
  EXPECT_TRUE(rep.ok);
  EXPECT_EQ(rep.residuals.size(), 4u);
  EXPECT_LE(rep.max_residual, 1e-12);
}

TEST(NoSignaling, SwapChannelSignals) {
  const Mat j = swap_channel_choi();
  const auto rep = no_signaling_check(j, kQubits);
  EXPECT_FALSE(rep.ok);
  EXPECT_NEAR(rep.residuals[0], 0.0, 1e-12);
  EXPECT_GE(rep.residuals[1], 0.5);
  // Direct K = {1}: Tr_{Y_1} J against its average over X_1.
  const Mat m = partial_trace(j, {2, 2, 2, 2}, {0});
  const Mat q = partial_trace(m, {2, 2, 2}, {1}) / 2.0;
  const Mat rec = embed_identity(q, {2, 2}, 2, 1);
  EXPECT_NEAR(rep.residuals[1], (m - rec).norm(), 1e-12);
  // Party 2 does not signal to party 1.
  EXPECT_NEAR(rep.residuals[2], 0.0, 1e-12);
}

TEST(NoSignaling, RandomLosrMixtures) {
  Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat j = random_losr(kQubits, 1 + trial % 4, rng);
    const auto rep = no_signaling_check(j, kQubits);
    EXPECT_TRUE(rep.ok) << rep.max_residual;
  }
  const PartySpaces three({2, 1, 2}, {1, 2, 2});
  EXPECT_TRUE(no_signaling_check(random_losr(three, 3, rng), three).ok);
}

TEST(NoSignaling, Errors) {
  EXPECT_THROW(no_signaling_check(Mat::Identity(8, 8), kQubits), ShapeError);
  EXPECT_THROW(no_signaling_check(Mat::Identity(16, 16), kQubits), Error);
  Mat neg = Mat::Identity(16, 16) / 4.0;
  neg(0, 0) = -0.25;
  neg(1, 1) = 0.75;
  EXPECT_THROW(no_signaling_check(neg, kQubits), Error);
}

TEST(SpanCoherence, LosrMixturesProjectExactly) {
  Rng rng(17);
  const auto cones = q_cones(kQubits);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat j = random_losr(kQubits, 3, rng);
    const auto g = sep_generate(to_party_order(j, kQubits), cones);
    EXPECT_LE(g.span_residual, 1e-10);
  }
}

TEST(NonlocalBox, Mappings) {
  const auto box = nonlocal_box();
  auto basis = [](int a, int b) {
    Mat r = Mat::Zero(4, 4);
    r(2 * a + b, 2 * a + b) = 1.0;
    return r;
  };
  const Mat half00 = (basis(0, 0) + basis(1, 1)) / 2.0;
  const Mat half01 = (basis(0, 1) + basis(1, 0)) / 2.0;
  EXPECT_NEAR((qsk::apply(box.channel, basis(0, 0)) - half00).norm(), 0.0, 1e-14);
  EXPECT_NEAR((qsk::apply(box.channel, basis(0, 1)) - half00).norm(), 0.0, 1e-14);
  EXPECT_NEAR((qsk::apply(box.channel, basis(1, 0)) - half00).norm(), 0.0, 1e-14);
  EXPECT_NEAR((qsk::apply(box.channel, basis(1, 1)) - half01).norm(), 0.0, 1e-14);
  // Off-diagonal inputs are annihilated.
  Mat off = Mat::Zero(4, 4);
  off(0, 3) = 1.0;
  EXPECT_NEAR(qsk::apply(box.channel, off).norm(), 0.0, 1e-14);
}

TEST(NonlocalBox, NoSignalingAndDecomposition) {
  const auto box = nonlocal_box();
  const auto rep = no_signaling_check(box.choi, box.spaces);
  EXPECT_TRUE(rep.ok);
  EXPECT_LE(rep.max_residual, 1e-12);
  ASSERT_EQ(box.decomposition.terms.size(), 8u);
  for (const auto& t : box.decomposition.terms) EXPECT_EQ(t.weight, 0.5);
  EXPECT_LE((box.decomposition.reconstruct() - to_party_order(box.choi, box.spaces)).norm(), 1e-15);
  expect_valid(box.decomposition, to_party_order(box.choi, box.spaces), 1e-14);
  // Separable but not LOSR-certifiable from the ball: far from the noisy channel.
  EXPECT_FALSE(losr_ball_certificate(box.choi, box.spaces).in_ball);
}
