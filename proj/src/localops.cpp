#include "qsk/localops.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "qsk/sdp.hpp"

namespace qsk {

PartySpaces::PartySpaces(Dims in, Dims out) : m(static_cast<int>(in.size())), in_dims(std::move(in)), out_dims(std::move(out)) {
  if (in_dims.size() != out_dims.size()) throw ShapeError("need one input and one output dim per party");
  if (m < 1) throw ShapeError("need at least one party");
  for (int i = 0; i < m; ++i)
    if (in_dims[i] < 1 || out_dims[i] < 1) throw ShapeError("party dims must be positive");
}

Dims PartySpaces::global_dims() const {
  Dims d = out_dims;
  d.insert(d.end(), in_dims.begin(), in_dims.end());
  return d;
}

Dims PartySpaces::party_dims() const {
  Dims d;
  for (int i = 0; i < m; ++i) {
    d.push_back(out_dims[i]);
    d.push_back(in_dims[i]);
  }
  return d;
}

namespace {

std::vector<int> party_perm(int m) {
  std::vector<int> p;
  for (int i = 0; i < m; ++i) {
    p.push_back(i);
    p.push_back(m + i);
  }
  return p;
}

void check_square(const Mat& x, long n, const char* what) {
  if (x.rows() != n || x.cols() != n) throw ShapeError(std::string(what) + " has the wrong dimension");
}

}  // namespace

Mat to_party_order(const Mat& global, const PartySpaces& ps) {
  check_square(global, ps.total_dim(), "Choi matrix");
  return permute_systems(global, ps.global_dims(), party_perm(ps.m));
}

Mat to_global_order(const Mat& party, const PartySpaces& ps) {
  check_square(party, ps.total_dim(), "party-order operator");
  return permute_systems(party, ps.party_dims(), inverse_permutation(party_perm(ps.m)));
}

namespace {

// Gram-Schmidt (twice) over projected candidates, `first` kept as is.
std::vector<Mat> orthonormalize(const Mat& first, int n, const std::function<Mat(const Mat&)>& project, int expect) {
  std::vector<Mat> basis{first};
  for (const auto& entries : sdp::hermitian_basis_sparse(n)) {
    if (static_cast<int>(basis.size()) == expect) break;
    Mat v = project(sdp::dense(entries, n));
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= inner(b, v) * b;
    const double nv = v.norm();
    if (nv < 1e-8) continue;
    basis.push_back(hermitian_part(v / nv));
  }
  if (static_cast<int>(basis.size()) != expect) throw Error("basis construction lost rank");
  return basis;
}

}  // namespace

QSubspaceBasis q_basis(int party, int d_in, int d_out) {
  if (d_in < 1 || d_out < 1) throw ShapeError("dims must be positive");
  const int n = d_in * d_out;
  QSubspaceBasis q;
  q.party = party;
  q.d_in = d_in;
  q.d_out = d_out;
  auto project = [d_in, d_out](const Mat& x) {
    // Q-perp = {I_Y (x) H : Tr H = 0}.
    const Mat t = partial_trace(x, {d_out, d_in}, {0});
    const Mat h = (t - (t.trace() / static_cast<double>(d_in)) * Mat::Identity(d_in, d_in)) / static_cast<double>(d_out);
    return Mat(x - embed_identity(h, {d_in}, d_out, 0));
  };
  const int expect = n * n - d_in * d_in + 1;
  q.basis = orthonormalize(Mat::Identity(n, n) / std::sqrt(static_cast<double>(n)), n, project, expect);
  return q;
}

double q_membership_residual(const Mat& e, int d_in, int d_out) {
  check_square(e, static_cast<long>(d_in) * d_out, "operator");
  const Mat t = partial_trace(e, {d_out, d_in}, {0});
  return (t - (e.trace() / static_cast<double>(d_in)) * Mat::Identity(d_in, d_in)).norm();
}

std::string to_string(ConeTag t) { return t == ConeTag::full_hermitian ? "full-hermitian" : "q-subspace"; }

ConeTag cone_from_string(const std::string& s) {
  if (s == "full-hermitian") return ConeTag::full_hermitian;
  if (s == "q-subspace") return ConeTag::q_subspace;
  throw Error("unknown cone tag: " + s);
}

std::vector<PartyCone> q_cones(const PartySpaces& ps) {
  std::vector<PartyCone> c;
  for (int i = 0; i < ps.m; ++i) c.push_back({ConeTag::q_subspace, ps.in_dims[i], ps.out_dims[i]});
  return c;
}

std::vector<PartyCone> hermitian_cones(const PartySpaces& ps) {
  std::vector<PartyCone> c;
  for (int i = 0; i < ps.m; ++i) c.push_back({ConeTag::full_hermitian, ps.in_dims[i], ps.out_dims[i]});
  return c;
}

std::vector<Mat> cone_basis(const PartyCone& c) {
  if (c.tag == ConeTag::q_subspace) return q_basis(0, c.d_in, c.d_out).basis;
  const int n = static_cast<int>(c.dim());
  return orthonormalize(Mat::Identity(n, n) / std::sqrt(static_cast<double>(n)), n, [](const Mat& x) { return x; },
                        n * n);
}

// --- decompositions ---------------------------------------------------------

Mat SeparableDecomposition::reconstruct() const {
  long n = 1;
  for (const auto& c : cones) n *= c.dim();
  Mat out = Mat::Zero(n, n);
  for (const auto& t : terms) {
    Mat p = t.factors[0];
    for (size_t i = 1; i < t.factors.size(); ++i) p = kron(p, t.factors[i]);
    out += t.weight * p;
  }
  return out;
}

double SeparableDecomposition::total_weight() const {
  double w = 0.0;
  for (const auto& t : terms) w += t.weight;
  return w;
}

void SeparableDecomposition::add(double w, std::vector<Mat> factors) {
  if (factors.size() != cones.size()) throw ShapeError("need one factor per party");
  if (w == 0.0) return;
  for (size_t i = 0; i < factors.size(); ++i) {
    check_square(factors[i], cones[i].dim(), "factor");
    const double tr = factors[i].trace().real();
    if (tr <= 0.0) return;
    factors[i] = hermitian_part(factors[i]) / tr;
    w *= tr;
  }
  terms.push_back({w, std::move(factors)});
}

void SeparableDecomposition::append(const SeparableDecomposition& other, double scale) {
  for (const auto& t : other.terms) terms.push_back({t.weight * scale, t.factors});
}

DecompositionCheck verify_decomposition(const SeparableDecomposition& d, const Mat& target, double tol) {
  DecompositionCheck c;
  c.terms = static_cast<int>(d.terms.size());
  const Mat rec = d.reconstruct();
  check_square(target, rec.rows(), "target");
  c.reconstruction_residual = (rec - target).norm();
  c.min_factor_eigenvalue = 0.0;
  c.min_weight = d.terms.empty() ? 0.0 : d.terms[0].weight;
  bool first = true;
  for (const auto& t : d.terms) {
    c.min_weight = std::min(c.min_weight, t.weight);
    for (size_t i = 0; i < t.factors.size(); ++i) {
      const double e = min_eigenvalue(t.factors[i]);
      c.min_factor_eigenvalue = first ? e : std::min(c.min_factor_eigenvalue, e);
      first = false;
      if (d.cones[i].tag == ConeTag::q_subspace)
        c.max_cone_residual =
            std::max(c.max_cone_residual, q_membership_residual(t.factors[i], d.cones[i].d_in, d.cones[i].d_out));
    }
  }
  c.ok = c.reconstruction_residual <= tol * std::max(1.0, target.norm()) && c.min_factor_eigenvalue >= -tol &&
         c.max_cone_residual <= tol && c.min_weight >= 0.0;
  return c;
}

// --- generation ---------------------------------------------------------------

namespace {

// Rounding residue of ||E|| I - E when E is a multiple of I.
Mat drop_residue(Mat x, double scale) {
  if (x.norm() <= 64.0 * std::numeric_limits<double>::epsilon() * scale) x.setZero();
  return x;
}

struct Split {
  Mat plus;
  Mat minus;
};

Split split(const Mat& e) {
  const double nrm = operator_norm_hermitian(e);
  const Mat id = Mat::Identity(e.rows(), e.cols());
  const double scale = std::max(1.0, e.norm());
  return {drop_residue((nrm * id + e) / 2.0, scale), drop_residue((nrm * id - e) / 2.0, scale)};
}

// Tr_1[(E (x) I) x] for x on d1 (x) rest.
Mat contract_first(const Mat& e, const Mat& x, long d1) {
  const long r = x.rows() / d1;
  Mat out = Mat::Zero(r, r);
  for (long i = 0; i < d1; ++i)
    for (long j = 0; j < d1; ++j) {
      const cplx c = e(j, i);
      if (c == 0.0) continue;
      out += c * x.block(i * r, j * r, r, r);
    }
  return out;
}

// Coefficients <E_{k_1} (x) ... (x) E_{k_m}, x> in mixed radix, party 0 most significant.
void coefficients(const Mat& x, const std::vector<std::vector<Mat>>& bases, size_t party, std::vector<double>& out) {
  const auto& b = bases[party];
  if (party + 1 == bases.size()) {
    for (const auto& e : b) out.push_back(inner(e, x));
    return;
  }
  for (const auto& e : b) coefficients(contract_first(e, x, e.rows()), bases, party + 1, out);
}

struct Projection {
  std::vector<std::vector<Mat>> bases;
  std::vector<double> coeffs;
  Mat projected;
  int n = 1;
};

Projection project_product(const Mat& x, const std::vector<PartyCone>& cones) {
  Projection p;
  long dim = 1;
  for (const auto& c : cones) {
    p.bases.push_back(cone_basis(c));
    p.n *= static_cast<int>(p.bases.back().size());
    dim *= c.dim();
  }
  check_square(x, dim, "operator");
  const Mat h = hermitian_part(x);
  coefficients(h, p.bases, 0, p.coeffs);
  // Rebuild party by party: sum_k c_k E_k over the last party, then upward.
  std::function<Mat(size_t, size_t)> build = [&](size_t party, size_t offset) -> Mat {
    const auto& b = p.bases[party];
    size_t stride = 1;
    for (size_t q = party + 1; q < p.bases.size(); ++q) stride *= p.bases[q].size();
    Mat acc;
    for (size_t k = 0; k < b.size(); ++k) {
      Mat term = party + 1 == p.bases.size() ? Mat(p.coeffs[offset + k] * b[k])
                                             : kron(b[k], build(party + 1, offset + k * stride));
      acc = k == 0 ? term : Mat(acc + term);
    }
    return acc;
  };
  p.projected = build(0, 0);
  return p;
}

}  // namespace

SepGeneration sep_generate(const Mat& x, const std::vector<PartyCone>& cones, double tol) {
  if (cones.empty()) throw ShapeError("need at least one party");
  const int m = static_cast<int>(cones.size());
  const Projection p = project_product(x, cones);
  SepGeneration g;
  g.n = p.n;
  g.span_residual = (hermitian_part(x) - p.projected).norm();
  if (g.span_residual > tol * std::max(1.0, x.norm())) throw Error("operator lies outside the product space");
  g.bound = std::ldexp(1.0, m - 1) * std::sqrt(static_cast<double>(p.n)) * x.norm();
  g.plus.cones = cones;
  g.minus.cones = cones;

  std::vector<std::vector<Split>> splits(m);
  for (int i = 0; i < m; ++i)
    for (const auto& e : p.bases[i]) splits[i].push_back(split(e));

  std::vector<size_t> idx(m, 0);
  for (size_t j = 0; j < p.coeffs.size(); ++j) {
    const double c = p.coeffs[j];
    if (c != 0.0) {
      // Sign patterns with an even number of minus parts form K^+.
      for (unsigned pat = 0; pat < (1u << m); ++pat) {
        std::vector<Mat> f;
        int minus = 0;
        for (int i = 0; i < m; ++i) {
          const bool neg = (pat >> i) & 1u;
          minus += neg;
          f.push_back(neg ? splits[i][idx[i]].minus : splits[i][idx[i]].plus);
        }
        const bool k_plus = minus % 2 == 0;
        SeparableDecomposition& dst = (k_plus == (c > 0)) ? g.plus : g.minus;
        dst.add(std::abs(c), std::move(f));
      }
    }
    for (int i = m - 1; i >= 0; --i) {
      if (++idx[i] < p.bases[i].size()) break;
      idx[i] = 0;
    }
  }
  return g;
}

SeparableDecomposition product_complement(const std::vector<Mat>& p, const std::vector<PartyCone>& cones) {
  const size_t m = p.size();
  if (m != cones.size() || m == 0) throw ShapeError("need one factor per party");
  auto complement = [](const Mat& x) {
    return drop_residue(operator_norm_hermitian(x) * Mat::Identity(x.rows(), x.cols()) - hermitian_part(x),
                        std::max(1.0, x.norm()));
  };
  // Terms over the first i parties, as (weight, factors) without normalization.
  std::vector<std::pair<double, std::vector<Mat>>> s{{1.0, {complement(p[0])}}};
  std::vector<Mat> prefix{p[0]};
  for (size_t i = 1; i < m; ++i) {
    const Mat sp = complement(p[i]);
    std::vector<std::pair<double, std::vector<Mat>>> next;
    auto with = [](std::vector<Mat> f, const Mat& last) {
      f.push_back(last);
      return f;
    };
    next.push_back({1.0, with(prefix, sp)});
    for (const auto& [w, f] : s) next.push_back({w, with(f, p[i])});
    for (const auto& [w, f] : s) next.push_back({w, with(f, sp)});
    s = std::move(next);
    prefix.push_back(p[i]);
  }
  SeparableDecomposition d;
  d.cones = cones;
  for (auto& [w, f] : s) d.add(w, std::move(f));
  return d;
}

IdentityMinusSep identity_minus_sep(const Mat& x, const std::vector<PartyCone>& cones, double tol) {
  const SepGeneration g = sep_generate(x, cones, tol);
  const int m = static_cast<int>(cones.size());
  IdentityMinusSep out;
  out.c = std::ldexp(1.0, m - 1) * std::sqrt(static_cast<double>(g.n)) * (g.n + 1.0) * x.norm();
  out.decomposition.cones = cones;
  double used = 0.0;
  for (const auto& t : g.plus.terms) {
    double nrm = t.weight;
    for (const auto& f : t.factors) nrm *= operator_norm_hermitian(f);
    used += nrm;
    out.decomposition.append(product_complement(t.factors, cones), t.weight);
  }
  out.decomposition.append(g.minus);
  std::vector<Mat> ids;
  for (const auto& c : cones) ids.push_back(Mat::Identity(c.dim(), c.dim()));
  if (out.c - used < -1e-12 * std::max(1.0, out.c)) throw Error("separable norm bound violated");
  out.decomposition.add(std::max(0.0, out.c - used), ids);
  return out;
}

LosrBallCertificate losr_ball_certificate(const Mat& lambda_choi, const PartySpaces& ps, double tol) {
  if (ps.m > kMaxParties) throw Error("too many parties");
  check_square(lambda_choi, ps.total_dim(), "Choi matrix");
  const Dims gd = ps.global_dims();
  std::vector<int> ys;
  for (int i = 0; i < ps.m; ++i) ys.push_back(i);
  const long dx = dims_product(ps.in_dims), dy = dims_product(ps.out_dims);
  const double tp = (partial_trace(lambda_choi, gd, ys) - Mat::Identity(dx, dx)).norm();
  if (tp > tol * std::max(1.0, lambda_choi.norm())) throw Error("Choi matrix is not trace preserving");

  LosrBallCertificate cert;
  const std::vector<PartyCone> cones = q_cones(ps);
  const Mat a = to_party_order(Mat(Mat::Identity(dx * dy, dx * dy) - static_cast<double>(dy) * lambda_choi), ps);
  const Projection p = project_product(a, cones);
  cert.n = p.n;
  cert.span_residual = (hermitian_part(a) - p.projected).norm() / std::max(1.0, a.norm());
  cert.in_span = cert.span_residual <= tol;
  cert.k = std::ldexp(1.0, ps.m - 1) * std::sqrt(static_cast<double>(p.n)) * (p.n + 1.0);
  cert.radius = 1.0 / cert.k;
  cert.norm_a = p.projected.norm();
  cert.decomposition.cones = cones;
  if (!cert.in_span) return cert;
  // Relative slack so perturbations drawn exactly on the sphere count.
  cert.in_ball = cert.norm_a <= cert.radius * (1.0 + 1e-12);
  if (!cert.in_ball) return cert;

  const IdentityMinusSep ims = identity_minus_sep(p.projected, cones, tol);
  const double scale = 1.0 / static_cast<double>(dy);
  cert.decomposition.append(ims.decomposition, scale);
  std::vector<Mat> ids;
  for (const auto& c : cones) ids.push_back(Mat::Identity(c.dim(), c.dim()));
  cert.decomposition.add(std::max(0.0, 1.0 - ims.c) * scale, ids);
  return cert;
}

LosrMixture to_losr_mixture(const SeparableDecomposition& d) {
  LosrMixture mix;
  for (const auto& c : d.cones)
    if (c.tag != ConeTag::q_subspace) throw Error("LOSR mixtures need Q-subspace cones");
  for (const auto& t : d.terms) {
    double p = t.weight;
    std::vector<Mat> ch;
    for (size_t i = 0; i < t.factors.size(); ++i) {
      const double din = d.cones[i].d_in;
      ch.push_back(t.factors[i] * din);
      p /= din;
    }
    mix.probs.push_back(p);
    mix.channels.push_back(std::move(ch));
  }
  return mix;
}

NoSignalingReport no_signaling_check(const Mat& lambda_choi, const PartySpaces& ps, double tol) {
  if (ps.m > kMaxParties) throw Error("too many parties");
  check_square(lambda_choi, ps.total_dim(), "Choi matrix");
  const int m = ps.m;
  const Dims gd = ps.global_dims();
  const double scale = std::max(1.0, lambda_choi.norm());
  if (hermiticity_residual(lambda_choi) > tol * scale || min_eigenvalue(hermitian_part(lambda_choi)) < -tol * scale)
    throw Error("Choi matrix is not positive semidefinite");
  std::vector<int> ys;
  for (int i = 0; i < m; ++i) ys.push_back(i);
  const long dx = dims_product(ps.in_dims);
  if ((partial_trace(lambda_choi, gd, ys) - Mat::Identity(dx, dx)).norm() > tol * scale)
    throw Error("Choi matrix is not trace preserving");

  const unsigned count = 1u << m;
  NoSignalingReport rep;
  rep.subsets.resize(count);
  rep.residuals.resize(count);
  const Mat j = hermitian_part(lambda_choi);
#pragma omp parallel for schedule(static)
  for (int mask = 0; mask < static_cast<int>(count); ++mask) {
    std::vector<int> traced;
    Dims rest;
    for (int i = 0; i < m; ++i) {
      if ((mask >> i) & 1)
        traced.push_back(i);
      else
        rest.push_back(ps.out_dims[i]);
    }
    const int kept = static_cast<int>(rest.size());
    rest.insert(rest.end(), ps.in_dims.begin(), ps.in_dims.end());
    const Mat mk = partial_trace(j, gd, traced);
    std::vector<int> xk;
    double dk = 1.0;
    for (int i : traced) {
      xk.push_back(kept + i);
      dk *= ps.in_dims[i];
    }
    Mat q = partial_trace(mk, rest, xk) / dk;
    Dims qd;
    for (int i = 0; i < kept; ++i) qd.push_back(rest[i]);
    for (int i = 0; i < m; ++i)
      if (!((mask >> i) & 1)) qd.push_back(ps.in_dims[i]);
    for (int i : traced) {
      const int pos = kept + i;
      q = embed_identity(q, qd, ps.in_dims[i], pos);
      qd.insert(qd.begin() + pos, ps.in_dims[i]);
    }
    rep.subsets[mask] = static_cast<unsigned>(mask);
    rep.residuals[mask] = (mk - q).norm();
  }
  rep.max_residual = 0.0;
  for (double r : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);
  rep.ok = rep.max_residual <= tol;
  return rep;
}

NonlocalBox nonlocal_box() {
  NonlocalBox box;
  box.spaces = PartySpaces({2, 2}, {2, 2});
  auto unit = [](int from, int to) {
    Mat e = Mat::Zero(2, 2);
    e(to, from) = 1.0;
    return e;
  };
  // (a -> b on party 1, c -> d on party 2)
  const int pairs[8][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}, {0, 1, 1, 1},
                           {1, 0, 0, 0}, {1, 1, 0, 1}, {1, 0, 1, 1}, {1, 1, 1, 0}};
  std::vector<Mat> kraus;
  box.decomposition.cones = hermitian_cones(box.spaces);
  for (const auto& p : pairs) {
    const Mat e = unit(p[0], p[1]), f = unit(p[2], p[3]);
    kraus.push_back(kron(e, f) / std::sqrt(2.0));
    const Vec ce = col(e), cf = col(f);
    box.decomposition.add(0.5, {Mat(ce * ce.adjoint()), Mat(cf * cf.adjoint())});
  }
  box.channel = SuperOperator::from_kraus(kraus, {2, 2}, {2, 2});
  box.choi = choi(box.channel).mat;
  return box;
}

}  // namespace qsk
