#include "qsk/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace qsk {
namespace sdp {

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::primal_infeasible_suspected:
      return "primal_infeasible_suspected";
    case Status::dual_infeasible_suspected:
      return "dual_infeasible_suspected";
    case Status::max_iter:
      return "max_iter";
  }
  return "unknown";
}

std::vector<std::vector<Entry>> hermitian_basis_sparse(int n) {
  std::vector<std::vector<Entry>> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) basis.push_back({{j, j, 1.0}});
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      basis.push_back({{j, k, r}, {k, j, r}});
      basis.push_back({{j, k, cplx(0, r)}, {k, j, cplx(0, -r)}});
    }
  return basis;
}

Mat dense(const std::vector<Entry>& e, int n) {
  Mat m = Mat::Zero(n, n);
  for (const auto& x : e) m(x.row, x.col) += x.v;
  return m;
}

int Builder::add_block(int dim) {
  form_.block_dims.push_back(dim);
  form_.c.push_back(Mat::Zero(dim, dim));
  return static_cast<int>(form_.block_dims.size()) - 1;
}

void Builder::set_cost(int block, const Mat& c) { form_.c.at(block) = hermitian_part(c); }

int Builder::add_equality(int out_dim, const Mat& rhs, const std::vector<Term>& terms) {
  const int first = static_cast<int>(form_.cons.size());
  for (const auto& e : hermitian_basis_sparse(out_dim)) {
    Constraint con;
    const Mat ed = dense(e, out_dim);
    con.rhs = inner(ed, rhs);
    std::map<int, Mat> acc;
    for (const auto& t : terms) {
      Mat a = t.adjoint(ed);
      auto it = acc.find(t.block);
      if (it == acc.end())
        acc.emplace(t.block, a);
      else
        it->second += a;
    }
    for (auto& [block, a] : acc) {
      ConstraintPart part{block, {}};
      for (long q = 0; q < a.cols(); ++q)
        for (long p = 0; p < a.rows(); ++p)
          if (std::abs(a(p, q)) > 1e-15) part.entries.push_back({static_cast<int>(p), static_cast<int>(q), a(p, q)});
      if (!part.entries.empty()) con.parts.push_back(std::move(part));
    }
    form_.cons.push_back(std::move(con));
  }
  groups_.push_back({first, out_dim});
  return static_cast<int>(groups_.size()) - 1;
}

Mat Builder::multiplier(int group, const Eigen::VectorXd& y) const {
  const auto& g = groups_.at(group);
  Mat m = Mat::Zero(g.dim, g.dim);
  int k = g.first;
  for (const auto& e : hermitian_basis_sparse(g.dim)) {
    for (const auto& x : e) m(x.row, x.col) += y(k) * x.v;
    ++k;
  }
  return m;
}

namespace {

// Constraint part with entries grouped by column for the Schur products.
struct Part {
  int con;
  std::vector<int> cols;
  std::vector<std::vector<std::pair<int, cplx>>> by_col;
  std::vector<Entry> entries;
};

struct Work {
  int nblocks = 0;
  int m = 0;
  std::vector<int> n;
  std::vector<std::vector<Part>> parts;  // per block
  std::vector<Mat> c;
  Eigen::VectorXd b;
};

using Blocks = std::vector<Mat>;

double blocks_inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

double blocks_norm(const Blocks& a) { return std::sqrt(std::max(0.0, blocks_inner(a, a))); }

Eigen::VectorXd op_a(const Work& w, const Blocks& x) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(w.m);
  for (int b = 0; b < w.nblocks; ++b)
    for (const auto& p : w.parts[b]) {
      double s = 0.0;
      for (const auto& e : p.entries) s += (std::conj(e.v) * x[b](e.row, e.col)).real();
      r(p.con) += s;
    }
  return r;
}

Blocks op_at(const Work& w, const Eigen::VectorXd& y) {
  Blocks out(w.nblocks);
  for (int b = 0; b < w.nblocks; ++b) {
    out[b] = Mat::Zero(w.n[b], w.n[b]);
    for (const auto& p : w.parts[b]) {
      const double yi = y(p.con);
      if (yi == 0.0) continue;
      for (const auto& e : p.entries) out[b](e.row, e.col) += yi * e.v;
    }
  }
  return out;
}

Mat inverse_pd(const Mat& x) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() == Eigen::Success) return llt.solve(Mat::Identity(x.rows(), x.cols()));
  Eigen::SelfAdjointEigenSolver<Mat> es(x);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-300).cwiseInverse();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Largest alpha with x + alpha*dx >= 0 (infinity when unbounded).
double max_step(const Mat& x, const Mat& dx) {
  Eigen::LLT<Mat> llt(x);
  double lmin;
  if (llt.info() == Eigen::Success) {
    Mat l = llt.matrixL();
    Mat t = l.triangularView<Eigen::Lower>().solve(dx);
    Mat w = l.triangularView<Eigen::Lower>().solve(t.adjoint()).adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(w), Eigen::EigenvaluesOnly);
    lmin = es.eigenvalues()(0);
  } else {
    return 0.0;
  }
  if (lmin >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

Eigen::MatrixXd schur(const Work& w, const Blocks& x, const Blocks& zinv) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(w.m, w.m);
  for (int b = 0; b < w.nblocks; ++b) {
    const int n = w.n[b];
    for (const auto& pi : w.parts[b]) {
      const long k = static_cast<long>(pi.cols.size());
      Mat t = Mat::Zero(n, k);
      Mat zs(k, n);
      for (long c = 0; c < k; ++c) {
        for (const auto& [row, v] : pi.by_col[c]) t.col(c) += x[b].col(row) * v;
        zs.row(c) = zinv[b].row(pi.cols[c]);
      }
      const Mat g = t * zs;  // X A_i Z^{-1}
      for (const auto& pj : w.parts[b]) {
        double s = 0.0;
        for (const auto& e : pj.entries) s += (e.v * g(e.col, e.row)).real();
        m(pi.con, pj.con) += s;
      }
    }
  }
  return (m + m.transpose()) * 0.5;
}

struct Direction {
  Blocks dx, dz;
  Eigen::VectorXd dy;
};

class SchurSolver {
 public:
  explicit SchurSolver(const Eigen::MatrixXd& m) {
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) {
      double reg = 1e-14 * std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
      for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::MatrixXd mr = m;
        mr.diagonal().array() += reg;
        llt_.compute(mr);
        if (llt_.info() == Eigen::Success) break;
        reg *= 10.0;
      }
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const { return llt_.solve(r); }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

Direction direction(const Work& w, const SchurSolver& solver, const Blocks& x, const Blocks& zinv,
                    const Eigen::VectorXd& rp, const Blocks& rd, const Blocks& rc) {
  Blocks xrz(w.nblocks);
  for (int b = 0; b < w.nblocks; ++b) xrz[b] = x[b] * rd[b] * zinv[b];
  Eigen::VectorXd rhs = rp - op_a(w, rc) + op_a(w, xrz);
  Direction d;
  d.dy = solver.solve(rhs);
  Blocks aty = op_at(w, d.dy);
  d.dz.resize(w.nblocks);
  d.dx.resize(w.nblocks);
  for (int b = 0; b < w.nblocks; ++b) {
    d.dz[b] = hermitian_part(rd[b] - aty[b]);
    d.dx[b] = hermitian_part(rc[b] - x[b] * d.dz[b] * zinv[b]);
  }
  return d;
}

}  // namespace

CoreResult solve_standard(const StandardForm& p, const Options& opt) {
  if (opt.tol <= 0) throw Error("tolerance must be positive");
  Work w;
  w.nblocks = static_cast<int>(p.block_dims.size());
  w.n = p.block_dims;
  w.parts.resize(w.nblocks);

  // Row normalization; all-zero rows are dropped (or decide infeasibility).
  std::vector<int> kept;
  std::vector<double> row_norm;
  bool trivially_infeasible = false;
  for (size_t i = 0; i < p.cons.size(); ++i) {
    double s = 0.0;
    for (const auto& part : p.cons[i].parts)
      for (const auto& e : part.entries) s += std::norm(e.v);
    s = std::sqrt(s);
    if (s == 0.0) {
      if (std::abs(p.cons[i].rhs) > 0.0) trivially_infeasible = true;
      continue;
    }
    kept.push_back(static_cast<int>(i));
    row_norm.push_back(s);
  }
  w.m = static_cast<int>(kept.size());
  Eigen::VectorXd btil(w.m);
  for (int k = 0; k < w.m; ++k) {
    const auto& con = p.cons[kept[k]];
    btil(k) = con.rhs / row_norm[k];
    for (const auto& part : con.parts) {
      Part q;
      q.con = k;
      for (const auto& e : part.entries) q.entries.push_back({e.row, e.col, e.v / row_norm[k]});
      std::map<int, std::vector<std::pair<int, cplx>>> cols;
      for (const auto& e : q.entries) cols[e.col].push_back({e.row, e.v});
      for (auto& [c, list] : cols) {
        q.cols.push_back(c);
        q.by_col.push_back(std::move(list));
      }
      w.parts[part.block].push_back(std::move(q));
    }
  }
  w.c.resize(w.nblocks);
  for (int b = 0; b < w.nblocks; ++b) w.c[b] = hermitian_part(p.c[b]);
  const double sb = std::max(1.0, btil.norm());
  const double sc = std::max(1.0, blocks_norm(w.c));
  w.b = btil / sb;
  for (auto& c : w.c) c /= sc;

  CoreResult res;
  if (trivially_infeasible) {
    res.status = Status::primal_infeasible_suspected;
    return res;
  }

  long ntot = 0;
  for (int nb : w.n) ntot += nb;
  const double sqn = std::sqrt(static_cast<double>(ntot));
  double xi = std::max(10.0, sqn), eta = std::max(10.0, sqn);
  for (int k = 0; k < w.m; ++k) xi = std::max(xi, static_cast<double>(ntot) * (1.0 + std::abs(w.b(k))) / 2.0);
  for (const auto& c : w.c) eta = std::max(eta, c.norm());

  Blocks x(w.nblocks), z(w.nblocks);
  for (int b = 0; b < w.nblocks; ++b) {
    x[b] = xi * Mat::Identity(w.n[b], w.n[b]);
    z[b] = eta * Mat::Identity(w.n[b], w.n[b]);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(w.m);
  const double bnorm = w.b.norm(), cnorm = blocks_norm(w.c);
  int stalls = 0;

  auto finish = [&](Status st, int iter) {
    res.status = st;
    res.iterations = iter;
    res.x.resize(w.nblocks);
    res.z.resize(w.nblocks);
    for (int b = 0; b < w.nblocks; ++b) {
      res.x[b] = x[b] * sb;
      res.z[b] = z[b] * sc;
    }
    res.y = Eigen::VectorXd::Zero(static_cast<long>(p.cons.size()));
    for (int k = 0; k < w.m; ++k) res.y(kept[k]) = y(k) * sc / row_norm[k];
    res.primal_objective = blocks_inner(w.c, x) * sc * sb;
    res.dual_objective = w.b.dot(y) * sc * sb;
    return res;
  };

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    const Eigen::VectorXd ax = op_a(w, x);
    const Eigen::VectorXd rp = w.b - ax;
    const Blocks aty = op_at(w, y);
    Blocks rd(w.nblocks);
    for (int b = 0; b < w.nblocks; ++b) rd[b] = w.c[b] - z[b] - aty[b];
    const double pobj = blocks_inner(w.c, x), dobj = w.b.dot(y);
    const double pinf = rp.norm() / (1.0 + bnorm), dinf = blocks_norm(rd) / (1.0 + cnorm);
    // Gap measured in the caller's units: the scaled objectives can be tiny.
    const double us = sc * sb;
    const double relgap = us * std::abs(pobj - dobj) / (1.0 + us * (std::abs(pobj) + std::abs(dobj)));
    res.primal_infeasibility = pinf;
    res.dual_infeasibility = dinf;
    res.relative_gap = relgap;
    if (pinf <= opt.tol && dinf <= opt.tol && relgap <= opt.tol) return finish(Status::optimal, iter);

    // Farkas rays: (y, Z) with A*y + Z ~ 0 and b^T y > 0 certifies primal
    // infeasibility; X with A(X) ~ 0 and <C,X> < 0 certifies dual infeasibility.
    if (dobj > 0.0) {
      Blocks ray(w.nblocks);
      for (int b = 0; b < w.nblocks; ++b) ray[b] = aty[b] + z[b];
      if (blocks_norm(ray) / dobj <= opt.tol) return finish(Status::primal_infeasible_suspected, iter);
    }
    if (pobj < 0.0 && ax.norm() / (-pobj) <= opt.tol) return finish(Status::dual_infeasible_suspected, iter);
    if (iter == opt.max_iter) break;

    double mu = blocks_inner(x, z) / static_cast<double>(ntot);
    Blocks zinv(w.nblocks);
    for (int b = 0; b < w.nblocks; ++b) zinv[b] = inverse_pd(z[b]);
    const SchurSolver solver(schur(w, x, zinv));

    // Predictor.
    Blocks rc(w.nblocks);
    for (int b = 0; b < w.nblocks; ++b) rc[b] = -x[b];
    Direction aff = direction(w, solver, x, zinv, rp, rd, rc);
    double ap = 1.0, ad = 1.0;
    for (int b = 0; b < w.nblocks; ++b) {
      ap = std::min(ap, max_step(x[b], aff.dx[b]));
      ad = std::min(ad, max_step(z[b], aff.dz[b]));
    }
    double mu_aff = 0.0;
    for (int b = 0; b < w.nblocks; ++b) mu_aff += inner(x[b] + ap * aff.dx[b], z[b] + ad * aff.dz[b]);
    mu_aff /= static_cast<double>(ntot);
    double sigma = mu > 0 ? std::pow(std::max(0.0, mu_aff) / mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    for (int b = 0; b < w.nblocks; ++b)
      rc[b] = sigma * mu * zinv[b] - x[b] - aff.dx[b] * aff.dz[b] * zinv[b];
    Direction d = direction(w, solver, x, zinv, rp, rd, rc);
    double sp = std::numeric_limits<double>::infinity(), sd = sp;
    for (int b = 0; b < w.nblocks; ++b) {
      sp = std::min(sp, max_step(x[b], d.dx[b]));
      sd = std::min(sd, max_step(z[b], d.dz[b]));
    }
    const double gamma = 0.9 + 0.09 * std::min({1.0, ap, ad});
    const double alpha_p = std::min(1.0, gamma * sp), alpha_d = std::min(1.0, gamma * sd);
    for (int b = 0; b < w.nblocks; ++b) {
      x[b] = hermitian_part(x[b] + alpha_p * d.dx[b]);
      z[b] = hermitian_part(z[b] + alpha_d * d.dz[b]);
    }
    y += alpha_d * d.dy;

    stalls = (alpha_p < 1e-10 && alpha_d < 1e-10) ? stalls + 1 : 0;
    if (stalls >= 5) return finish(Status::max_iter, iter + 1);
  }
  return finish(Status::max_iter, opt.max_iter);
}

}  // namespace sdp

long block_dim(const Dims& d) { return dims_product(d); }

Mat block_diag(const BlockOps& blocks) {
  long n = 0;
  for (const auto& b : blocks) n += b.rows();
  Mat m = Mat::Zero(n, n);
  long o = 0;
  for (const auto& b : blocks) {
    m.block(o, o, b.rows(), b.cols()) = b;
    o += b.rows();
  }
  return m;
}

BlockOps split_blocks(const Mat& m, const BlockShapes& shapes) {
  BlockOps out;
  long o = 0;
  for (const auto& s : shapes) {
    const long n = block_dim(s);
    if (o + n > m.rows()) throw ShapeError("operator smaller than its declared blocks");
    out.push_back(m.block(o, o, n, n));
    o += n;
  }
  if (o != m.rows()) throw ShapeError("operator size does not match declared blocks");
  return out;
}

namespace {
long total_dim(const BlockShapes& s) {
  long n = 0;
  for (const auto& d : s) n += block_dim(d);
  return n;
}
}  // namespace

BlockOps LinearOperatorMap::apply(const BlockOps& x) const {
  if (x.size() != in_blocks.size()) throw ShapeError("input block count mismatch");
  BlockOps out;
  for (const auto& s : out_blocks) out.push_back(Mat::Zero(block_dim(s), block_dim(s)));
  for (const auto& p : parts)
    out[p.out_block] += apply_choi(p.choi, block_dim(out_blocks[p.out_block]), block_dim(in_blocks[p.in_block]),
                                   x[p.in_block]);
  return out;
}

LinearOperatorMap LinearOperatorMap::from_function(const BlockShapes& in, const BlockShapes& out,
                                                   const std::function<BlockOps(const BlockOps&)>& fn) {
  LinearOperatorMap m;
  m.in_blocks = in;
  m.out_blocks = out;
  for (size_t ib = 0; ib < in.size(); ++ib) {
    const long ni = block_dim(in[ib]);
    std::vector<Mat> acc;
    for (const auto& s : out) acc.push_back(Mat::Zero(block_dim(s) * ni, block_dim(s) * ni));
    for (long i = 0; i < ni; ++i)
      for (long j = 0; j < ni; ++j) {
        BlockOps x;
        for (const auto& s : in) x.push_back(Mat::Zero(block_dim(s), block_dim(s)));
        x[ib](i, j) = 1.0;
        BlockOps y = fn(x);
        if (y.size() != out.size()) throw ShapeError("map returned wrong block count");
        for (size_t ob = 0; ob < out.size(); ++ob) {
          const Mat& yo = y[ob];
          for (long v = 0; v < yo.cols(); ++v)
            for (long u = 0; u < yo.rows(); ++u)
              if (yo(u, v) != 0.0) acc[ob](u * ni + i, v * ni + j) += yo(u, v);
        }
      }
    for (size_t ob = 0; ob < out.size(); ++ob)
      if (acc[ob].norm() > 0.0)
        m.parts.push_back({static_cast<int>(ob), static_cast<int>(ib), std::move(acc[ob])});
  }
  return m;
}

double LinearOperatorMap::hermiticity_residual(Rng& rng, int samples) const {
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    BlockOps x;
    for (const auto& d : in_blocks) x.push_back(random_hermitian(block_dim(d), rng));
    for (const auto& y : apply(x)) worst = std::max(worst, qsk::hermiticity_residual(y));
  }
  return worst;
}

Mat LinearOperatorMap::full_choi() const {
  const long ni = total_dim(in_blocks), no = total_dim(out_blocks);
  std::vector<long> ioff, ooff;
  long o = 0;
  for (const auto& s : in_blocks) {
    ioff.push_back(o);
    o += block_dim(s);
  }
  o = 0;
  for (const auto& s : out_blocks) {
    ooff.push_back(o);
    o += block_dim(s);
  }
  Mat j = Mat::Zero(no * ni, no * ni);
  for (const auto& p : parts) {
    const long bo = block_dim(out_blocks[p.out_block]), bi = block_dim(in_blocks[p.in_block]);
    for (long y = 0; y < bo; ++y)
      for (long x = 0; x < bi; ++x)
        for (long yp = 0; yp < bo; ++yp)
          for (long xp = 0; xp < bi; ++xp)
            j((ooff[p.out_block] + y) * ni + ioff[p.in_block] + x, (ooff[p.out_block] + yp) * ni + ioff[p.in_block] + xp) +=
                p.choi(y * bi + x, yp * bi + xp);
  }
  return j;
}

LinearOperatorMap LinearOperatorMap::from_full_choi(const Mat& j, const BlockShapes& in, const BlockShapes& out) {
  const long ni = total_dim(in), no = total_dim(out);
  if (j.rows() != ni * no || j.cols() != ni * no) throw ShapeError("Choi matrix does not match block shapes");
  LinearOperatorMap m;
  m.in_blocks = in;
  m.out_blocks = out;
  long oo = 0;
  for (size_t ob = 0; ob < out.size(); ++ob) {
    const long bo = block_dim(out[ob]);
    long io = 0;
    for (size_t ib = 0; ib < in.size(); ++ib) {
      const long bi = block_dim(in[ib]);
      Mat c(bo * bi, bo * bi);
      for (long y = 0; y < bo; ++y)
        for (long x = 0; x < bi; ++x)
          for (long yp = 0; yp < bo; ++yp)
            for (long xp = 0; xp < bi; ++xp)
              c(y * bi + x, yp * bi + xp) = j((oo + y) * ni + io + x, (oo + yp) * ni + io + xp);
      if (c.norm() > 0.0) m.parts.push_back({static_cast<int>(ob), static_cast<int>(ib), c});
      io += bi;
    }
    oo += bo;
  }
  return m;
}

LinearOperatorMap adjoint_map(const LinearOperatorMap& phi) {
  LinearOperatorMap a;
  a.in_blocks = phi.out_blocks;
  a.out_blocks = phi.in_blocks;
  for (const auto& p : phi.parts)
    a.parts.push_back({p.in_block, p.out_block,
                       choi_adjoint(p.choi, block_dim(phi.out_blocks[p.out_block]), block_dim(phi.in_blocks[p.in_block]))});
  return a;
}

namespace {

Dims flat_dims(const BlockShapes& s) { return {static_cast<int>(total_dim(s))}; }

double min_eig_blocks(const BlockOps& b) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& x : b) m = std::min(m, min_eigenvalue(x));
  return b.empty() ? 0.0 : m;
}

SdpResiduals residuals_of(const SdpProblem& p, const BlockOps& x, const BlockOps& y) {
  const BlockOps a = split_blocks(p.a.mat(), p.phi.in_blocks);
  const BlockOps b = split_blocks(p.b.mat(), p.phi.out_blocks);
  const BlockOps px = p.phi.apply(x);
  const BlockOps py = adjoint_map(p.phi).apply(y);
  BlockOps slack_p, slack_d;
  for (size_t i = 0; i < b.size(); ++i) slack_p.push_back(b[i] - px[i]);
  for (size_t i = 0; i < a.size(); ++i) slack_d.push_back(py[i] - a[i]);
  return {min_eig_blocks(x), min_eig_blocks(slack_p), min_eig_blocks(y), min_eig_blocks(slack_d)};
}

}  // namespace

SdpSolution solve(const SdpProblem& p, double tol, int max_iter) {
  if (tol <= 0) throw Error("tolerance must be positive");
  const BlockShapes& ins = p.phi.in_blocks;
  const BlockShapes& outs = p.phi.out_blocks;
  if (p.a.dim() != total_dim(ins) || p.b.dim() != total_dim(outs)) throw ShapeError("A or B does not match phi");
  const BlockOps a = split_blocks(p.a.mat(), ins);
  const BlockOps bb = split_blocks(p.b.mat(), outs);
  const LinearOperatorMap adj = adjoint_map(p.phi);

  // Variables: the input blocks X, then one slack block per output block.
  sdp::Builder builder;
  for (size_t i = 0; i < ins.size(); ++i) {
    const int blk = builder.add_block(static_cast<int>(block_dim(ins[i])));
    builder.set_cost(blk, -a[i]);
  }
  std::vector<int> slack;
  for (const auto& s : outs) slack.push_back(builder.add_block(static_cast<int>(block_dim(s))));
  std::vector<int> groups;
  for (size_t o = 0; o < outs.size(); ++o) {
    std::vector<sdp::Builder::Term> terms;
    for (const auto& part : adj.parts) {
      if (part.in_block != static_cast<int>(o)) continue;
      const long dout = block_dim(ins[part.out_block]), din = block_dim(outs[o]);
      const Mat* choi = &part.choi;
      terms.push_back({part.out_block, [choi, dout, din](const Mat& e) { return apply_choi(*choi, dout, din, e); }});
    }
    terms.push_back({slack[o], [](const Mat& e) { return e; }});
    groups.push_back(builder.add_equality(static_cast<int>(block_dim(outs[o])), bb[o], terms));
  }

  sdp::Options opt{tol, max_iter};
  const sdp::CoreResult core = sdp::solve_standard(builder.form(), opt);

  SdpSolution s;
  s.status = core.status;
  s.iterations = core.iterations;
  BlockOps x(core.x.begin(), core.x.begin() + static_cast<long>(ins.size()));
  BlockOps y;
  for (size_t o = 0; o < outs.size(); ++o) y.push_back(-builder.multiplier(groups[o], core.y));
  s.primal_x = HermitianOperator(block_diag(x), flat_dims(ins), 1.0);
  s.dual_y = HermitianOperator(block_diag(y), flat_dims(outs), 1.0);
  s.primal_value = inner(p.a.mat(), s.primal_x.mat());
  s.dual_value = inner(p.b.mat(), s.dual_y.mat());
  s.gap = s.dual_value - s.primal_value;
  s.residuals = residuals_of(p, x, y);
  return s;
}

VerifyReport verify_solution(const SdpProblem& p, const SdpSolution& s, double tol) {
  VerifyReport r;
  const BlockOps x = split_blocks(s.primal_x.mat(), p.phi.in_blocks);
  const BlockOps y = split_blocks(s.dual_y.mat(), p.phi.out_blocks);
  r.residuals = residuals_of(p, x, y);
  const double sx = std::max(1.0, s.primal_x.mat().norm()), sy = std::max(1.0, s.dual_y.mat().norm());
  const double sa = std::max(1.0, p.a.mat().norm()), sbn = std::max(1.0, p.b.mat().norm());
  r.primal_psd = r.residuals.primal_min_eig >= -tol * sx;
  r.primal_feasible = r.residuals.primal_slack_min_eig >= -tol * sbn;
  r.dual_psd = r.residuals.dual_min_eig >= -tol * sy;
  r.dual_feasible = r.residuals.dual_slack_min_eig >= -tol * sa;
  r.primal_value = inner(p.a.mat(), s.primal_x.mat());
  r.dual_value = inner(p.b.mat(), s.dual_y.mat());
  r.gap = r.dual_value - r.primal_value;
  r.gap_ok = std::abs(r.gap) <= tol * (1.0 + std::abs(r.primal_value) + std::abs(r.dual_value));
  r.ok = r.primal_psd && r.primal_feasible && r.dual_psd && r.dual_feasible && r.gap_ok;
  return r;
}

}  // namespace qsk
