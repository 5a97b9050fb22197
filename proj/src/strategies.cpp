#include "qsk/strategies.hpp"

#include <algorithm>
#include <cmath>

namespace qsk {

std::string to_string(Kind k) { return k == Kind::strategy ? "strategy" : "costrategy"; }

Kind opposite(Kind k) { return k == Kind::strategy ? Kind::costrategy : Kind::strategy; }

RoundSpaces::RoundSpaces(Dims in, Dims out) : in_dims(std::move(in)), out_dims(std::move(out)) {
  if (in_dims.size() != out_dims.size()) throw ShapeError("round spaces need as many inputs as outputs");
  r = static_cast<int>(in_dims.size());
  for (int d : in_dims)
    if (d < 1) throw ShapeError("message dimension must be >= 1");
  for (int d : out_dims)
    if (d < 1) throw ShapeError("message dimension must be >= 1");
}

Dims RoundSpaces::layout() const { return chain::strat_dims(*this, r); }

RoundSpaces RoundSpaces::prefix(int k) const {
  if (k < 0 || k > r) throw ShapeError("prefix length out of range");
  return RoundSpaces(Dims(in_dims.begin(), in_dims.begin() + k), Dims(out_dims.begin(), out_dims.begin() + k));
}

HermitianOperator MeasuringStrategy::total() const {
  if (qs.empty()) throw Error("measuring strategy has no outcomes");
  Mat s = Mat::Zero(qs[0].dim(), qs[0].dim());
  for (const auto& q : qs) s += q.mat();
  return HermitianOperator(s, qs[0].dims());
}

int MeasuringStrategy::index_of(const std::string& label) const {
  for (size_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i] == label) return static_cast<int>(i);
  throw Error("unknown outcome label: " + label);
}

namespace chain {

Dims strat_dims(const RoundSpaces& s, int k) {
  Dims d(s.out_dims.begin(), s.out_dims.begin() + k);
  d.insert(d.end(), s.in_dims.begin(), s.in_dims.begin() + k);
  if (d.empty()) d = {1};
  return d;
}

Dims co_dims(const RoundSpaces& s, int k) {
  Dims d(s.out_dims.begin(), s.out_dims.begin() + (k - 1));
  d.insert(d.end(), s.in_dims.begin(), s.in_dims.begin() + k);
  if (d.empty()) d = {1};
  return d;
}

namespace {

int dim_of(const Dims& d) { return static_cast<int>(dims_product(d)); }

Mat scalar_identity_adjoint(const Mat& e) { return Mat::Constant(1, 1, -e.trace()); }

}  // namespace

Groups add_constraints(sdp::Builder& b, const RoundSpaces& s, Kind kind,
                       const std::vector<sdp::Builder::Term>& top_terms, const Mat& top_const, int scale_block,
                       double scale_const) {
  using Term = sdp::Builder::Term;
  Groups g;
  const int r = s.r;
  if (r == 0) {
    std::vector<Term> terms = top_terms;
    Mat rhs = Mat::Constant(1, 1, scale_const) - top_const;
    if (scale_block >= 0) {
      terms.push_back({scale_block, [](const Mat& e) { return Mat(-e); }});
      rhs(0, 0) = -top_const(0, 0);
    }
    g.ids.push_back(b.add_equality(1, rhs, terms));
    return g;
  }

  if (kind == Kind::strategy) {
    for (int k = 1; k < r; ++k) g.chain_blocks.push_back(b.add_block(dim_of(strat_dims(s, k))));
    for (int k = 1; k <= r; ++k) {
      const Dims cd = co_dims(s, k);
      const int dy = s.out_dims[k - 1];
      std::vector<Term> terms;
      Mat rhs = Mat::Zero(dim_of(cd), dim_of(cd));
      auto up = [cd, dy, k](const Mat& e) { return embed_identity(e, cd, dy, k - 1); };
      if (k < r) {
        terms.push_back({g.chain_blocks[k - 1], up});
      } else {
        for (const auto& t : top_terms) {
          auto adj = t.adjoint;
          terms.push_back({t.block, [adj, up](const Mat& e) { return adj(up(e)); }});
        }
        rhs -= partial_trace(top_const, strat_dims(s, r), {k - 1});
      }
      if (k > 1) {
        const int last = static_cast<int>(cd.size()) - 1;
        terms.push_back({g.chain_blocks[k - 2], [cd, last](const Mat& e) { return Mat(-partial_trace(e, cd, {last})); }});
      } else if (scale_block >= 0) {
        terms.push_back({scale_block, scalar_identity_adjoint});
      } else {
        rhs += scale_const * Mat::Identity(rhs.rows(), rhs.cols());
      }
      g.ids.push_back(b.add_equality(dim_of(cd), rhs, terms));
    }
    return g;
  }

  for (int k = 1; k <= r; ++k) g.chain_blocks.push_back(b.add_block(dim_of(co_dims(s, k))));
  {
    const int dx = s.in_dims[0];
    std::vector<Term> terms{{g.chain_blocks[0], [dx](const Mat& e) { return Mat(e(0, 0) * Mat::Identity(dx, dx)); }}};
    Mat rhs = Mat::Constant(1, 1, scale_const);
    if (scale_block >= 0) {
      terms.push_back({scale_block, [](const Mat& e) { return Mat(-e); }});
      rhs(0, 0) = 0.0;
    }
    g.ids.push_back(b.add_equality(1, rhs, terms));
  }
  for (int k = 2; k <= r; ++k) {
    const Dims sd = strat_dims(s, k - 1);
    const int dx = s.in_dims[k - 1];
    const int last = static_cast<int>(sd.size());
    std::vector<Term> terms{
        {g.chain_blocks[k - 1], [sd, dx, last](const Mat& e) { return embed_identity(e, sd, dx, last); }},
        {g.chain_blocks[k - 2], [sd, k](const Mat& e) { return Mat(-partial_trace(e, sd, {k - 2})); }}};
    g.ids.push_back(b.add_equality(dim_of(sd), Mat::Zero(dim_of(sd), dim_of(sd)), terms));
  }
  {
    const Dims sd = strat_dims(s, r);
    std::vector<Term> terms = top_terms;
    terms.push_back({g.chain_blocks[r - 1], [sd, r](const Mat& e) { return Mat(-partial_trace(e, sd, {r - 1})); }});
    g.ids.push_back(b.add_equality(dim_of(sd), -top_const, terms));
  }
  return g;
}

}  // namespace chain

using chain::co_dims;
using chain::strat_dims;

// --- operational strategies -----------------------------------------------------

namespace {

struct Step {
  int msg_in;
  int msg_out;
  const SuperOperator* channel;
};

std::vector<Step> steps_of(const OperationalStrategy& op) {
  const RoundSpaces& s = op.spaces;
  std::vector<Step> steps;
  if (op.kind == Kind::strategy) {
    if (static_cast<int>(op.channels.size()) != s.r) throw ShapeError("strategy needs one channel per round");
    for (int k = 0; k < s.r; ++k) steps.push_back({s.in_dims[k], s.out_dims[k], &op.channels[k]});
  } else {
    if (static_cast<int>(op.channels.size()) != s.r + 1) throw ShapeError("co-strategy needs r + 1 channels");
    for (int k = 0; k <= s.r; ++k)
      steps.push_back({k == 0 ? 1 : s.out_dims[k - 1], k == s.r ? 1 : s.in_dims[k], &op.channels[k]});
  }
  return steps;
}

// Runs the channels on one half of an unnormalized maximally entangled
// state. Returns the operator on [outs, refs, memory].
Placed run_channels(const std::vector<Step>& steps) {
  const int n = static_cast<int>(steps.size());
  enum : int { kIn = 1000, kRef = 2000, kOut = 3000, kMem = 4000 };
  Dims dims;
  std::vector<int> labels;
  long din = 1;
  for (int k = 0; k < n; ++k) {
    dims.push_back(steps[k].msg_in);
    labels.push_back(kIn + k);
    din *= steps[k].msg_in;
  }
  for (int k = 0; k < n; ++k) {
    dims.push_back(steps[k].msg_in);
    labels.push_back(kRef + k);
  }
  dims.push_back(1);
  labels.push_back(kMem);
  const Vec omega = col(Mat::Identity(din, din));
  Mat rho = omega * omega.adjoint();

  auto find = [&labels](int l) {
    return static_cast<int>(std::find(labels.begin(), labels.end(), l) - labels.begin());
  };
  for (int k = 0; k < n; ++k) {
    const SuperOperator& ch = *steps[k].channel;
    const int mem_in = dims[find(kMem)];
    if (ch.in_shape.total() != static_cast<long>(steps[k].msg_in) * mem_in)
      throw ShapeError("channel " + std::to_string(k) + " input does not match message and memory");
    if (ch.out_shape.total() % steps[k].msg_out != 0)
      throw ShapeError("channel " + std::to_string(k) + " output is not divisible by the message dimension");
    const int mem_out = static_cast<int>(ch.out_shape.total() / steps[k].msg_out);
    std::vector<int> targets{find(kIn + k), find(kMem)};
    Placed next = apply_on(rho, dims, targets, kraus_pair(ch), {steps[k].msg_out, mem_out});
    std::vector<int> nl;
    for (size_t i = 0; i < labels.size(); ++i)
      if (static_cast<int>(i) != targets[0] && static_cast<int>(i) != targets[1]) nl.push_back(labels[i]);
    nl.push_back(kOut + k);
    nl.push_back(kMem);
    rho = std::move(next.mat);
    dims = std::move(next.dims);
    labels = std::move(nl);
  }
  std::vector<int> perm;
  for (int k = 0; k < n; ++k) perm.push_back(find(kOut + k));
  for (int k = 0; k < n; ++k) perm.push_back(find(kRef + k));
  perm.push_back(find(kMem));
  return {permute_systems(rho, dims, perm), permute_dims(dims, perm)};
}

HermitianOperator finish(const Mat& j, const OperationalStrategy& op) {
  const RoundSpaces& s = op.spaces;
  const long dx = dims_product(s.in_dims), dy = dims_product(s.out_dims);
  if (op.kind == Kind::strategy) return HermitianOperator(j, s.layout(), 1e-6);
  return HermitianOperator(choi_adjoint(j, dx, dy), s.layout(), 1e-6);
}

}  // namespace

int OperationalStrategy::memory_dim(int step) const {
  auto steps = steps_of(*this);
  return static_cast<int>(steps.at(step).channel->out_shape.total() / steps.at(step).msg_out);
}

CptpReport check_operational(const OperationalStrategy& op, double tol) {
  CptpReport rep;
  rep.min_eigenvalue = 1.0;
  for (const auto& ch : op.channels) {
    const long din = ch.in_shape.total(), dout = ch.out_shape.total();
    const Mat j = choi(ch).mat;
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, min_eigenvalue(hermitian_part(j)));
    const Mat t = partial_trace(j, {static_cast<int>(dout), static_cast<int>(din)}, {0});
    rep.residual = std::max(rep.residual, (t - Mat::Identity(din, din)).norm());
    rep.residual = std::max(rep.residual, hermiticity_residual(j));
  }
  if (op.measuring()) {
    const long d = op.measurement[0].rows();
    Mat sum = Mat::Zero(d, d);
    for (const auto& p : op.measurement) {
      if (p.rows() != d || p.cols() != d) throw ShapeError("measurement operators differ in size");
      rep.min_eigenvalue = std::min(rep.min_eigenvalue, min_eigenvalue(hermitian_part(p)));
      sum += p;
    }
    rep.povm_residual = (sum - Mat::Identity(d, d)).norm();
  }
  rep.ok = rep.residual <= tol * std::sqrt(static_cast<double>(op.spaces.dim())) + tol &&
           rep.povm_residual <= tol * 10 && rep.min_eigenvalue >= -tol;
  return rep;
}

Strategy build_strategy(const OperationalStrategy& op) {
  const Placed p = run_channels(steps_of(op));
  const int mem = static_cast<int>(p.dims.size()) - 1;
  const Mat j = partial_trace(p.mat, p.dims, {mem});
  return Strategy{op.spaces, op.kind, finish(j, op)};
}

MeasuringStrategy build_measuring_strategy(const OperationalStrategy& op) {
  if (!op.measuring()) throw Error("operational strategy has no measurement");
  const Placed p = run_channels(steps_of(op));
  const int mem = static_cast<int>(p.dims.size()) - 1;
  const long dm = p.dims[mem];
  const long rest = p.mat.rows() / dm;
  MeasuringStrategy m;
  m.spaces = op.spaces;
  m.kind = op.kind;
  for (size_t a = 0; a < op.measurement.size(); ++a) {
    if (op.measurement[a].rows() != dm) throw ShapeError("measurement does not act on the final memory");
    const Mat pa = kron(Mat::Identity(rest, rest), op.measurement[a]);
    const Mat j = partial_trace(Mat(pa * p.mat), p.dims, {mem});
    m.qs.push_back(finish(j, op));
    m.outcomes.push_back(a < op.labels.size() ? op.labels[a] : std::to_string(a));
  }
  return m;
}

// --- validation and truncation -------------------------------------------------

ValidationReport validate(const HermitianOperator& q, const RoundSpaces& s, Kind kind, double tol) {
  ValidationReport rep;
  if (q.dim() != s.dim()) throw ShapeError("operator does not match the round spaces");
  const int r = s.r;
  const Mat& m = q.mat();
  rep.min_eigenvalue = min_eigenvalue(m);
  const double scale = std::max(1.0, m.norm());
  if (r == 0) {
    rep.residuals.push_back(std::abs(m(0, 0) - 1.0));
  } else if (kind == Kind::strategy) {
    std::vector<Mat> chain(r + 1);
    chain[r] = m;
    for (int k = r; k >= 1; --k) {
      const Dims cd = co_dims(s, k);
      const Mat reduced = partial_trace(chain[k], strat_dims(s, k), {k - 1});
      const int dx = s.in_dims[k - 1];
      const int last = static_cast<int>(cd.size()) - 1;
      if (k == 1) {
        rep.residuals.push_back((reduced - Mat::Identity(dx, dx)).norm());
      } else {
        chain[k - 1] = partial_trace(reduced, cd, {last}) / static_cast<double>(dx);
        rep.residuals.push_back((reduced - embed_identity(chain[k - 1], strat_dims(s, k - 1), dx, last)).norm());
      }
    }
    for (int k = 1; k < r; ++k) rep.chain.emplace_back(chain[k], strat_dims(s, k), 1.0);
  } else {
    std::vector<Mat> t(r + 1);
    const int dyr = s.out_dims[r - 1];
    t[r] = partial_trace(m, strat_dims(s, r), {r - 1}) / static_cast<double>(dyr);
    rep.residuals.push_back((m - embed_identity(t[r], co_dims(s, r), dyr, r - 1)).norm());
    for (int k = r; k >= 2; --k) {
      const Dims sd = strat_dims(s, k - 1);
      const Mat reduced = partial_trace(t[k], co_dims(s, k), {static_cast<int>(co_dims(s, k).size()) - 1});
      const int dy = s.out_dims[k - 2];
      t[k - 1] = partial_trace(reduced, sd, {k - 2}) / static_cast<double>(dy);
      rep.residuals.push_back((reduced - embed_identity(t[k - 1], co_dims(s, k - 1), dy, k - 2)).norm());
    }
    rep.residuals.push_back(std::abs(t[1].trace() - 1.0));
    for (int k = 1; k <= r; ++k) rep.chain.emplace_back(t[k], co_dims(s, k), 1.0);
  }
  for (double x : rep.residuals) rep.residual = std::max(rep.residual, x);
  rep.valid = rep.min_eigenvalue >= -tol * scale && rep.residual <= tol * scale;
  return rep;
}

ValidationReport validate(const Strategy& s, double tol) { return validate(s.q, s.spaces, s.kind, tol); }

ValidationReport validate(const MeasuringStrategy& s, double tol) {
  ValidationReport rep = validate(s.total(), s.spaces, s.kind, tol);
  for (const auto& q : s.qs) {
    const double e = min_eigenvalue(q.mat());
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, e);
    if (e < -tol * std::max(1.0, q.mat().norm())) rep.valid = false;
  }
  return rep;
}

Strategy truncate(const Strategy& s, int k, double tol) {
  const int r = s.spaces.r;
  if (k < 0 || k > r) throw ShapeError("truncation length out of range");
  const ValidationReport rep = validate(s, tol);
  if (!rep.valid) throw Error("cannot truncate an invalid strategy");
  if (k == r) return s;
  const RoundSpaces sub = s.spaces.prefix(k);
  if (k == 0) return Strategy{sub, s.kind, HermitianOperator::scalar(1.0)};
  if (s.kind == Kind::strategy) return Strategy{sub, s.kind, HermitianOperator(rep.chain[k - 1].mat(), sub.layout())};
  const Mat full = embed_identity(rep.chain[k - 1].mat(), co_dims(s.spaces, k), s.spaces.out_dims[k - 1], k - 1);
  return Strategy{sub, s.kind, HermitianOperator(full, sub.layout())};
}

Strategy uniform_strategy(const RoundSpaces& s, Kind kind) {
  const long n = s.dim();
  const double d = static_cast<double>(kind == Kind::strategy ? dims_product(s.out_dims) : dims_product(s.in_dims));
  return Strategy{s, kind, HermitianOperator(Mat::Identity(n, n) / d, s.layout())};
}

Eigen::MatrixXd interaction_probability(const MeasuringStrategy& s, const MeasuringStrategy& t) {
  if (!(s.spaces == t.spaces)) throw ShapeError("strategies act on different round spaces");
  if (s.kind == t.kind) throw Error("interaction needs a strategy and a co-strategy");
  Eigen::MatrixXd p(s.qs.size(), t.qs.size());
  for (size_t a = 0; a < s.qs.size(); ++a)
    for (size_t b = 0; b < t.qs.size(); ++b) p(a, b) = inner(s.qs[a].mat(), t.qs[b].mat());
  return p;
}

// --- completion of dual chains ----------------------------------------------------

Strategy complete_strategy(const std::vector<Mat>& ch, const RoundSpaces& s) {
  const int r = s.r;
  if (static_cast<int>(ch.size()) != r) throw ShapeError("chain length must equal the round count");
  if (r == 0) return Strategy{s, Kind::strategy, HermitianOperator::scalar(1.0)};
  Mat prev = Mat::Identity(1, 1);
  for (int k = 1; k <= r; ++k) {
    const Dims cd = co_dims(s, k);
    const int dx = s.in_dims[k - 1], dy = s.out_dims[k - 1];
    const Mat lifted = k == 1 ? Mat(prev(0, 0) * Mat::Identity(dx, dx))
                              : embed_identity(prev, strat_dims(s, k - 1), dx, static_cast<int>(cd.size()) - 1);
    const Mat gap = hermitian_part(lifted - partial_trace(ch[k - 1], strat_dims(s, k), {k - 1}));
    prev = hermitian_part(ch[k - 1]) + embed_identity(gap, cd, dy, k - 1) / static_cast<double>(dy);
  }
  return Strategy{s, Kind::strategy, HermitianOperator(prev, s.layout(), 1.0)};
}

Strategy complete_costrategy(const std::vector<Mat>& ch, const RoundSpaces& s) {
  const int r = s.r;
  if (static_cast<int>(ch.size()) != r) throw ShapeError("chain length must equal the round count");
  if (r == 0) return Strategy{s, Kind::costrategy, HermitianOperator::scalar(1.0)};
  const int dx1 = s.in_dims[0];
  Mat prev = hermitian_part(ch[0]);
  prev += (1.0 - prev.trace().real()) * Mat::Identity(dx1, dx1) / static_cast<double>(dx1);
  for (int k = 2; k <= r; ++k) {
    const Dims cd = co_dims(s, k);
    const int dx = s.in_dims[k - 1], dy = s.out_dims[k - 2];
    const int last = static_cast<int>(cd.size()) - 1;
    const Mat lifted = embed_identity(prev, co_dims(s, k - 1), dy, k - 2);
    const Mat gap = hermitian_part(lifted - partial_trace(ch[k - 1], cd, {last}));
    prev = hermitian_part(ch[k - 1]) + embed_identity(gap, strat_dims(s, k - 1), dx, last) / static_cast<double>(dx);
  }
  const Mat q = embed_identity(prev, co_dims(s, r), s.out_dims[r - 1], r - 1);
  return Strategy{s, Kind::costrategy, HermitianOperator(q, s.layout(), 1.0)};
}

// --- maximum output probability --------------------------------------------------

MaxProbResult max_output_probability(const HermitianOperator& qa, const RoundSpaces& s, Kind kind, double tol,
                                     int max_iter) {
  if (qa.dim() != s.dim()) throw ShapeError("measurement element does not match the round spaces");
  MaxProbResult res;
  if (s.r == 0) {
    res.status = sdp::Status::optimal;
    res.p = res.forced = qa.mat()(0, 0).real();
    res.witness = Strategy{s, kind, HermitianOperator::scalar(1.0)};
    res.forcing = Strategy{s, opposite(kind), HermitianOperator::scalar(1.0)};
    return res;
  }
  const int n = static_cast<int>(s.dim());
  sdp::Builder b;
  const int pb = b.add_block(1);
  b.set_cost(pb, Mat::Identity(1, 1));
  const int wb = b.add_block(n);
  std::vector<sdp::Builder::Term> top{{wb, [](const Mat& e) { return e; }}};
  const chain::Groups g = chain::add_constraints(b, s, kind, top, qa.mat(), pb);

  const sdp::CoreResult core = sdp::solve_standard(b.form(), {tol, max_iter});
  res.status = core.status;
  res.iterations = core.iterations;
  res.p = core.x[pb](0, 0).real();
  if (res.p > 1e-12)
    res.witness = Strategy{s, kind, HermitianOperator(hermitian_part(core.x[wb] + qa.mat()) / res.p, s.layout(), 1.0)};
  else
    res.witness = uniform_strategy(s, kind);

  std::vector<Mat> dual;
  if (kind == Kind::strategy) {
    for (int k = 0; k < s.r; ++k) dual.push_back(-b.multiplier(g.ids[k], core.y));
    res.forcing = complete_costrategy(dual, s);
  } else {
    for (int k = 1; k <= s.r; ++k) dual.push_back(-b.multiplier(g.ids[k], core.y));
    res.forcing = complete_strategy(dual, s);
  }
  res.forced = inner(qa.mat(), res.forcing.q.mat());
  res.gap = res.p - res.forced;
  return res;
}

MaxProbResult max_output_probability(const MeasuringStrategy& s, const std::string& outcome, double tol,
                                     int max_iter) {
  return max_output_probability(s.qs.at(s.index_of(outcome)), s.spaces, s.kind, tol, max_iter);
}

}  // namespace qsk
