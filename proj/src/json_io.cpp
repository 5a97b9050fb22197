#include "qsk/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qsk::io {

namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

Dims dims_of(const json& j, const char* key) {
  const json& d = field(j, key);
  if (!d.is_array()) throw ParseError(std::string("field \"") + key + "\" must be an array");
  Dims out;
  for (const auto& v : d) {
    if (!v.is_number_integer() || v.get<long>() < 1) throw ParseError(std::string("bad dimension in \"") + key + "\"");
    out.push_back(v.get<int>());
  }
  return out;
}

json dims_json(const Dims& d) { return json(d); }

Kind kind_of(const json& j) {
  const std::string k = field(j, "kind").get<std::string>();
  if (k == "strategy") return Kind::strategy;
  if (k == "costrategy") return Kind::costrategy;
  throw ParseError("unknown kind: " + k);
}

RoundSpaces spaces_of(const json& j) {
  RoundSpaces s(dims_of(j, "in_dims"), dims_of(j, "out_dims"));
  if (j.contains("rounds") && j.at("rounds").get<int>() != s.r) throw ParseError("\"rounds\" does not match the dims");
  return s;
}

void put_spaces(json& j, const RoundSpaces& s) {
  j["rounds"] = s.r;
  j["in_dims"] = dims_json(s.in_dims);
  j["out_dims"] = dims_json(s.out_dims);
}

HermitianOperator on_layout(const json& m, const RoundSpaces& s) {
  Dims rows, cols;
  const Mat x = matrix_from_json(m, &rows, &cols);
  if (x.rows() != s.dim()) throw ParseError("operator does not fit the declared spaces");
  return HermitianOperator(x, s.layout());
}

}  // namespace

double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x == 0.0 ? 0.0 : x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

json matrix_to_json(const Mat& m, const Dims& rows, const Dims& cols) {
  if (dims_product(rows) != m.rows() || dims_product(cols) != m.cols()) throw ShapeError("dims do not match matrix");
  json entries = json::array();
  for (long i = 0; i < m.rows(); ++i)
    for (long k = 0; k < m.cols(); ++k) entries.push_back({round12(m(i, k).real()), round12(m(i, k).imag())});
  return {{"row_dims", dims_json(rows)}, {"col_dims", dims_json(cols)}, {"entries", entries}};
}

json matrix_to_json(const Mat& m) {
  return matrix_to_json(m, {static_cast<int>(m.rows())}, {static_cast<int>(m.cols())});
}

Mat matrix_from_json(const json& j, Dims* rows, Dims* cols) {
  const Dims r = dims_of(j, "row_dims"), c = dims_of(j, "col_dims");
  const json& e = field(j, "entries");
  const long nr = dims_product(r), nc = dims_product(c);
  if (!e.is_array() || static_cast<long>(e.size()) != nr * nc) throw ParseError("entry count does not match dims");
  Mat m(nr, nc);
  for (long i = 0; i < nr * nc; ++i) {
    const json& z = e[i];
    if (z.is_number()) {
      m(i / nc, i % nc) = z.get<double>();
    } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
      m(i / nc, i % nc) = cplx(z[0].get<double>(), z[1].get<double>());
    } else {
      throw ParseError("entries must be [re, im] pairs");
    }
  }
  if (rows) *rows = r;
  if (cols) *cols = c;
  return m;
}

json hermitian_to_json(const HermitianOperator& h) { return matrix_to_json(h.mat(), h.dims(), h.dims()); }

HermitianOperator hermitian_from_json(const json& j) {
  Dims r, c;
  const Mat m = matrix_from_json(j, &r, &c);
  if (r != c) throw ParseError("Hermitian operator needs row_dims == col_dims");
  return HermitianOperator(m, r);
}

json strategy_to_json(const Strategy& s) {
  json j;
  put_spaces(j, s.spaces);
  j["kind"] = to_string(s.kind);
  j["q"] = hermitian_to_json(s.q);
  return j;
}

json measuring_to_json(const MeasuringStrategy& s) {
  json j;
  put_spaces(j, s.spaces);
  j["kind"] = to_string(s.kind);
  json outs = json::array();
  for (size_t a = 0; a < s.qs.size(); ++a) outs.push_back({{"label", s.outcomes[a]}, {"q", hermitian_to_json(s.qs[a])}});
  j["outcomes"] = outs;
  return j;
}

bool is_measuring(const json& j) { return j.is_object() && j.contains("outcomes"); }

Strategy strategy_from_json(const json& j) {
  Strategy s;
  s.spaces = spaces_of(j);
  s.kind = kind_of(j);
  s.q = on_layout(field(j, "q"), s.spaces);
  return s;
}

MeasuringStrategy measuring_from_json(const json& j) {
  MeasuringStrategy s;
  s.spaces = spaces_of(j);
  s.kind = kind_of(j);
  const json& outs = field(j, "outcomes");
  if (!outs.is_array() || outs.empty()) throw ParseError("\"outcomes\" must be a non-empty array");
  for (const auto& o : outs) {
    s.outcomes.push_back(field(o, "label").get<std::string>());
    s.qs.push_back(on_layout(field(o, "q"), s.spaces));
  }
  return s;
}

OperationalStrategy operational_from_json(const json& j) {
  OperationalStrategy op;
  op.spaces = spaces_of(j);
  op.kind = kind_of(j);
  for (const auto& c : field(j, "channels")) {
    const Dims in = dims_of(c, "in"), out = dims_of(c, "out");
    std::vector<Mat> kraus;
    for (const auto& k : field(c, "kraus")) kraus.push_back(matrix_from_json(k));
    if (kraus.empty()) throw ParseError("channel without Kraus operators");
    for (const auto& k : kraus)
      if (k.rows() != dims_product(out) || k.cols() != dims_product(in))
        throw ParseError("Kraus operator does not match the channel dims");
    op.channels.push_back(SuperOperator::from_kraus(kraus, in, out));
  }
  if (j.contains("measurement")) {
    for (const auto& m : j.at("measurement")) {
      op.labels.push_back(field(m, "label").get<std::string>());
      op.measurement.push_back(matrix_from_json(field(m, "m")));
    }
  }
  return op;
}

json operational_to_json(const OperationalStrategy& op) {
  json j;
  put_spaces(j, op.spaces);
  j["kind"] = to_string(op.kind);
  json chans = json::array();
  for (const auto& c : op.channels) {
    json ks = json::array();
    for (const auto& k : kraus_pair(c).a) ks.push_back(matrix_to_json(k, c.out_shape.dims, c.in_shape.dims));
    chans.push_back({{"in", dims_json(c.in_shape.dims)}, {"out", dims_json(c.out_shape.dims)}, {"kraus", ks}});
  }
  j["channels"] = chans;
  if (op.measuring()) {
    json ms = json::array();
    for (size_t a = 0; a < op.measurement.size(); ++a)
      ms.push_back({{"label", op.labels[a]}, {"m", matrix_to_json(op.measurement[a])}});
    j["measurement"] = ms;
  }
  return j;
}

json game_to_json(const GameSpec& g) {
  json pay = json::object();
  for (size_t a = 0; a < g.payout.size(); ++a) pay[g.referee.outcomes[a]] = round12(g.payout[a]);
  return {{"rounds", g.rounds},
          {"alice_dims", {{"q", dims_json(g.alice.questions)}, {"a", dims_json(g.alice.answers)}}},
          {"bob_dims", {{"q", dims_json(g.bob.questions)}, {"a", dims_json(g.bob.answers)}}},
          {"referee", measuring_to_json(g.referee)},
          {"payout", pay}};
}

GameSpec game_from_json(const json& j) {
  GameSpec g;
  g.rounds = field(j, "rounds").get<int>();
  const json& a = field(j, "alice_dims");
  const json& b = field(j, "bob_dims");
  g.alice = {dims_of(a, "q"), dims_of(a, "a")};
  g.bob = {dims_of(b, "q"), dims_of(b, "a")};
  g.referee = measuring_from_json(field(j, "referee"));
  const json& pay = field(j, "payout");
  for (const auto& label : g.referee.outcomes) {
    if (!pay.contains(label)) throw ParseError("no payout for outcome " + label);
    g.payout.push_back(pay.at(label).get<double>());
  }
  if (pay.size() != g.referee.outcomes.size()) throw ParseError("payout lists an unknown outcome");
  g.check_shapes();
  return g;
}

json map_to_json(const HermitianPreservingMap& m) {
  json j;
  put_spaces(j, m.spaces);
  j["j"] = hermitian_to_json(m.j);
  return j;
}

HermitianPreservingMap map_from_json(const json& j) {
  HermitianPreservingMap m;
  m.spaces = spaces_of(j);
  m.j = on_layout(field(j, "j"), m.spaces);
  return m;
}

json hull_to_json(const StrategySetHull& h) {
  json j;
  put_spaces(j, h.spaces);
  j["kind"] = to_string(h.kind);
  json gens = json::array();
  for (const auto& s : h.generators) gens.push_back(hermitian_to_json(s.q));
  j["generators"] = gens;
  return j;
}

StrategySetHull hull_from_json(const json& j) {
  StrategySetHull h;
  h.spaces = spaces_of(j);
  h.kind = kind_of(j);
  for (const auto& g : field(j, "generators")) h.generators.push_back({h.spaces, h.kind, on_layout(g, h.spaces)});
  h.check();
  return h;
}

json party_channel_to_json(const PartySpaces& ps, const Mat& choi) {
  const Dims g = ps.global_dims();
  return {{"in_dims", dims_json(ps.in_dims)}, {"out_dims", dims_json(ps.out_dims)}, {"choi", matrix_to_json(choi, g, g)}};
}

PartyChannel party_channel_from_json(const json& j) {
  PartyChannel pc;
  pc.spaces = PartySpaces(dims_of(j, "in_dims"), dims_of(j, "out_dims"));
  const long n = pc.spaces.total_dim();
  if (j.contains("choi")) {
    pc.choi = matrix_from_json(j.at("choi"));
  } else if (j.contains("kraus")) {
    std::vector<Mat> kraus;
    for (const auto& k : j.at("kraus")) kraus.push_back(matrix_from_json(k));
    const long din = dims_product(pc.spaces.in_dims), dout = dims_product(pc.spaces.out_dims);
    for (const auto& k : kraus)
      if (k.rows() != dout || k.cols() != din) throw ParseError("Kraus operator does not match the party dims");
    pc.choi = choi(SuperOperator::from_kraus(kraus, pc.spaces.in_dims, pc.spaces.out_dims)).mat;
  } else {
    throw ParseError("channel file needs \"choi\" or \"kraus\"");
  }
  if (pc.choi.rows() != n || pc.choi.cols() != n) throw ParseError("Choi matrix does not match the party dims");
  return pc;
}

json decomposition_to_json(const SeparableDecomposition& d) {
  json cones = json::array();
  for (const auto& c : d.cones) cones.push_back({{"tag", to_string(c.tag)}, {"d_in", c.d_in}, {"d_out", c.d_out}});
  json terms = json::array();
  for (const auto& t : d.terms) {
    json fs = json::array();
    for (size_t i = 0; i < t.factors.size(); ++i) {
      const Dims fd{d.cones[i].d_out, d.cones[i].d_in};
      fs.push_back(matrix_to_json(t.factors[i], fd, fd));
    }
    terms.push_back({{"weight", round12(t.weight)}, {"factors", fs}});
  }
  return {{"parties", d.cones.size()}, {"cones", cones}, {"terms", terms}};
}

SeparableDecomposition decomposition_from_json(const json& j) {
  SeparableDecomposition d;
  const size_t m = field(j, "parties").get<size_t>();
  for (const auto& c : field(j, "cones")) {
    try {
      d.cones.push_back({cone_from_string(field(c, "tag").get<std::string>()), field(c, "d_in").get<int>(),
                         field(c, "d_out").get<int>()});
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what());
    }
  }
  if (d.cones.size() != m) throw ParseError("\"parties\" does not match the cone list");
  for (const auto& t : field(j, "terms")) {
    SepTerm term;
    term.weight = field(t, "weight").get<double>();
    for (const auto& f : field(t, "factors")) term.factors.push_back(matrix_from_json(f));
    if (term.factors.size() != m) throw ParseError("term needs one factor per party");
    for (size_t i = 0; i < m; ++i)
      if (term.factors[i].rows() != d.cones[i].dim() || term.factors[i].cols() != d.cones[i].dim())
        throw ParseError("factor does not match its cone");
    d.terms.push_back(std::move(term));
  }
  return d;
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace qsk::io
