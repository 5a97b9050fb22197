// qsk: command-line front end. Reports go to stdout (or --out) as JSON,
// diagnostics to stderr. Exit codes: 0 success, 1 domain failure, 2 bad
// input.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qsk/games.hpp"
#include "qsk/json_io.hpp"
#include "qsk/localops.hpp"
#include "qsk/norms.hpp"
#include "qsk/strategies.hpp"

using namespace qsk;
using io::json;

namespace {

struct Options {
  double tol = kDefaultTol;
  int max_iter = 500;
  unsigned long seed = 0;
  std::string out;
};

struct Outcome {
  json report;
  bool ok = true;
};

double num(double x) { return io::round12(x); }

json status_fields(sdp::Status s, double gap, int iterations) {
  return {{"status", to_string(s)}, {"gap", num(gap)}, {"iterations", iterations}};
}

MeasuringStrategy as_measuring(const json& j) {
  if (io::is_measuring(j)) return io::measuring_from_json(j);
  const Strategy s = io::strategy_from_json(j);
  return {s.spaces, s.kind, {"all"}, {s.q}};
}

Outcome validate_strategy(const std::string& file, int rounds, const Options& o) {
  const json j = io::read_file(file);
  const bool measuring = io::is_measuring(j);
  const ValidationReport rep = measuring ? validate(io::measuring_from_json(j), o.tol)
                                         : validate(io::strategy_from_json(j), o.tol);
  const int r = static_cast<int>(j.at("in_dims").size());
  if (rounds >= 0 && rounds != r) throw io::ParseError("file has " + std::to_string(r) + " rounds, not " + std::to_string(rounds));
  json res = json::array();
  for (double x : rep.residuals) res.push_back(num(x));
  return {{{"valid", rep.valid},
           {"residual", num(rep.residual)},
           {"residuals", res},
           {"min_eigenvalue", num(rep.min_eigenvalue)},
           {"kind", j.at("kind")},
           {"rounds", r},
           {"measuring", measuring}},
          rep.valid};
}

Outcome build(const std::string& file, const Options& o) {
  const OperationalStrategy op = io::operational_from_json(io::read_file(file));
  const CptpReport c = check_operational(op, o.tol);
  if (!c.ok)
    return {{{"cptp", false},
             {"residual", num(c.residual)},
             {"min_eigenvalue", num(c.min_eigenvalue)},
             {"povm_residual", num(c.povm_residual)}},
            false};
  return {op.measuring() ? io::measuring_to_json(build_measuring_strategy(op)) : io::strategy_to_json(build_strategy(op)),
          true};
}

Outcome interact(const std::string& fa, const std::string& fb) {
  const MeasuringStrategy a = as_measuring(io::read_file(fa)), b = as_measuring(io::read_file(fb));
  const Eigen::MatrixXd p = interaction_probability(a, b);
  json rows = json::array();
  double total = 0.0;
  for (long i = 0; i < p.rows(); ++i) {
    json row = json::array();
    for (long k = 0; k < p.cols(); ++k) {
      row.push_back(num(p(i, k)));
      total += p(i, k);
    }
    rows.push_back(row);
  }
  return {{{"outcomes_a", a.outcomes}, {"outcomes_b", b.outcomes}, {"probabilities", rows}, {"total", num(total)}}, true};
}

Outcome max_prob(const std::string& file, const std::string& outcome, const Options& o) {
  const MeasuringStrategy s = as_measuring(io::read_file(file));
  const MaxProbResult r = max_output_probability(s, outcome.empty() ? s.outcomes.front() : outcome, o.tol, o.max_iter);
  json rep = status_fields(r.status, r.gap, r.iterations);
  rep["p"] = num(r.p);
  rep["forced"] = num(r.forced);
  const bool ok = r.status == sdp::Status::optimal;
  if (ok) {
    rep["witness"] = io::strategy_to_json(r.witness);
    rep["forcing"] = io::strategy_to_json(r.forcing);
  }
  return {rep, ok};
}

Outcome game(const std::string& file, const Options& o) {
  const GameSpec g = io::game_from_json(io::read_file(file));
  const GameValueResult r = game_value(g, o.tol, o.max_iter);
  json rep = status_fields(r.status, r.gap, r.iterations);
  rep["value"] = num(r.value);
  rep["primal_value"] = num(r.primal_value);
  rep["dual_value"] = num(r.dual_value);
  const bool ok = r.status == sdp::Status::optimal;
  if (ok) {
    rep["alice_strategy"] = io::strategy_to_json(r.alice_strategy);
    rep["bob_strategy"] = io::strategy_to_json(r.bob_strategy);
  }
  return {rep, ok};
}

Outcome coinflip(const std::string& fa, const std::string& fb, const Options& o) {
  const CoinFlipProtocol p{io::measuring_from_json(io::read_file(fa)), io::measuring_from_json(io::read_file(fb))};
  const CoinFlipAudit a = coinflip_audit(p, o.tol, o.max_iter);
  auto pair = [](const std::array<double, 2>& v) { return json{num(v[0]), num(v[1])}; };
  json forced = json::array();
  for (int b = 0; b < 2; ++b) forced.push_back(std::max(a.p_alice[b], a.p_bob[b]) >= 1.0 / std::sqrt(2.0) - 1e-6);
  return {{{"honest", pair(a.honest)},
           {"p_alice", pair(a.p_alice)},
           {"p_bob", pair(a.p_bob)},
           {"max_forcing_at_least_inv_sqrt2", forced},
           {"honest_ok", a.honest_ok},
           {"kitaev_ok", a.kitaev_ok},
           {"solved", a.solved}},
          a.solved && a.honest_ok && a.kitaev_ok};
}

Outcome parallel_rep(const std::string& file, const std::string& outcome, int k, const Options& o) {
  const MeasuringStrategy s = as_measuring(io::read_file(file));
  const std::string label = outcome.empty() ? s.outcomes.front() : outcome;
  const MaxProbResult mp = max_output_probability(s, label, o.tol, o.max_iter);
  if (mp.status != sdp::Status::optimal)
    return {{{"status", to_string(mp.status)}, {"ok", false}}, false};
  const ParallelRepReport r = parallel_repetition_check(s.qs[s.index_of(label)], mp.witness, mp.p, k, o.tol);
  return {{{"status", to_string(mp.status)},
           {"s", num(mp.p)},
           {"k", k},
           {"hypothesis_ok", r.hypothesis_ok},
           {"hypothesis_min_eigenvalue", num(r.hypothesis_min_eigenvalue)},
           {"ok", r.ok},
           {"min_eigenvalue", num(r.min_eigenvalue)}},
          r.ok && r.hypothesis_ok};
}

Outcome norm(const std::string& file, const std::string& minus, bool dual, bool diamond, const Options& o) {
  HermitianPreservingMap m = io::map_from_json(io::read_file(file));
  if (!minus.empty()) m = m - io::map_from_json(io::read_file(minus));
  const NormResult r = snorm(m, dual, o.tol, o.max_iter);
  json rep = status_fields(r.status, r.gap, r.iterations);
  rep["value"] = num(r.value);
  const bool ok = r.status == sdp::Status::optimal;
  if (ok) rep["optimizer"] = io::measuring_to_json(r.optimizer);
  if (diamond) {
    if (m.spaces.r != 1) throw io::ParseError("--diamond needs a one-round map");
    Rng rng(o.seed);
    rep["diamond_brute_force"] = num(diamond_brute_force(m, rng).value);
  }
  return {rep, ok};
}

Outcome distinguish(const std::string& f0, const std::string& f1, const Options& o) {
  const StrategySetHull h0 = io::hull_from_json(io::read_file(f0)), h1 = io::hull_from_json(io::read_file(f1));
  const Distinguisher d = distinguish_sets(h0, h1, o.tol, o.max_iter);
  json rep = status_fields(d.status, d.gap, d.iterations);
  rep["d"] = num(d.d);
  const bool ok = d.status == sdp::Status::optimal;
  if (ok) rep["optimizer"] = io::measuring_to_json(d.t);
  return {rep, ok};
}

Outcome no_signaling(const std::string& file, const Options& o) {
  const io::PartyChannel c = io::party_channel_from_json(io::read_file(file));
  const NoSignalingReport r = no_signaling_check(c.choi, c.spaces, o.tol);
  json subsets = json::array();
  for (size_t s = 0; s < r.subsets.size(); ++s) {
    json parties = json::array();
    for (int i = 0; i < c.spaces.m; ++i)
      if ((r.subsets[s] >> i) & 1u) parties.push_back(i + 1);
    subsets.push_back({{"parties", parties}, {"residual", num(r.residuals[s])}});
  }
  return {{{"ok", r.ok}, {"max_residual", num(r.max_residual)}, {"subsets", subsets}}, r.ok};
}

Outcome losr_ball(const std::string& file, const Options& o) {
  const io::PartyChannel c = io::party_channel_from_json(io::read_file(file));
  const LosrBallCertificate cert = losr_ball_certificate(c.choi, c.spaces, o.tol);
  json rep{{"in_ball", cert.in_ball},
           {"in_span", cert.in_span},
           {"span_residual", num(cert.span_residual)},
           {"norm_a", num(cert.norm_a)},
           {"radius", num(cert.radius)},
           {"k", num(cert.k)},
           {"n", cert.n}};
  if (cert.in_ball) rep["decomposition"] = io::decomposition_to_json(cert.decomposition);
  return {rep, cert.in_ball};
}

Outcome sep_decompose(const std::string& file, bool identity, const Options& o) {
  const json j = io::read_file(file);
  std::vector<PartyCone> cones;
  for (const auto& c : j.at("cones"))
    cones.push_back({cone_from_string(c.at("tag").get<std::string>()), c.at("d_in").get<int>(), c.at("d_out").get<int>()});
  const Mat x = io::matrix_from_json(j.at("x"));
  if (identity) {
    const IdentityMinusSep r = identity_minus_sep(x, cones, o.tol);
    return {{{"c", num(r.c)}, {"decomposition", io::decomposition_to_json(r.decomposition)}}, true};
  }
  const SepGeneration g = sep_generate(x, cones, o.tol);
  return {{{"n", g.n},
           {"bound", num(g.bound)},
           {"span_residual", num(g.span_residual)},
           {"plus", io::decomposition_to_json(g.plus)},
           {"minus", io::decomposition_to_json(g.minus)}},
          true};
}

Outcome box() {
  const NonlocalBox b = nonlocal_box();
  json rep = io::party_channel_to_json(b.spaces, b.choi);
  rep["decomposition"] = io::decomposition_to_json(b.decomposition);
  return {rep, true};
}

Outcome verify_cert(const std::string& cert_file, const std::string& target_file, const Options& o) {
  const json cj = io::read_file(cert_file);
  const SeparableDecomposition d = io::decomposition_from_json(cj.contains("decomposition") ? cj.at("decomposition") : cj);
  const json tj = io::read_file(target_file);
  Mat target;
  if (tj.contains("choi") || tj.contains("kraus")) {
    const io::PartyChannel c = io::party_channel_from_json(tj);
    target = to_party_order(c.choi, c.spaces);
  } else {
    target = io::matrix_from_json(tj);
  }
  const DecompositionCheck c = verify_decomposition(d, target, o.tol);
  return {{{"ok", c.ok},
           {"terms", c.terms},
           {"reconstruction_residual", num(c.reconstruction_residual)},
           {"min_factor_eigenvalue", num(c.min_factor_eigenvalue)},
           {"max_cone_residual", num(c.max_cone_residual)},
           {"min_weight", num(c.min_weight)}},
          c.ok};
}

int emit(const json& report, const Options& o) {
  const std::string text = io::dump(report);
  if (o.out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(o.out);
  if (!f || !(f << text)) {
    std::cerr << "qsk: cannot write " << o.out << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum strategies and local operations toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  if (const char* env = std::getenv("QSK_TOL")) {
    try {
      o.tol = std::stod(env);
    } catch (const std::exception&) {
      std::cerr << "qsk: QSK_TOL is not a number\n";
      return 2;
    }
  }
  app.add_option("--tol", o.tol, "Tolerance");
  app.add_option("--max-iter", o.max_iter, "SDP iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Seed for sampling oracles");
  app.add_option("--out", o.out, "Write the report here instead of stdout");

  std::string f1, f2, outcome, minus;
  int rounds = -1, k = 2;
  bool dual = false, diamond = false, identity = false;

  auto* vs = app.add_subcommand("validate-strategy", "Check the strategy chain constraints");
  vs->add_option("file", f1)->required();
  vs->add_option("--rounds", rounds, "Expected number of rounds");
  auto* bs = app.add_subcommand("build-strategy", "Strategy operator of an operational description");
  bs->add_option("file", f1)->required();
  auto* in = app.add_subcommand("interact", "Outcome probabilities of a strategy against a co-strategy");
  in->add_option("strategy", f1)->required();
  in->add_option("costrategy", f2)->required();
  auto* mp = app.add_subcommand("max-prob", "Maximum probability of forcing an outcome");
  mp->add_option("file", f1)->required();
  mp->add_option("--outcome", outcome, "Outcome label (default: first)");
  auto* gv = app.add_subcommand("game-value", "Value of a zero-sum game");
  gv->add_option("file", f1)->required();
  auto* cf = app.add_subcommand("coinflip-audit", "Cheating probabilities of a coin-flipping protocol");
  cf->add_option("alice", f1)->required();
  cf->add_option("bob", f2)->required();
  auto* pr = app.add_subcommand("parallel-rep", "Soundness inequality for k parallel repetitions");
  pr->add_option("file", f1)->required();
  pr->add_option("--outcome", outcome, "Accepting outcome label (default: first)");
  pr->add_option("--k", k, "Number of repetitions")->check(CLI::PositiveNumber);
  auto* sn = app.add_subcommand("snorm", "Strategy r-norm of a Hermitian-preserving map");
  sn->add_option("map", f1)->required();
  sn->add_option("--minus", minus, "Subtract this map first");
  sn->add_flag("--dual", dual, "Optimize over measuring strategies instead");
  sn->add_flag("--diamond", diamond, "Also report the sampled diamond-norm lower bound (one round)");
  auto* ds = app.add_subcommand("distinguish-sets", "Best fixed distinguisher for two strategy hulls");
  ds->add_option("hull0", f1)->required();
  ds->add_option("hull1", f2)->required();
  auto* ns = app.add_subcommand("no-signaling", "Check every subset for signaling");
  ns->add_option("channel", f1)->required();
  auto* lb = app.add_subcommand("losr-ball", "Certificate for the ball around the completely noisy channel");
  lb->add_option("channel", f1)->required();
  auto* sd = app.add_subcommand("sep-decompose", "Split an operator into bounded separable parts");
  sd->add_option("file", f1)->required();
  sd->add_flag("--identity", identity, "Decompose c I - x instead");
  auto* nb = app.add_subcommand("nonlocal-box", "Emit the nonlocal box channel and its decomposition");
  auto* vc = app.add_subcommand("verify-cert", "Re-check a separable decomposition");
  vc->add_option("certificate", f1)->required();
  vc->add_option("target", f2)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (!(o.tol > 0.0)) {
    std::cerr << "qsk: --tol must be positive\n";
    return 2;
  }

  Outcome r;
  try {
    if (*vs) r = validate_strategy(f1, rounds, o);
    else if (*bs) r = build(f1, o);
    else if (*in) r = interact(f1, f2);
    else if (*mp) r = max_prob(f1, outcome, o);
    else if (*gv) r = game(f1, o);
    else if (*cf) r = coinflip(f1, f2, o);
    else if (*pr) r = parallel_rep(f1, outcome, k, o);
    else if (*sn) r = norm(f1, minus, dual, diamond, o);
    else if (*ds) r = distinguish(f1, f2, o);
    else if (*ns) r = no_signaling(f1, o);
    else if (*lb) r = losr_ball(f1, o);
    else if (*sd) r = sep_decompose(f1, identity, o);
    else if (*nb) r = box();
    else if (*vc) r = verify_cert(f1, f2, o);
  } catch (const io::ParseError& e) {
    std::cerr << "qsk: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "qsk: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "qsk: shape mismatch: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    // Domain failure raised by a library precondition (not CP, not TP, ...).
    r = {{{"ok", false}, {"error", e.what()}}, false};
  }
  const int code = emit(r.report, o);
  if (code != 0) return code;
  return r.ok ? 0 : 1;
}
