#pragma once

#include <array>
#include <string>
#include <vector>

#include "qsk/sdp.hpp"
#include "qsk/strategies.hpp"

namespace qsk {

// Question (input) and answer (output) dims of one player, per round.
struct PlayerDims {
  Dims questions;
  Dims answers;
  RoundSpaces spaces() const { return RoundSpaces(questions, answers); }
};

// The referee is a measuring co-strategy with X_i = A_i (x) B_i and
// Y_i = C_i (x) D_i, Alice's factor first in each round.
struct GameSpec {
  int rounds = 0;
  PlayerDims alice;
  PlayerDims bob;
  MeasuringStrategy referee;
  std::vector<double> payout;  // one value per referee outcome

  // Throws ShapeError if the referee does not fit the player dims.
  void check_shapes() const;
};

// V = scale * V' + shift.
struct Rescaled {
  std::vector<double> v;
  double scale = 1.0;
  double shift = 0.0;
};
Rescaled rescale_payouts(const std::vector<double>& v);

// Sum_m w_m R_m with factors reordered to [C.. A.. D.. B..], i.e. Alice's
// strategy layout followed by Bob's.
Mat player_referee(const GameSpec& g, const std::vector<double>& w);
// Omega(X) = Tr_{D,B}[(I (x) X) R] for R from player_referee.
Mat omega_map(const Mat& r, long dim_alice, const Mat& x);
// Expected payout of a pair of player strategies.
double game_payout(const GameSpec& g, const Strategy& alice, const Strategy& bob);

struct GameValueResult {
  sdp::Status status = sdp::Status::max_iter;
  double value = 0.0;
  Strategy alice_strategy;
  Strategy bob_strategy;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

GameValueResult game_value(const GameSpec& g, double tol = kDefaultTol, int max_iter = 500);

// The block triple with the trace cap, for inspection and cross-checks.
struct GameSdp {
  LinearOperatorMap phi;  // X = (B_1..B_r, Q_1..Q_r) -> constraint blocks
  BlockOps e;             // right-hand side on the constraint blocks
  BlockOps f;             // objective picking Tr Q_1
  double t = 0.0;
};
GameSdp game_sdp(const GameSpec& g, const std::vector<double>& weights, double t);

struct WellBoundedness {
  double delta = 0.0;
  double t = 0.0;
  double gamma = 0.0;
  BlockOps x0;
  double margin = 0.0;        // min eigenvalue of Phi(X0) - E
  double trace_x0 = 0.0;
  double ball_margin = 0.0;   // worst margin over sampled X0 + H, ||H||_F = delta
  bool strictly_feasible = false;
};
WellBoundedness well_boundedness_constants(const GameSpec& g, int samples = 20);

struct CoinFlipProtocol {
  MeasuringStrategy alice;  // strategy kind, outcomes "0" and "1"
  MeasuringStrategy bob;    // co-strategy kind, same outcomes
};

struct CoinFlipAudit {
  std::array<double, 2> honest{};
  std::array<double, 2> p_alice{};  // cheating Bob forcing Alice's outcome b
  std::array<double, 2> p_bob{};    // cheating Alice forcing Bob's outcome b
  bool honest_ok = false;
  bool kitaev_ok = false;
  bool solved = false;
};
CoinFlipAudit coinflip_audit(const CoinFlipProtocol& p, double tol = kDefaultTol, int max_iter = 500);

struct ParallelRepReport {
  bool hypothesis_ok = false;
  double hypothesis_min_eigenvalue = 0.0;
  bool ok = false;
  double min_eigenvalue = 0.0;
};
inline constexpr long kParallelRepDimCap = 4096;
// Checks R_accept^{(x)k} <= s^k R^{(x)k} in the k-fold strategy layout.
ParallelRepReport parallel_repetition_check(const HermitianOperator& r_accept, const Strategy& r, double s, int k,
                                            double tol = kDefaultTol);

}  // namespace qsk
