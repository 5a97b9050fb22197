#pragma once

#include <string>
#include <vector>

#include "qsk/core.hpp"
#include "qsk/sdp.hpp"

namespace qsk {

enum class Kind { strategy, costrategy };
std::string to_string(Kind k);
Kind opposite(Kind k);

// Message spaces of an r-round interaction. Strategies receive X_i and
// answer Y_i; co-strategies send X_i and receive Y_i.
struct RoundSpaces {
  int r = 0;
  Dims in_dims;   // X_1..X_r
  Dims out_dims;  // Y_1..Y_r

  RoundSpaces() = default;
  RoundSpaces(Dims in, Dims out);
  // Factor order of every strategy operator: Y_1..Y_r X_1..X_r.
  Dims layout() const;
  long dim() const { return dims_product(layout()); }
  // First k rounds only.
  RoundSpaces prefix(int k) const;
  bool operator==(const RoundSpaces& o) const { return in_dims == o.in_dims && out_dims == o.out_dims; }
};

struct Strategy {
  RoundSpaces spaces;
  Kind kind = Kind::strategy;
  HermitianOperator q;
};

struct MeasuringStrategy {
  RoundSpaces spaces;
  Kind kind = Kind::strategy;
  std::vector<std::string> outcomes;
  std::vector<HermitianOperator> qs;

  HermitianOperator total() const;
  int index_of(const std::string& label) const;
};

// Strategy kind: channels Phi_1..Phi_r with Phi_i: X_i (x) Z_{i-1} -> Y_i (x) Z_i.
// Co-strategy kind: channels Psi_0..Psi_r with Psi_0: C -> X_1 (x) W_0 and
// Psi_i: Y_i (x) W_{i-1} -> X_{i+1} (x) W_i, where X_{r+1} is trivial.
// Each channel's in/out shapes list the message factor first, then memory.
// An optional measurement acts on the last memory.
struct OperationalStrategy {
  RoundSpaces spaces;
  Kind kind = Kind::strategy;
  std::vector<SuperOperator> channels;
  std::vector<std::string> labels;
  std::vector<Mat> measurement;

  bool measuring() const { return !measurement.empty(); }
  int memory_dim(int step) const;  // memory after channel `step`
};

struct CptpReport {
  bool ok = true;
  double residual = 0.0;  // max over channels of ||Tr_out J - I||_F
  double min_eigenvalue = 0.0;
  double povm_residual = 0.0;
};
CptpReport check_operational(const OperationalStrategy& op, double tol = kDefaultTol);

Strategy build_strategy(const OperationalStrategy& op);
MeasuringStrategy build_measuring_strategy(const OperationalStrategy& op);

struct ValidationReport {
  bool valid = false;
  double residual = 0.0;  // largest chain residual
  std::vector<double> residuals;
  double min_eigenvalue = 0.0;
  // Strategy kind: Q_1..Q_{r-1}. Co-strategy kind: T_1..T_r with the full
  // operator equal to T_r (x) I_{Y_r}.
  std::vector<HermitianOperator> chain;
};

ValidationReport validate(const HermitianOperator& q, const RoundSpaces& spaces, Kind kind, double tol = kDefaultTol);
ValidationReport validate(const Strategy& s, double tol = kDefaultTol);
ValidationReport validate(const MeasuringStrategy& s, double tol = kDefaultTol);

Strategy truncate(const Strategy& s, int k, double tol = kDefaultTol);

// Noise strategy I/dim(Y) or co-strategy I/dim(X); always valid.
Strategy uniform_strategy(const RoundSpaces& spaces, Kind kind);

// Entry (a, b) is <Q_a, R_b>.
Eigen::MatrixXd interaction_probability(const MeasuringStrategy& s, const MeasuringStrategy& t);

struct MaxProbResult {
  sdp::Status status = sdp::Status::max_iter;
  double p = 0.0;
  Strategy witness;  // R of the same kind with Q_a <= p R
  Strategy forcing;  // opposite kind, attains <Q_a, forcing> = forced
  double forced = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

MaxProbResult max_output_probability(const MeasuringStrategy& s, const std::string& outcome, double tol = kDefaultTol,
                                     int max_iter = 500);
MaxProbResult max_output_probability(const HermitianOperator& qa, const RoundSpaces& spaces, Kind kind,
                                     double tol = kDefaultTol, int max_iter = 500);

// Linear pieces of the chain constraints, shared with the norm and game
// SDPs. Operators on the k-round layout Y_1..Y_k X_1..X_k.
namespace chain {
// k-round strategy layout Y_1..Y_k X_1..X_k.
Dims strat_dims(const RoundSpaces& s, int k);
// Co-strategy chain layout Y_1..Y_{k-1} X_1..X_k.
Dims co_dims(const RoundSpaces& s, int k);

// Adds the linear constraints "top is scale times a strategy (or
// co-strategy)", where top = sum of `top_terms` + top_const on the full
// layout. The scale is the 1x1 block `scale_block`, or the constant
// `scale_const` when scale_block < 0. Multipliers of the returned groups,
// negated, form the dual chain: levels 1..r for strategy kind; levels
// 0..r for co-strategy kind (level 0 is a scalar).
struct Groups {
  std::vector<int> ids;
  std::vector<int> chain_blocks;
};
Groups add_constraints(sdp::Builder& b, const RoundSpaces& s, Kind kind,
                       const std::vector<sdp::Builder::Term>& top_terms, const Mat& top_const, int scale_block,
                       double scale_const = 0.0);
}  // namespace chain

// Raises a sub-strategy chain (inequalities in place of equalities) to a
// valid strategy that dominates it, level by level.
// Strategy input: R_1..R_r with Tr_{Y_1} R_1 <= I and
// Tr_{Y_k} R_k <= R_{k-1} (x) I_{X_k}.
Strategy complete_strategy(const std::vector<Mat>& chain, const RoundSpaces& s);
// Co-strategy input: T_1..T_r with Tr T_1 <= 1 and
// Tr_{X_k} T_k <= T_{k-1} (x) I_{Y_{k-1}}.
Strategy complete_costrategy(const std::vector<Mat>& chain, const RoundSpaces& s);

}  // namespace qsk
