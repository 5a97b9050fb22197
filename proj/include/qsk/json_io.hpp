#pragma once

#include <string>

#include "json.hpp"
#include "qsk/games.hpp"
#include "qsk/localops.hpp"
#include "qsk/norms.hpp"
#include "qsk/strategies.hpp"

namespace qsk::io {

using json = nlohmann::json;

// Malformed or missing input; the CLI maps this to exit code 2.
struct ParseError : Error {
  using Error::Error;
};

// Rounds to 12 significant digits so dumps are short and stable.
double round12(double x);

// {"row_dims":[...], "col_dims":[...], "entries":[[re,im],...]}, row-major.
json matrix_to_json(const Mat& m, const Dims& rows, const Dims& cols);
json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, Dims* rows = nullptr, Dims* cols = nullptr);
json hermitian_to_json(const HermitianOperator& h);
HermitianOperator hermitian_from_json(const json& j);

json strategy_to_json(const Strategy& s);
json measuring_to_json(const MeasuringStrategy& s);
bool is_measuring(const json& j);
Strategy strategy_from_json(const json& j);
MeasuringStrategy measuring_from_json(const json& j);

// {"rounds", "in_dims", "out_dims", "kind", "channels":[{"in":[...],
// "out":[...], "kraus":[<matrix>...]}...], "measurement":[{"label", "m"}...]}
OperationalStrategy operational_from_json(const json& j);
json operational_to_json(const OperationalStrategy& op);

json game_to_json(const GameSpec& g);
GameSpec game_from_json(const json& j);

// {"rounds", "in_dims", "out_dims", "j":<matrix>}; a strategy-shaped file
// whose operator is the map's Choi matrix.
json map_to_json(const HermitianPreservingMap& m);
HermitianPreservingMap map_from_json(const json& j);

// {"kind", "rounds", "in_dims", "out_dims", "generators":[<matrix>...]}
json hull_to_json(const StrategySetHull& h);
StrategySetHull hull_from_json(const json& j);

// Multi-party channel: {"in_dims":[...], "out_dims":[...]} with either
// "choi":<matrix> in global order or "kraus":[<matrix>...].
struct PartyChannel {
  PartySpaces spaces;
  Mat choi;
};
json party_channel_to_json(const PartySpaces& ps, const Mat& choi);
PartyChannel party_channel_from_json(const json& j);

// {"parties":m, "cones":[{"tag", "d_in", "d_out"}...], "terms":[{"weight",
// "factors":[<matrix>...]}...]}
json decomposition_to_json(const SeparableDecomposition& d);
SeparableDecomposition decomposition_from_json(const json& j);

json read_file(const std::string& path);
// Two-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace qsk::io
