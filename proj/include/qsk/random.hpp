#pragma once

#include <cstdint>
#include <random>

#include "qsk/core.hpp"

namespace qsk {

using Rng = std::mt19937_64;

Mat random_ginibre(long rows, long cols, Rng& rng);
Mat random_unitary(long d, Rng& rng);
// Haar-random isometry C^{din} -> C^{dout}, dout >= din.
Mat random_isometry(long din, long dout, Rng& rng);
Vec random_pure_state(long d, Rng& rng);
Mat random_density(long d, Rng& rng);
Mat random_hermitian(long d, Rng& rng);
// CPTP map from a random isometry into out (x) env.
SuperOperator random_channel(const Dims& in, const Dims& out, Rng& rng, long env = 0);
// Random POVM with k elements on C^d.
std::vector<Mat> random_povm(long d, int k, Rng& rng);
double uniform01(Rng& rng);

}  // namespace qsk
