#pragma once

// Tensor-index kernels. `serial` holds straightforward reference loops;
// `par` precomputes index tables and splits output columns across OpenMP
// threads. Every output entry is written once with a fixed summation
// order, so both produce identical bits for any thread count.

#include <vector>

#include "qsk/core.hpp"

namespace qsk::serial {

Mat kron(const Mat& a, const Mat& b);
Mat partial_trace(const Mat& x, const Dims& dims, const std::vector<int>& traced);
Mat permute_systems(const Mat& x, const Dims& row_dims, const Dims& col_dims,
                    const std::vector<int>& perm);

}  // namespace qsk::serial

namespace qsk::par {

Mat kron(const Mat& a, const Mat& b);
Mat partial_trace(const Mat& x, const Dims& dims, const std::vector<int>& traced);
Mat permute_systems(const Mat& x, const Dims& row_dims, const Dims& col_dims,
                    const std::vector<int>& perm);

int max_threads();

}  // namespace qsk::par
