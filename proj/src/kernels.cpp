#include "qsk/kernels.hpp"

#include <numeric>

#include <omp.h>

namespace qsk {
namespace {

void check_perm(const std::vector<int>& perm, size_t k) {
  if (perm.size() != k) throw ShapeError("permutation length does not match factor count");
  std::vector<char> seen(k, 0);
  for (int p : perm) {
    if (p < 0 || static_cast<size_t>(p) >= k || seen[p]) throw ShapeError("malformed permutation");
    seen[p] = 1;
  }
}

std::vector<char> traced_mask(const Dims& dims, const std::vector<int>& traced) {
  std::vector<char> mask(dims.size(), 0);
  for (int t : traced) {
    if (t < 0 || static_cast<size_t>(t) >= dims.size()) throw ShapeError("partial trace index out of range");
    mask[t] = 1;
  }
  return mask;
}

// Mixed-radix digits of idx, factor 0 most significant.
void digits(long idx, const Dims& dims, std::vector<int>& out) {
  out.resize(dims.size());
  for (int f = static_cast<int>(dims.size()) - 1; f >= 0; --f) {
    out[f] = static_cast<int>(idx % dims[f]);
    idx /= dims[f];
  }
}

long compose(const std::vector<int>& dig, const Dims& dims) {
  long idx = 0;
  for (size_t f = 0; f < dims.size(); ++f) idx = idx * dims[f] + dig[f];
  return idx;
}

// For an output index under the permuted shape, the source index in the
// original shape.
std::vector<long> permutation_table(const Dims& dims, const std::vector<int>& perm) {
  const Dims out_dims = permute_dims(dims, perm);
  const long n = dims_product(dims);
  std::vector<long> stride(dims.size());
  long s = 1;
  for (int f = static_cast<int>(dims.size()) - 1; f >= 0; --f) {
    stride[f] = s;
    s *= dims[f];
  }
  std::vector<long> table(n);
  std::vector<int> dig;
  for (long i = 0; i < n; ++i) {
    digits(i, out_dims, dig);
    long src = 0;
    for (size_t j = 0; j < perm.size(); ++j) src += dig[j] * stride[perm[j]];
    table[i] = src;
  }
  return table;
}

}  // namespace

namespace serial {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      for (long k = 0; k < b.rows(); ++k)
        for (long l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

Mat partial_trace(const Mat& x, const Dims& dims, const std::vector<int>& traced) {
  const long n = dims_product(dims);
  if (x.rows() != n || x.cols() != n) throw ShapeError("partial trace: matrix does not match dims");
  const auto mask = traced_mask(dims, traced);
  Dims kept;
  for (size_t f = 0; f < dims.size(); ++f)
    if (!mask[f]) kept.push_back(dims[f]);
  const long nk = dims_product(kept);
  Mat out = Mat::Zero(nk, nk);
  std::vector<int> di, dj, ki, kj;
  for (long i = 0; i < n; ++i) {
    digits(i, dims, di);
    for (long j = 0; j < n; ++j) {
      digits(j, dims, dj);
      bool diag = true;
      ki.clear();
      kj.clear();
      for (size_t f = 0; f < dims.size(); ++f) {
        if (mask[f]) {
          if (di[f] != dj[f]) {
            diag = false;
            break;
          }
        } else {
          ki.push_back(di[f]);
          kj.push_back(dj[f]);
        }
      }
      if (diag) out(compose(ki, kept), compose(kj, kept)) += x(i, j);
    }
  }
  return out;
}

Mat permute_systems(const Mat& x, const Dims& row_dims, const Dims& col_dims, const std::vector<int>& perm) {
  check_perm(perm, row_dims.size());
  check_perm(perm, col_dims.size());
  if (x.rows() != dims_product(row_dims) || x.cols() != dims_product(col_dims))
    throw ShapeError("permute: matrix does not match dims");
  const Dims orow = permute_dims(row_dims, perm), ocol = permute_dims(col_dims, perm);
  Mat out(x.rows(), x.cols());
  std::vector<int> di, dj, si(perm.size()), sj(perm.size());
  for (long i = 0; i < x.rows(); ++i) {
    digits(i, orow, di);
    for (size_t f = 0; f < perm.size(); ++f) si[perm[f]] = di[f];
    const long src_i = compose(si, row_dims);
    for (long j = 0; j < x.cols(); ++j) {
      digits(j, ocol, dj);
      for (size_t f = 0; f < perm.size(); ++f) sj[perm[f]] = dj[f];
      out(i, j) = x(src_i, compose(sj, col_dims));
    }
  }
  return out;
}

}  // namespace serial

namespace par {

int max_threads() { return omp_get_max_threads(); }

Mat kron(const Mat& a, const Mat& b) {
  const long br = b.rows(), bc = b.cols();
  Mat out(a.rows() * br, a.cols() * bc);
  const long ncols = out.cols();
#pragma omp parallel for schedule(static) if (ncols * out.rows() > 4096)
  for (long c = 0; c < ncols; ++c) {
    const long j = c / bc, l = c % bc;
    for (long i = 0; i < a.rows(); ++i) {
      const cplx aij = a(i, j);
      for (long k = 0; k < br; ++k) out(i * br + k, c) = aij * b(k, l);
    }
  }
  return out;
}

Mat partial_trace(const Mat& x, const Dims& dims, const std::vector<int>& traced) {
  const long n = dims_product(dims);
  if (x.rows() != n || x.cols() != n) throw ShapeError("partial trace: matrix does not match dims");
  const auto mask = traced_mask(dims, traced);
  // Reorder to (kept..., traced...) so that full = kept_index * nt + t.
  std::vector<int> perm;
  for (size_t f = 0; f < dims.size(); ++f)
    if (!mask[f]) perm.push_back(static_cast<int>(f));
  long nt = 1;
  for (size_t f = 0; f < dims.size(); ++f)
    if (mask[f]) {
      perm.push_back(static_cast<int>(f));
      nt *= dims[f];
    }
  const auto table = permutation_table(dims, perm);
  const long nk = n / nt;
  Mat out(nk, nk);
#pragma omp parallel for schedule(static) if (nk * nk * nt > 8192)
  for (long kc = 0; kc < nk; ++kc) {
    for (long kr = 0; kr < nk; ++kr) {
      cplx acc = 0.0;
      for (long t = 0; t < nt; ++t) acc += x(table[kr * nt + t], table[kc * nt + t]);
      out(kr, kc) = acc;
    }
  }
  return out;
}

Mat permute_systems(const Mat& x, const Dims& row_dims, const Dims& col_dims, const std::vector<int>& perm) {
  check_perm(perm, row_dims.size());
  check_perm(perm, col_dims.size());
  if (x.rows() != dims_product(row_dims) || x.cols() != dims_product(col_dims))
    throw ShapeError("permute: matrix does not match dims");
  const auto rt = permutation_table(row_dims, perm);
  const auto ct = row_dims == col_dims ? rt : permutation_table(col_dims, perm);
  Mat out(x.rows(), x.cols());
  const long ncols = x.cols(), nrows = x.rows();
#pragma omp parallel for schedule(static) if (nrows * ncols > 4096)
  for (long j = 0; j < ncols; ++j)
    for (long i = 0; i < nrows; ++i) out(i, j) = x(rt[i], ct[j]);
  return out;
}

}  // namespace par
}  // namespace qsk
