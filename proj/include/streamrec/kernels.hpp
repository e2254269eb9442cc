#pragma once

#include "streamrec/types.hpp"

namespace streamrec::kernels {

// Kernels come in serial/_omp pairs. The parallel versions decompose over
// output rows with a fixed per-row accumulation order, so results are bit
// identical to the serial versions for any thread count.

void set_parallel(bool on);
bool parallel_enabled();

// csr * dense
Matrix spmm_serial(const CsrMatrix& a, const Matrix& x);
Matrix spmm_omp(const CsrMatrix& a, const Matrix& x);
Matrix spmm(const CsrMatrix& a, const Matrix& x);

// W = unfold_mode(t x_a fa^T x_b fb^T), shape n_mode x (ra*rb) where a < b are
// the two non-target modes and column index is p + q*ra (p indexes fa's
// columns). Equivalently W = T_[mode] * kron(fb, fa). mode is 1-based.
Matrix ttm_pair_serial(const SparseCoo& t, int mode, const Matrix& fa, const Matrix& fb);
Matrix ttm_pair_omp(const SparseCoo& t, int mode, const Matrix& fa, const Matrix& fb);
Matrix ttm_pair(const SparseCoo& t, int mode, const Matrix& fa, const Matrix& fb);

// Y = t x_mode m^T as a dense tensor: contracts the mode's extent against
// m's rows, leaving m's columns. m has shape (extent(mode) x r).
Tensor3 ttm_single(const SparseCoo& t, int mode, const Matrix& m);

}  // namespace streamrec::kernels
