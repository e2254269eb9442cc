#pragma once

#include "streamrec/types.hpp"

namespace streamrec {

struct QrResult {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular, nonnegative diagonal
};

// Thin Householder QR. Requires rows >= cols and finite entries. The sign
// convention (nonnegative R diagonal) makes the result unique for full-rank
// input, which keeps replays byte-identical.
QrResult thin_qr(const Matrix& m);

struct SvdResult {
  Matrix u;
  Vector s;  // descending
  Matrix v;
};

// Thin dense SVD. Sign convention: the first entry of each left singular
// vector with |entry| > 1e-12 is nonnegative (V columns flip together).
SvdResult svd_dense(const Matrix& m);

// Leading `rank` singular triplets. 1 <= rank <= min(shape) or it throws.
SvdResult truncated_svd(const Matrix& m, Index rank);

// Sparse path: seeded randomized range finder (oversampling 10, two power
// iterations with QR re-orthogonalization); falls back to the dense path
// below 500x500. Deterministic for a given seed.
SvdResult truncated_svd(const SparseCoo& m, Index rank, std::uint64_t seed);

// Incremental SVD column append: given B = u*s*v^T, factor [B  new_cols] and
// truncate to keep_rank. s may be any r x r matrix (it stays non-diagonal
// after the final polish: the kept left factor is re-orthogonalized by a thin
// QR whose R is folded into s, which pins orthogonality at machine precision
// for every truncation pattern). v gains one row per appended column.
void svd_append_columns(Matrix& u, Matrix& s, Matrix& v, const SparseCoo& new_cols,
                        Index keep_rank);

}  // namespace streamrec
