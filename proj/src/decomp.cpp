#include "streamrec/decomp.hpp"

#include "streamrec/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace streamrec {

namespace {

void check_finite(const Matrix& m, const char* who) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite input");
}

void fix_svd_signs(Matrix& u, Matrix& v) {
  for (Index j = 0; j < u.cols(); ++j) {
    double lead = 0.0;
    for (Index i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, j)) > 1e-12) {
        lead = u(i, j);
        break;
      }
    }
    if (lead < 0.0) {
      u.col(j) = -u.col(j);
      if (j < v.cols()) v.col(j) = -v.col(j);
    }
  }
}

}  // namespace

QrResult thin_qr(const Matrix& m) {
  if (m.rows() < m.cols())
    throw std::invalid_argument("thin_qr: rows must be >= cols");
  check_finite(m, "thin_qr");
  Eigen::HouseholderQR<Matrix> qr(m);
  QrResult out;
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  out.r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (Index j = 0; j < out.r.rows(); ++j) {
    if (out.r(j, j) < 0.0) {
      out.r.row(j) = -out.r.row(j);
      out.q.col(j) = -out.q.col(j);
    }
  }
  return out;
}

SvdResult svd_dense(const Matrix& m) {
  check_finite(m, "svd_dense");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.u = svd.matrixU();
  out.s = svd.singularValues();
  out.v = svd.matrixV();
  fix_svd_signs(out.u, out.v);
  return out;
}

SvdResult truncated_svd(const Matrix& m, Index rank) {
  if (rank < 1 || rank > std::min(m.rows(), m.cols()))
    throw std::invalid_argument("truncated_svd: rank out of range");
  SvdResult full = svd_dense(m);
  SvdResult out;
  out.u = full.u.leftCols(rank);
  out.s = full.s.head(rank);
  out.v = full.v.leftCols(rank);
  return out;
}

void svd_append_columns(Matrix& u, Matrix& s, Matrix& v, const SparseCoo& new_cols,
                        Index keep_rank) {
  if (new_cols.order() != 2 || new_cols.shape[0] != u.rows())
    throw std::invalid_argument("svd_append_columns: delta shape mismatch");
  const Index r0 = u.cols(), c = new_cols.shape[1];
  if (s.rows() != r0 || s.cols() != r0 || v.cols() != r0)
    throw std::invalid_argument("svd_append_columns: inconsistent factors");
  if (c == 0) return;
  if (u.rows() < c)
    throw std::invalid_argument(
        "svd_append_columns: more new columns than rows; split the batch");
  if (keep_rank < 1 || keep_rank > r0 + c)
    throw std::invalid_argument("svd_append_columns: keep_rank out of range");

  CsrMatrix dt = to_csr(new_cols);
  Matrix p = kernels::spmm(csr_transpose(dt), u).transpose();  // r0 x c
  Matrix z = -u * p;
  for (const auto& e : new_cols.entries) z(e.i, e.j) += e.v;
  // second projection pass keeps the residual orthogonal to u when the new
  // columns lie almost inside its span
  Matrix p2 = u.transpose() * z;
  z -= u * p2;
  p += p2;
  QrResult qr = thin_qr(z);

  Matrix mid = Matrix::Zero(r0 + c, r0 + c);
  mid.topLeftCorner(r0, r0) = s;
  mid.topRightCorner(r0, c) = p;
  mid.bottomRightCorner(c, c) = qr.r;
  SvdResult ms = svd_dense(mid);

  const Index k = keep_rank;
  Matrix uk = ms.u.leftCols(k);
  Matrix vk = ms.v.leftCols(k);
  Matrix u1 = u * uk.topRows(r0) + qr.q * uk.bottomRows(c);
  Matrix v1(v.rows() + c, k);
  v1.topRows(v.rows()) = v * vk.topRows(r0);
  v1.bottomRows(c) = vk.bottomRows(c);

  QrResult polish = thin_qr(u1);
  u = polish.q;
  s = polish.r * Matrix(ms.s.head(k).asDiagonal());
  v = std::move(v1);
}

SvdResult truncated_svd(const SparseCoo& m, Index rank, std::uint64_t seed) {
  if (m.order() != 2) throw std::invalid_argument("truncated_svd: order 2 required");
  const Index rows = m.shape[0], cols = m.shape[1];
  if (rank < 1 || rank > std::min(rows, cols))
    throw std::invalid_argument("truncated_svd: rank out of range");
  if (rows < 500 && cols < 500) return truncated_svd(m.dense_matrix(), rank);

  const Index p = std::min(rank + 10, std::min(rows, cols));
  CsrMatrix a = to_csr(m);
  CsrMatrix at = csr_transpose(a);
  Rng rng(Rng::derive(seed, 0x5fd1));
  Matrix g = rng.gaussian_matrix(cols, p);
  Matrix q = thin_qr(kernels::spmm(a, g)).q;
  for (int it = 0; it < 2; ++it) {
    Matrix z = thin_qr(kernels::spmm(at, q)).q;
    q = thin_qr(kernels::spmm(a, z)).q;
  }
  Matrix b = kernels::spmm(at, q).transpose();  // p x cols
  SvdResult small = svd_dense(b);
  SvdResult out;
  out.u = q * small.u.leftCols(rank);
  out.s = small.s.head(rank);
  out.v = small.v.leftCols(rank);
  fix_svd_signs(out.u, out.v);
  return out;
}

}  // namespace streamrec
