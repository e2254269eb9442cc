#include "streamrec/psirec.hpp"

#include "streamrec/decomp.hpp"
#include "streamrec/kernels.hpp"
#include "streamrec/metrics.hpp"

#include <stdexcept>

namespace streamrec::psirec {

namespace {

void check_state(const SvdState& st) {
  if (st.u.rows() != st.users.size() || st.v.rows() != st.items.size())
    throw std::invalid_argument("svd state: factor rows disagree with id maps");
}

void append_zero_rows(Matrix& f, Index c) {
  f.conservativeResize(f.rows() + c, Eigen::NoChange);
  f.bottomRows(c).setZero();
}

}  // namespace

SvdState init(const SparseCoo& x, Index rank, const IdMap& users,
              const IdMap& items, std::uint64_t seed) {
  if (x.order() != 2 || x.shape[0] != users.size() || x.shape[1] != items.size())
    throw std::invalid_argument("psirec::init: shape disagrees with id maps");
  if (rank < 1 || rank > std::min(x.shape[0], x.shape[1]))
    throw std::invalid_argument("psirec::init: rank out of range");
  SvdResult svd = truncated_svd(x, rank, seed);
  SvdState st;
  st.u = svd.u;
  st.s = svd.s.asDiagonal();
  st.v = svd.v;
  st.users = users;
  st.items = items;
  st.rank = rank;
  return st;
}

void psi_update(SvdState& st, const SparseCoo& delta) {
  check_state(st);
  if (delta.order() != 2 || delta.shape[0] != st.users.size() ||
      delta.shape[1] != st.items.size())
    throw std::invalid_argument("psi_update: delta shape mismatch");
  if (delta.nnz() == 0) return;

  CsrMatrix d = to_csr(delta);
  CsrMatrix dt = csr_transpose(d);

  Matrix dv = kernels::spmm(d, st.v);                 // delta * v0
  QrResult qk = thin_qr(st.u * st.s + dv);            // u1, s_hat
  Matrix udv = qk.q.transpose() * dv;                 // u1^T * delta * v0
  Matrix l = st.v * (qk.r - udv).transpose() + kernels::spmm(dt, qk.q);
  QrResult ql = thin_qr(l);                           // v1, s1^T

  st.u = qk.q;
  st.v = ql.q;
  st.s = ql.r.transpose();
}

void add_rows_or_cols(SvdState& st, const SparseCoo& delta, Axis axis,
                      const std::vector<std::int64_t>& ids) {
  check_state(st);
  const Index c = static_cast<Index>(ids.size());
  if (delta.order() != 2 || delta.shape[1] != c)
    throw std::invalid_argument("add_rows_or_cols: delta must have one column per id");
  if (c == 0) return;

  if (axis == Axis::items) {
    if (delta.shape[0] != st.users.size())
      throw std::invalid_argument("add_rows_or_cols: delta rows must cover users");
    svd_append_columns(st.u, st.s, st.v, delta, st.rank);
    for (auto id : ids) st.items.add(id);
  } else {
    if (delta.shape[0] != st.items.size())
      throw std::invalid_argument("add_rows_or_cols: delta rows must cover items");
    Matrix st_t = st.s.transpose();
    svd_append_columns(st.v, st_t, st.u, delta, st.rank);
    st.s = st_t.transpose();
    for (auto id : ids) st.users.add(id);
  }
}

void add_block(SvdState& st, const SparseCoo& delta,
               const std::vector<std::int64_t>& user_ids,
               const std::vector<std::int64_t>& item_ids) {
  check_state(st);
  const Index a = static_cast<Index>(user_ids.size());
  const Index b = static_cast<Index>(item_ids.size());
  if (delta.order() != 2 || delta.shape[0] != a || delta.shape[1] != b)
    throw std::invalid_argument("add_block: delta must be (new users x new items)");

  if (delta.nnz() == 0) {
    append_zero_rows(st.u, a);
    append_zero_rows(st.v, b);
    for (auto id : user_ids) st.users.add(id);
    for (auto id : item_ids) st.items.add(id);
    return;
  }

  const Index r = st.rank;
  const Index p = std::min({a, b, r});
  SvdResult blk = truncated_svd(delta, p, 0);  // small and dense underneath

  Matrix mid = Matrix::Zero(r + p, r + p);
  mid.topLeftCorner(r, r) = st.s;
  mid.bottomRightCorner(p, p) = blk.s.asDiagonal();
  SvdResult ms = svd_dense(mid);

  Matrix uk = ms.u.leftCols(r), vk = ms.v.leftCols(r);
  Matrix u1(st.u.rows() + a, r);
  u1.topRows(st.u.rows()) = st.u * uk.topRows(r);
  u1.bottomRows(a) = blk.u * uk.bottomRows(p);
  Matrix v1(st.v.rows() + b, r);
  v1.topRows(st.v.rows()) = st.v * vk.topRows(r);
  v1.bottomRows(b) = blk.v * vk.bottomRows(p);

  st.u = std::move(u1);
  st.v = std::move(v1);
  st.s = ms.s.head(r).asDiagonal();
  for (auto id : user_ids) st.users.add(id);
  for (auto id : item_ids) st.items.add(id);
}

void attach_embeddings(SvdState& st, Axis axis, const std::vector<std::int64_t>& ids,
                       InitStrategy strategy, double sigma, Rng& rng) {
  check_state(st);
  if (strategy == InitStrategy::incremental)
    throw std::invalid_argument("attach_embeddings: use the data-driven add ops");
  const Index c = static_cast<Index>(ids.size());
  Matrix& f = axis == Axis::users ? st.u : st.v;
  if (c > 0) {
    if (strategy == InitStrategy::zero) {
      append_zero_rows(f, c);
    } else {
      f.conservativeResize(f.rows() + c, Eigen::NoChange);
      f.bottomRows(c) = sigma * rng.gaussian_matrix(c, f.cols());
      QrResult qr = thin_qr(f);
      f = qr.q;
      if (axis == Axis::users)
        st.s = qr.r * st.s;
      else
        st.s = st.s * qr.r.transpose();
    }
  }
  auto& map = axis == Axis::users ? st.users : st.items;
  for (auto id : ids) map.add(id);
}

Vector scores(const SvdState& st, const std::vector<Index>& consumed) {
  check_state(st);
  Vector proj = Vector::Zero(st.rank);
  for (Index it : consumed) {
    if (it < 0 || it >= st.v.rows())
      throw std::invalid_argument("scores: item index out of range");
    proj += st.v.row(it);
  }
  return st.v * proj;
}

std::vector<Index> recommend(const SvdState& st, const std::vector<Index>& consumed,
                             int n, bool exclude_seen,
                             const std::vector<Index>& extra_exclude) {
  Vector sc = scores(st, consumed);
  std::vector<char> excl(st.v.rows(), 0);
  if (exclude_seen)
    for (Index it : consumed) excl[it] = 1;
  for (Index it : extra_exclude)
    if (it >= 0 && it < st.v.rows()) excl[it] = 1;
  return top_indices(sc, n, &excl);
}

}  // namespace streamrec::psirec
