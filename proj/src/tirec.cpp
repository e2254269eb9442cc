#include "streamrec/tirec.hpp"

#include "streamrec/decomp.hpp"
#include "streamrec/kernels.hpp"
#include "streamrec/metrics.hpp"

#include <stdexcept>

namespace streamrec::tirec {

namespace {

void check_state(const TuckerState& st) {
  if (st.u1.rows() != st.users.size() || st.u2.rows() != st.items.size())
    throw std::invalid_argument("tucker state: factor rows disagree with id maps");
  if (st.u3.rows() != st.attention.length)
    throw std::invalid_argument("tucker state: positional factor must have L rows");
}

void append_zero_rows(Matrix& f, Index c) {
  f.conservativeResize(f.rows() + c, Eigen::NoChange);
  f.bottomRows(c).setZero();
}

// expects the state's current shape in dims, delta validated against it
void check_delta(const TuckerState& st, const SparseCoo& d, Index n1, Index n2) {
  if (d.order() != 3 || d.shape[0] != n1 || d.shape[1] != n2 ||
      d.shape[2] != st.attention.length)
    throw std::invalid_argument("tensor delta shape mismatch");
}

}  // namespace

TuckerState init(const SparseCoo& weighted, std::array<Index, 3> ranks,
                 const IdMap& users, const IdMap& items, AttentionSpec attention,
                 HooiOptions opts, std::uint64_t seed) {
  if (weighted.order() != 3 || weighted.shape[0] != users.size() ||
      weighted.shape[1] != items.size() || weighted.shape[2] != attention.length)
    throw std::invalid_argument("tirec::init: shape disagrees with maps or window");
  check_tucker_ranks({weighted.shape[0], weighted.shape[1], weighted.shape[2]}, ranks);
  HooiResult fit = hooi(weighted, ranks, nullptr, opts, seed);
  TuckerState st;
  st.u1 = std::move(fit.factors.u1);
  st.u2 = std::move(fit.factors.u2);
  st.u3 = std::move(fit.factors.u3);
  st.core = std::move(fit.factors.core);
  st.users = users;
  st.items = items;
  st.attention = attention;
  st.ranks = ranks;
  return st;
}

void ti_update(TuckerState& st, const SparseCoo& delta) {
  check_state(st);
  check_delta(st, delta, st.users.size(), st.items.size());
  if (delta.nnz() == 0) return;

  Matrix* us[3] = {&st.u1, &st.u2, &st.u3};
  for (int mode = 1; mode <= 3; ++mode) {
    Matrix g = unfold(st.core, mode);
    QrResult gq = thin_qr(g.transpose());   // core_[m]^T = q * r
    Matrix s = gq.r.transpose();            // r_m x r_m
    const Matrix& fa = *us[mode == 1 ? 1 : 0];
    const Matrix& fb = *us[mode == 3 ? 1 : 2];
    Matrix w = kernels::ttm_pair(delta, mode, fa, fb);
    Matrix d = w * gq.q;                     // n_m x r_m
    QrResult kq = thin_qr(*us[mode - 1] * s + d);
    Matrix s_new = kq.r - kq.q.transpose() * d;
    st.core = fold(s_new * gq.q.transpose(), mode, st.core.dims());
    *us[mode - 1] = kq.q;
  }
  Matrix w1 = kernels::ttm_pair(delta, 1, st.u2, st.u3);
  st.core.raw() +=
      fold(st.u1.transpose() * w1, 1, st.core.dims()).raw();
}

void add_block(TuckerState& st, const SparseCoo& delta,
               const std::vector<std::int64_t>& user_ids,
               const std::vector<std::int64_t>& item_ids, HooiOptions opts) {
  check_state(st);
  const Index a = static_cast<Index>(user_ids.size());
  const Index b = static_cast<Index>(item_ids.size());
  check_delta(st, delta, a, b);

  if (delta.nnz() == 0) {
    append_zero_rows(st.u1, a);
    append_zero_rows(st.u2, b);
    for (auto id : user_ids) st.users.add(id);
    for (auto id : item_ids) st.items.add(id);
    return;
  }

  const auto [r1, r2, r3] = st.ranks;
  Tensor3 t = kernels::ttm_single(delta, 3, st.u3);  // a x b x r3
  Index ra = std::min(a, r1), rb = std::min(b, r2);
  for (;;) {  // keep the two-mode ranks mutually feasible
    Index ra2 = std::min(ra, rb * r3), rb2 = std::min(rb, ra * r3);
    if (ra2 == ra && rb2 == rb) break;
    ra = ra2;
    rb = rb2;
  }
  Tucker2Result blk = tucker2(t, ra, rb, opts);

  Tensor3 big(r1 + ra, r2 + rb, r3);
  for (Index k = 0; k < r3; ++k) {
    for (Index i = 0; i < r1; ++i)
      for (Index j = 0; j < r2; ++j) big(i, j, k) = st.core(i, j, k);
    for (Index i = 0; i < ra; ++i)
      for (Index j = 0; j < rb; ++j) big(r1 + i, r2 + j, k) = blk.core(i, j, k);
  }
  TuckerFactors merged = hosvd(big, st.ranks);

  Matrix u1(st.u1.rows() + a, r1);
  u1.topRows(st.u1.rows()) = st.u1 * merged.u1.topRows(r1);
  u1.bottomRows(a) = blk.u * merged.u1.bottomRows(ra);
  Matrix u2(st.u2.rows() + b, r2);
  u2.topRows(st.u2.rows()) = st.u2 * merged.u2.topRows(r2);
  u2.bottomRows(b) = blk.v * merged.u2.bottomRows(rb);

  st.u1 = std::move(u1);
  st.u2 = std::move(u2);
  st.u3 = st.u3 * merged.u3;
  st.core = std::move(merged.core);
  for (auto id : user_ids) st.users.add(id);
  for (auto id : item_ids) st.items.add(id);
}

void add_mode_vectors(TuckerState& st, const SparseCoo& delta, Axis axis,
                      const std::vector<std::int64_t>& ids) {
  check_state(st);
  const int mode = axis == Axis::users ? 1 : 2;
  const Index c = static_cast<Index>(ids.size());
  if (axis == Axis::users)
    check_delta(st, delta, c, st.items.size());
  else
    check_delta(st, delta, st.users.size(), c);
  if (c == 0) return;

  auto extend_maps = [&] {
    auto& map = axis == Axis::users ? st.users : st.items;
    for (auto id : ids) map.add(id);
  };
  Matrix& um = axis == Axis::users ? st.u1 : st.u2;
  if (delta.nnz() == 0) {
    append_zero_rows(um, c);
    extend_maps();
    return;
  }

  const Matrix& ua = mode == 1 ? st.u2 : st.u1;  // lower non-target mode
  const Matrix& ub = st.u3;
  const Index na = ua.rows(), nb = ub.rows();
  const Index ra = ua.cols(), rb = ub.cols();
  const Index rm = st.ranks[mode - 1];

  // rows of the unfolded model surface: row t = vec(ua * G_t * ub^T)
  Matrix g = unfold(st.core, mode);  // rm x (ra*rb)
  Matrix wide(rm, na * nb);
  for (Index t = 0; t < rm; ++t) {
    Vector gr = g.row(t).transpose();  // contiguous copy of the core slab
    Eigen::Map<const Matrix> gt(gr.data(), ra, rb);
    Matrix slab = ua * gt * ub.transpose();  // na x nb
    wide.row(t) = Eigen::Map<const Vector>(slab.data(), na * nb);
  }
  SvdResult ws = svd_dense(wide);
  Matrix left = ws.v;                       // (na*nb) x rm
  Matrix smid = ws.s.asDiagonal();          // rm x rm
  Matrix right = um * ws.u;                 // n_m x rm

  SparseCoo unf = unfold(delta, mode);      // c x (na*nb)
  SparseCoo cols = SparseCoo::matrix(na * nb, c);
  cols.entries.reserve(unf.entries.size());
  for (const auto& e : unf.entries) cols.add(e.j, e.i, e.v);
  cols.compress();

  svd_append_columns(left, smid, right, cols, rm);

  // the append worked on the transposed surface, so the middle factor comes
  // back transposed: core_[m] = smid^T * left^T * kron(ub, ua)
  Matrix m2(rm, ra * rb);
  for (Index j = 0; j < rm; ++j) {
    Eigen::Map<const Matrix> vj(left.col(j).data(), na, nb);
    Matrix w = ua.transpose() * vj * ub;  // ra x rb
    m2.row(j) = Eigen::Map<const Vector>(w.data(), ra * rb);
  }
  st.core = fold(smid.transpose() * m2, mode, st.core.dims());
  um = std::move(right);
  extend_maps();
}

void attach_embeddings(TuckerState& st, Axis axis,
                       const std::vector<std::int64_t>& ids, InitStrategy strategy,
                       double sigma, Rng& rng) {
  check_state(st);
  if (strategy == InitStrategy::incremental)
    throw std::invalid_argument("attach_embeddings: use the data-driven add ops");
  const Index c = static_cast<Index>(ids.size());
  const int mode = axis == Axis::users ? 1 : 2;
  Matrix& f = axis == Axis::users ? st.u1 : st.u2;
  if (c > 0) {
    if (strategy == InitStrategy::zero) {
      append_zero_rows(f, c);
    } else {
      f.conservativeResize(f.rows() + c, Eigen::NoChange);
      f.bottomRows(c) = sigma * rng.gaussian_matrix(c, f.cols());
      QrResult qr = thin_qr(f);
      f = qr.q;
      st.core = mode_product(st.core, qr.r, mode);
    }
  }
  auto& map = axis == Axis::users ? st.users : st.items;
  for (auto id : ids) map.add(id);
}

Vector scores(const TuckerState& st, const std::vector<Cell>& window) {
  check_state(st);
  const Index L = st.attention.length;
  Matrix a = attention_matrix(st.attention);
  Vector w_last = attention_solve_transpose(a, st.u3).row(L - 1).transpose();
  Vector y = a * (st.u3 * w_last);
  Vector c = Vector::Zero(L);  // one-step shift: the oldest slot drops out
  for (Index q = 1; q < L; ++q) c[q] = y[q - 1];
  Vector f = Vector::Zero(st.u2.cols());
  for (const Cell& cell : window) {
    if (cell.first < 0 || cell.first >= st.u2.rows() || cell.second < 0 ||
        cell.second >= L)
      throw std::invalid_argument("scores: window cell out of range");
    f += c[cell.second] * st.u2.row(cell.first).transpose();
  }
  return st.u2 * f;
}

std::vector<Index> recommend(const TuckerState& st, const std::vector<Cell>& window,
                             int n, bool exclude_seen,
                             const std::vector<Index>& extra_exclude) {
  Vector sc = scores(st, window);
  std::vector<char> excl(st.u2.rows(), 0);
  if (exclude_seen)
    for (const Cell& cell : window) excl[cell.first] = 1;
  for (Index it : extra_exclude)
    if (it >= 0 && it < st.u2.rows()) excl[it] = 1;
  return top_indices(sc, n, &excl);
}

}  // namespace streamrec::tirec
