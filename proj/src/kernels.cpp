#include "streamrec/kernels.hpp"

#include <atomic>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace streamrec::kernels {

namespace {
std::atomic<bool> g_parallel{true};

struct ModeGroups {
  // entry positions grouped by the target-mode index
  std::vector<Index> offsets;  // n_target + 1
  std::vector<Index> ids;
};

ModeGroups group_by_mode(const SparseCoo& t, int mode) {
  const Index n = t.shape[mode - 1];
  ModeGroups g;
  g.offsets.assign(n + 1, 0);
  auto target = [&](const SparseCoo::Entry& e) {
    return mode == 1 ? e.i : (mode == 2 ? e.j : e.k);
  };
  for (const auto& e : t.entries) g.offsets[target(e) + 1]++;
  for (Index r = 0; r < n; ++r) g.offsets[r + 1] += g.offsets[r];
  g.ids.resize(t.entries.size());
  std::vector<Index> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (Index p = 0; p < t.nnz(); ++p)
    g.ids[cursor[target(t.entries[p])]++] = p;
  return g;
}

void check_ttm_args(const SparseCoo& t, int mode, const Matrix& fa, const Matrix& fb) {
  if (t.order() != 3) throw std::invalid_argument("ttm_pair: order 3 tensor required");
  if (mode < 1 || mode > 3) throw std::invalid_argument("ttm_pair: mode must be 1..3");
  int a = mode == 1 ? 2 : 1;
  int b = mode == 3 ? 2 : 3;
  if (fa.rows() != t.shape[a - 1] || fb.rows() != t.shape[b - 1])
    throw std::invalid_argument("ttm_pair: factor rows do not match tensor extents");
}

// scatter one entry into column `target` of wt (ra*rb x n_target)
inline void scatter_entry(const SparseCoo::Entry& e, int mode, const Matrix& fa,
                          const Matrix& fb, Matrix& wt) {
  const Index ra = fa.cols(), rb = fb.cols();
  Index ia, ib, it;
  switch (mode) {
    case 1: it = e.i; ia = e.j; ib = e.k; break;
    case 2: it = e.j; ia = e.i; ib = e.k; break;
    default: it = e.k; ia = e.i; ib = e.j; break;
  }
  double* out = wt.data() + static_cast<size_t>(it) * (ra * rb);
  for (Index q = 0; q < rb; ++q) {
    const double c = e.v * fb(ib, q);
    for (Index p = 0; p < ra; ++p) out[p + q * ra] += c * fa(ia, p);
  }
}

Matrix ttm_pair_impl(const SparseCoo& t, int mode, const Matrix& fa,
                     const Matrix& fb, bool parallel) {
  check_ttm_args(t, mode, fa, fb);
  const Index n = t.shape[mode - 1];
  const Index ra = fa.cols(), rb = fb.cols();
  Matrix wt = Matrix::Zero(ra * rb, n);
  ModeGroups g = group_by_mode(t, mode);
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < n; ++r)
      for (Index p = g.offsets[r]; p < g.offsets[r + 1]; ++p)
        scatter_entry(t.entries[g.ids[p]], mode, fa, fb, wt);
  } else
#endif
  {
    (void)parallel;
    for (Index r = 0; r < n; ++r)
      for (Index p = g.offsets[r]; p < g.offsets[r + 1]; ++p)
        scatter_entry(t.entries[g.ids[p]], mode, fa, fb, wt);
  }
  return wt.transpose();
}

Matrix spmm_impl(const CsrMatrix& a, const Matrix& x, bool parallel) {
  if (a.cols != x.rows())
    throw std::invalid_argument("spmm: dimension mismatch");
  const Index r = x.cols();
  Matrix xt = x.transpose();
  Matrix yt = Matrix::Zero(r, a.rows);
#ifdef _OPENMP
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (Index row = 0; row < a.rows; ++row)
      for (Index p = a.row_ptr[row]; p < a.row_ptr[row + 1]; ++p)
        yt.col(row) += a.val[p] * xt.col(a.col[p]);
  } else
#endif
  {
    (void)parallel;
    for (Index row = 0; row < a.rows; ++row)
      for (Index p = a.row_ptr[row]; p < a.row_ptr[row + 1]; ++p)
        yt.col(row) += a.val[p] * xt.col(a.col[p]);
  }
  return yt.transpose();
}

}  // namespace

void set_parallel(bool on) { g_parallel.store(on); }
bool parallel_enabled() {
#ifdef _OPENMP
  return g_parallel.load();
#else
  return false;
#endif
}

Matrix spmm_serial(const CsrMatrix& a, const Matrix& x) { return spmm_impl(a, x, false); }
Matrix spmm_omp(const CsrMatrix& a, const Matrix& x) { return spmm_impl(a, x, true); }
Matrix spmm(const CsrMatrix& a, const Matrix& x) {
  return spmm_impl(a, x, parallel_enabled());
}

Matrix ttm_pair_serial(const SparseCoo& t, int mode, const Matrix& fa, const Matrix& fb) {
  return ttm_pair_impl(t, mode, fa, fb, false);
}
Matrix ttm_pair_omp(const SparseCoo& t, int mode, const Matrix& fa, const Matrix& fb) {
  return ttm_pair_impl(t, mode, fa, fb, true);
}
Matrix ttm_pair(const SparseCoo& t, int mode, const Matrix& fa, const Matrix& fb) {
  return ttm_pair_impl(t, mode, fa, fb, parallel_enabled());
}

Tensor3 ttm_single(const SparseCoo& t, int mode, const Matrix& m) {
  if (t.order() != 3) throw std::invalid_argument("ttm_single: order 3 tensor required");
  if (mode < 1 || mode > 3) throw std::invalid_argument("ttm_single: mode must be 1..3");
  if (m.rows() != t.shape[mode - 1])
    throw std::invalid_argument("ttm_single: matrix rows do not match mode extent");
  std::array<Index, 3> d = {t.shape[0], t.shape[1], t.shape[2]};
  d[mode - 1] = m.cols();
  Tensor3 y(d[0], d[1], d[2]);
  for (const auto& e : t.entries) {
    Index idx[3] = {e.i, e.j, e.k};
    const Index c = idx[mode - 1];
    for (Index q = 0; q < m.cols(); ++q) {
      idx[mode - 1] = q;
      y(idx[0], idx[1], idx[2]) += e.v * m(c, q);
    }
  }
  return y;
}

}  // namespace streamrec::kernels
