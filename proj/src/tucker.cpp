#include "streamrec/tucker.hpp"

#include "streamrec/decomp.hpp"
#include "streamrec/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace streamrec {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw std::invalid_argument("mode must be 1..3");
}

void fix_signs(Matrix& u) {
  for (Index j = 0; j < u.cols(); ++j) {
    double lead = 0.0;
    for (Index i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, j)) > 1e-12) {
        lead = u(i, j);
        break;
      }
    }
    if (lead < 0.0) u.col(j) = -u.col(j);
  }
}

// leading r left singular vectors of a dense matrix
Matrix leading_left(const Matrix& w, Index r) {
  Eigen::BDCSVD<Matrix> svd(w, Eigen::ComputeThinU);
  Matrix u = svd.matrixU().leftCols(r);
  fix_signs(u);
  return u;
}

}  // namespace

Matrix unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const Index n1 = t.dim(0), n2 = t.dim(1), n3 = t.dim(2);
  if (mode == 1)
    return Eigen::Map<const Matrix>(t.raw().data(), n1, n2 * n3);
  if (mode == 3)
    return Eigen::Map<const Matrix>(t.raw().data(), n1 * n2, n3).transpose();
  Matrix m(n2, n1 * n3);
  for (Index k = 0; k < n3; ++k)
    for (Index j = 0; j < n2; ++j)
      for (Index i = 0; i < n1; ++i) m(j, i + k * n1) = t(i, j, k);
  return m;
}

SparseCoo unfold(const SparseCoo& t, int mode) {
  if (t.order() != 3) throw std::invalid_argument("unfold: order 3 required");
  check_mode(mode);
  const Index n1 = t.shape[0], n2 = t.shape[1], n3 = t.shape[2];
  SparseCoo m;
  switch (mode) {
    case 1: m = SparseCoo::matrix(n1, n2 * n3); break;
    case 2: m = SparseCoo::matrix(n2, n1 * n3); break;
    default: m = SparseCoo::matrix(n3, n1 * n2); break;
  }
  m.entries.reserve(t.entries.size());
  for (const auto& e : t.entries) {
    switch (mode) {
      case 1: m.add(e.i, e.j + e.k * n2, e.v); break;
      case 2: m.add(e.j, e.i + e.k * n1, e.v); break;
      default: m.add(e.k, e.i + e.j * n1, e.v); break;
    }
  }
  return m;
}

Tensor3 fold(const Matrix& m, int mode, std::array<Index, 3> dims) {
  check_mode(mode);
  const Index n1 = dims[0], n2 = dims[1], n3 = dims[2];
  Index rows = mode == 1 ? n1 : (mode == 2 ? n2 : n3);
  Index cols = n1 * n2 * n3 / std::max<Index>(rows, 1);
  if (m.rows() != rows || m.cols() != cols)
    throw std::invalid_argument("fold: shape mismatch");
  Tensor3 t(n1, n2, n3);
  if (mode == 1) {
    Eigen::Map<Matrix>(t.raw().data(), n1, n2 * n3) = m;
    return t;
  }
  if (mode == 3) {
    Eigen::Map<Matrix>(t.raw().data(), n1 * n2, n3) = m.transpose();
    return t;
  }
  for (Index k = 0; k < n3; ++k)
    for (Index j = 0; j < n2; ++j)
      for (Index i = 0; i < n1; ++i) t(i, j, k) = m(j, i + k * n1);
  return t;
}

Tensor3 mode_product(const Tensor3& t, const Matrix& m, int mode) {
  check_mode(mode);
  if (m.cols() != t.dim(mode - 1))
    throw std::invalid_argument("mode_product: matrix cols must match mode extent");
  std::array<Index, 3> dims = t.dims();
  dims[mode - 1] = m.rows();
  return fold(m * unfold(t, mode), mode, dims);
}

void check_tucker_ranks(std::array<Index, 3> dims, std::array<Index, 3> ranks) {
  for (int m = 0; m < 3; ++m) {
    if (ranks[m] < 1 || ranks[m] > dims[m])
      throw std::invalid_argument("tucker ranks must satisfy 1 <= r <= extent");
    Index other = ranks[(m + 1) % 3] * ranks[(m + 2) % 3];
    if (ranks[m] > other)
      throw std::invalid_argument(
          "tucker ranks must satisfy r_m <= product of the other two ranks");
  }
}

TuckerFactors hosvd(const Tensor3& t, std::array<Index, 3> ranks) {
  check_tucker_ranks(t.dims(), ranks);
  TuckerFactors f;
  f.u1 = leading_left(unfold(t, 1), ranks[0]);
  f.u2 = leading_left(unfold(t, 2), ranks[1]);
  f.u3 = leading_left(unfold(t, 3), ranks[2]);
  f.core = mode_product(mode_product(mode_product(t, f.u1.transpose(), 1),
                                     f.u2.transpose(), 2),
                        f.u3.transpose(), 3);
  return f;
}

namespace {

// y = X * (X^T * omega) for the sparse unfolding X, streamed column group by
// column group; u must be compressed (sorted by column).
Matrix gram_times(const SparseCoo& u, const Matrix& omega) {
  Matrix y = Matrix::Zero(u.shape[0], omega.cols());
  size_t b = 0;
  const auto& es = u.entries;
  while (b < es.size()) {
    size_t e = b;
    while (e < es.size() && es[e].j == es[b].j) ++e;
    Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(omega.cols());
    for (size_t p = b; p < e; ++p) w += es[p].v * omega.row(es[p].i);
    for (size_t p = b; p < e; ++p) y.row(es[p].i) += es[p].v * w;
    b = e;
  }
  return y;
}

Matrix top_eigvecs(const Matrix& gram, Index r) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Index n = gram.rows();
  Matrix u(n, r);
  for (Index j = 0; j < r; ++j) u.col(j) = eig.eigenvectors().col(n - 1 - j);
  fix_signs(u);
  return u;
}

// leading r left singular vectors of the sparse unfolding. The exact gram
// eigensolve is cubic in n, so past 800 rows the seeded randomized range
// finder takes over (still deterministic for a given seed).
Matrix sparse_leading_left(const SparseCoo& unf, Index r, std::uint64_t seed) {
  const Index n = unf.shape[0];
  if (n <= 800) {
    Matrix gram = Matrix::Zero(n, n);
    size_t b = 0;
    const auto& es = unf.entries;
    while (b < es.size()) {
      size_t e = b;
      while (e < es.size() && es[e].j == es[b].j) ++e;
      for (size_t p = b; p < e; ++p)
        for (size_t q = b; q < e; ++q)
          gram(es[p].i, es[q].i) += es[p].v * es[q].v;
      b = e;
    }
    return top_eigvecs(gram, r);
  }
  const Index p = std::min(r + 10, n);
  Rng rng(Rng::derive(seed, 0xa11c));
  Matrix q = thin_qr(gram_times(unf, rng.gaussian_matrix(n, p))).q;
  for (int it = 0; it < 2; ++it) q = thin_qr(gram_times(unf, q)).q;
  Matrix small = q.transpose() * gram_times(unf, q);  // p x p, symmetric psd
  Matrix u = q * top_eigvecs(0.5 * (small + small.transpose()), r);
  fix_signs(u);
  return u;
}

Tensor3 sparse_core(const SparseCoo& t, const Matrix& u1, const Matrix& u2,
                    const Matrix& u3) {
  Matrix w = kernels::ttm_pair(t, 1, u2, u3);  // n1 x (r2*r3)
  return fold(u1.transpose() * w, 1, {u1.cols(), u2.cols(), u3.cols()});
}

}  // namespace

TuckerFactors hosvd(const SparseCoo& t, std::array<Index, 3> ranks, std::uint64_t seed) {
  if (t.order() != 3) throw std::invalid_argument("hosvd: order 3 required");
  check_tucker_ranks({t.shape[0], t.shape[1], t.shape[2]}, ranks);
  TuckerFactors f;
  for (int mode = 1; mode <= 3; ++mode) {
    SparseCoo unf = unfold(t, mode);
    unf.compress();
    Matrix u = sparse_leading_left(unf, ranks[mode - 1], Rng::derive(seed, mode));
    (mode == 1 ? f.u1 : mode == 2 ? f.u2 : f.u3) = std::move(u);
  }
  f.core = sparse_core(t, f.u1, f.u2, f.u3);
  return f;
}

namespace {

double rel_fit(double norm_x, const Tensor3& core) {
  if (norm_x == 0.0) return 0.0;
  double resid2 = norm_x * norm_x - core.norm() * core.norm();
  return std::sqrt(std::max(0.0, resid2)) / norm_x;
}

}  // namespace

HooiResult hooi(const SparseCoo& t, std::array<Index, 3> ranks,
                const TuckerFactors* init, HooiOptions opts, std::uint64_t seed) {
  if (t.order() != 3) throw std::invalid_argument("hooi: order 3 required");
  check_tucker_ranks({t.shape[0], t.shape[1], t.shape[2]}, ranks);
  HooiResult res;
  res.factors = init ? *init : hosvd(t, ranks, seed);
  const double norm_x = t.frob_norm();
  res.factors.core = sparse_core(t, res.factors.u1, res.factors.u2, res.factors.u3);
  res.fit_errors.push_back(rel_fit(norm_x, res.factors.core));
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    res.factors.u1 = leading_left(
        kernels::ttm_pair(t, 1, res.factors.u2, res.factors.u3), ranks[0]);
    res.factors.u2 = leading_left(
        kernels::ttm_pair(t, 2, res.factors.u1, res.factors.u3), ranks[1]);
    res.factors.u3 = leading_left(
        kernels::ttm_pair(t, 3, res.factors.u1, res.factors.u2), ranks[2]);
    res.factors.core =
        sparse_core(t, res.factors.u1, res.factors.u2, res.factors.u3);
    res.fit_errors.push_back(rel_fit(norm_x, res.factors.core));
    res.sweeps = sweep;
    double improve = res.fit_errors[sweep - 1] - res.fit_errors[sweep];
    if (improve < opts.tol) break;
  }
  return res;
}

HooiResult hooi(const Tensor3& t, std::array<Index, 3> ranks,
                const TuckerFactors* init, HooiOptions opts, std::uint64_t seed) {
  SparseCoo s = SparseCoo::tensor(t.dim(0), t.dim(1), t.dim(2));
  for (Index k = 0; k < t.dim(2); ++k)
    for (Index j = 0; j < t.dim(1); ++j)
      for (Index i = 0; i < t.dim(0); ++i)
        if (t(i, j, k) != 0.0) s.add(i, j, k, t(i, j, k));
  return hooi(s, ranks, init, opts, seed);
}

Tucker2Result tucker2(const Tensor3& t, Index r1, Index r2, HooiOptions opts) {
  const Index n3 = t.dim(2);
  if (r1 < 1 || r1 > t.dim(0) || r2 < 1 || r2 > t.dim(1))
    throw std::invalid_argument("tucker2: rank out of range");
  if (r1 > r2 * n3 || r2 > r1 * n3)
    throw std::invalid_argument("tucker2: infeasible rank pair");
  Tucker2Result res;
  res.u = leading_left(unfold(t, 1), r1);
  res.v = leading_left(unfold(t, 2), r2);
  const double norm_x = t.norm();
  double prev_fit = 1.0;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    res.u = leading_left(unfold(mode_product(t, res.v.transpose(), 2), 1), r1);
    res.v = leading_left(unfold(mode_product(t, res.u.transpose(), 1), 2), r2);
    res.core = mode_product(mode_product(t, res.u.transpose(), 1),
                            res.v.transpose(), 2);
    double fit = rel_fit(norm_x, res.core);
    if (sweep > 1 && prev_fit - fit < opts.tol) break;
    prev_fit = fit;
  }
  if (res.core.size() == 0)
    res.core = mode_product(mode_product(t, res.u.transpose(), 1),
                            res.v.transpose(), 2);
  return res;
}

}  // namespace streamrec
