#include "doctest.h"

#include "streamrec/decomp.hpp"
#include "streamrec/tucker.hpp"
#include "support/oracles.hpp"

using namespace streamrec;

namespace {

Tensor3 counted(Index n1, Index n2, Index n3) {
  Tensor3 t(n1, n2, n3);
  double v = 1.0;
  for (Index k = 0; k < n3; ++k)
    for (Index j = 0; j < n2; ++j)
      for (Index i = 0; i < n1; ++i) t(i, j, k) = v++;
  return t;
}

}  // namespace

TEST_CASE("unfoldings follow the fixed index maps") {
  Tensor3 t = counted(2, 3, 2);  // t(i,j,k) = 1 + i + 2j + 6k
  for (int mode = 1; mode <= 3; ++mode) {
    Matrix got = unfold(t, mode);
    Matrix ref = oracle::unfold(t, mode);
    REQUIRE(got.rows() == ref.rows());
    REQUIRE(got.cols() == ref.cols());
    CHECK(oracle::max_abs_diff(got, ref) == 0.0);
  }
  // a few positions spelled out by hand from the map definitions
  CHECK(unfold(t, 1)(1, 2 + 1 * 3) == t(1, 2, 1));
  CHECK(unfold(t, 2)(2, 0 + 1 * 2) == t(0, 2, 1));
  CHECK(unfold(t, 3)(1, 1 + 2 * 2) == t(1, 2, 1));
}

TEST_CASE("fold inverts unfold for every mode") {
  Tensor3 t = counted(3, 4, 2);
  for (int mode = 1; mode <= 3; ++mode) {
    Tensor3 back = fold(unfold(t, mode), mode, t.dims());
    CHECK(oracle::tensor_diff(back, t) == 0.0);
  }
}

TEST_CASE("sparse unfold agrees with dense unfold") {
  Rng rng(51);
  Tensor3 d(5, 6, 3);
  for (int n = 0; n < 25; ++n)
    d(static_cast<Index>(rng.uniform() * 5), static_cast<Index>(rng.uniform() * 6),
      static_cast<Index>(rng.uniform() * 3)) = rng.gaussian();
  SparseCoo s = oracle::sparse_from_dense(d);
  for (int mode = 1; mode <= 3; ++mode) {
    SparseCoo u = unfold(s, mode);
    u.compress();
    CHECK(oracle::max_abs_diff(u.dense_matrix(), oracle::unfold(d, mode)) == 0.0);
  }
}

TEST_CASE("mode product matches triple loop and composes") {
  Rng rng(52);
  Tensor3 t(4, 5, 3);
  for (Index p = 0; p < t.size(); ++p) t.raw()[p] = rng.gaussian();
  Matrix m = rng.gaussian_matrix(2, 5);
  CHECK(oracle::tensor_diff(mode_product(t, m, 2), oracle::mode_product(t, m, 2)) <
        1e-13);

  Matrix a = rng.gaussian_matrix(3, 2), b = rng.gaussian_matrix(2, 4);
  Tensor3 ab = mode_product(t, a * b, 1);
  Tensor3 ba = mode_product(mode_product(t, b, 1), a, 1);
  CHECK(oracle::tensor_diff(ab, ba) < 1e-12);

  Tensor3 id = mode_product(t, Matrix::Identity(3, 3), 3);
  CHECK(oracle::tensor_diff(id, t) == 0.0);

  CHECK_THROWS_AS(mode_product(t, rng.gaussian_matrix(2, 4), 2),
                  std::invalid_argument);
}

TEST_CASE("hosvd is exact at full multilinear rank and quasi optimal below") {
  Rng rng(53);
  Tensor3 t = oracle::random_tucker(rng, {8, 7, 5}, {3, 3, 2});
  TuckerFactors f = hosvd(t, {3, 3, 2});
  CHECK(oracle::orin(f.u1) < 1e-12);
  CHECK(oracle::orin(f.u2) < 1e-12);
  CHECK(oracle::orin(f.u3) < 1e-12);
  Tensor3 rec = mode_product(mode_product(mode_product(f.core, f.u1, 1), f.u2, 2),
                             f.u3, 3);
  CHECK(oracle::tensor_diff(rec, t) < 1e-9 * t.norm());

  // truncation below the true rank obeys the additive tail bound
  Tensor3 dense(6, 6, 4);
  for (Index p = 0; p < dense.size(); ++p) dense.raw()[p] = rng.gaussian();
  std::array<Index, 3> ranks = {3, 3, 2};
  TuckerFactors g = hosvd(dense, ranks);
  Tensor3 rec2 = mode_product(
      mode_product(mode_product(g.core, g.u1, 1), g.u2, 2), g.u3, 3);
  double err2 = 0.0;
  for (Index p = 0; p < dense.size(); ++p) {
    double r = dense.raw()[p] - rec2.raw()[p];
    err2 += r * r;
  }
  double tail = 0.0;
  for (int mode = 1; mode <= 3; ++mode) {
    SvdResult s = svd_dense(unfold(dense, mode));
    for (Index j = ranks[mode - 1]; j < s.s.size(); ++j) tail += s.s[j] * s.s[j];
  }
  CHECK(err2 <= tail * (1.0 + 1e-10));
}

TEST_CASE("sparse hosvd matches dense subspaces on the exact gram path") {
  Rng rng(54);
  Tensor3 t = oracle::random_tucker(rng, {9, 8, 4}, {2, 3, 2});
  SparseCoo s = oracle::sparse_from_dense(t);
  TuckerFactors fd = hosvd(t, {2, 3, 2});
  TuckerFactors fs = hosvd(s, {2, 3, 2}, 17);
  CHECK(oracle::max_abs_diff(fs.u1 * fs.u1.transpose(), fd.u1 * fd.u1.transpose()) <
        1e-8);
  CHECK(oracle::max_abs_diff(fs.u2 * fs.u2.transpose(), fd.u2 * fd.u2.transpose()) <
        1e-8);
  CHECK(oracle::max_abs_diff(fs.u3 * fs.u3.transpose(), fd.u3 * fd.u3.transpose()) <
        1e-8);
}

TEST_CASE("sparse hosvd randomized path recovers exact rank structure") {
  Rng rng(55);
  // mode 1 extent above the exact-gram threshold exercises the range finder
  Matrix u1 = rng.gaussian_matrix(2100, 2);
  Matrix u2 = rng.gaussian_matrix(5, 2);
  Matrix u3 = rng.gaussian_matrix(4, 2);
  Tensor3 core(2, 2, 2);
  for (Index p = 0; p < core.size(); ++p) core.raw()[p] = rng.gaussian();
  Tensor3 t = oracle::mode_product(
      oracle::mode_product(oracle::mode_product(core, u1, 1), u2, 2), u3, 3);
  SparseCoo s = oracle::sparse_from_dense(t);
  TuckerFactors f = hosvd(s, {2, 2, 2}, 23);
  CHECK(oracle::orin(f.u1) < 1e-10);
  Tensor3 rec = mode_product(mode_product(mode_product(f.core, f.u1, 1), f.u2, 2),
                             f.u3, 3);
  CHECK(oracle::tensor_diff(rec, t) < 1e-7 * t.norm());
}

TEST_CASE("hooi converges fast on exact rank input and decreases fit") {
  Rng rng(56);
  Tensor3 t = oracle::random_tucker(rng, {12, 10, 6}, {3, 2, 2});
  HooiResult r = hooi(t, {3, 2, 2}, nullptr, {}, 3);
  CHECK(r.sweeps <= 2);
  CHECK(r.fit_errors.back() < 1e-9);
  for (size_t i = 1; i < r.fit_errors.size(); ++i)
    CHECK(r.fit_errors[i] <= r.fit_errors[i - 1] + 1e-12);

  Tensor3 noisy = t;
  for (Index p = 0; p < noisy.size(); ++p) noisy.raw()[p] += 0.05 * rng.gaussian();
  HooiResult rn = hooi(noisy, {3, 2, 2}, nullptr, {}, 3);
  for (size_t i = 1; i < rn.fit_errors.size(); ++i)
    CHECK(rn.fit_errors[i] <= rn.fit_errors[i - 1] + 1e-12);
  CHECK(rn.fit_errors[1] <= rn.fit_errors[0] + 1e-12);  // first sweep vs init
}

TEST_CASE("hooi warm start counts fewer sweeps on unchanged data") {
  Rng rng(57);
  Tensor3 t = oracle::random_tucker(rng, {10, 9, 5}, {2, 2, 2});
  Tensor3 noisy = t;
  for (Index p = 0; p < noisy.size(); ++p) noisy.raw()[p] += 0.02 * rng.gaussian();
  HooiResult cold = hooi(noisy, {2, 2, 2}, nullptr, {}, 5);
  HooiResult warm = hooi(noisy, {2, 2, 2}, &cold.factors, {}, 5);
  CHECK(warm.sweeps <= cold.sweeps);
  CHECK(warm.fit_errors[0] <= cold.fit_errors.back() + 1e-12);
}

TEST_CASE("rank validation rejects overflow and infeasible combinations") {
  Tensor3 t = counted(4, 4, 4);
  CHECK_THROWS_AS(hosvd(t, {5, 2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(hosvd(t, {4, 1, 2}), std::invalid_argument);  // 4 > 1*2
  CHECK_NOTHROW(hosvd(t, {4, 2, 2}));
}

TEST_CASE("tucker2 agrees with two mode hooi") {
  Rng rng(58);
  Tensor3 t = oracle::random_tucker(rng, {9, 8, 4}, {3, 3, 4});
  Tucker2Result t2 = tucker2(t, 3, 3, {});
  CHECK(oracle::orin(t2.u) < 1e-10);
  CHECK(oracle::orin(t2.v) < 1e-10);
  Tensor3 rec = mode_product(mode_product(t2.core, t2.u, 1), t2.v, 2);
  CHECK(oracle::tensor_diff(rec, t) < 1e-8 * t.norm());

  Tensor3 dense(7, 6, 3);
  for (Index p = 0; p < dense.size(); ++p) dense.raw()[p] = rng.gaussian();
  Tucker2Result a = tucker2(dense, 3, 3, {});
  HooiResult b = hooi(dense, {3, 3, 3}, nullptr, {}, 9);
  double fit_a = std::sqrt(std::max(
                     0.0, dense.norm() * dense.norm() - a.core.norm() * a.core.norm())) /
                 dense.norm();
  CHECK(fit_a == doctest::Approx(b.fit_errors.back()).epsilon(1e-8));
}
