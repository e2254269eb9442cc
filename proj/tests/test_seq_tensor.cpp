#include "doctest.h"

#include "streamrec/seq_tensor.hpp"
#include "streamrec/tucker.hpp"
#include "support/oracles.hpp"

#include <set>

using namespace streamrec;

TEST_CASE("attention matrix values") {
  Matrix a0 = attention_matrix({3, 0.0});
  Matrix ones = Matrix::Zero(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j <= i; ++j) ones(i, j) = 1.0;
  CHECK(oracle::max_abs_diff(a0, ones) == 0.0);

  Matrix a2 = attention_matrix({3, 2.0});
  CHECK(a2(0, 0) == 1.0);
  CHECK(a2(1, 0) == doctest::Approx(0.25));
  CHECK(a2(2, 0) == doctest::Approx(1.0 / 9.0));
  CHECK(a2(2, 1) == doctest::Approx(0.25));
  CHECK(a2(2, 2) == 1.0);
  CHECK(a2(0, 1) == 0.0);
  CHECK(a2(0, 2) == 0.0);
  CHECK_THROWS_AS(attention_matrix({0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(attention_matrix({3, -1.0}), std::invalid_argument);
}

TEST_CASE("attention transpose solve inverts the matrix") {
  Matrix a = attention_matrix({5, 1.5});
  Rng rng(61);
  Matrix w = rng.gaussian_matrix(5, 3);
  Matrix x = attention_solve_transpose(a, w);
  CHECK(oracle::max_abs_diff(a.transpose() * x, w) < 1e-12);
}

TEST_CASE("apply_attention smears a cell over later positions") {
  Matrix a = attention_matrix({4, 2.0});
  SparseCoo x = SparseCoo::tensor(2, 3, 4);
  x.add(1, 2, 1, 1.0);
  x.compress();
  SparseCoo y = apply_attention(x, a);
  Tensor3 d = y.dense_tensor();
  CHECK(d(1, 2, 0) == 0.0);
  CHECK(d(1, 2, 1) == doctest::Approx(1.0));
  CHECK(d(1, 2, 2) == doctest::Approx(0.25));
  CHECK(d(1, 2, 3) == doctest::Approx(1.0 / 9.0));
  // equals the mode-3 product with A
  Tensor3 ref = oracle::mode_product(x.dense_tensor(), a, 3);
  CHECK(oracle::tensor_diff(d, ref) < 1e-13);
}

TEST_CASE("apply_attention matches dense mode product on random input") {
  Rng rng(62);
  Matrix a = attention_matrix({5, 1.0});
  SparseCoo x = SparseCoo::tensor(6, 7, 5);
  for (int n = 0; n < 30; ++n)
    x.add(static_cast<Index>(rng.uniform() * 6), static_cast<Index>(rng.uniform() * 7),
          static_cast<Index>(rng.uniform() * 5), rng.gaussian());
  x.compress();
  SparseCoo y = apply_attention(x, a);
  CHECK_NOTHROW(y.validate());
  CHECK(y.nnz() <= x.nnz() * 5);
  Tensor3 ref = oracle::mode_product(x.dense_tensor(), a, 3);
  CHECK(oracle::tensor_diff(y.dense_tensor(), ref) < 1e-12);
}

TEST_CASE("windows keep the latest occurrence of repeated items") {
  std::vector<Index> w;
  window_append(w, 5, 3);
  window_append(w, 9, 3);
  CHECK(w == std::vector<Index>{5, 9});
  window_append(w, 5, 3);  // repeat moves to most recent
  CHECK(w == std::vector<Index>{9, 5});
  window_append(w, 1, 3);
  window_append(w, 2, 3);  // overflow drops oldest
  CHECK(w == std::vector<Index>{5, 1, 2});

  auto cells = window_cells(std::vector<Index>{5, 9}, 3);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0] == Cell{5, 1});
  CHECK(cells[1] == Cell{9, 2});
}

TEST_CASE("build_tensor places window cells per the position formula") {
  std::vector<InternalEvent> evs = {{0, 5}, {0, 9}, {1, 2}};
  auto h = build_histories(evs, 2, 3);
  SparseCoo t = build_tensor(h, 10, 3);
  Tensor3 d = t.dense_tensor();
  CHECK(d(0, 5, 1) == 1.0);
  CHECK(d(0, 9, 2) == 1.0);
  CHECK(d(1, 2, 2) == 1.0);
  CHECK(t.nnz() == 3);
}

TEST_CASE("history tracker deltas reconcile model cells with true windows") {
  const Index L = 3, n_items = 6;
  HistoryTracker trk(L);
  trk.ensure_users(2);

  // initial state: both users absorbed via sync
  trk.append(0, 1);
  trk.append(0, 2);
  trk.append(1, 4);
  SparseCoo d0 = SparseCoo::tensor(2, n_items, L);
  trk.sync_user(0, d0);
  trk.sync_user(1, d0);
  d0.compress();
  auto h0 = build_histories({{0, 1}, {0, 2}, {1, 4}}, 2, L);
  SparseCoo x0 = build_tensor(h0, n_items, L);
  CHECK(oracle::tensor_diff(d0.dense_tensor(), x0.dense_tensor()) == 0.0);

  // more events: shifts and a repeat
  trk.append(0, 3);
  trk.append(0, 1);  // moves item 1 to the front
  trk.append(1, 5);
  SparseCoo d1 = SparseCoo::tensor(2, n_items, L);
  trk.sync_user(0, d1);
  trk.sync_user(1, d1);
  d1.compress();

  auto h1 = build_histories({{0, 1}, {0, 2}, {0, 3}, {0, 1}, {1, 4}, {1, 5}}, 2, L);
  SparseCoo x1 = build_tensor(h1, n_items, L);
  // old + delta == new, exactly
  SparseCoo sum = x0;
  for (const auto& e : d1.entries) sum.add(e.i, e.j, e.k, e.v);
  sum.compress();
  CHECK(oracle::tensor_diff(sum.dense_tensor(), x1.dense_tensor()) == 0.0);

  // attention-weighted paths agree too
  Matrix a = attention_matrix({L, 2.0});
  SparseCoo wx0 = apply_attention(x0, a);
  SparseCoo wd1 = apply_attention(d1, a);
  SparseCoo wx1 = apply_attention(x1, a);
  SparseCoo wsum = wx0;
  for (const auto& e : wd1.entries) wsum.add(e.i, e.j, e.k, e.v);
  wsum.compress();
  CHECK(oracle::tensor_diff(wsum.dense_tensor(), wx1.dense_tensor()) < 1e-12);

  CHECK(!trk.dirty(0));
  CHECK(!trk.dirty(1));
}

TEST_CASE("take_cells filters by item set and never double counts") {
  HistoryTracker trk(4);
  trk.append(0, 7);
  trk.append(0, 8);
  trk.append(0, 9);
  auto taken = trk.take_cells(0, {7, 9});
  REQUIRE(taken.size() == 2);
  CHECK(std::set<Cell>(taken.begin(), taken.end()) ==
        std::set<Cell>{{7, 1}, {9, 3}});
  CHECK(trk.take_cells(0, {7, 9}).empty());  // already absorbed
  SparseCoo d = SparseCoo::tensor(1, 10, 4);
  trk.sync_user(0, d);
  d.compress();
  REQUIRE(d.nnz() == 1);  // only the middle cell remains
  CHECK(d.entries[0].j == 8);
  CHECK(d.entries[0].k == 2);
  CHECK(d.entries[0].v == 1.0);
}

TEST_CASE("pair tracker emits each unseen pair once") {
  PairTracker pt;
  std::vector<InternalEvent> evs = {{0, 3}, {0, 3}, {1, 2}, {0, 4}};
  SparseCoo d = pt.delta_and_mark(evs, 2, 5);
  CHECK(d.nnz() == 3);
  CHECK(pt.has(0, 3));
  CHECK(!pt.has(1, 3));
  SparseCoo d2 = pt.delta_and_mark({{0, 3}, {1, 2}}, 2, 5);
  CHECK(d2.nnz() == 0);
  CHECK(pt.items_of(0) == std::vector<Index>{3, 4});
}
