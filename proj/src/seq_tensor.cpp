#include "streamrec/seq_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace streamrec {

Matrix attention_matrix(const AttentionSpec& spec) {
  const Index L = spec.length;
  if (L < 1) throw std::invalid_argument("attention_matrix: length must be >= 1");
  if (spec.decay < 0.0)
    throw std::invalid_argument("attention_matrix: decay must be >= 0");
  Matrix a = Matrix::Zero(L, L);
  for (Index i = 0; i < L; ++i)
    for (Index j = 0; j <= i; ++j)
      a(i, j) = std::pow(static_cast<double>(i - j + 1), -spec.decay);
  return a;
}

Matrix attention_solve_transpose(const Matrix& a, const Matrix& w) {
  if (a.rows() != a.cols() || a.rows() != w.rows())
    throw std::invalid_argument("attention_solve_transpose: shape mismatch");
  return a.transpose().triangularView<Eigen::Upper>().solve(w);
}

SparseCoo apply_attention(const SparseCoo& x, const Matrix& a) {
  if (x.order() != 3)
    throw std::invalid_argument("apply_attention: order 3 tensor required");
  const Index L = x.shape[2];
  if (a.rows() != L || a.cols() != L)
    throw std::invalid_argument("apply_attention: matrix must be L x L");
  SparseCoo out = SparseCoo::tensor(x.shape[0], x.shape[1], L);
  out.entries.reserve(x.entries.size() * 2);
  for (const auto& e : x.entries)
    for (Index q = e.k; q < L; ++q) out.add(e.i, e.j, q, e.v * a(q, e.k));
  out.compress();
  return out;
}

void window_append(std::vector<Index>& window, Index item, Index L) {
  auto it = std::find(window.begin(), window.end(), item);
  if (it != window.end()) window.erase(it);
  window.push_back(item);
  if (static_cast<Index>(window.size()) > L) window.erase(window.begin());
}

std::vector<Cell> window_cells(const std::vector<Index>& window, Index L) {
  const Index len = static_cast<Index>(window.size());
  std::vector<Cell> cells;
  cells.reserve(len);
  for (Index idx = 0; idx < len; ++idx)
    cells.emplace_back(window[idx], L - len + idx);
  return cells;
}

std::vector<std::vector<Index>> build_histories(const std::vector<InternalEvent>& events,
                                                Index n_users, Index L) {
  std::vector<std::vector<Index>> h(n_users);
  for (const auto& e : events) {
    if (e.user < 0 || e.user >= n_users)
      throw std::invalid_argument("build_histories: user index out of range");
    window_append(h[e.user], e.item, L);
  }
  return h;
}

SparseCoo build_tensor(const std::vector<std::vector<Index>>& histories,
                       Index n_items, Index L) {
  SparseCoo t = SparseCoo::tensor(static_cast<Index>(histories.size()), n_items, L);
  for (Index u = 0; u < static_cast<Index>(histories.size()); ++u)
    for (const Cell& c : window_cells(histories[u], L)) t.add(u, c.first, c.second, 1.0);
  t.compress();
  return t;
}

void HistoryTracker::ensure_users(Index n) {
  if (n > n_users()) {
    win_.resize(n);
    abs_.resize(n);
  }
}

void HistoryTracker::append(Index user, Index item) {
  ensure_users(user + 1);
  window_append(win_[user], item, L_);
}

std::vector<Cell> HistoryTracker::take_cells(Index user,
                                             const std::unordered_set<Index>& items) {
  std::vector<Cell> taken;
  for (const Cell& c : window_cells(win_[user], L_)) {
    if (!items.count(c.first)) continue;
    if (std::binary_search(abs_[user].begin(), abs_[user].end(), c)) continue;
    taken.push_back(c);
  }
  abs_[user].insert(abs_[user].end(), taken.begin(), taken.end());
  std::sort(abs_[user].begin(), abs_[user].end());
  return taken;
}

void HistoryTracker::sync_user(Index user, SparseCoo& delta) {
  std::vector<Cell> now = window_cells(win_[user], L_);
  std::sort(now.begin(), now.end());
  const std::vector<Cell>& old = abs_[user];
  std::vector<Cell> added, removed;
  std::set_difference(now.begin(), now.end(), old.begin(), old.end(),
                      std::back_inserter(added));
  std::set_difference(old.begin(), old.end(), now.begin(), now.end(),
                      std::back_inserter(removed));
  for (const Cell& c : added) delta.add(user, c.first, c.second, 1.0);
  for (const Cell& c : removed) delta.add(user, c.first, c.second, -1.0);
  abs_[user] = std::move(now);
}

bool HistoryTracker::dirty(Index user) const {
  std::vector<Cell> now = window_cells(win_[user], L_);
  std::sort(now.begin(), now.end());
  return now != abs_[user];
}

void PairTracker::ensure_users(Index n) {
  if (n > static_cast<Index>(seen_.size())) seen_.resize(n);
}

bool PairTracker::has(Index user, Index item) const {
  if (user >= static_cast<Index>(seen_.size())) return false;
  return seen_[user].count(item) != 0;
}

void PairTracker::mark(Index user, Index item) {
  ensure_users(user + 1);
  seen_[user].insert(item);
}

SparseCoo PairTracker::delta_and_mark(const std::vector<InternalEvent>& events,
                                      Index n_users, Index n_items) {
  ensure_users(n_users);
  SparseCoo d = SparseCoo::matrix(n_users, n_items);
  for (const auto& e : events) {
    if (e.user >= n_users || e.item >= n_items)
      throw std::invalid_argument("delta_and_mark: index out of range");
    if (!seen_[e.user].count(e.item)) {
      d.add(e.user, e.item, 1.0);
      seen_[e.user].insert(e.item);
    }
  }
  d.compress();
  return d;
}

std::vector<Index> PairTracker::items_of(Index user) const {
  std::vector<Index> out;
  if (user < static_cast<Index>(seen_.size()))
    out.assign(seen_[user].begin(), seen_[user].end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace streamrec
