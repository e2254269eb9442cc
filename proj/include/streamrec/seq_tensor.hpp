#pragma once

#include "streamrec/events.hpp"
#include "streamrec/types.hpp"

#include <unordered_set>
#include <utility>
#include <vector>

namespace streamrec {

struct AttentionSpec {
  Index length = 1;  // window length L, also the tensor's third extent
  double decay = 0.0;  // exponent f; 0 disables decay
};

// Lower triangular Toeplitz L x L matrix with A(i,j) = (i-j+1)^(-f) for
// i >= j. Unit diagonal, so it is always invertible.
Matrix attention_matrix(const AttentionSpec& spec);

// X = A^(-T) * W via back substitution on the unit upper triangular A^T.
Matrix attention_solve_transpose(const Matrix& a, const Matrix& w);

// Mode-3 product with the attention matrix: a cell at position p contributes
// a(q,p) * v to every position q >= p. Output is compressed.
SparseCoo apply_attention(const SparseCoo& x, const Matrix& a);

// (item, position) with positions 0-based; a window of len items occupies
// positions L-len .. L-1, most recent item last.
using Cell = std::pair<Index, Index>;

// Distinct-item window: consuming an item already present moves it to the
// most recent slot; length capped at L by dropping the oldest item.
void window_append(std::vector<Index>& window, Index item, Index L);

std::vector<Cell> window_cells(const std::vector<Index>& window, Index L);

// Per-user windows after consuming the events in order.
std::vector<std::vector<Index>> build_histories(const std::vector<InternalEvent>& events,
                                                Index n_users, Index L);

// Binary positional tensor (n_users x n_items x L) per the window layout.
SparseCoo build_tensor(const std::vector<std::vector<Index>>& histories,
                       Index n_items, Index L);

// True per-user windows plus the set of raw cells the tensor model currently
// represents. Deltas are differences between the two.
class HistoryTracker {
 public:
  explicit HistoryTracker(Index L) : L_(L) {}

  Index n_users() const { return static_cast<Index>(win_.size()); }
  void ensure_users(Index n);
  void append(Index user, Index item);  // advance the true window
  const std::vector<Index>& window(Index user) const { return win_[user]; }

  // Cells of the user's true window with item in `items`, excluding already
  // absorbed cells; marks them absorbed. Feeds the block/new-entity steps.
  std::vector<Cell> take_cells(Index user, const std::unordered_set<Index>& items);

  // Emits +1 entries for window cells not absorbed and -1 entries for
  // absorbed cells no longer in the window, then syncs the absorbed set.
  void sync_user(Index user, SparseCoo& delta);

  bool dirty(Index user) const;  // true window differs from absorbed cells

 private:
  Index L_;
  std::vector<std::vector<Index>> win_;
  std::vector<std::vector<Cell>> abs_;  // sorted
};

// +1 entries for event pairs not yet observed; marks them observed. Repeats
// inside `events` collapse to a single entry.
class PairTracker {
 public:
  void ensure_users(Index n);
  bool has(Index user, Index item) const;
  void mark(Index user, Index item);
  SparseCoo delta_and_mark(const std::vector<InternalEvent>& events, Index n_users,
                           Index n_items);
  std::vector<Index> items_of(Index user) const;  // sorted

 private:
  std::vector<std::unordered_set<Index>> seen_;
};

}  // namespace streamrec
