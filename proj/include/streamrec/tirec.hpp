#pragma once

#include "streamrec/psirec.hpp"
#include "streamrec/seq_tensor.hpp"
#include "streamrec/tucker.hpp"
#include "streamrec/types.hpp"

#include <cstdint>
#include <vector>

namespace streamrec {

// Tucker model X ~ core x1 u1 x2 u2 x3 u3 over (users x items x positions).
// u3 always has exactly `attention.length` rows. All deltas entering the
// model are attention weighted; the raw tensor is never stored.
struct TuckerState {
  Matrix u1, u2, u3;
  Tensor3 core;
  IdMap users, items;
  AttentionSpec attention;
  std::array<Index, 3> ranks{0, 0, 0};
};

namespace tirec {

TuckerState init(const SparseCoo& weighted, std::array<Index, 3> ranks,
                 const IdMap& users, const IdMap& items, AttentionSpec attention,
                 HooiOptions opts, std::uint64_t seed);

// One Tucker projector-splitting step; delta shaped (users x items x L).
void ti_update(TuckerState& st, const SparseCoo& delta);

// New users x new items block, delta shaped (user_ids x item_ids x L).
// Empty delta only extends the maps with zero embeddings.
void add_block(TuckerState& st, const SparseCoo& delta,
               const std::vector<std::int64_t>& user_ids,
               const std::vector<std::int64_t>& item_ids, HooiOptions opts);

// Append entities along mode 1 (users) or mode 2 (items) with their data
// slices: delta is (ids x items x L) for users, (users x ids x L) for items.
void add_mode_vectors(TuckerState& st, const SparseCoo& delta, Axis axis,
                      const std::vector<std::int64_t>& ids);

void attach_embeddings(TuckerState& st, Axis axis,
                       const std::vector<std::int64_t>& ids, InitStrategy strategy,
                       double sigma, Rng& rng);

// Sequence-aware scores for a user window given as (item, position) cells:
// project the window through the positional factors, advance one step, and
// expand over items.
Vector scores(const TuckerState& st, const std::vector<Cell>& window);

std::vector<Index> recommend(const TuckerState& st, const std::vector<Cell>& window,
                             int n, bool exclude_seen,
                             const std::vector<Index>& extra_exclude = {});

}  // namespace tirec
}  // namespace streamrec
