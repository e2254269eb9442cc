#pragma once

#include "streamrec/types.hpp"

#include <cstdint>
#include <vector>

namespace streamrec {

enum class Axis { users, items };

enum class InitStrategy {
  incremental,  // run the rank-update algorithm on the new entities' data
  zero,         // append zero embeddings, data arrives via later increments
  gaussian,     // append sigma-scaled gaussian rows, then re-orthogonalize
};

// Truncated SVD model A ~ u * s * v^T. s is r x r and generally not
// diagonal; orthonormality of u and v is the maintained invariant.
struct SvdState {
  Matrix u, s, v;
  IdMap users, items;
  Index rank = 0;
};

namespace psirec {

// x is the binary interaction matrix over the maps' index spaces.
SvdState init(const SparseCoo& x, Index rank, const IdMap& users,
              const IdMap& items, std::uint64_t seed);

// One projector-splitting step for an additive in-place change of the
// interaction matrix. delta must match the current (users x items) shape.
void psi_update(SvdState& st, const SparseCoo& delta);

// Append new users or items with their interaction vectors over existing
// counterpart entities: delta has shape (counterpart_count x ids.size()),
// column j holding entity ids[j]'s vector. Rank stays fixed.
void add_rows_or_cols(SvdState& st, const SparseCoo& delta, Axis axis,
                      const std::vector<std::int64_t>& ids);

// Joint block of brand-new users x brand-new items, delta shaped
// (user_ids.size() x item_ids.size()). Empty delta only extends the maps.
void add_block(SvdState& st, const SparseCoo& delta,
               const std::vector<std::int64_t>& user_ids,
               const std::vector<std::int64_t>& item_ids);

// Rows only, no data: zero rows keep factors untouched; gaussian rows are
// followed by a QR pass whose R factor is absorbed into s.
void attach_embeddings(SvdState& st, Axis axis, const std::vector<std::int64_t>& ids,
                       InitStrategy strategy, double sigma, Rng& rng);

// Scores for a binary preference vector given by its support.
Vector scores(const SvdState& st, const std::vector<Index>& consumed);

// Top-n item indices by score, ties by ascending index. exclude_seen drops
// the consumed items; extra_exclude is always dropped.
std::vector<Index> recommend(const SvdState& st, const std::vector<Index>& consumed,
                             int n, bool exclude_seen,
                             const std::vector<Index>& extra_exclude = {});

}  // namespace psirec
}  // namespace streamrec
