#pragma once

#include "streamrec/types.hpp"

#include <vector>

namespace streamrec {

// Indices of the n largest scores, ties broken by ascending index. Entries
// flagged in `excluded` never appear. Deterministic by construction.
std::vector<Index> top_indices(const Vector& scores, int n,
                               const std::vector<char>* excluded = nullptr);

// 1/rank of target in the list (1-based), 0 if absent.
double reciprocal_rank(const std::vector<Index>& ranked, Index target);

// Weighted Jaccard over top-n prefixes with weights 1/rank: sum of
// elementwise min over sum of elementwise max. Two empty lists compare as 1.
double weighted_jaccard(const std::vector<Index>& a, const std::vector<Index>& b,
                        int n);

}  // namespace streamrec
