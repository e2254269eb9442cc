#pragma once

#include "streamrec/psirec.hpp"
#include "streamrec/tirec.hpp"

#include <cstdint>
#include <vector>

namespace streamrec::baselines {

// Plain truncated SVD of the accumulated interaction matrix.
SvdState puresvd_retrain(const SparseCoo& x, Index rank, const IdMap& users,
                         const IdMap& items, std::uint64_t seed);

struct TdResult {
  TuckerState state;
  int sweeps = 0;
  std::vector<double> fit_errors;
};

// Cold alternating-sweep refit of the accumulated weighted tensor.
TdResult tdrec_retrain(const SparseCoo& weighted, std::array<Index, 3> ranks,
                       const IdMap& users, const IdMap& items,
                       AttentionSpec attention, HooiOptions opts,
                       std::uint64_t seed);

// Warm refit: the previous factors, zero-padded to the grown entity counts,
// seed the sweep instead of a fresh spectral initialization.
TdResult tdrec_reinit(const TuckerState& prev, const SparseCoo& weighted,
                      const IdMap& users, const IdMap& items, HooiOptions opts,
                      std::uint64_t seed);

}  // namespace streamrec::baselines
