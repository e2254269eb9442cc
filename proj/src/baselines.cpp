#include "streamrec/baselines.hpp"

#include "streamrec/tucker.hpp"

#include <stdexcept>
#include <utility>

namespace streamrec::baselines {

SvdState puresvd_retrain(const SparseCoo& x, Index rank, const IdMap& users,
                         const IdMap& items, std::uint64_t seed) {
  return psirec::init(x, rank, users, items, seed);
}

namespace {

TdResult pack(HooiResult&& fit, const IdMap& users, const IdMap& items,
              AttentionSpec attention, std::array<Index, 3> ranks) {
  TdResult res;
  res.state.u1 = std::move(fit.factors.u1);
  res.state.u2 = std::move(fit.factors.u2);
  res.state.u3 = std::move(fit.factors.u3);
  res.state.core = std::move(fit.factors.core);
  res.state.users = users;
  res.state.items = items;
  res.state.attention = attention;
  res.state.ranks = ranks;
  res.sweeps = fit.sweeps;
  res.fit_errors = std::move(fit.fit_errors);
  return res;
}

}  // namespace

TdResult tdrec_retrain(const SparseCoo& weighted, std::array<Index, 3> ranks,
                       const IdMap& users, const IdMap& items,
                       AttentionSpec attention, HooiOptions opts,
                       std::uint64_t seed) {
  if (weighted.order() != 3 || weighted.shape[0] != users.size() ||
      weighted.shape[1] != items.size() ||
      weighted.shape[2] != attention.length)
    throw std::invalid_argument("tdrec_retrain: shape disagrees with maps");
  HooiResult fit = hooi(weighted, ranks, nullptr, opts, seed);
  return pack(std::move(fit), users, items, attention, ranks);
}

TdResult tdrec_reinit(const TuckerState& prev, const SparseCoo& weighted,
                      const IdMap& users, const IdMap& items, HooiOptions opts,
                      std::uint64_t seed) {
  if (weighted.order() != 3 || weighted.shape[0] != users.size() ||
      weighted.shape[1] != items.size() ||
      weighted.shape[2] != prev.attention.length)
    throw std::invalid_argument("tdrec_reinit: shape disagrees with maps");
  if (users.size() < prev.u1.rows() || items.size() < prev.u2.rows())
    throw std::invalid_argument("tdrec_reinit: entity counts shrank");

  TuckerFactors warm;
  warm.u1 = Matrix::Zero(users.size(), prev.ranks[0]);
  warm.u1.topRows(prev.u1.rows()) = prev.u1;
  warm.u2 = Matrix::Zero(items.size(), prev.ranks[1]);
  warm.u2.topRows(prev.u2.rows()) = prev.u2;
  warm.u3 = prev.u3;
  HooiResult fit = hooi(weighted, prev.ranks, &warm, opts, seed);
  return pack(std::move(fit), users, items, prev.attention, prev.ranks);
}

}  // namespace streamrec::baselines
