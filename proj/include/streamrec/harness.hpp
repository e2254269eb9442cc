#pragma once

#include "streamrec/baselines.hpp"
#include "streamrec/events.hpp"
#include "streamrec/seq_tensor.hpp"
#include "streamrec/tucker.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace streamrec {

struct SplitSpec {
  double train_frac = 0.6;
  double valid_frac = 0.0;
  int n_chunks = 0;  // 0 replays every remaining day, else exactly this many
};

struct Split {
  EventLog train, valid;
  std::vector<EventLog> chunks;        // one per UTC calendar day, in order
  std::vector<std::int64_t> chunk_days;
};

// Partitions by UTC calendar day: the first train_frac of the distinct days
// train, the next valid_frac validate, the rest replay. Throws when fewer
// than n_chunks days remain, naming both counts.
Split split_by_days(EventLog log, const SplitSpec& spec);

enum class ModelKind {
  psirec,        // matrix model, incremental rank updates for new entities
  psirec_attach, // matrix model, zero/gaussian embeddings for new entities
  tireca,        // tensor model, incremental rank updates for new entities
  tirec,         // tensor model, zero/gaussian embeddings for new entities
  tdrec,         // tensor model, cold refit every chunk
  tdrec_reinit,  // tensor model, warm refit every chunk
  puresvd,       // matrix model, full SVD refit every chunk
};

const char* model_name(ModelKind kind);
ModelKind model_from_name(const std::string& name);  // throws on unknown names

struct ReplayConfig {
  ModelKind model = ModelKind::psirec;
  Index rank = 32;                        // matrix models
  std::array<Index, 3> ranks{32, 32, 5};  // tensor models
  AttentionSpec attention{10, 1.0};
  int topn = 10;
  int wji_n = 5;
  int track_users = 50;
  bool exclude_seen = true;
  InitStrategy attach = InitStrategy::zero;  // attach-variant models
  double attach_sigma = 0.1;
  HooiOptions hooi;
  std::uint64_t seed = 0;
};

struct ChunkReport {
  int chunk = 0;
  std::string date;
  int events = 0;
  int eval_users = 0;
  int skipped_users = 0;  // unknown user or unknown target item
  int new_users = 0, new_items = 0;
  double hr = 0.0, mrr = 0.0;
  double wji = 1.0;  // list overlap with the previous step for tracked users
  Index n_users = 0, n_items = 0;  // after this chunk's update
  int sweeps = 0;                  // refit models only
};

struct ChunkTiming {
  int chunk = 0;
  double update_ms = 0.0, eval_ms = 0.0;
};

struct ReplaySummary {
  double hr_mean = 0.0, mrr_mean = 0.0, wji_mean = 0.0;
  int chunks = 0;
  Index final_users = 0, final_items = 0;
  std::int64_t train_events = 0, replayed_events = 0;
};

struct ReplayResult {
  std::vector<ChunkReport> chunks;
  std::vector<ChunkTiming> timings;  // wall clock, excluded from determinism
  ReplaySummary summary;
};

// Trains on train+valid, then walks the chunks: evaluate first item per user
// against the pre-chunk state, apply the chunk, refresh tracked users' lists.
// Everything except `timings` is a pure function of the split and config.
// on_chunk, when set, fires after each chunk's report is finalized; it is
// for progress display and must not mutate harness state.
using ChunkCallback = std::function<void(const ChunkReport&, const ChunkTiming&)>;

ReplayResult replay(const Split& split, const ReplayConfig& cfg,
                    const ChunkCallback& on_chunk = {});

struct SweepEntry {
  ReplayConfig cfg;
  double hr = 0.0, mrr = 0.0;
  int eval_users = 0, skipped_users = 0;
};

// Trains each candidate on the train slice alone and scores one evaluation
// pass over the validation events (first item per user, no updates). Entries
// come back in candidate order; ranking is the caller's choice.
std::vector<SweepEntry> sweep(const Split& split,
                              const std::vector<ReplayConfig>& grid);

}  // namespace streamrec
