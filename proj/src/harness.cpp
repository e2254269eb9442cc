#include "streamrec/harness.hpp"

#include "streamrec/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace streamrec {

const char* model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::psirec: return "psirec";
    case ModelKind::psirec_attach: return "psirec_attach";
    case ModelKind::tireca: return "tireca";
    case ModelKind::tirec: return "tirec";
    case ModelKind::tdrec: return "tdrec";
    case ModelKind::tdrec_reinit: return "tdrec_reinit";
    case ModelKind::puresvd: return "puresvd";
  }
  throw std::logic_error("model_name: bad enum");
}

ModelKind model_from_name(const std::string& name) {
  for (ModelKind k : {ModelKind::psirec, ModelKind::psirec_attach, ModelKind::tireca,
                      ModelKind::tirec, ModelKind::tdrec, ModelKind::tdrec_reinit,
                      ModelKind::puresvd})
    if (name == model_name(k)) return k;
  throw std::invalid_argument("unknown model '" + name + "'");
}

Split split_by_days(EventLog log, const SplitSpec& spec) {
  if (spec.train_frac <= 0.0 || spec.train_frac >= 1.0)
    throw std::invalid_argument("split: train_frac must lie in (0, 1)");
  if (spec.valid_frac < 0.0 || spec.train_frac + spec.valid_frac >= 1.0)
    throw std::invalid_argument("split: train_frac + valid_frac must leave room");
  if (log.empty()) throw std::invalid_argument("split: no events");
  log.sort_by_time();

  std::vector<std::int64_t> days;
  for (const Event& e : log.events) {
    std::int64_t d = day_of(e.ts);
    if (days.empty() || days.back() != d) days.push_back(d);
  }
  const auto total = static_cast<std::int64_t>(days.size());
  auto n_train = static_cast<std::int64_t>(spec.train_frac * double(total));
  n_train = std::clamp<std::int64_t>(n_train, 1, total);
  auto n_valid = static_cast<std::int64_t>(spec.valid_frac * double(total));
  n_valid = std::min(n_valid, total - n_train);
  std::int64_t rest = total - n_train - n_valid;
  if (spec.n_chunks > 0 && rest < spec.n_chunks)
    throw std::runtime_error("split: need " + std::to_string(spec.n_chunks) +
                             " replay days but only " + std::to_string(rest) +
                             " of " + std::to_string(total) +
                             " remain after train/validation");
  std::int64_t n_replay = spec.n_chunks > 0 ? spec.n_chunks : rest;
  if (n_replay <= 0) throw std::runtime_error("split: no replay days left");

  std::unordered_map<std::int64_t, std::int64_t> pos;
  for (std::int64_t p = 0; p < total; ++p) pos[days[p]] = p;

  Split out;
  out.chunks.resize(static_cast<std::size_t>(n_replay));
  out.chunk_days.assign(days.begin() + n_train + n_valid,
                        days.begin() + n_train + n_valid + n_replay);
  for (const Event& e : log.events) {
    std::int64_t p = pos[day_of(e.ts)];
    if (p < n_train)
      out.train.events.push_back(e);
    else if (p < n_train + n_valid)
      out.valid.events.push_back(e);
    else if (p < n_train + n_valid + n_replay)
      out.chunks[static_cast<std::size_t>(p - n_train - n_valid)].events.push_back(e);
  }
  return out;
}

namespace {

struct UpdateStats {
  int new_users = 0, new_items = 0, sweeps = 0;
};

class Driver {
 public:
  virtual ~Driver() = default;
  virtual void train(const EventLog& log) = 0;
  virtual UpdateStats update(const EventLog& chunk) = 0;
  virtual bool knows_user(std::int64_t user) const = 0;
  virtual std::optional<Index> item_index(std::int64_t item) const = 0;
  virtual Index users() const = 0;
  virtual Index items() const = 0;
  virtual std::vector<Index> topn(std::int64_t user, int n) const = 0;
};

// Chunk router: entities split by how they enter the model. A new entity
// whose events touch another new entity goes through the joint block (class
// 1); remaining new users and new items get their own append steps (classes
// 2 and 3); everything else is an in-place change (class 4). An event is
// consumed by the step that introduces its latest endpoint.
struct Novelty {
  std::vector<std::int64_t> users1, users2, items1, items3;
  std::vector<std::int64_t> all_users, all_items;  // first-appearance order
  std::unordered_set<std::int64_t> u1, u2, i1, i3;
};

Novelty classify_chunk(const EventLog& chunk, const IdMap& users, const IdMap& items) {
  Novelty nv;
  std::unordered_set<std::int64_t> new_u, new_i;
  for (const Event& e : chunk.events) {
    if (!users.contains(e.user) && new_u.insert(e.user).second)
      nv.all_users.push_back(e.user);
    if (!items.contains(e.item) && new_i.insert(e.item).second)
      nv.all_items.push_back(e.item);
  }
  for (const Event& e : chunk.events)
    if (new_u.count(e.user) && new_i.count(e.item)) {
      nv.u1.insert(e.user);
      nv.i1.insert(e.item);
    }
  for (std::int64_t u : nv.all_users)
    (nv.u1.count(u) ? nv.users1 : nv.users2).push_back(u);
  for (std::int64_t i : nv.all_items)
    (nv.i1.count(i) ? nv.items1 : nv.items3).push_back(i);
  for (std::int64_t u : nv.users2) nv.u2.insert(u);
  for (std::int64_t i : nv.items3) nv.i3.insert(i);
  return nv;
}

// future internal index of every chunk entity, given the order the router
// will append the new ones
struct IndexPlan {
  std::unordered_map<std::int64_t, Index> user, item;
  Index users_before = 0, items_before = 0;

  IndexPlan(const IdMap& users, const IdMap& items,
            const std::vector<std::int64_t>& new_users_in_order,
            const std::vector<std::int64_t>& new_items_in_order)
      : users_before(users.size()), items_before(items.size()) {
    Index u = users_before;
    for (std::int64_t id : new_users_in_order) user[id] = u++;
    Index i = items_before;
    for (std::int64_t id : new_items_in_order) item[id] = i++;
  }

  Index user_idx(const IdMap& users, std::int64_t id) const {
    if (auto found = users.find(id)) return *found;
    return user.at(id);
  }
  Index item_idx(const IdMap& items, std::int64_t id) const {
    if (auto found = items.find(id)) return *found;
    return item.at(id);
  }
};

std::vector<std::int64_t> concat(std::vector<std::int64_t> a,
                                 const std::vector<std::int64_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// ---------------------------------------------------------------- matrix --

class MatrixIncDriver final : public Driver {
 public:
  explicit MatrixIncDriver(const ReplayConfig& cfg)
      : cfg_(cfg), attach_rng_(Rng::derive(cfg.seed, 0xa77ac8)) {}

  void train(const EventLog& log) override {
    IdMap users, items;
    std::vector<InternalEvent> ev;
    ev.reserve(log.size());
    for (const Event& e : log.events) {
      if (!users.contains(e.user)) users.add(e.user);
      if (!items.contains(e.item)) items.add(e.item);
      ev.push_back({users.at(e.user), items.at(e.item)});
    }
    pairs_.ensure_users(users.size());
    SparseCoo x = pairs_.delta_and_mark(ev, users.size(), items.size());
    st_ = psirec::init(x, cfg_.rank, users, items, cfg_.seed);
  }

  UpdateStats update(const EventLog& chunk) override {
    Novelty nv = classify_chunk(chunk, st_.users, st_.items);
    UpdateStats stats{int(nv.all_users.size()), int(nv.all_items.size()), 0};
    const bool attach = cfg_.model == ModelKind::psirec_attach;

    IndexPlan plan(st_.users, st_.items,
                   attach ? nv.all_users : concat(nv.users1, nv.users2),
                   attach ? nv.all_items : concat(nv.items1, nv.items3));
    const Index n_users = plan.users_before + Index(nv.all_users.size());
    const Index n_items = plan.items_before + Index(nv.all_items.size());
    pairs_.ensure_users(n_users);

    if (attach) {
      psirec::attach_embeddings(st_, Axis::users, nv.all_users, cfg_.attach,
                                cfg_.attach_sigma, attach_rng_);
      psirec::attach_embeddings(st_, Axis::items, nv.all_items, cfg_.attach,
                                cfg_.attach_sigma, attach_rng_);
      std::vector<InternalEvent> ev;
      ev.reserve(chunk.size());
      for (const Event& e : chunk.events)
        ev.push_back({st_.users.at(e.user), st_.items.at(e.item)});
      SparseCoo d = pairs_.delta_and_mark(ev, n_users, n_items);
      if (d.nnz() > 0) psirec::psi_update(st_, d);
      return stats;
    }

    const Index u1n = Index(nv.users1.size()), i1n = Index(nv.items1.size());
    SparseCoo blk = SparseCoo::matrix(u1n, i1n);
    SparseCoo urows = SparseCoo::matrix(plan.items_before + i1n, Index(nv.users2.size()));
    SparseCoo irows = SparseCoo::matrix(n_users, Index(nv.items3.size()));
    SparseCoo resid = SparseCoo::matrix(n_users, n_items);
    for (const Event& e : chunk.events) {
      Index ui = plan.user_idx(st_.users, e.user);
      Index ii = plan.item_idx(st_.items, e.item);
      if (pairs_.has(ui, ii)) continue;
      pairs_.mark(ui, ii);
      if (nv.u1.count(e.user) && nv.i1.count(e.item))
        blk.add(ui - plan.users_before, ii - plan.items_before, 1.0);
      else if (nv.u2.count(e.user))
        urows.add(ii, ui - plan.users_before - u1n, 1.0);
      else if (nv.i3.count(e.item))
        irows.add(ui, ii - plan.items_before - i1n, 1.0);
      else
        resid.add(ui, ii, 1.0);
    }
    if (u1n > 0) {
      blk.compress();
      psirec::add_block(st_, blk, nv.users1, nv.items1);
    }
    if (!nv.users2.empty()) {
      urows.compress();
      psirec::add_rows_or_cols(st_, urows, Axis::users, nv.users2);
    }
    if (!nv.items3.empty()) {
      irows.compress();
      psirec::add_rows_or_cols(st_, irows, Axis::items, nv.items3);
    }
    resid.compress();
    if (resid.nnz() > 0) psirec::psi_update(st_, resid);
    return stats;
  }

  bool knows_user(std::int64_t user) const override { return st_.users.contains(user); }
  std::optional<Index> item_index(std::int64_t item) const override {
    return st_.items.find(item);
  }
  Index users() const override { return st_.users.size(); }
  Index items() const override { return st_.items.size(); }

  std::vector<Index> topn(std::int64_t user, int n) const override {
    std::vector<Index> consumed = pairs_.items_of(st_.users.at(user));
    return psirec::recommend(st_, consumed, n, cfg_.exclude_seen);
  }

 private:
  ReplayConfig cfg_;
  SvdState st_;
  PairTracker pairs_;
  Rng attach_rng_;
};

// ---------------------------------------------------------------- tensor --

class TensorIncDriver final : public Driver {
 public:
  explicit TensorIncDriver(const ReplayConfig& cfg)
      : cfg_(cfg),
        hist_(cfg.attention.length),
        att_(attention_matrix(cfg.attention)),
        attach_rng_(Rng::derive(cfg.seed, 0xa77ac8)) {}

  void train(const EventLog& log) override {
    IdMap users, items;
    for (const Event& e : log.events) {
      if (!users.contains(e.user)) users.add(e.user);
      if (!items.contains(e.item)) items.add(e.item);
    }
    hist_.ensure_users(users.size());
    consumed_.ensure_users(users.size());
    for (const Event& e : log.events) {
      Index u = users.at(e.user), i = items.at(e.item);
      hist_.append(u, i);
      consumed_.mark(u, i);
    }
    std::vector<std::vector<Index>> histories;
    histories.reserve(users.size());
    for (Index u = 0; u < users.size(); ++u) histories.push_back(hist_.window(u));
    SparseCoo raw = build_tensor(histories, items.size(), cfg_.attention.length);
    st_ = tirec::init(apply_attention(raw, att_), cfg_.ranks, users, items,
                      cfg_.attention, cfg_.hooi, cfg_.seed);
    SparseCoo absorbed = SparseCoo::tensor(users.size(), items.size(),
                                           cfg_.attention.length);
    for (Index u = 0; u < users.size(); ++u) hist_.sync_user(u, absorbed);
  }

  UpdateStats update(const EventLog& chunk) override {
    const Index L = cfg_.attention.length;
    Novelty nv = classify_chunk(chunk, st_.users, st_.items);
    UpdateStats stats{int(nv.all_users.size()), int(nv.all_items.size()), 0};
    const bool attach = cfg_.model == ModelKind::tirec;

    IndexPlan plan(st_.users, st_.items,
                   attach ? nv.all_users : concat(nv.users1, nv.users2),
                   attach ? nv.all_items : concat(nv.items1, nv.items3));
    const Index n_users = plan.users_before + Index(nv.all_users.size());
    const Index n_items = plan.items_before + Index(nv.all_items.size());
    hist_.ensure_users(n_users);
    consumed_.ensure_users(n_users);

    std::vector<Index> chunk_users;  // distinct, first-event order
    std::unordered_set<Index> seen_users;
    for (const Event& e : chunk.events) {
      Index u = plan.user_idx(st_.users, e.user);
      Index i = plan.item_idx(st_.items, e.item);
      hist_.append(u, i);
      consumed_.mark(u, i);
      if (seen_users.insert(u).second) chunk_users.push_back(u);
    }

    if (attach) {
      tirec::attach_embeddings(st_, Axis::users, nv.all_users, cfg_.attach,
                               cfg_.attach_sigma, attach_rng_);
      tirec::attach_embeddings(st_, Axis::items, nv.all_items, cfg_.attach,
                               cfg_.attach_sigma, attach_rng_);
      sync_dirty(chunk_users, n_users, n_items, L);
      return stats;
    }

    if (!nv.users1.empty()) {
      std::unordered_set<Index> block_items;
      for (std::int64_t id : nv.items1) block_items.insert(plan.item.at(id));
      SparseCoo blk = SparseCoo::tensor(Index(nv.users1.size()),
                                        Index(nv.items1.size()), L);
      for (std::size_t lu = 0; lu < nv.users1.size(); ++lu) {
        Index gu = plan.user.at(nv.users1[lu]);
        for (const Cell& c : hist_.take_cells(gu, block_items))
          blk.add(Index(lu), c.first - plan.items_before, c.second, 1.0);
      }
      blk.compress();
      tirec::add_block(st_, apply_attention(blk, att_), nv.users1, nv.items1,
                       cfg_.hooi);
    }

    if (!nv.users2.empty()) {
      const Index known_items = st_.items.size();
      SparseCoo rows = SparseCoo::tensor(Index(nv.users2.size()), known_items, L);
      for (std::size_t lu = 0; lu < nv.users2.size(); ++lu) {
        Index gu = plan.user.at(nv.users2[lu]);
        std::unordered_set<Index> in_window;
        for (Index it : hist_.window(gu))
          if (it < known_items) in_window.insert(it);
        for (const Cell& c : hist_.take_cells(gu, in_window))
          rows.add(Index(lu), c.first, c.second, 1.0);
      }
      rows.compress();
      tirec::add_mode_vectors(st_, apply_attention(rows, att_), Axis::users,
                              nv.users2);
    }

    if (!nv.items3.empty()) {
      std::unordered_set<Index> fresh_items;
      for (std::int64_t id : nv.items3) fresh_items.insert(plan.item.at(id));
      const Index base = plan.items_before + Index(nv.items1.size());
      SparseCoo rows = SparseCoo::tensor(st_.users.size(), Index(nv.items3.size()), L);
      for (Index gu : chunk_users)
        for (const Cell& c : hist_.take_cells(gu, fresh_items))
          rows.add(gu, c.first - base, c.second, 1.0);
      rows.compress();
      tirec::add_mode_vectors(st_, apply_attention(rows, att_), Axis::items,
                              nv.items3);
    }

    sync_dirty(chunk_users, n_users, n_items, L);
    return stats;
  }

  bool knows_user(std::int64_t user) const override { return st_.users.contains(user); }
  std::optional<Index> item_index(std::int64_t item) const override {
    return st_.items.find(item);
  }
  Index users() const override { return st_.users.size(); }
  Index items() const override { return st_.items.size(); }

  std::vector<Index> topn(std::int64_t user, int n) const override {
    Index u = st_.users.at(user);
    std::vector<Cell> cells = window_cells(hist_.window(u), cfg_.attention.length);
    std::vector<Index> extra;
    if (cfg_.exclude_seen) extra = consumed_.items_of(u);
    return tirec::recommend(st_, cells, n, false, extra);
  }

 private:
  void sync_dirty(const std::vector<Index>& chunk_users, Index n_users,
                  Index n_items, Index L) {
    SparseCoo delta = SparseCoo::tensor(n_users, n_items, L);
    for (Index gu : chunk_users)
      if (hist_.dirty(gu)) hist_.sync_user(gu, delta);
    delta.compress();
    if (delta.nnz() > 0) tirec::ti_update(st_, apply_attention(delta, att_));
  }

  ReplayConfig cfg_;
  TuckerState st_;
  HistoryTracker hist_;
  PairTracker consumed_;
  Matrix att_;
  Rng attach_rng_;
};

// --------------------------------------------------------------- refits --

class RetrainDriver final : public Driver {
 public:
  explicit RetrainDriver(const ReplayConfig& cfg)
      : cfg_(cfg),
        hist_(cfg.attention.length),
        att_(attention_matrix(cfg.attention)) {}

  void train(const EventLog& log) override {
    ingest(log);
    fit();
  }

  UpdateStats update(const EventLog& chunk) override {
    Novelty nv = classify_chunk(chunk, users_, items_);
    UpdateStats stats{int(nv.all_users.size()), int(nv.all_items.size()), 0};
    ingest(chunk);
    stats.sweeps = fit();
    return stats;
  }

  bool knows_user(std::int64_t user) const override { return users_.contains(user); }
  std::optional<Index> item_index(std::int64_t item) const override {
    return items_.find(item);
  }
  Index users() const override { return users_.size(); }
  Index items() const override { return items_.size(); }

  std::vector<Index> topn(std::int64_t user, int n) const override {
    Index u = users_.at(user);
    if (cfg_.model == ModelKind::puresvd) {
      std::vector<Index> consumed = pairs_.items_of(u);
      return psirec::recommend(mst_, consumed, n, cfg_.exclude_seen);
    }
    std::vector<Cell> cells = window_cells(hist_.window(u), cfg_.attention.length);
    std::vector<Index> extra;
    if (cfg_.exclude_seen) extra = pairs_.items_of(u);
    return tirec::recommend(tst_, cells, n, false, extra);
  }

 private:
  void ingest(const EventLog& log) {
    for (const Event& e : log.events) {
      if (!users_.contains(e.user)) users_.add(e.user);
      if (!items_.contains(e.item)) items_.add(e.item);
    }
    hist_.ensure_users(users_.size());
    pairs_.ensure_users(users_.size());
    for (const Event& e : log.events) {
      Index u = users_.at(e.user), i = items_.at(e.item);
      pairs_.mark(u, i);
      if (cfg_.model != ModelKind::puresvd) hist_.append(u, i);
    }
  }

  int fit() {
    std::uint64_t seed = Rng::derive(cfg_.seed, static_cast<std::uint64_t>(round_++));
    if (cfg_.model == ModelKind::puresvd) {
      SparseCoo x = SparseCoo::matrix(users_.size(), items_.size());
      for (Index u = 0; u < users_.size(); ++u)
        for (Index i : pairs_.items_of(u)) x.add(u, i, 1.0);
      x.compress();
      mst_ = baselines::puresvd_retrain(x, cfg_.rank, users_, items_, seed);
      return 0;
    }
    std::vector<std::vector<Index>> histories;
    histories.reserve(users_.size());
    for (Index u = 0; u < users_.size(); ++u) histories.push_back(hist_.window(u));
    SparseCoo raw = build_tensor(histories, items_.size(), cfg_.attention.length);
    SparseCoo weighted = apply_attention(raw, att_);
    if (cfg_.model == ModelKind::tdrec_reinit && round_ > 1) {
      baselines::TdResult r = baselines::tdrec_reinit(tst_, weighted, users_,
                                                      items_, cfg_.hooi, seed);
      tst_ = std::move(r.state);
      return r.sweeps;
    }
    baselines::TdResult r = baselines::tdrec_retrain(
        weighted, cfg_.ranks, users_, items_, cfg_.attention, cfg_.hooi, seed);
    tst_ = std::move(r.state);
    return r.sweeps;
  }

  ReplayConfig cfg_;
  IdMap users_, items_;
  HistoryTracker hist_;
  PairTracker pairs_;
  Matrix att_;
  SvdState mst_;
  TuckerState tst_;
  int round_ = 0;
};

std::unique_ptr<Driver> make_driver(const ReplayConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::psirec:
    case ModelKind::psirec_attach:
      return std::make_unique<MatrixIncDriver>(cfg);
    case ModelKind::tireca:
    case ModelKind::tirec:
      return std::make_unique<TensorIncDriver>(cfg);
    case ModelKind::tdrec:
    case ModelKind::tdrec_reinit:
    case ModelKind::puresvd:
      return std::make_unique<RetrainDriver>(cfg);
  }
  throw std::logic_error("make_driver: bad enum");
}

struct EvalOut {
  double hr = 0.0, mrr = 0.0;
  int eval_users = 0, skipped_users = 0;
};

// first item per user in the slice, scored against the current state
EvalOut eval_pass(const Driver& driver, const EventLog& slice, int topn) {
  EvalOut out;
  std::unordered_set<std::int64_t> seen;
  int hits = 0;
  double rr_sum = 0.0;
  for (const Event& e : slice.events) {
    if (!seen.insert(e.user).second) continue;
    if (!driver.knows_user(e.user)) {
      ++out.skipped_users;
      continue;
    }
    std::optional<Index> target = driver.item_index(e.item);
    if (!target) {
      ++out.skipped_users;
      continue;
    }
    double rr = reciprocal_rank(driver.topn(e.user, topn), *target);
    ++out.eval_users;
    if (rr > 0.0) {
      ++hits;
      rr_sum += rr;
    }
  }
  if (out.eval_users > 0) {
    out.hr = double(hits) / out.eval_users;
    out.mrr = rr_sum / out.eval_users;
  }
  return out;
}

std::vector<std::int64_t> pick_tracked_users(const Split& split, int count) {
  std::map<std::int64_t, std::pair<int, int>> stat;  // (chunk presence, events)
  for (const EventLog* log : {&split.train, &split.valid})
    for (const Event& e : log->events) stat[e.user].second++;
  for (const EventLog& chunk : split.chunks) {
    std::unordered_set<std::int64_t> seen;
    for (const Event& e : chunk.events) {
      stat[e.user].second++;
      if (seen.insert(e.user).second) stat[e.user].first++;
    }
  }
  std::vector<std::int64_t> ids;
  ids.reserve(stat.size());
  for (const auto& [id, s] : stat) ids.push_back(id);
  std::stable_sort(ids.begin(), ids.end(), [&](std::int64_t a, std::int64_t b) {
    return stat[a] > stat[b];  // presence first, then activity; id breaks ties
  });
  if (int(ids.size()) > count) ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   t0)
      .count();
}

}  // namespace

ReplayResult replay(const Split& split, const ReplayConfig& cfg,
                    const ChunkCallback& on_chunk) {
  ReplayResult out;
  std::unique_ptr<Driver> driver = make_driver(cfg);

  EventLog warm = split.train;
  warm.events.insert(warm.events.end(), split.valid.events.begin(),
                     split.valid.events.end());
  driver->train(warm);
  out.summary.train_events = static_cast<std::int64_t>(warm.size());

  std::vector<std::int64_t> tracked = pick_tracked_users(split, cfg.track_users);
  std::map<std::int64_t, std::vector<Index>> prev_lists;
  for (std::int64_t u : tracked)
    if (driver->knows_user(u)) prev_lists[u] = driver->topn(u, cfg.wji_n);

  for (std::size_t c = 0; c < split.chunks.size(); ++c) {
    const EventLog& chunk = split.chunks[c];
    ChunkReport rep;
    ChunkTiming tim;
    rep.chunk = tim.chunk = static_cast<int>(c);
    rep.date = day_to_date(split.chunk_days[c]);
    rep.events = static_cast<int>(chunk.size());

    auto t0 = std::chrono::steady_clock::now();
    EvalOut ev = eval_pass(*driver, chunk, cfg.topn);
    tim.eval_ms = ms_since(t0);
    rep.hr = ev.hr;
    rep.mrr = ev.mrr;
    rep.eval_users = ev.eval_users;
    rep.skipped_users = ev.skipped_users;

    t0 = std::chrono::steady_clock::now();
    UpdateStats stats = driver->update(chunk);
    tim.update_ms = ms_since(t0);
    rep.new_users = stats.new_users;
    rep.new_items = stats.new_items;
    rep.sweeps = stats.sweeps;
    rep.n_users = driver->users();
    rep.n_items = driver->items();

    double wsum = 0.0;
    int wcnt = 0;
    for (std::int64_t u : tracked) {
      if (!driver->knows_user(u)) continue;
      std::vector<Index> cur = driver->topn(u, cfg.wji_n);
      auto it = prev_lists.find(u);
      if (it != prev_lists.end()) {
        wsum += weighted_jaccard(it->second, cur, cfg.wji_n);
        ++wcnt;
      }
      prev_lists[u] = std::move(cur);
    }
    rep.wji = wcnt > 0 ? wsum / wcnt : 1.0;
    if (on_chunk) on_chunk(rep, tim);

    out.summary.replayed_events += rep.events;
    out.summary.hr_mean += rep.hr;
    out.summary.mrr_mean += rep.mrr;
    out.summary.wji_mean += rep.wji;
    out.chunks.push_back(std::move(rep));
    out.timings.push_back(tim);
  }

  out.summary.chunks = static_cast<int>(out.chunks.size());
  if (out.summary.chunks > 0) {
    out.summary.hr_mean /= out.summary.chunks;
    out.summary.mrr_mean /= out.summary.chunks;
    out.summary.wji_mean /= out.summary.chunks;
  }
  out.summary.final_users = driver->users();
  out.summary.final_items = driver->items();
  return out;
}

std::vector<SweepEntry> sweep(const Split& split,
                              const std::vector<ReplayConfig>& grid) {
  if (split.valid.empty())
    throw std::invalid_argument("sweep: validation slice is empty");
  std::vector<SweepEntry> entries;
  entries.reserve(grid.size());
  for (const ReplayConfig& cfg : grid) {
    std::unique_ptr<Driver> driver = make_driver(cfg);
    driver->train(split.train);
    EvalOut ev = eval_pass(*driver, split.valid, cfg.topn);
    entries.push_back({cfg, ev.hr, ev.mrr, ev.eval_users, ev.skipped_users});
  }
  return entries;
}

}  // namespace streamrec
