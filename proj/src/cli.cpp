#include "streamrec/cli.hpp"

#include "streamrec/baselines.hpp"
#include "streamrec/checkpoint.hpp"
#include "streamrec/csv_io.hpp"
#include "streamrec/harness.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace streamrec::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

[[noreturn]] void usage_error(const std::string& what) {
  throw std::invalid_argument(what);
}

// ---------------------------------------------------------------- settings

struct Settings {
  std::string dataset;
  std::string model = "psirec";
  Index rank = 32;
  std::array<Index, 3> ranks{32, 32, 5};
  Index window = 10;
  double decay = 1.0;
  double train_frac = 0.6;
  double valid_frac = 0.0;
  int n_chunks = 0;
  int topn = 10;
  int wji_n = 5;
  int track_users = 50;
  bool exclude_seen = true;
  std::string init = "zero";
  double init_sigma = 0.1;
  int hooi_sweeps = 50;
  double hooi_tol = 1e-6;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

template <class T>
T num_value(const std::string& key, const std::string& value) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    v = static_cast<T>(std::strtod(value.c_str(), &end));
    if (value.empty() || end != value.c_str() + value.size())
      usage_error("config key '" + key + "': bad number '" + value + "'");
  } else {
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size())
      usage_error("config key '" + key + "': bad integer '" + value + "'");
  }
  return v;
}

std::array<Index, 3> parse_ranks(const std::string& text) {
  std::array<Index, 3> out{};
  std::istringstream in(text);
  std::string part;
  int got = 0;
  while (std::getline(in, part, ',')) {
    if (got == 3) usage_error("ranks '" + text + "': expected three values");
    out[got++] = num_value<Index>("ranks", part);
  }
  if (got != 3) usage_error("ranks '" + text + "': expected three values");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  usage_error("config key '" + key + "': bad boolean '" + value + "'");
}

void apply_kv(Settings& s, const std::string& key, const std::string& value) {
  if (key == "dataset") s.dataset = value;
  else if (key == "model") s.model = value;
  else if (key == "rank") s.rank = num_value<Index>(key, value);
  else if (key == "ranks") s.ranks = parse_ranks(value);
  else if (key == "attention_window") s.window = num_value<Index>(key, value);
  else if (key == "attention_decay") s.decay = num_value<double>(key, value);
  else if (key == "train_frac") s.train_frac = num_value<double>(key, value);
  else if (key == "valid_frac") s.valid_frac = num_value<double>(key, value);
  else if (key == "n_chunks") s.n_chunks = num_value<int>(key, value);
  else if (key == "topn") s.topn = num_value<int>(key, value);
  else if (key == "wji_n") s.wji_n = num_value<int>(key, value);
  else if (key == "track_users") s.track_users = num_value<int>(key, value);
  else if (key == "exclude_seen") s.exclude_seen = parse_bool(key, value);
  else if (key == "init") s.init = value;
  else if (key == "init_sigma") s.init_sigma = num_value<double>(key, value);
  else if (key == "hooi_sweeps") s.hooi_sweeps = num_value<int>(key, value);
  else if (key == "hooi_tol") s.hooi_tol = num_value<double>(key, value);
  else if (key == "seed") s.seed = num_value<std::uint64_t>(key, value);
  else if (key == "output_dir") s.output_dir = value;
  else usage_error("unknown config key '" + key + "'");
}

void load_config_file(Settings& s, const std::string& path) {
  std::ifstream f(path);
  if (!f) usage_error("cannot open config file '" + path + "'");
  std::string line;
  std::size_t n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string t) {
      const auto b = t.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      const auto e = t.find_last_not_of(" \t");
      return t.substr(b, e - b + 1);
    };
    std::string whole = strip(line);
    if (whole.empty()) continue;
    const std::size_t eq = whole.find('=');
    if (eq == std::string::npos)
      usage_error(path + ":" + std::to_string(n) + ": expected key = value");
    const std::string key = strip(whole.substr(0, eq));
    const std::string value = strip(whole.substr(eq + 1));
    if (key.empty())
      usage_error(path + ":" + std::to_string(n) + ": empty key");
    apply_kv(s, key, value);
  }
}

InitStrategy init_from_name(const std::string& name) {
  if (name == "zero") return InitStrategy::zero;
  if (name == "gaussian") return InitStrategy::gaussian;
  if (name == "incremental") return InitStrategy::incremental;
  usage_error("unknown init strategy '" + name +
              "' (zero | gaussian | incremental)");
}

void check_settings(const Settings& s, bool need_seed) {
  if (s.dataset.empty()) usage_error("missing required setting: dataset");
  model_from_name(s.model);  // throws on unknown names
  if (s.rank < 1) usage_error("rank must be positive");
  for (Index r : s.ranks)
    if (r < 1) usage_error("every entry of ranks must be positive");
  if (s.window < 1) usage_error("attention_window must be positive");
  if (s.decay < 0.0) usage_error("attention_decay must be non-negative");
  if (!(s.train_frac > 0.0) || !(s.train_frac < 1.0))
    usage_error("train_frac must be in (0, 1)");
  if (s.valid_frac < 0.0 || s.train_frac + s.valid_frac >= 1.0)
    usage_error("train_frac + valid_frac must stay below 1");
  if (s.n_chunks < 0) usage_error("n_chunks must be non-negative");
  if (s.topn < 1) usage_error("topn must be positive");
  if (s.wji_n < 1) usage_error("wji_n must be positive");
  if (s.track_users < 0) usage_error("track_users must be non-negative");
  init_from_name(s.init);
  if (s.init_sigma < 0.0) usage_error("init_sigma must be non-negative");
  if (s.hooi_sweeps < 1) usage_error("hooi_sweeps must be positive");
  if (!(s.hooi_tol > 0.0)) usage_error("hooi_tol must be positive");
  if (need_seed && !s.seed) usage_error("missing required setting: seed");
}

std::string resolved_output_dir(const Settings& s) {
  if (!s.output_dir.empty()) return s.output_dir;
  if (const char* env = std::getenv("STREAMREC_OUTPUT_DIR"); env && *env)
    return env;
  return ".";
}

ReplayConfig to_replay_config(const Settings& s) {
  ReplayConfig cfg;
  cfg.model = model_from_name(s.model);
  cfg.rank = s.rank;
  cfg.ranks = s.ranks;
  cfg.attention = {s.window, s.decay};
  cfg.topn = s.topn;
  cfg.wji_n = s.wji_n;
  cfg.track_users = s.track_users;
  cfg.exclude_seen = s.exclude_seen;
  cfg.attach = init_from_name(s.init);
  cfg.attach_sigma = s.init_sigma;
  cfg.hooi.max_sweeps = s.hooi_sweeps;
  cfg.hooi.tol = s.hooi_tol;
  cfg.seed = s.seed.value_or(0);
  return cfg;
}

bool tensor_model(ModelKind kind) {
  return kind == ModelKind::tireca || kind == ModelKind::tirec ||
         kind == ModelKind::tdrec || kind == ModelKind::tdrec_reinit;
}

ordered_json settings_echo(const Settings& s, ModelKind kind) {
  ordered_json j;
  j["dataset"] = s.dataset;
  j["model"] = model_name(kind);
  if (tensor_model(kind)) {
    j["ranks"] = s.ranks;
    j["attention_window"] = s.window;
    j["attention_decay"] = s.decay;
    j["hooi_sweeps"] = s.hooi_sweeps;
    j["hooi_tol"] = s.hooi_tol;
  } else {
    j["rank"] = s.rank;
  }
  j["train_frac"] = s.train_frac;
  j["valid_frac"] = s.valid_frac;
  j["n_chunks"] = s.n_chunks;
  j["topn"] = s.topn;
  j["wji_n"] = s.wji_n;
  j["track_users"] = s.track_users;
  j["exclude_seen"] = s.exclude_seen;
  j["init"] = s.init;
  j["init_sigma"] = s.init_sigma;
  j["seed"] = s.seed.value_or(0);
  return j;
}

// ------------------------------------------------------------- cli option
// plumbing: flags land in optionals, config file fills a Settings, then the
// optionals override it

struct Overrides {
  std::optional<std::string> config, dataset, model, ranks, init, output_dir;
  std::optional<Index> rank, window;
  std::optional<double> decay, train_frac, valid_frac, init_sigma, hooi_tol;
  std::optional<int> n_chunks, topn, wji_n, track_users, hooi_sweeps;
  std::optional<bool> exclude_seen;
  std::optional<std::uint64_t> seed;
};

void add_common_options(CLI::App* cmd, Overrides& ov, bool seed_required) {
  cmd->add_option("-c,--config", ov.config,
                  "key = value settings file; flags override it");
  cmd->add_option("-i,--input", ov.dataset, "event log CSV (user,item,ts)");
  cmd->add_option("-m,--model", ov.model,
                  "psirec | psirec_attach | tireca | tirec | tdrec | "
                  "tdrec_reinit | puresvd");
  cmd->add_option("--rank", ov.rank, "matrix model rank");
  cmd->add_option("--ranks", ov.ranks, "tensor model ranks r1,r2,r3");
  cmd->add_option("--attention-window", ov.window, "positions per history");
  cmd->add_option("--attention-decay", ov.decay, "positional decay exponent");
  cmd->add_option("--train-frac", ov.train_frac, "fraction of days for training");
  cmd->add_option("--valid-frac", ov.valid_frac, "fraction of days for tuning");
  cmd->add_option("--chunks", ov.n_chunks, "replay day count (0 = all left)");
  cmd->add_option("--topn", ov.topn, "recommendation list length");
  cmd->add_option("--wji-n", ov.wji_n, "stability list length");
  cmd->add_option("--track-users", ov.track_users, "stability panel size");
  cmd->add_flag_callback("--exclude-seen", [&ov] { ov.exclude_seen = true; },
                         "hide already consumed items (default)");
  cmd->add_flag_callback("--no-exclude-seen", [&ov] { ov.exclude_seen = false; },
                         "rank consumed items too");
  cmd->add_option("--init", ov.init,
                  "embedding init for new entities: zero | gaussian | "
                  "incremental");
  cmd->add_option("--init-sigma", ov.init_sigma, "gaussian init scale");
  cmd->add_option("--hooi-sweeps", ov.hooi_sweeps, "retrain sweep cap");
  cmd->add_option("--hooi-tol", ov.hooi_tol, "retrain fit tolerance");
  cmd->add_option("-o,--output", ov.output_dir, "output directory");
  auto* seed = cmd->add_option("--seed", ov.seed, "deterministic run seed");
  if (seed_required) seed->required();
}

Settings merge(const Overrides& ov, bool need_seed) {
  Settings s;
  if (ov.config) load_config_file(s, *ov.config);
  if (ov.dataset) s.dataset = *ov.dataset;
  if (ov.model) s.model = *ov.model;
  if (ov.rank) s.rank = *ov.rank;
  if (ov.ranks) s.ranks = parse_ranks(*ov.ranks);
  if (ov.window) s.window = *ov.window;
  if (ov.decay) s.decay = *ov.decay;
  if (ov.train_frac) s.train_frac = *ov.train_frac;
  if (ov.valid_frac) s.valid_frac = *ov.valid_frac;
  if (ov.n_chunks) s.n_chunks = *ov.n_chunks;
  if (ov.topn) s.topn = *ov.topn;
  if (ov.wji_n) s.wji_n = *ov.wji_n;
  if (ov.track_users) s.track_users = *ov.track_users;
  if (ov.exclude_seen) s.exclude_seen = *ov.exclude_seen;
  if (ov.init) s.init = *ov.init;
  if (ov.init_sigma) s.init_sigma = *ov.init_sigma;
  if (ov.hooi_sweeps) s.hooi_sweeps = *ov.hooi_sweeps;
  if (ov.hooi_tol) s.hooi_tol = *ov.hooi_tol;
  if (ov.seed) s.seed = *ov.seed;
  if (ov.output_dir) s.output_dir = *ov.output_dir;
  check_settings(s, need_seed);
  return s;
}

// --------------------------------------------------------------- helpers

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed on '" + path.string() + "'");
}

struct MappedLog {
  IdMap users, items;
  std::vector<InternalEvent> events;
};

MappedLog map_log(const EventLog& log) {
  MappedLog out;
  out.events.reserve(log.size());
  for (const Event& e : log.events) {
    if (!out.users.contains(e.user)) out.users.add(e.user);
    if (!out.items.contains(e.item)) out.items.add(e.item);
    out.events.push_back({out.users.at(e.user), out.items.at(e.item)});
  }
  return out;
}

// ----------------------------------------------------------- subcommands

struct PreArgs {
  std::string input, output, preset;
  std::optional<int> floor;
  std::optional<double> tail;
};

int do_preprocess(const PreArgs& args) {
  csv_io::PreprocessPreset p;
  if (!args.preset.empty()) {
    auto found = csv_io::preset_for(args.preset);
    if (!found) usage_error("unknown preset '" + args.preset + "'");
    p = *found;
  }
  if (args.floor) p.min_interactions = *args.floor;
  if (args.tail) p.tail_frac = *args.tail;

  EventLog log = csv_io::ingest(args.input);
  const std::size_t raw = log.size();
  log = csv_io::preprocess(std::move(log), p.min_interactions, p.tail_frac);

  std::set<std::int64_t> users, items;
  for (const Event& e : log.events) {
    users.insert(e.user);
    items.insert(e.item);
  }
  csv_io::write_csv(log, args.output);
  std::printf("%zu of %zu events kept: %zu users, %zu items -> %s\n",
              log.size(), raw, users.size(), items.size(),
              args.output.c_str());
  if (log.empty())
    std::printf("note: the floor of %d interactions removed everything\n",
                p.min_interactions);
  return 0;
}

int do_train(const Settings& s, const std::string& ckpt_flag) {
  const ModelKind kind = model_from_name(s.model);
  EventLog log = csv_io::ingest(s.dataset);
  if (log.empty()) usage_error("dataset '" + s.dataset + "' has no events");
  MappedLog m = map_log(log);
  const auto n_users = m.users.size();
  const auto n_items = m.items.size();
  const std::uint64_t seed = *s.seed;

  const std::string dir = resolved_output_dir(s);
  fs::create_directories(dir);
  const std::string path =
      ckpt_flag.empty() ? dir + "/" + model_name(kind) + ".ckpt" : ckpt_flag;
  const ordered_json echo = settings_echo(s, kind);

  if (tensor_model(kind)) {
    HooiOptions opts;
    opts.max_sweeps = s.hooi_sweeps;
    opts.tol = s.hooi_tol;
    const AttentionSpec spec{s.window, s.decay};
    auto hist = build_histories(m.events, n_users, s.window);
    SparseCoo weighted = apply_attention(build_tensor(hist, n_items, s.window),
                                         attention_matrix(spec));
    TuckerState st;
    if (kind == ModelKind::tdrec || kind == ModelKind::tdrec_reinit) {
      baselines::TdResult fit = baselines::tdrec_retrain(
          weighted, s.ranks, m.users, m.items, spec, opts, seed);
      std::printf("fit converged after %d sweeps\n", fit.sweeps);
      st = std::move(fit.state);
    } else {
      st = tirec::init(weighted, s.ranks, m.users, m.items, spec, opts, seed);
    }
    ckpt::save(st, path, echo);
  } else {
    PairTracker pairs;
    pairs.ensure_users(n_users);
    SparseCoo x = pairs.delta_and_mark(m.events, n_users, n_items);
    SvdState st = psirec::init(x, s.rank, m.users, m.items, seed);
    ckpt::save(st, path, echo);
  }
  std::printf("trained %s on %lld users x %lld items (%zu events) -> %s\n",
              model_name(kind), static_cast<long long>(n_users),
              static_cast<long long>(n_items), log.size(), path.c_str());
  return 0;
}

std::string chunks_csv(const std::vector<ChunkReport>& chunks) {
  std::string out =
      "chunk,date,events,eval_users,skipped_users,new_users,new_items,"
      "hr,mrr,wji,n_users,n_items,sweeps\n";
  for (const ChunkReport& r : chunks) {
    out += std::to_string(r.chunk) + ',' + r.date + ',' +
           std::to_string(r.events) + ',' + std::to_string(r.eval_users) +
           ',' + std::to_string(r.skipped_users) + ',' +
           std::to_string(r.new_users) + ',' + std::to_string(r.new_items) +
           ',' + fmt_double(r.hr) + ',' + fmt_double(r.mrr) + ',' +
           fmt_double(r.wji) + ',' + std::to_string(r.n_users) + ',' +
           std::to_string(r.n_items) + ',' + std::to_string(r.sweeps) + '\n';
  }
  return out;
}

std::string timings_csv(const std::vector<ChunkTiming>& timings) {
  std::string out = "chunk,update_ms,eval_ms\n";
  for (const ChunkTiming& t : timings)
    out += std::to_string(t.chunk) + ',' + fmt_double(t.update_ms) + ',' +
           fmt_double(t.eval_ms) + '\n';
  return out;
}

ordered_json summary_json(const Settings& s, ModelKind kind,
                          const ReplayResult& res) {
  ordered_json j;
  j["model"] = model_name(kind);
  j["config"] = settings_echo(s, kind);
  j["chunks"] = res.summary.chunks;
  j["train_events"] = res.summary.train_events;
  j["replayed_events"] = res.summary.replayed_events;
  j["final_users"] = res.summary.final_users;
  j["final_items"] = res.summary.final_items;
  j["hr_mean"] = res.summary.hr_mean;
  j["mrr_mean"] = res.summary.mrr_mean;
  j["wji_mean"] = res.summary.wji_mean;
  return j;
}

int do_replay(const Settings& s) {
  const ModelKind kind = model_from_name(s.model);
  EventLog log = csv_io::ingest(s.dataset);
  Split sp = split_by_days(log, {s.train_frac, s.valid_frac, s.n_chunks});
  std::printf("%zu train events, %zu replay chunks\n", sp.train.size(),
              sp.chunks.size());

  ReplayResult res =
      replay(sp, to_replay_config(s),
             [](const ChunkReport& r, const ChunkTiming& t) {
               std::printf(
                   "chunk %d %s: events=%d hr=%.4f mrr=%.4f wji=%.4f "
                   "users=%lld items=%lld update=%.1fms\n",
                   r.chunk, r.date.c_str(), r.events, r.hr, r.mrr, r.wji,
                   static_cast<long long>(r.n_users),
                   static_cast<long long>(r.n_items), t.update_ms);
               std::fflush(stdout);
             });

  const fs::path dir = resolved_output_dir(s);
  fs::create_directories(dir);
  write_text(dir / "chunks.csv", chunks_csv(res.chunks));
  write_text(dir / "timings.csv", timings_csv(res.timings));
  write_text(dir / "summary.json", summary_json(s, kind, res).dump(2) + "\n");
  std::printf("mean hr=%.4f mrr=%.4f wji=%.4f over %d chunks -> %s\n",
              res.summary.hr_mean, res.summary.mrr_mean, res.summary.wji_mean,
              res.summary.chunks, dir.string().c_str());
  return 0;
}

struct SweepArgs {
  std::string rank_grid, ranks_grid;
};

int do_sweep(const Settings& s, const SweepArgs& args) {
  const ModelKind kind = model_from_name(s.model);
  if (s.valid_frac <= 0.0)
    usage_error("sweep needs valid_frac > 0 to have a tuning slice");
  if (args.rank_grid.empty() && args.ranks_grid.empty())
    usage_error("sweep needs --rank-grid or --ranks-grid");
  if (!args.rank_grid.empty() && tensor_model(kind))
    usage_error("--rank-grid applies to matrix models; use --ranks-grid");
  if (!args.ranks_grid.empty() && !tensor_model(kind))
    usage_error("--ranks-grid applies to tensor models; use --rank-grid");

  std::vector<ReplayConfig> grid;
  const ReplayConfig base = to_replay_config(s);
  if (!args.rank_grid.empty()) {
    std::istringstream in(args.rank_grid);
    std::string part;
    while (std::getline(in, part, ',')) {
      ReplayConfig cfg = base;
      cfg.rank = num_value<Index>("rank-grid", part);
      if (cfg.rank < 1) usage_error("rank-grid entries must be positive");
      grid.push_back(cfg);
    }
  } else {
    std::istringstream in(args.ranks_grid);
    std::string part;
    while (std::getline(in, part, ';')) {
      ReplayConfig cfg = base;
      cfg.ranks = parse_ranks(part);
      grid.push_back(cfg);
    }
  }
  if (grid.empty()) usage_error("the sweep grid is empty");

  EventLog log = csv_io::ingest(s.dataset);
  Split sp = split_by_days(log, {s.train_frac, s.valid_frac, s.n_chunks});
  std::vector<SweepEntry> entries = sweep(sp, grid);

  const auto label = [&](const ReplayConfig& cfg) {
    if (!tensor_model(kind)) return std::to_string(cfg.rank);
    return std::to_string(cfg.ranks[0]) + "," + std::to_string(cfg.ranks[1]) +
           "," + std::to_string(cfg.ranks[2]);
  };

  std::string csv = "candidate,hr,mrr,eval_users,skipped_users\n";
  ordered_json list = ordered_json::array();
  std::size_t best = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const SweepEntry& e = entries[i];
    csv += '"' + label(e.cfg) + "\"," + fmt_double(e.hr) + ',' +
           fmt_double(e.mrr) + ',' + std::to_string(e.eval_users) + ',' +
           std::to_string(e.skipped_users) + '\n';
    ordered_json row;
    row["candidate"] = label(e.cfg);
    row["hr"] = e.hr;
    row["mrr"] = e.mrr;
    row["eval_users"] = e.eval_users;
    row["skipped_users"] = e.skipped_users;
    list.push_back(row);
    std::printf("candidate %s: hr=%.4f mrr=%.4f (%d users)\n",
                label(e.cfg).c_str(), e.hr, e.mrr, e.eval_users);
    if (e.hr > entries[best].hr) best = i;
  }

  ordered_json j;
  j["model"] = model_name(kind);
  j["config"] = settings_echo(s, kind);
  j["entries"] = list;
  j["best"] = {{"candidate", label(entries[best].cfg)},
               {"hr", entries[best].hr},
               {"mrr", entries[best].mrr}};

  const fs::path dir = resolved_output_dir(s);
  fs::create_directories(dir);
  write_text(dir / "sweep.csv", csv);
  write_text(dir / "sweep.json", j.dump(2) + "\n");
  std::printf("best by hr: %s (hr=%.4f) -> %s\n",
              label(entries[best].cfg).c_str(), entries[best].hr,
              dir.string().c_str());
  return 0;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string output;
};

int do_report(const ReportArgs& args) {
  struct Row {
    std::string model, source;
    int chunks;
    std::int64_t users, items;
    double hr, mrr, wji;
  };
  std::vector<Row> rows;
  for (const std::string& run : args.runs) {
    fs::path path = run;
    if (fs::is_directory(path)) path /= "summary.json";
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
    ordered_json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("'" + path.string() + "': " + e.what());
    }
    Row r;
    r.model = j.at("model").get<std::string>();
    r.source = path.string();
    r.chunks = j.at("chunks").get<int>();
    r.users = j.at("final_users").get<std::int64_t>();
    r.items = j.at("final_items").get<std::int64_t>();
    r.hr = j.at("hr_mean").get<double>();
    r.mrr = j.at("mrr_mean").get<double>();
    r.wji = j.at("wji_mean").get<double>();
    rows.push_back(std::move(r));
  }

  std::printf("%-14s %8s %8s %8s %7s %8s %8s\n", "model", "hr", "mrr", "wji",
              "chunks", "users", "items");
  std::string csv = "model,hr_mean,mrr_mean,wji_mean,chunks,users,items,source\n";
  for (const Row& r : rows) {
    std::printf("%-14s %8.4f %8.4f %8.4f %7d %8lld %8lld\n", r.model.c_str(),
                r.hr, r.mrr, r.wji, r.chunks, static_cast<long long>(r.users),
                static_cast<long long>(r.items));
    csv += r.model + ',' + fmt_double(r.hr) + ',' + fmt_double(r.mrr) + ',' +
           fmt_double(r.wji) + ',' + std::to_string(r.chunks) + ',' +
           std::to_string(r.users) + ',' + std::to_string(r.items) + ",\"" +
           r.source + "\"\n";
  }
  if (!args.output.empty()) {
    write_text(args.output, csv);
    std::printf("table -> %s\n", args.output.c_str());
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"streaming collaborative filtering toolkit"};
  app.require_subcommand(1);

  PreArgs pre_args;
  CLI::App* pre = app.add_subcommand(
      "preprocess", "filter an event log (chronological tail, p-core floor)");
  pre->add_option("-i,--input", pre_args.input, "raw CSV (user,item,ts[,...])")
      ->required();
  pre->add_option("-o,--output", pre_args.output, "filtered CSV destination")
      ->required();
  pre->add_option("--min-interactions", pre_args.floor,
                  "per-user and per-item event floor (default 5)");
  pre->add_option("--tail-frac", pre_args.tail,
                  "keep only this fraction of the newest events (default 1)");
  pre->add_option("--preset", pre_args.preset,
                  "published dataset preset (ml-20m, amz-b, amz-g, steam)");

  Overrides train_ov;
  std::string ckpt_flag;
  CLI::App* train = app.add_subcommand(
      "train", "fit a model on a whole log and write a checkpoint");
  add_common_options(train, train_ov, true);
  train->add_option("--checkpoint", ckpt_flag,
                    "checkpoint path (default <output>/<model>.ckpt)");

  Overrides replay_ov;
  CLI::App* rep = app.add_subcommand(
      "replay", "chunked score-then-update evaluation over held-out days");
  add_common_options(rep, replay_ov, true);

  Overrides sweep_ov;
  SweepArgs sweep_args;
  CLI::App* swp = app.add_subcommand(
      "sweep", "score rank candidates on the tuning slice");
  add_common_options(swp, sweep_ov, false);
  swp->add_option("--rank-grid", sweep_args.rank_grid,
                  "comma separated ranks, e.g. 8,16,32");
  swp->add_option("--ranks-grid", sweep_args.ranks_grid,
                  "semicolon separated rank triples, e.g. 16,16,4;32,32,5");

  ReportArgs report_args;
  CLI::App* rpt = app.add_subcommand(
      "report", "tabulate replay summaries side by side");
  rpt->add_option("runs", report_args.runs,
                  "summary.json files or run directories")
      ->required();
  rpt->add_option("-o,--output", report_args.output, "also write the table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*pre) return do_preprocess(pre_args);
    if (*train) return do_train(merge(train_ov, true), ckpt_flag);
    if (*rep) return do_replay(merge(replay_ov, true));
    if (*swp) return do_sweep(merge(sweep_ov, false), sweep_args);
    if (*rpt) return do_report(report_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("streamrec");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace streamrec::cli
