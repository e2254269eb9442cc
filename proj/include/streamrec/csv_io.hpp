#pragma once

#include "streamrec/events.hpp"

#include <optional>
#include <string>

namespace streamrec::csv_io {

// column layout of an interaction file; columns past the named ones (ratings
// and such) are ignored
struct CsvFormat {
  int user_col = 0;
  int item_col = 1;
  int ts_col = 2;
  char delimiter = ',';
  bool header = false;
};

// Parses, drops exact (user, item, ts) duplicates keeping the first, and
// stably sorts by timestamp. Malformed rows throw with the 1-based line
// number. `origin` only labels error messages.
EventLog ingest_text(const std::string& text, const CsvFormat& fmt = {},
                     const std::string& origin = "<memory>");
EventLog ingest(const std::string& path, const CsvFormat& fmt = {});

// Chronological tail subsample (keep the last floor(tail_frac * n) events),
// then iterated p-core: drop users and items with fewer than min_interactions
// events until both floors hold. An empty result is returned, not an error.
EventLog preprocess(EventLog log, int min_interactions, double tail_frac = 1.0);

// Plain "user,item,ts" rows, no header, re-ingestable with the default format.
void write_csv(const EventLog& log, const std::string& path);

struct PreprocessPreset {
  int min_interactions = 5;
  double tail_frac = 1.0;
};

// Published-dataset presets by name (case/punctuation insensitive).
// Movielens-20M keeps every user/item but only the last 20% of interactions;
// the rest use the 5-interaction floor on the full history.
std::optional<PreprocessPreset> preset_for(std::string name);

}  // namespace streamrec::csv_io
