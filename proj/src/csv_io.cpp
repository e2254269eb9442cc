#include "streamrec/csv_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace streamrec::csv_io {

namespace {

[[noreturn]] void bad_row(const std::string& origin, std::size_t line,
                          const std::string& what) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + what);
}

std::int64_t parse_i64(const std::string& field, const std::string& origin,
                       std::size_t line, const char* name) {
  std::int64_t v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || p != e)
    bad_row(origin, line, std::string("bad ") + name + " '" + field + "'");
  return v;
}

double parse_f64(const std::string& field, const std::string& origin,
                 std::size_t line, const char* name) {
  // strtod instead of from_chars<double>: universally available and we want
  // to accept both "86400" and "86400.0"
  if (field.empty()) bad_row(origin, line, std::string("empty ") + name);
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size())
    bad_row(origin, line, std::string("bad ") + name + " '" + field + "'");
  return v;
}

struct TripleHash {
  std::size_t operator()(const std::array<std::int64_t, 3>& t) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (std::int64_t x : t) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) +
           (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

EventLog ingest_text(const std::string& text, const CsvFormat& fmt,
                     const std::string& origin) {
  const int need =
      std::max({fmt.user_col, fmt.item_col, fmt.ts_col}) + 1;
  EventLog log;
  std::unordered_set<std::array<std::int64_t, 3>, TripleHash> seen;
  std::vector<std::string> fields;

  std::istringstream in(text);
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    if (fmt.header && line == 1) continue;

    fields.clear();
    std::size_t start = 0;
    while (true) {
      std::size_t at = row.find(fmt.delimiter, start);
      fields.push_back(row.substr(start, at - start));
      if (at == std::string::npos) break;
      start = at + 1;
    }
    if (static_cast<int>(fields.size()) < need)
      bad_row(origin, line,
              "expected at least " + std::to_string(need) + " columns, got " +
                  std::to_string(fields.size()));

    Event e;
    e.user = parse_i64(fields[fmt.user_col], origin, line, "user id");
    e.item = parse_i64(fields[fmt.item_col], origin, line, "item id");
    e.ts = parse_f64(fields[fmt.ts_col], origin, line, "timestamp");

    std::array<std::int64_t, 3> key{e.user, e.item,
                                    std::bit_cast<std::int64_t>(e.ts)};
    if (seen.insert(key).second) log.events.push_back(e);
  }
  log.sort_by_time();
  return log;
}

EventLog ingest(const std::string& path, const CsvFormat& fmt) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return ingest_text(buf.str(), fmt, path);
}

EventLog preprocess(EventLog log, int min_interactions, double tail_frac) {
  if (min_interactions < 1)
    throw std::invalid_argument("min_interactions must be at least 1");
  if (!(tail_frac > 0.0) || tail_frac > 1.0)
    throw std::invalid_argument("tail_frac must be in (0, 1]");

  log.sort_by_time();
  if (tail_frac < 1.0) {
    const auto keep = static_cast<std::size_t>(
        tail_frac * static_cast<double>(log.size()));
    log.events.erase(log.events.begin(),
                     log.events.end() - static_cast<std::ptrdiff_t>(keep));
  }

  // p-core: each removal can drop a counterpart below the floor, so iterate
  // to the fixpoint
  bool changed = true;
  while (changed && !log.events.empty()) {
    std::unordered_map<std::int64_t, int> ucount, icount;
    for (const Event& e : log.events) {
      ++ucount[e.user];
      ++icount[e.item];
    }
    const std::size_t before = log.events.size();
    std::erase_if(log.events, [&](const Event& e) {
      return ucount[e.user] < min_interactions ||
             icount[e.item] < min_interactions;
    });
    changed = log.events.size() != before;
  }
  return log;
}

void write_csv(const EventLog& log, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  char num[64];
  for (const Event& e : log.events) {
    std::snprintf(num, sizeof num, "%.17g", e.ts);
    f << e.user << ',' << e.item << ',' << num << '\n';
  }
  if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

std::optional<PreprocessPreset> preset_for(std::string name) {
  std::string norm;
  for (char c : name)
    if (std::isalnum(static_cast<unsigned char>(c)))
      norm.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
  if (norm == "ml20m" || norm == "movielens20m") return PreprocessPreset{1, 0.2};
  if (norm == "amzb" || norm == "amazonbeauty") return PreprocessPreset{5, 1.0};
  if (norm == "amzg" || norm == "amazongames") return PreprocessPreset{5, 1.0};
  if (norm == "steam") return PreprocessPreset{5, 1.0};
  return std::nullopt;
}

}  // namespace streamrec::csv_io
