#pragma once

#include "streamrec/types.hpp"

#include <string>
#include <vector>

namespace streamrec {

struct Event {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double ts = 0.0;  // unix seconds
};

struct EventLog {
  std::vector<Event> events;

  void sort_by_time();  // stable, preserves input order within a timestamp
  bool empty() const { return events.empty(); }
  std::size_t size() const { return events.size(); }
};

// event with both endpoints resolved to internal indices
struct InternalEvent {
  Index user = 0;
  Index item = 0;
};

std::int64_t day_of(double ts);             // floor(ts / 86400)
std::string day_to_date(std::int64_t day);  // UTC YYYY-MM-DD

}  // namespace streamrec
