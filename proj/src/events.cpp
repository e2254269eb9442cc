#include "streamrec/events.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace streamrec {

void EventLog::sort_by_time() {
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.ts < b.ts; });
}

std::int64_t day_of(double ts) {
  return static_cast<std::int64_t>(std::floor(ts / 86400.0));
}

std::string day_to_date(std::int64_t day) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace streamrec
