#include "streamrec/csv_io.hpp"

#include "doctest.h"

#include <algorithm>
#include <cstdio>

using namespace streamrec;

namespace {

bool same_log(const EventLog& a, const EventLog& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.events[i].user != b.events[i].user ||
        a.events[i].item != b.events[i].item || a.events[i].ts != b.events[i].ts)
      return false;
  return true;
}

}  // namespace

TEST_CASE("ingest parses, deduplicates, and sorts") {
  const std::string text =
      "7,100,300\n"
      "5,101,100\n"
      "7,100,300\n"  // exact repeat of row 1, kept once
      "6,100,200\n";
  EventLog log = csv_io::ingest_text(text);
  REQUIRE(log.size() == 3);
  CHECK(log.events[0].user == 5);
  CHECK(log.events[1].user == 6);
  CHECK(log.events[2].user == 7);
  CHECK(log.events[2].ts == 300.0);

  SUBCASE("same user, item, and time but different rating is still one event") {
    EventLog r = csv_io::ingest_text("1,2,50,4.0\n1,2,50,5.0\n");
    CHECK(r.size() == 1);
  }
  SUBCASE("same pair at a different time is kept") {
    EventLog r = csv_io::ingest_text("1,2,50\n1,2,60\n");
    CHECK(r.size() == 2);
  }
  SUBCASE("ties keep file order") {
    EventLog r = csv_io::ingest_text("9,1,50\n3,2,50\n");
    CHECK(r.events[0].user == 9);
    CHECK(r.events[1].user == 3);
  }
}

TEST_CASE("ingest error messages carry the line number") {
  try {
    csv_io::ingest_text("1,2,100\n1,2,oops\n", {}, "log.csv");
    FAIL("expected a throw");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("log.csv:2") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
  CHECK_THROWS_AS(csv_io::ingest_text("1,2\n"), std::runtime_error);
  CHECK_THROWS_AS(csv_io::ingest_text("x,2,100\n"), std::runtime_error);
  CHECK_THROWS_AS(csv_io::ingest("/nonexistent/path.csv"), std::runtime_error);
}

TEST_CASE("ingest honors the column layout") {
  csv_io::CsvFormat fmt;
  fmt.user_col = 1;
  fmt.item_col = 2;
  fmt.ts_col = 0;
  fmt.delimiter = '\t';
  fmt.header = true;
  EventLog log = csv_io::ingest_text("ts\tuser\titem\n500\t3\t44\n", fmt);
  REQUIRE(log.size() == 1);
  CHECK(log.events[0].user == 3);
  CHECK(log.events[0].item == 44);
  CHECK(log.events[0].ts == 500.0);

  SUBCASE("windows line endings are tolerated") {
    EventLog r = csv_io::ingest_text("1,2,100\r\n3,4,50\r\n");
    CHECK(r.size() == 2);
    CHECK(r.events[0].user == 3);
  }
  SUBCASE("blank lines are skipped") {
    EventLog r = csv_io::ingest_text("1,2,100\n\n3,4,200\n");
    CHECK(r.size() == 2);
  }
}

TEST_CASE("interaction floor cascades until stable") {
  // removing (u3,i3) drops u3 to one event, which then drops (u3,i2)
  EventLog log = csv_io::ingest_text(
      "1,10,1\n1,11,2\n2,10,3\n2,11,4\n3,11,5\n3,12,6\n");
  EventLog out = csv_io::preprocess(log, 2);
  REQUIRE(out.size() == 4);
  for (const Event& e : out.events) {
    CHECK((e.user == 1 || e.user == 2));
    CHECK((e.item == 10 || e.item == 11));
  }

  SUBCASE("floor of one keeps everything") {
    CHECK(same_log(csv_io::preprocess(log, 1), log));
  }
  SUBCASE("an impossible floor empties the log without error") {
    CHECK(csv_io::preprocess(log, 10).empty());
  }
  SUBCASE("result is a fixpoint of the filter") {
    CHECK(same_log(csv_io::preprocess(out, 2), out));
  }
  SUBCASE("argument validation") {
    CHECK_THROWS_AS(csv_io::preprocess(log, 0), std::invalid_argument);
    CHECK_THROWS_AS(csv_io::preprocess(log, 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(csv_io::preprocess(log, 2, 1.5), std::invalid_argument);
  }
}

TEST_CASE("tail subsample keeps the newest fraction before filtering") {
  EventLog log;
  for (int i = 0; i < 10; ++i) log.events.push_back({i, 100 + i, 1000.0 + i});
  EventLog out = csv_io::preprocess(log, 1, 0.3);
  REQUIRE(out.size() == 3);  // floor(0.3 * 10)
  CHECK(out.events[0].ts == 1007.0);
  CHECK(out.events[2].ts == 1009.0);

  // every survivor has one event each way, so floor 2 now clears the log
  CHECK(csv_io::preprocess(log, 2, 0.3).empty());
}

TEST_CASE("written logs ingest back unchanged") {
  EventLog log = csv_io::ingest_text("1,10,100\n2,11,100.5\n1,11,7201\n");
  const std::string path = "roundtrip_log.csv";
  csv_io::write_csv(log, path);
  EventLog back = csv_io::ingest(path);
  CHECK(same_log(log, back));
  std::remove(path.c_str());
}

TEST_CASE("dataset presets") {
  auto ml = csv_io::preset_for("ML-20M");
  REQUIRE(ml.has_value());
  CHECK(ml->min_interactions == 1);
  CHECK(ml->tail_frac == 0.2);
  auto amz = csv_io::preset_for("amz_b");
  REQUIRE(amz.has_value());
  CHECK(amz->min_interactions == 5);
  CHECK(amz->tail_frac == 1.0);
  CHECK(csv_io::preset_for("Amazon Beauty").has_value());
  CHECK(csv_io::preset_for("steam").has_value());
  CHECK(!csv_io::preset_for("netflix").has_value());
}
