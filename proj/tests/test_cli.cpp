#include "streamrec/cli.hpp"

#include "doctest.h"
#include "json.hpp"
#include "streamrec/checkpoint.hpp"
#include "streamrec/csv_io.hpp"
#include "support/synth.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace streamrec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path root;
  explicit TempDir(const char* name)
      : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~TempDir() { fs::remove_all(root); }
  fs::path operator/(const char* leaf) const { return root / leaf; }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
}

std::string write_stream_csv(const TempDir& dir, int users, int items,
                             int days, std::uint64_t seed) {
  synth::StreamSpec spec;
  spec.n_users = users;
  spec.n_items = items;
  spec.n_days = days;
  spec.arrivals_per_day = std::max(2, users / std::max(1, days - 2));
  spec.seed = seed;
  const std::string path = dir / "events.csv";
  csv_io::write_csv(synth::make_stream(spec), path);
  return path;
}

}  // namespace

TEST_CASE("cli preprocess filters and reports") {
  TempDir dir("srec_cli_pre");
  spit(dir / "raw.csv",
       "1,10,1\n1,11,2\n2,10,3\n2,11,4\n3,11,5\n3,12,6\n3,12,6\n");
  int rc = cli::run({"preprocess", "-i", dir / "raw.csv", "-o",
                     dir / "clean.csv", "--min-interactions", "2"});
  CHECK(rc == 0);
  EventLog out = csv_io::ingest(dir / "clean.csv");
  CHECK(out.size() == 4);  // duplicate dropped, then user 3 cascades away

  SUBCASE("an unknown preset is a usage error") {
    CHECK(cli::run({"preprocess", "-i", dir / "raw.csv", "-o",
                    dir / "x.csv", "--preset", "nope"}) != 0);
  }
  SUBCASE("a preset fills the floor and tail") {
    CHECK(cli::run({"preprocess", "-i", dir / "raw.csv", "-o",
                    dir / "amz.csv", "--preset", "amz-b"}) == 0);
    CHECK(csv_io::ingest(dir / "amz.csv").empty());  // toy log, floor 5
  }
}

TEST_CASE("cli train writes a loadable checkpoint") {
  TempDir dir("srec_cli_train");
  const std::string data = write_stream_csv(dir, 30, 15, 8, 11);

  SUBCASE("matrix model") {
    int rc = cli::run({"train", "-i", data, "-m", "psirec", "--rank", "6",
                       "--seed", "4", "-o", dir / "run"});
    CHECK(rc == 0);
    ckpt::SvdLoad back = ckpt::load_svd(dir / "run" / "psirec.ckpt");
    CHECK(back.state.rank == 6);
    CHECK(back.state.u.rows() == back.state.users.size());
    CHECK(back.config.at("model") == "psirec");
    CHECK(back.config.at("seed") == 4);
  }
  SUBCASE("tensor model with an explicit checkpoint path") {
    int rc = cli::run({"train", "-i", data, "-m", "tireca", "--ranks", "4,4,2",
                       "--attention-window", "4", "--seed", "4",
                       "--checkpoint", dir / "t.ckpt"});
    CHECK(rc == 0);
    ckpt::TuckerLoad back = ckpt::load_tucker(dir / "t.ckpt");
    CHECK(back.state.ranks == std::array<Index, 3>{4, 4, 2});
    CHECK(back.state.attention.length == 4);
  }
  SUBCASE("the seed flag is mandatory") {
    CHECK(cli::run({"train", "-i", data, "-m", "psirec"}) != 0);
  }
  SUBCASE("unknown model names are rejected") {
    CHECK(cli::run({"train", "-i", data, "-m", "mystery", "--seed", "1"}) != 0);
  }
}

TEST_CASE("cli replay writes reports and respects config precedence") {
  TempDir dir("srec_cli_replay");
  const std::string data = write_stream_csv(dir, 40, 20, 10, 23);
  spit(dir / "run.conf",
       "# toy settings\n"
       "dataset = " + data + "\n"
       "model = psirec\n"
       "rank = 4\n"
       "train_frac = 0.5\n"
       "n_chunks = 3\n"
       "topn = 8\n");

  int rc = cli::run({"replay", "-c", dir / "run.conf", "--rank", "6",
                     "--seed", "9", "-o", dir / "out"});
  REQUIRE(rc == 0);
  CHECK(fs::exists(dir / "out" / "chunks.csv"));
  CHECK(fs::exists(dir / "out" / "timings.csv"));

  nlohmann::ordered_json summary;
  std::ifstream(dir / "out" / "summary.json") >> summary;
  CHECK(summary.at("model") == "psirec");
  CHECK(summary.at("config").at("rank") == 6);  // flag beat the file
  CHECK(summary.at("config").at("topn") == 8);
  CHECK(summary.at("chunks") == 3);

  const std::string chunks = slurp(dir / "out" / "chunks.csv");
  CHECK(chunks.find("chunk,date,events") == 0);
  CHECK(std::count(chunks.begin(), chunks.end(), '\n') == 4);  // header + 3

  SUBCASE("identical config and seed reproduce the reports byte for byte") {
    REQUIRE(cli::run({"replay", "-c", dir / "run.conf", "--rank", "6",
                      "--seed", "9", "-o", dir / "out2"}) == 0);
    CHECK(slurp(dir / "out" / "chunks.csv") == slurp(dir / "out2" / "chunks.csv"));
    CHECK(slurp(dir / "out" / "summary.json") ==
          slurp(dir / "out2" / "summary.json"));
  }
  SUBCASE("a different seed changes the summary") {
    REQUIRE(cli::run({"replay", "-c", dir / "run.conf", "--rank", "6",
                      "--seed", "10", "-o", dir / "out3"}) == 0);
    nlohmann::ordered_json other;
    std::ifstream(dir / "out3" / "summary.json") >> other;
    CHECK(other.at("config").at("seed") == 10);
  }
  SUBCASE("usage errors: unknown config key, missing dataset") {
    spit(dir / "bad.conf", "modle = psirec\n");
    CHECK(cli::run({"replay", "-c", dir / "bad.conf", "--seed", "1"}) != 0);
    CHECK(cli::run({"replay", "-m", "psirec", "--seed", "1"}) != 0);
  }
}

TEST_CASE("cli output directory falls back to the environment") {
  TempDir dir("srec_cli_env");
  const std::string data = write_stream_csv(dir, 25, 12, 8, 31);
  const std::string envdir = dir / "from_env";
  setenv("STREAMREC_OUTPUT_DIR", envdir.c_str(), 1);
  int rc = cli::run({"replay", "-i", data, "-m", "puresvd", "--rank", "4",
                     "--train-frac", "0.6", "--chunks", "2", "--seed", "3"});
  unsetenv("STREAMREC_OUTPUT_DIR");
  REQUIRE(rc == 0);
  CHECK(fs::exists(fs::path(envdir) / "chunks.csv"));
  CHECK(fs::exists(fs::path(envdir) / "summary.json"));
}

TEST_CASE("cli sweep ranks candidates on the tuning slice") {
  TempDir dir("srec_cli_sweep");
  const std::string data = write_stream_csv(dir, 40, 20, 10, 37);
  int rc = cli::run({"sweep", "-i", data, "-m", "psirec", "--rank-grid",
                     "2,4,8", "--train-frac", "0.5", "--valid-frac", "0.3",
                     "-o", dir / "sw"});
  REQUIRE(rc == 0);
  nlohmann::ordered_json j;
  std::ifstream(dir / "sw" / "sweep.json") >> j;
  REQUIRE(j.at("entries").size() == 3);
  CHECK(j.at("entries")[0].at("candidate") == "2");
  CHECK(j.at("entries")[2].at("candidate") == "8");
  double best_hr = j.at("best").at("hr").get<double>();
  for (const auto& e : j.at("entries"))
    CHECK(e.at("hr").get<double>() <= best_hr + 1e-15);
  const std::string csv = slurp(dir / "sw" / "sweep.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  SUBCASE("sweep without a tuning slice is refused") {
    CHECK(cli::run({"sweep", "-i", data, "-m", "psirec", "--rank-grid", "2",
                    "--train-frac", "0.5"}) != 0);
  }
  SUBCASE("grid flavor must match the model family") {
    CHECK(cli::run({"sweep", "-i", data, "-m", "tireca", "--rank-grid", "2",
                    "--train-frac", "0.5", "--valid-frac", "0.3"}) != 0);
    CHECK(cli::run({"sweep", "-i", data, "-m", "psirec", "--ranks-grid",
                    "2,2,2", "--train-frac", "0.5", "--valid-frac",
                    "0.3"}) != 0);
  }
}

TEST_CASE("cli report tabulates summaries side by side") {
  TempDir dir("srec_cli_report");
  const std::string data = write_stream_csv(dir, 30, 15, 9, 41);
  REQUIRE(cli::run({"replay", "-i", data, "-m", "psirec", "--rank", "4",
                    "--train-frac", "0.6", "--chunks", "2", "--seed", "5",
                    "-o", dir / "a"}) == 0);
  REQUIRE(cli::run({"replay", "-i", data, "-m", "puresvd", "--rank", "4",
                    "--train-frac", "0.6", "--chunks", "2", "--seed", "5",
                    "-o", dir / "b"}) == 0);

  int rc = cli::run({"report", dir / "a", dir / "b" / "summary.json",
                     "-o", dir / "table.csv"});
  REQUIRE(rc == 0);
  const std::string table = slurp(dir / "table.csv");
  CHECK(table.find("model,hr_mean") == 0);
  CHECK(table.find("psirec") != std::string::npos);
  CHECK(table.find("puresvd") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);

  SUBCASE("a missing run is an error") {
    CHECK(cli::run({"report", dir / "nowhere"}) != 0);
  }
}
