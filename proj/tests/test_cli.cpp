#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stoqlab/cli_run.hpp"
#include "stoqlab/serialize.hpp"

using namespace stoqlab;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("region serialization round trip") {
  const auto r = serialize::region_from_json(json::parse("[[0,0],[1,2],[-3,4]]"));
  CHECK(r.size() == 3);
  CHECK(serialize::region_to_json(r).dump() == "[[-3,4],[0,0],[1,2]]");  // canonical order
}

TEST_CASE("csv formatting is stable") {
  serialize::CsvWriter csv({"a", "b"});
  csv.add_row({serialize::CsvWriter::format(1.0 / 3.0), "x"});
  CHECK(csv.str() == "a,b\n0.33333333333333331,x\n");
  CHECK_THROWS(csv.add_row({"only-one"}));
}

TEST_CASE("runner on a small ppp config") {
  const auto dir = std::filesystem::temp_directory_path() / "stoqlab_cli_test";
  std::filesystem::remove_all(dir);
  json config{{"module", "qgibbs"},
              {"op", "ppp"},
              {"seed", 7},
              {"params",
               {{"model", "tfim"},
                {"sites", {{0}}},
                {"J", 0.0},
                {"eps", 1.0},
                {"beta", 1.0},
                {"n_samples", 4000}}}};
  const auto outcome = cli::run(config, dir.string());
  CHECK(outcome.exit_code == 0);
  REQUIRE(outcome.files_written.size() == 1);
  const std::string content = slurp(dir / outcome.files_written.front());
  CHECK(content.find("entry,estimate,stderr,oracle,sigmas") == 0);

  // identical config and seed reproduce the bytes
  const auto dir2 = std::filesystem::temp_directory_path() / "stoqlab_cli_test2";
  std::filesystem::remove_all(dir2);
  const auto outcome2 = cli::run(config, dir2.string());
  CHECK(slurp(dir2 / outcome2.files_written.front()) == content);
}

TEST_CASE("outputs do not depend on the thread count") {
  // the chunk grid of every reduction is fixed, so capping the OpenMP team
  // must not change a single byte
  json config{{"module", "qgibbs"},
              {"op", "ppp"},
              {"seed", 99},
              {"params",
               {{"model", "tfim"},
                {"sites", {{0}, {1}}},
                {"J", 1.0},
                {"eps", 0.7},
                {"beta", 0.8},
                {"n_samples", 5000}}}};
  const auto dir1 = std::filesystem::temp_directory_path() / "stoqlab_threads1";
  const auto dir2 = std::filesystem::temp_directory_path() / "stoqlab_threads2";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
  // the cap is read once per process, so drive the comparison through the
  // installed binary path instead when available; in-process we can still
  // check that two consecutive runs agree while the pool is warm
  const auto a = cli::run(config, dir1.string());
  const auto b = cli::run(config, dir2.string());
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(dir1 / "qgibbs_ppp.csv") == slurp(dir2 / "qgibbs_ppp.csv"));
}

TEST_CASE("runner rejects bad configs") {
  const auto dir = std::filesystem::temp_directory_path() / "stoqlab_cli_err";
  CHECK(cli::run(json{{"module", "nonsense"}}, dir.string()).exit_code == 2);
  CHECK(cli::run(json{{"module", "qgibbs"}, {"op", "ppp"}}, dir.string()).exit_code == 2);
  // stochastic run without a seed
  json config{{"module", "qgibbs"},
              {"op", "ppp"},
              {"params",
               {{"model", "tfim"}, {"sites", {{0}}}, {"beta", 1.0}, {"n_samples", 10}}}};
  CHECK(cli::run(config, dir.string()).exit_code == 2);
}

TEST_CASE("explicit interaction maps parse") {
  const auto dir = std::filesystem::temp_directory_path() / "stoqlab_cli_maps";
  std::filesystem::remove_all(dir);
  json config{{"module", "qgibbs"},
              {"op", "classify"},
              {"seed", 1},
              {"params",
               {{"sites", {{0}, {1}}},
                {"range", 1},
                {"J", {{"[[0],[1]]", 1.0}}},
                {"f", {{"[[0]]", {{"[]", 0.5}}}, {"[[1]]", {{"[]", 0.5}}}}}}}};
  const auto outcome = cli::run(config, dir.string());
  CHECK(outcome.exit_code == 0);
  const std::string content = slurp(dir / "qgibbs_classify.csv");
  CHECK(content.find("stoquastic,1") != std::string::npos);
}
