#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "rankone/report.hpp"
#include "rankone/scenario.hpp"

using namespace rankone;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("rankone-test-" + name);
  fs::remove_all(d);
  return d;
}

RunOptions opts(const fs::path& dir, int threads = 0) {
  RunOptions o;
  o.out_dir = dir;
  o.threads = threads;
  return o;
}

const char* kSmall = R"({
  "name": "small",
  "description": "geometric sequence diagnostics",
  "generator": {"type": "geometric", "ratio": 3, "count": 30},
  "perturbation": {"kind": "bounded", "w": -0.25},
  "commands": [
    {"op": "check_lacunary", "expect": [{"field": "is_lacunary", "equals": true}]},
    {"op": "counting_function", "params": {"radii": [1, 10, 1000]}, "format": "csv"},
    {"op": "moment_sum", "params": {"k": 1}},
    {"op": "greedy_block", "params": {"anchor": 3}, "expect_error": "anchor_unsuitable"}
  ]
})";

}  // namespace

TEST_SUITE("reports") {

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  CHECK(to_json_text(Value{kInf}) == "\"inf\"");
  CHECK(to_json_text(Value{std::string("a\"b")}) == "\"a\\\"b\"");
  CHECK(to_json_text(Value{}) == "null");
}

TEST_CASE("rendered reports parse and keep their order") {
  Report r;
  r.command = "x";
  r.set("b", 1.5);
  r.set("a", std::int64_t{3});
  auto& t = r.table("rows", {"n", "v"});
  t.add_row({std::int64_t{1}, 0.5});
  t.add_row({std::int64_t{2}, true});
  const auto j = nlohmann::json::parse(render_json(r));
  CHECK(j["scalars"].begin().key() == "a");  // nlohmann sorts keys; the text keeps insertion order
  CHECK(render_json(r).find("\"b\"") < render_json(r).find("\"a\""));
  CHECK(j["tables"][0]["rows"].size() == 2);
  const auto csv = render_csv(r);
  CHECK(csv.rfind("n,v\n1,0.5\n2,true\n", 0) == 0);
  CHECK_THROWS_AS(t.add_row({1.0}), Error);
}

TEST_CASE("scenario runs are byte-identical across runs and thread counts") {
  const auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2"), d3 = fresh_dir("det3");
  REQUIRE(run_scenario_text(kSmall, opts(d1)).exit_code == 0);
  REQUIRE(run_scenario_text(kSmall, opts(d2)).exit_code == 0);
  REQUIRE(run_scenario_text(kSmall, opts(d3, 1)).exit_code == 0);
  const auto d4 = fresh_dir("det4");
  REQUIRE(run_scenario_text(kSmall, opts(d4, 4)).exit_code == 0);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(d1)) {
    if (e.path().filename() == "manifest.json") continue;
    const auto name = e.path().filename();
    CHECK(slurp(e.path()) == slurp(d2 / name));
    CHECK(slurp(d3 / name) == slurp(d4 / name));
    ++compared;
  }
  CHECK(compared == 4);
  const auto m = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  CHECK(m["scenario"] == "small");
  CHECK(m["scenario_hash"] == content_hash(kSmall));
  CHECK(m["commands"].size() == 4);
  CHECK(slurp(d1 / "01_counting_function.csv").rfind("r,count\n", 0) == 0);
  CHECK(nlohmann::json::parse(slurp(d1 / "00_check_lacunary.json"))["scalars"]["is_lacunary"] == true);
}

TEST_CASE("empty command list writes only the manifest") {
  const auto d = fresh_dir("empty");
  const auto r = run_scenario_text(R"({"name": "e", "description": "nothing", "commands": []})", opts(d));
  CHECK(r.exit_code == 0);
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(d)) ++files;
  CHECK(files == 1);
  CHECK(fs::exists(d / "manifest.json"));
}

TEST_CASE("exit codes") {
  RunOptions o;
  o.write_files = false;
  CHECK(run_scenario_text("{not json", o).exit_code == 2);
  CHECK(run_scenario_text(R"({"name": "x", "commands": [{"op": "nope"}]})", o).exit_code == 2);
  CHECK(run_scenario_text(R"({"name": "x", "commands": 3})", o).exit_code == 2);
  const auto fail = run_scenario_text(R"({"name": "x", "generator": {"type": "geometric", "ratio": 2, "count": 5},
    "commands": [{"op": "check_lacunary", "expect": [{"field": "best_epsilon", "max": 0.1}]}]})", o);
  CHECK(fail.exit_code == 1);
  REQUIRE(fail.outcomes.size() == 1);
  CHECK(!fail.outcomes[0].failed_checks.empty());
  const auto err = run_scenario_text(R"({"name": "x", "generator": {"type": "geometric", "ratio": 2, "count": 40},
    "commands": [{"op": "build_counterexample"}]})", o);
  CHECK(err.exit_code == 1);
  CHECK(err.outcomes[0].error.find("insufficient_sparseness") != std::string::npos);
}

TEST_CASE("unwritable output path") {
  const auto d = fresh_dir("blocked");
  fs::create_directories(d.parent_path());
  std::ofstream(d) << "a file where a directory is expected";
  const auto r = run_scenario_text(kSmall, opts(d / "sub"));
  CHECK(r.exit_code != 0);
  fs::remove(d);
}

TEST_CASE("bundled scenarios are documented and list known operations") {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(SCENARIO_DIR)) {
    if (e.path().extension() != ".json") continue;
    const auto j = nlohmann::json::parse(slurp(e.path()));
    CHECK(j.contains("name"));
    CHECK(j.value("description", std::string()).size() >= 20);
    for (const auto& c : j["commands"])
      CHECK(std::find(scenario_operations().begin(), scenario_operations().end(), c["op"].get<std::string>()) !=
            scenario_operations().end());
    ++n;
  }
  CHECK(n >= 8);
}

}
