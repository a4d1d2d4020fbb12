#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "eosp/instance.hpp"

using namespace eosp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string command = std::string("\"") + EOSP_CLI_PATH + "\" " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("generate, solve and validate") {
  const auto dir = fresh_dir("eosp_cli_roundtrip");
  const auto inst = (dir / "inst.json").string();
  const auto sched = (dir / "sched.json").string();

  auto r = run_cli("gen --n 20 --seed 4 --objective utility --tau 400 --out " + inst);
  REQUIRE(r.status == 0);
  r = run_cli("solve --algo greedy --in " + inst + " --out " + sched);
  REQUIRE(r.status == 0);
  CHECK(r.output.find("greedy: utility") != std::string::npos);
  CHECK(fs::exists(dir / "solve_results.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  r = run_cli("validate --in " + inst + " --schedule " + sched);
  CHECK(r.status == 0);
  CHECK(r.output.rfind("valid:", 0) == 0);

  SUBCASE("a start outside its window is reported") {
    auto s = load_schedule(sched);
    REQUIRE(!s.entries.empty());
    const int id = s.entries.begin()->first;
    const auto instance = load_instance(inst);
    s.entries[id] = instance[id].l + 5.0;
    save_schedule(s, dir / "bad.json");
    r = run_cli("validate --in " + inst + " --schedule " + (dir / "bad.json").string());
    CHECK(r.status == 1);
    CHECK(r.output.find("violation: acquisition " + std::to_string(id)) != std::string::npos);
    CHECK(r.output.find("> l - d =") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("graph statistics over several instances") {
  const auto dir = fresh_dir("eosp_cli_graph");
  for (int seed = 0; seed < 5; ++seed) {
    REQUIRE(run_cli("gen --n " + std::to_string(10 + seed) + " --seed " + std::to_string(seed) +
                    " --tau 400 --out " + (dir / ("i" + std::to_string(seed) + ".json")).string())
                .status == 0);
  }
  const auto r = run_cli("graph --stats --in " + dir.string());
  REQUIRE(r.status == 0);
  CHECK(r.output.rfind("acquisitions,discrete_nodes,continuous_nodes,node_ratio", 0) == 0);
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 6);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run_cli("solve --bogus-flag").status == 2);
  CHECK(run_cli("solve --algo magic --in x.json --out y.json").status == 2);
  const auto missing = run_cli("validate --in /nonexistent/inst.json --schedule /nonexistent/s.json");
  CHECK(missing.status != 0);
}
