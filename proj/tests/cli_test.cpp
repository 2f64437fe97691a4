// Spawns the installed command-line binary (path in $MFL_BIN) and checks the
// documented exit codes and report formats end to end.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "mfl/loopcore.hpp"

using namespace mfl;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

std::string cli_path() {
  const char* bin = std::getenv("MFL_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "MFL_BIN must point at the command-line binary");
  return bin;
}

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix + cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mfl_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

LoopTable s3_table() {
  std::vector<std::array<int, 3>> ps = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  auto mul = [&](Elt x, Elt y) {
    std::array<int, 3> r{};
    for (int i = 0; i < 3; ++i)
      r[static_cast<std::size_t>(i)] = ps[static_cast<std::size_t>(y)][static_cast<std::size_t>(
          ps[static_cast<std::size_t>(x)][static_cast<std::size_t>(i)])];
    for (std::size_t k = 0; k < ps.size(); ++k)
      if (ps[k] == r) return static_cast<Elt>(k);
    return Elt{-1};
  };
  return build_table(6, mul);
}

// Order-5 loop with identity that is not Moufang (no group of that shape).
LoopTable bent_table() {
  static const int rows[5][5] = {{0, 1, 2, 3, 4},
                                 {1, 0, 3, 4, 2},
                                 {2, 4, 0, 1, 3},
                                 {3, 2, 4, 0, 1},
                                 {4, 3, 1, 2, 0}};
  return build_table(5, [&](Elt x, Elt y) {
    return static_cast<Elt>(rows[static_cast<int>(x)][static_cast<int>(y)]);
  });
}

}  // namespace

TEST_CASE("build writes a verified table and reports its structure") {
  std::string out = tmp_path("gd2.loop");
  RunResult r = run_cli("build gd:F2,all --out " + out);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "order 24"));
  CHECK(contains(r.out, "moufang PASS checks=13824 exhaustive"));
  CHECK(contains(r.out, "associative no"));
  CHECK(contains(r.out, "wrote table"));

  LoopTable t = loop_load(out);
  CHECK(t.size() == 24);
  REQUIRE(!t.names().empty());
  CHECK(t.names()[0] == "([[1,0],[0,1]],(0,0))");
  std::filesystem::remove(out);
}

TEST_CASE("build stores oversized constructions as handle metadata") {
  std::string out = tmp_path("big.loop");
  RunResult r = run_cli("build catalog:paige-semidirect,q=2 --out " + out +
                        " --budget 20000 --seed 7");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "order 7680"));
  CHECK(contains(r.out, "moufang PASS checks=20000 sampled"));
  CHECK(contains(r.out, "associative no witness=("));
  CHECK(contains(r.out, "wrote handle"));
  std::string file = slurp(out);
  CHECK(contains(file, "mfl handle v1"));
  CHECK(contains(file, "descriptor catalog:paige-semidirect,q=2"));
  CHECK(contains(file, "order 7680"));
  CHECK(contains(file, "kernel 64"));
  std::filesystem::remove(out);
}

TEST_CASE("build rejects the unsupportable module rank as a construction failure") {
  RunResult r = run_cli("build wreathmod:F2,3 --out " + tmp_path("r3.loop"));
  CHECK(r.code == 1);
  CHECK(contains(r.out, "triality fails at n=3"));

  RunResult ok = run_cli("build wreathmod:F2,2 --out " + tmp_path("r2.loop"));
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "order 24"));
  std::filesystem::remove(tmp_path("r2.loop"));
}

TEST_CASE("check runs the chosen suites with stable ordered output") {
  std::string table = tmp_path("check.loop");
  RunResult built = run_cli("build gd:F2,all --out " + table);
  REQUIRE(built.code == 0);

  RunResult r = run_cli("check " + table + " --suite moufang,dxy,psaut,altop");
  CHECK(r.code == 0);
  std::size_t a = r.out.find("moufang PASS");
  std::size_t b = r.out.find("dxy PASS");
  std::size_t c = r.out.find("psaut PASS");
  std::size_t d = r.out.find("altop PASS");
  REQUIRE(a != std::string::npos);
  REQUIRE(b != std::string::npos);
  REQUIRE(c != std::string::npos);
  REQUIRE(d != std::string::npos);
  CHECK(a < b);
  CHECK(b < c);
  CHECK(c < d);
  CHECK(contains(r.out, "\nPASS\n"));

  // Deterministic bytes independent of reruns and the worker count.
  RunResult again = run_cli("check " + table + " --suite moufang,dxy,psaut,altop");
  CHECK(again.out == r.out);
  RunResult wide = run_cli("check " + table + " --suite moufang,dxy,psaut,altop --jobs 4");
  CHECK(wide.out == r.out);

  RunResult unknown = run_cli("check " + table + " --suite nosuch");
  CHECK(unknown.code == 2);
  RunResult missing = run_cli("check " + tmp_path("absent.loop"));
  CHECK(missing.code == 2);

  std::string rep = tmp_path("report.json");
  RunResult jr = run_cli("check " + table + " --report " + rep);
  CHECK(jr.code == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(rep));
  CHECK(j["pass"] == true);
  CHECK(j["suites"].size() == 3);
  CHECK(j["suites"][0]["name"] == "moufang");
  std::filesystem::remove(rep);
  std::filesystem::remove(table);
}

TEST_CASE("check reports a witness when the law fails") {
  LoopTable bent = bent_table();
  CHECK_FALSE(is_moufang(bent).pass);  // fixture sanity
  std::string path = tmp_path("bent.loop");
  loop_save(bent, path);
  RunResult r = run_cli("check " + path + " --suite moufang");
  CHECK(r.code == 1);
  CHECK(contains(r.out, "moufang FAIL"));
  CHECK(contains(r.out, "witness=("));
  CHECK(contains(r.out, "\nFAIL\n"));
  std::filesystem::remove(path);
}

TEST_CASE("group suites run through check on a group table") {
  std::string path = tmp_path("s3.loop");
  loop_save(s3_table(), path);
  RunResult r = run_cli("check " + path + " --suite moufang,gzt,formulas,dxy");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "gzt PASS"));
  CHECK(contains(r.out, "formulas PASS"));
  CHECK(contains(r.out, "\nPASS\n"));

  RunResult tri = run_cli("check-triality wreath:" + path);
  CHECK(tri.code == 0);
  CHECK(contains(tri.out, "group order 216"));
  CHECK(contains(tri.out, "triality PASS"));
  std::filesystem::remove(path);
}

TEST_CASE("triality verdicts across the module ranks") {
  RunResult r1 = run_cli("check-triality wreathmod:F2,1");
  CHECK(r1.code == 0);
  CHECK(contains(r1.out, "triality PASS"));
  RunResult r2 = run_cli("check-triality wreathmod:F3,2");
  CHECK(r2.code == 0);
  RunResult r3 = run_cli("check-triality wreathmod:F2,3");
  CHECK(r3.code == 1);
  CHECK(contains(r3.out, "triality FAIL"));
  CHECK(contains(r3.out, "(1,2,3)"));
  RunResult bad = run_cli("check-triality wreathmod:F2,9");
  CHECK(bad.code == 1);  // rank out of range: construction failure
}

TEST_CASE("minimal prints the survey row for a construction") {
  RunResult r = run_cli("minimal gd:F2,all");
  CHECK(r.code == 0);
  CHECK(r.out == "gd:F2,all 24 4 nontrivial=y minimal=y witness=- method=spinning\n");
  RunResult e = run_cli("minimal gd:F2,all --method enumeration");
  CHECK(e.code == 0);
  CHECK(e.out == "gd:F2,all 24 4 nontrivial=y minimal=y witness=- method=enumeration\n");
}

TEST_CASE("survey reports are byte-stable and bounded") {
  std::string f1 = tmp_path("survey1.txt");
  std::string f2 = tmp_path("survey2.txt");
  RunResult r1 = run_cli("survey --bound 10000 --q 2,3 --out " + f1);
  RunResult r2 = run_cli("survey --bound 10000 --q 2,3 --out " + f2);
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(slurp(f1) == slurp(f2));
  CHECK(slurp(f1) == r1.out);
  CHECK(contains(r1.out, "gd:F2,all 24 4 nontrivial=y minimal=y witness=-"));
  CHECK(contains(r1.out, "catalog:paige-semidirect,q=2 7680 64 nontrivial=y minimal=y"));

  RunResult empty = run_cli("survey --bound 10");
  CHECK(empty.code == 0);
  CHECK(empty.out.empty());
  std::filesystem::remove(f1);
  std::filesystem::remove(f2);
}

TEST_CASE("export round-trips tables through files and descriptors") {
  std::string a = tmp_path("exp_a.loop");
  std::string b = tmp_path("exp_b.loop");
  RunResult r1 = run_cli("export paige:q=2 --out " + a);
  CHECK(r1.code == 0);
  CHECK(contains(r1.out, "order 120"));
  RunResult r2 = run_cli("export " + a + " --out " + b);
  CHECK(r2.code == 0);
  CHECK(slurp(a) == slurp(b));
  LoopTable t = loop_load(b);
  CHECK(t.size() == 120);
  CHECK(is_moufang(t, 2000000).pass);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("usage problems exit with the usage code") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("build nosuch:thing --out " + tmp_path("x.loop")).code == 2);
  CHECK(run_cli("build gd:F2,all").code == 2);  // missing --out
  RunResult env = run_cli("build gd:F2,all --out " + tmp_path("y.loop"),
                          "MFL_CACHE_SIZE=abc ");
  CHECK(env.code == 2);
  CHECK(contains(env.out, "MFL_CACHE_SIZE"));
  RunResult ok = run_cli("build gd:F2,all --out " + tmp_path("y.loop"),
                         "MFL_CACHE_SIZE=2048 ");
  CHECK(ok.code == 0);
  std::filesystem::remove(tmp_path("y.loop"));
}
