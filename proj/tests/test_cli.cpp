#include <cstdio>
#include <cstdlib>
#include <string>

#include "doctest.h"

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " + std::string(QPROC_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

long count_lines(const std::string& s) {
  long n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("simulate emits the documented CSV schema") {
  const CliResult r = run_cli(
      "simulate --kind ou --q 0.5 --alpha 1 --t0 0 --t1 10 --dt 0.01 "
      "--paths 3 --seed 7");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("path,time,value\n", 0) == 0);
  CHECK(count_lines(r.out) == 3004);  // header + 3 * 1001 rows
}

TEST_CASE("simulate output is deterministic across runs and thread caps") {
  const std::string args =
      "simulate --kind qwiener --q 0.5 --t0 0 --t1 2 --dt 0.1 --paths 5 "
      "--seed 123";
  const CliResult a = run_cli(args, "QPROC_THREADS=1");
  const CliResult b = run_cli(args, "QPROC_THREADS=4");
  const CliResult c = run_cli(args, "QPROC_THREADS=1");
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
}

TEST_CASE("density prints the semicircle value at the free point") {
  const CliResult r = run_cli("density --q 0 --x 0");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "0.318309886184\n");
}

TEST_CASE("density transition mode and grid mode") {
  const CliResult r = run_cli("density --q 0.5 --x 0.2 --y 0.4 --rho 0.6");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("0.") != std::string::npos);
  const CliResult g =
      run_cli("density --q 0 --from -1 --to 1 --n 5 --cdf");
  CHECK(g.exit_code == 0);
  CHECK(g.out.rfind("x,pdf,cdf\n", 0) == 0);
  CHECK(count_lines(g.out) == 6);
}

TEST_CASE("poly prints the recurrence values") {
  const CliResult r = run_cli("poly --q 0.5 --n 3 --x 2");
  CHECK(r.exit_code == 0);
  // H_3(2|0.5) = 8 - 2.5 * 2 = 3
  CHECK(r.out.rfind("degree,value\n", 0) == 0);
  CHECK(r.out.find("\n3,3\n") != std::string::npos);
  const CliResult j = run_cli("poly --q 0.5 --n 2 --x 1 --format json");
  CHECK(j.out == "[1,1,0]\n");
}

TEST_CASE("bridge table output") {
  const CliResult r = run_cli("bridge --q 0.5 --n 2 --rho1 0.6 --rho2 0.4");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("r,m,left_degree,right_degree,value\n", 0) == 0);
  CHECK(count_lines(r.out) == 5);  // header + 4 entries
  const CliResult j = run_cli(
      "bridge --q 0.5 --n 1 --alpha 1 --delta 0.5 --gamma 0.5 "
      "--y-left 0.3 --y-right -0.2 --format json");
  CHECK(j.exit_code == 0);
  CHECK(j.out.find("\"mean\":") != std::string::npos);
}

TEST_CASE("spectrum single value") {
  // n=1, q=1: classical OU spectrum 2 alpha / (omega^2 + alpha^2)
  const CliResult r = run_cli("spectrum --q 1 --alpha 1 --n 1 --omega 0");
  CHECK(r.exit_code == 0);
  CHECK(r.out == "2\n");
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("density --x 0").exit_code != 0);       // missing --q
  CHECK(run_cli("simulate --q 2 --alpha 1").exit_code == 1);  // bad q
  CHECK(run_cli("simulate --kind ou --q 0.5").exit_code == 1);  // no alpha
  CHECK(run_cli("bridge --q 0.5 --n 5 --rho1 0.5 --rho2 0.5").exit_code ==
        1);  // unsupported degree
  CHECK(run_cli("nonsense").exit_code != 0);
}
