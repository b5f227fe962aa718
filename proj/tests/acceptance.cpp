// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Criterion 11 drives the command-line binary end to end; its path comes
// from the YAMABE_CLI environment variable (set by the test harness).

#include <array>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "yamabe/classify.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/integrate.hpp"
#include "yamabe/io.hpp"
#include "yamabe/suites.hpp"

using namespace yamabe;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool ok, const std::string& note) {
  std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", num,
              name.c_str(), note.empty() ? "" : " -- ", note.c_str());
  if (!ok) ++g_failures;
}

void report_suite(int num, const std::string& name, const VerificationReport& rep) {
  std::size_t bad = 0;
  std::string first;
  for (const auto& c : rep.checks)
    if (!c.passed) {
      if (first.empty()) first = c.name;
      ++bad;
    }
  std::ostringstream note;
  note << rep.checks.size() << " checks";
  if (bad) note << ", " << bad << " failed (first: " << first << ")";
  report(num, name, rep.passed(), note.str());
}

// --- criterion 1: constant-example fidelity ---------------------------------

void criterion1() {
  const SolitonParams p(3, -1.0, -1.0);
  IntegrationOptions o;
  o.r_span = 50.0;
  o.max_output_dr = 0.05;
  const Trajectory t =
      integrate(p, SolitonState{0.0, 1.0, 0.0}, Direction::Both, o);
  double worst_rho = 0.0, worst_R = 0.0;
  for (const auto& s : t.samples) {
    worst_rho = std::max(worst_rho, std::fabs(s.rho - 1.0));
    worst_R = std::max(worst_R,
                       std::fabs(scalar_curvature_direct(s.drho, p.lambda) + 1.0));
  }
  const bool ok = worst_rho <= 1e-8 && worst_R <= 1e-8 &&
                  t.termination_fwd == Termination::WindowEnd &&
                  t.termination_bwd == Termination::WindowEnd;
  std::ostringstream note;
  note << "max|rho-1|=" << worst_rho << ", max|R-lambda|=" << worst_R
       << ", terminations " << to_string(t.termination_fwd) << "/"
       << to_string(t.termination_bwd);
  report(1, "constant-example fidelity", ok, note.str());
}

// --- criterion 10: tip shooting ---------------------------------------------

void criterion10() {
  const SolitonParams p(3, -1.0, 2.0);
  IntegrationOptions o;
  o.r_span = 30.0;
  o.max_output_dr = 0.05;
  const Trajectory t = integrate(p, sphere_tip_initialize(p), Direction::Both, o);
  double worst_res = 0.0;
  for (const auto& s : t.samples) {
    if (s.r <= 0.01 || !(s.rho > 0.0)) continue;
    worst_res =
        std::max(worst_res, std::fabs(eq1_residual(p, s.rho, s.drho, s.ddrho).eq1_res));
  }
  // rbar = (n-1)(n-2) lambda^2 here, so the exact branch is rho(r) = r
  double worst_exact = 0.0;
  for (const auto& s : t.samples)
    if (s.r > 0.01 && s.r <= 10.0)
      worst_exact = std::max(worst_exact, std::fabs(s.rho - s.r));
  const Classification cls = classify(t);
  const bool ok = worst_res <= 1e-6 && worst_exact <= 1e-6 &&
                  cls.branch == Branch::RotationallySymmetricHalfLine;
  std::ostringstream note;
  note << "max|eq1 residual|=" << worst_res << ", max|rho-r|=" << worst_exact
       << ", branch " << to_string(cls.branch);
  report(10, "tip shooting", ok, note.str());
}

// --- criterion 11: CLI contract ---------------------------------------------

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const char* cli = std::getenv("YAMABE_CLI");
  if (!cli) return {};
  const std::string cmd = std::string(cli) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {};
  CliResult res;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    res.out.append(buf.data(), got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

void criterion11() {
  if (!std::getenv("YAMABE_CLI")) {
    report(11, "CLI contract", false, "YAMABE_CLI not set");
    return;
  }
  std::vector<std::string> bad;
  auto expect = [&](const std::string& what, bool ok) {
    if (!ok) bad.push_back(what);
  };

  // integrate: constant stream, R = lambda on every line, exit 0
  {
    const auto r = run_cli("integrate --n 3 --lambda -1 --rbar -1 --rho0 1 "
                           "--drho0 0 --r-span 5");
    expect("integrate exit 0", r.exit_code == 0);
    const auto ls = lines_of(r.out);
    expect("integrate emits samples + summary", ls.size() >= 3);
    bool all_R = true, roundtrip = true;
    for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
      const auto j = nlohmann::json::parse(ls[i]);
      if (j.at("R").get<double>() != -1.0) all_R = false;
      const Sample s = io::parse_sample_line(ls[i]);
      if (io::sample_line(s, -1.0) != ls[i]) roundtrip = false;
    }
    expect("integrate stream has R = lambda", all_R);
    expect("sample lines round-trip bit-exactly", roundtrip);
    const auto sum = nlohmann::json::parse(ls.back());
    expect("summary has terminations",
           sum.at("termination_fwd") == "WindowEnd" &&
               sum.at("termination_bwd") == "WindowEnd");
  }
  // usage errors: n < 3
  {
    const auto r = run_cli("integrate --n 2 --lambda -1 --rbar -1 --rho0 1 --drho0 0");
    expect("integrate --n 2 exits 2", r.exit_code == 2);
  }
  // integration failure: forced step underflow away from rho = 0
  {
    const auto r = run_cli("integrate --n 3 --lambda -1 --rbar -1 --rho0 0.001 "
                           "--drho0 -1 --r-span 1e10 --direction forward");
    expect("step underflow exits 3", r.exit_code == 3);
  }
  // classify: trivial exits 0; tiny window is inconclusive (4)
  {
    const auto r = run_cli("classify --n 3 --lambda -1 --rbar -1 --rho0 1 "
                           "--drho0 0 --r-span 20");
    expect("classify trivial exit 0", r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    expect("classify trivial branch", j.at("branch") == "Trivial");
  }
  {
    const auto r = run_cli("classify --n 3 --lambda -1 --rbar -1 --rho0 2 "
                           "--drho0 0.5 --r-span 0.5");
    expect("classify tiny window exit 4", r.exit_code == 4);
  }
  // scan: claim-1 grid, 12 records, exit 0, deterministic modulo timestamp
  {
    const std::string cfg_path = "/tmp/yamabe_accept_scan.json";
    std::ofstream(cfg_path) << R"({"n":[3],"lambda":[-1.0],"rbar":[2.0],
      "rho0":[0.5,1.0,2.0],"drho0":[0.1,0.5,1.0,2.0],
      "opts":{"r_span":40.0},"format":"jsonl"})";
    const auto r1 = run_cli("scan --config " + cfg_path);
    const auto r2 = run_cli("scan --config " + cfg_path);
    expect("scan exit 0", r1.exit_code == 0);
    const auto ls = lines_of(r1.out);
    expect("scan record count", ls.size() == 14); // header + 12 + summary
    bool sorted = true, no_lines = true;
    for (std::size_t i = 1; i + 1 < ls.size(); ++i) {
      const auto j = nlohmann::json::parse(ls[i]);
      if (j.at("grid_index").get<std::size_t>() != i - 1) sorted = false;
      const std::string b = j.at("branch");
      if (b == "LineRGreaterLambda" || b == "LineRLessLambda") no_lines = false;
    }
    expect("scan records sorted by grid_index", sorted);
    expect("no claim-1 survivor", no_lines);
    const auto strip = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
    expect("scan deterministic modulo timestamp",
           strip(r1.out) == strip(r2.out));
  }
  {
    const std::string cfg_path = "/tmp/yamabe_accept_bad.json";
    std::ofstream(cfg_path) << R"({"n":[],"lambda":[-1],"rbar":[0],"rho0":[1],"drho0":[1]})";
    expect("scan empty grid exits 2",
           run_cli("scan --config " + cfg_path).exit_code == 2);
  }
  // verify: known suite passes, unknown suite exits 2
  {
    const auto r = run_cli("verify --suite claim1");
    expect("verify claim1 exit 0", r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    expect("verify report is json", j.at("suite") == "claim1" && j.at("passed") == true);
    expect("verify nonsense exits 2",
           run_cli("verify --suite nonsense").exit_code == 2);
  }
  // example: both names, sign guards
  {
    const auto r = run_cli("example --name constant --n 3 --lambda -1 --rbar -1 --r-span 3");
    expect("example constant exit 0", r.exit_code == 0);
    const auto ls = lines_of(r.out);
    bool all_one = ls.size() > 2;
    for (std::size_t i = 0; i + 1 < ls.size(); ++i)
      if (nlohmann::json::parse(ls[i]).at("rho").get<double>() != 1.0) all_one = false;
    expect("example constant stream rho = 1", all_one);
    expect("example constant sign guard exits 2",
           run_cli("example --name constant --n 3 --lambda -1 --rbar 1").exit_code == 2);
    expect("example sphere-tip exit 0",
           run_cli("example --name sphere-tip --n 3 --lambda -1 --rbar 2 --r-span 5")
                   .exit_code == 0);
    expect("example sphere-tip sign guard exits 2",
           run_cli("example --name sphere-tip --n 3 --lambda -1 --rbar -2").exit_code == 2);
    expect("example unknown name exits 2",
           run_cli("example --name nonsense").exit_code == 2);
  }

  std::ostringstream note;
  if (!bad.empty()) {
    note << bad.size() << " failed: ";
    for (std::size_t i = 0; i < bad.size(); ++i)
      note << (i ? "; " : "") << bad[i];
  } else {
    note << "all end-to-end invocations behaved";
  }
  report(11, "CLI contract", bad.empty(), note.str());
}

} // namespace

int main() {
  criterion1();
  report_suite(2, "eq-consistency (difference quotients vs rho_third)",
               suites::suite_eq_consistency());
  report_suite(3, "R < lambda branch grid + exemplars", suites::suite_r_less_lambda());
  report_suite(4, "R > lambda branch grid + exemplars", suites::suite_r_greater_lambda());
  report_suite(5, "claim 1 falsification (rbar > 0)", suites::suite_claim1());
  report_suite(6, "claim 2 events", suites::suite_claim2());
  report_suite(7, "epsilon propositions", suites::suite_epsilon());
  report_suite(8, "curvature route equivalence", suites::suite_curvature_routes());
  report_suite(9, "scaling symmetry", suites::suite_scaling());
  criterion10();
  criterion11();

  if (g_failures) {
    std::printf("ACCEPTANCE: %d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("ACCEPTANCE: all 11 criteria passed\n");
  return 0;
}
