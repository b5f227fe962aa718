#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "yamabe/io.hpp"
#include "yamabe/scan.hpp"

using namespace yamabe;

TEST_CASE("sample lines round-trip bit-exactly") {
  const SolitonParams p(3, -1.5, -0.7);
  IntegrationOptions o;
  o.r_span = 3.0;
  o.max_output_dr = 0.05;
  const Trajectory t =
      integrate(p, SolitonState{0.0, 1.3, 0.21}, Direction::Both, o);
  for (const auto& s : t.samples) {
    const std::string line = io::sample_line(s, p.lambda);
    const Sample back = io::parse_sample_line(line);
    CHECK(back.r == s.r);
    CHECK(back.rho == s.rho);
    CHECK(back.drho == s.drho);
    CHECK(back.ddrho == s.ddrho);
    // re-serializing the parsed sample reproduces the exact same line
    CHECK(io::sample_line(back, p.lambda) == line);
  }
}

TEST_CASE("trajectory stream carries the summary") {
  const SolitonParams p(3, -1.0, -1.0);
  IntegrationOptions o;
  o.r_span = 2.0;
  const Trajectory t =
      integrate(p, SolitonState{0.0, 1.0, 0.0}, Direction::Both, o);
  std::ostringstream os;
  io::write_trajectory_stream(os, t);
  std::istringstream is(os.str());
  std::string line, last;
  std::size_t n_lines = 0;
  while (std::getline(is, line)) {
    last = line;
    ++n_lines;
  }
  CHECK(n_lines == t.samples.size() + 1);
  const auto j = nlohmann::json::parse(last);
  CHECK(j.at("termination_fwd") == "WindowEnd");
  CHECK(j.at("termination_bwd") == "WindowEnd");
  CHECK(j.at("events").is_array());
}

TEST_CASE("scan config parsing") {
  SECTION("well-formed config") {
    const auto cfg = io::parse_scan_config(R"({
      "n": [3, 4], "lambda": [-1.0], "rbar": [0.0, -1.0],
      "rho0": [1.0, 2.0], "drho0": [0.2],
      "opts": {"r_span": 30.0, "rtol": 1e-9},
      "format": "csv", "output_path": ""
    })");
    CHECK(cfg.grid_size() == 2 * 1 * 2 * 2 * 1);
    CHECK(cfg.opts.r_span == 30.0);
    CHECK(cfg.opts.rtol == 1e-9);
    CHECK(cfg.format == io::ScanFormat::Csv);
  }
  SECTION("empty grids rejected") {
    CHECK_THROWS_AS(io::parse_scan_config(R"({"n": [], "lambda": [-1], "rbar": [0],
                                              "rho0": [1], "drho0": [1]})"),
                    std::invalid_argument);
  }
  SECTION("tip scans demand rbar > 0") {
    CHECK_THROWS_AS(io::parse_scan_config(R"({"n": [3], "lambda": [-1], "rbar": [-1],
                                              "tip": true})"),
                    std::invalid_argument);
    const auto cfg = io::parse_scan_config(R"({"n": [3], "lambda": [-1], "rbar": [2],
                                              "tip": true})");
    CHECK(cfg.grid_size() == 1);
  }
  SECTION("malformed JSON rejected") {
    CHECK_THROWS_AS(io::parse_scan_config("{nope"), std::invalid_argument);
  }
}

TEST_CASE("scan runs deterministically and sorts by grid index") {
  const auto cfg = io::parse_scan_config(R"({
    "n": [3], "lambda": [-1.0], "rbar": [2.0],
    "rho0": [0.5, 1.0, 2.0], "drho0": [0.1, 0.5, 1.0, 2.0],
    "opts": {"r_span": 40.0}, "format": "jsonl"
  })");
  const auto records = io::run_scan(cfg);
  REQUIRE(records.size() == 12);
  for (std::size_t i = 0; i < records.size(); ++i)
    CHECK(records[i].grid_index == i);

  const auto summary = io::summarize(records);
  CHECK(summary.failures == 0);
  // positive fiber curvature: nothing survives as a global line
  CHECK(summary.branch_counts.count("LineRGreaterLambda") == 0);
  CHECK(summary.branch_counts.count("LineRLessLambda") == 0);

  // two runs give identical bytes apart from the timestamp header
  std::ostringstream a, b;
  io::write_scan_jsonl(a, cfg, records, summary);
  io::write_scan_jsonl(b, cfg, io::run_scan(cfg), summary);
  const auto strip_header = [](const std::string& s) {
    return s.substr(s.find('\n') + 1);
  };
  CHECK(strip_header(a.str()) == strip_header(b.str()));
}

TEST_CASE("csv output has the fixed header") {
  const auto cfg = io::parse_scan_config(R"({
    "n": [3], "lambda": [-1.0], "rbar": [-1.0],
    "rho0": [1.0], "drho0": [0.0],
    "opts": {"r_span": 10.0}, "format": "csv"
  })");
  const auto records = io::run_scan(cfg);
  std::ostringstream os;
  io::write_scan_csv(os, cfg, records, io::summarize(records));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("# ", 0) == 0); // timestamp comment
  std::getline(is, line);
  CHECK(line ==
        "grid_index,n,lambda,rbar,rho0,drho0,branch,asymptote_c,suite_pass,"
        "termination_fwd,termination_bwd");
  std::getline(is, line);
  CHECK(line.rfind("0,3,", 0) == 0);
  CHECK(line.find("Trivial") != std::string::npos);
}
