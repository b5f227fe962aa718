#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "yamabe/classify.hpp"
#include "yamabe/io.hpp"

// Batch execution of a scan configuration.  Grid points run concurrently;
// results land in preallocated slots and are emitted in grid order, so two
// runs of the same config produce identical output apart from the timestamp
// header line.

namespace yamabe {
namespace io {

struct RunRecord {
  std::size_t grid_index = 0;
  SolitonParams params;
  SolitonState init;
  bool tip = false;
  bool failed = false;       // worker error sentinel
  std::string error;
  Classification cls;
  std::string suite;         // applicable verification suite, if any
  std::optional<bool> suite_pass;
  Termination termination_fwd = Termination::NotRun;
  Termination termination_bwd = Termination::NotRun;
  Sample terminal_fwd, terminal_bwd;
};

struct ScanSummary {
  std::size_t grid_size = 0;
  std::map<std::string, std::size_t> branch_counts;
  std::size_t suites_run = 0, suites_passed = 0, failures = 0;

  bool all_passed() const {
    return failures == 0 && suites_run == suites_passed;
  }
};

namespace detail_scan {

inline RunRecord run_point(std::size_t idx, const SolitonParams& p,
                           const SolitonState& init, bool tip,
                           const IntegrationOptions& opts) {
  RunRecord rec;
  rec.grid_index = idx;
  rec.params = p;
  rec.init = init;
  rec.tip = tip;
  try {
    const Trajectory traj = integrate(p, init, Direction::Both, opts);
    rec.cls = classify(traj);
    rec.termination_fwd = traj.termination_fwd;
    rec.termination_bwd = traj.termination_bwd;
    rec.terminal_fwd = traj.terminal_forward();
    rec.terminal_bwd = traj.terminal_backward();
    if (rec.cls.branch == Branch::LineRLessLambda) {
      rec.suite = "r-less-lambda";
      rec.suite_pass = verify_r_less_lambda(traj, p, 1e-3).passed();
    } else if (rec.cls.branch == Branch::LineRGreaterLambda) {
      rec.suite = "r-greater-lambda";
      rec.suite_pass = verify_r_greater_lambda(traj, p, 1e-3).passed();
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  return rec;
}

} // namespace detail_scan

inline std::vector<RunRecord> run_scan(const ScanConfig& cfg) {
  struct Job {
    SolitonParams p;
    SolitonState init;
    bool tip;
  };
  std::vector<Job> jobs;
  for (int n : cfg.n)
    for (double lam : cfg.lambda)
      for (double rb : cfg.rbar) {
        const SolitonParams p = SolitonParams::permissive(n, lam, rb);
        if (cfg.tip) {
          jobs.push_back(Job{p, sphere_tip_initialize(p), true});
        } else {
          for (double rho0 : cfg.rho0)
            for (double drho0 : cfg.drho0)
              jobs.push_back(Job{p, SolitonState{0.0, rho0, drho0}, false});
        }
      }

  std::vector<RunRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(jobs.size())));
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      records[i] =
          detail_scan::run_point(i, jobs[i].p, jobs[i].init, jobs[i].tip, cfg.opts);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return records;
}

inline ScanSummary summarize(const std::vector<RunRecord>& records) {
  ScanSummary sum;
  sum.grid_size = records.size();
  for (const auto& r : records) {
    if (r.failed) {
      ++sum.failures;
      continue;
    }
    ++sum.branch_counts[to_string(r.cls.branch)];
    if (r.suite_pass) {
      ++sum.suites_run;
      if (*r.suite_pass) ++sum.suites_passed;
    }
  }
  return sum;
}

inline std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_scan_jsonl(std::ostream& os, const ScanConfig& cfg,
                             const std::vector<RunRecord>& records,
                             const ScanSummary& sum) {
  os << "{\"type\":\"scan_header\",\"timestamp\":\"" << iso8601_now()
     << "\",\"grid_size\":" << cfg.grid_size() << "}\n";
  for (const auto& r : records) {
    if (r.failed) {
      nlohmann::json j{{"type", "record"},
                       {"grid_index", r.grid_index},
                       {"failed", true},
                       {"error", r.error}};
      os << j.dump() << "\n";
      continue;
    }
    std::string line = "{\"type\":\"record\",\"grid_index\":" +
                       std::to_string(r.grid_index) +
                       ",\"n\":" + std::to_string(r.params.n) +
                       ",\"lambda\":" + fmt17(r.params.lambda) +
                       ",\"rbar\":" + fmt17(r.params.rbar) +
                       ",\"rho0\":" + fmt17(r.init.rho) +
                       ",\"drho0\":" + fmt17(r.init.drho) +
                       ",\"tip\":" + (r.tip ? "true" : "false") +
                       ",\"branch\":\"" + to_string(r.cls.branch) + "\"";
    line += ",\"asymptote_c\":";
    line += r.cls.asymptote_c ? fmt17(*r.cls.asymptote_c) : "null";
    line += ",\"suite\":\"" + r.suite + "\",\"suite_pass\":";
    line += r.suite_pass ? (*r.suite_pass ? "true" : "false") : "null";
    line += std::string(",\"termination_fwd\":\"") + to_string(r.termination_fwd) +
            "\",\"termination_bwd\":\"" + to_string(r.termination_bwd) + "\"";
    auto state = [](const Sample& s) {
      return "{\"r\":" + fmt17(s.r) + ",\"rho\":" + fmt17(s.rho) +
             ",\"drho\":" + fmt17(s.drho) + "}";
    };
    line += ",\"terminal_fwd\":" + state(r.terminal_fwd);
    line += ",\"terminal_bwd\":" + state(r.terminal_bwd);
    line += "}";
    os << line << "\n";
  }
  nlohmann::json js{{"type", "summary"},
                    {"grid_size", sum.grid_size},
                    {"branch_counts", sum.branch_counts},
                    {"suites_run", sum.suites_run},
                    {"suites_passed", sum.suites_passed},
                    {"failures", sum.failures}};
  os << js.dump() << "\n";
}

inline void write_scan_csv(std::ostream& os, const ScanConfig& cfg,
                           const std::vector<RunRecord>& records,
                           const ScanSummary& sum) {
  (void)cfg;
  (void)sum;
  os << "# " << iso8601_now() << "\n";
  os << "grid_index,n,lambda,rbar,rho0,drho0,branch,asymptote_c,suite_pass,"
        "termination_fwd,termination_bwd\n";
  for (const auto& r : records) {
    if (r.failed) {
      os << r.grid_index << ",,,,,,FAILED,,na,,\n";
      continue;
    }
    os << r.grid_index << "," << r.params.n << "," << fmt17(r.params.lambda)
       << "," << fmt17(r.params.rbar) << "," << fmt17(r.init.rho) << ","
       << fmt17(r.init.drho) << "," << to_string(r.cls.branch) << ","
       << (r.cls.asymptote_c ? fmt17(*r.cls.asymptote_c) : "") << ","
       << (r.suite_pass ? (*r.suite_pass ? "pass" : "fail") : "na") << ","
       << to_string(r.termination_fwd) << "," << to_string(r.termination_bwd)
       << "\n";
  }
}

} // namespace io
} // namespace yamabe
