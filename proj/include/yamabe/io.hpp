#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "yamabe/classify.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/integrate.hpp"

// Serialization of trajectories, classifications and reports.
//
// Trajectory streams are JSONL: one object per sample, then one summary
// object.  Numbers are printed with 17 significant digits so a serialized
// stream re-parses to bit-identical doubles.

namespace yamabe {
namespace io {

inline std::string fmt17(double x) {
  if (!std::isfinite(x)) return "null"; // JSON has no NaN/Inf
  if (x == 0.0) x = 0.0;                // a negative zero would not re-parse
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string sample_line(const Sample& s, double lambda) {
  std::string out = "{\"r\":" + fmt17(s.r) + ",\"rho\":" + fmt17(s.rho) +
                    ",\"drho\":" + fmt17(s.drho) + ",\"ddrho\":" + fmt17(s.ddrho) +
                    ",\"R\":" + fmt17(scalar_curvature_direct(s.drho, lambda)) + "}";
  return out;
}

inline Sample parse_sample_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  auto num = [&](const char* key) {
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : v.get<double>();
  };
  Sample s;
  s.r = num("r");
  s.rho = num("rho");
  s.drho = num("drho");
  s.ddrho = num("ddrho");
  return s;
}

inline std::string summary_line(const Trajectory& t) {
  std::string out = "{\"events\":[";
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    if (i) out += ",";
    out += std::string("{\"kind\":\"") + to_string(t.events[i].kind) +
           "\",\"r\":" + fmt17(t.events[i].r) + "}";
  }
  out += std::string("],\"termination_fwd\":\"") + to_string(t.termination_fwd) +
         "\",\"termination_bwd\":\"" + to_string(t.termination_bwd) + "\"}";
  return out;
}

inline void write_trajectory_stream(std::ostream& os, const Trajectory& t) {
  for (const auto& s : t.samples) os << sample_line(s, t.params.lambda) << "\n";
  os << summary_line(t) << "\n";
}

inline nlohmann::json report_json(const VerificationReport& rep) {
  nlohmann::json j;
  j["suite"] = rep.suite;
  j["passed"] = rep.passed();
  auto& arr = j["checks"] = nlohmann::json::array();
  for (const auto& c : rep.checks)
    arr.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"worst_residual", c.worst_residual},
                   {"at_r", c.at_r}});
  return j;
}

inline nlohmann::json classification_json(const Classification& cls) {
  nlohmann::json j;
  j["branch"] = to_string(cls.branch);
  if (cls.asymptote_c)
    j["asymptote_c"] = *cls.asymptote_c;
  else
    j["asymptote_c"] = nullptr;
  j["details"] = cls.details;
  return j;
}

// --- scan configuration ----------------------------------------------------

enum class ScanFormat { Jsonl, Csv };

struct ScanConfig {
  std::vector<int> n;
  std::vector<double> lambda;
  std::vector<double> rbar;
  std::vector<double> rho0;
  std::vector<double> drho0;
  bool tip = false;
  IntegrationOptions opts;
  ScanFormat format = ScanFormat::Jsonl;
  std::string output_path; // empty = stdout

  std::size_t grid_size() const {
    const std::size_t inits = tip ? 1 : rho0.size() * drho0.size();
    return n.size() * lambda.size() * rbar.size() * inits;
  }
};

inline ScanConfig parse_scan_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scan config is not valid JSON: ") + e.what());
  }
  ScanConfig cfg;
  try {
    cfg.n = j.at("n").get<std::vector<int>>();
    cfg.lambda = j.at("lambda").get<std::vector<double>>();
    cfg.rbar = j.at("rbar").get<std::vector<double>>();
    cfg.tip = j.value("tip", false);
    if (!cfg.tip) {
      cfg.rho0 = j.at("rho0").get<std::vector<double>>();
      cfg.drho0 = j.at("drho0").get<std::vector<double>>();
    } else {
      cfg.rho0 = j.value("rho0", std::vector<double>{});
      cfg.drho0 = j.value("drho0", std::vector<double>{});
    }
    if (j.contains("opts")) {
      const auto& o = j["opts"];
      cfg.opts.rtol = o.value("rtol", cfg.opts.rtol);
      cfg.opts.atol = o.value("atol", cfg.opts.atol);
      cfg.opts.r_span = o.value("r_span", cfg.opts.r_span);
      cfg.opts.h_init = o.value("h_init", cfg.opts.h_init);
      cfg.opts.h_max = o.value("h_max", cfg.opts.h_max);
      cfg.opts.blowup_threshold = o.value("blowup_threshold", cfg.opts.blowup_threshold);
      cfg.opts.converge_eps = o.value("converge_eps", cfg.opts.converge_eps);
      cfg.opts.converge_window = o.value("converge_window", cfg.opts.converge_window);
      cfg.opts.root_tol = o.value("root_tol", cfg.opts.root_tol);
      cfg.opts.rho_zero_tol = o.value("rho_zero_tol", cfg.opts.rho_zero_tol);
      cfg.opts.max_output_dr = o.value("max_output_dr", cfg.opts.max_output_dr);
    }
    const std::string fmt = j.value("format", std::string("jsonl"));
    if (fmt == "jsonl")
      cfg.format = ScanFormat::Jsonl;
    else if (fmt == "csv")
      cfg.format = ScanFormat::Csv;
    else
      throw std::invalid_argument("scan config: format must be \"jsonl\" or \"csv\"");
    cfg.output_path = j.value("output_path", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scan config: ") + e.what());
  }
  cfg.opts.validate();
  if (cfg.n.empty() || cfg.lambda.empty() || cfg.rbar.empty())
    throw std::invalid_argument("scan config: n, lambda and rbar grids must be nonempty");
  if (!cfg.tip && (cfg.rho0.empty() || cfg.drho0.empty()))
    throw std::invalid_argument("scan config: rho0 and drho0 grids must be nonempty (or set tip)");
  for (int n : cfg.n)
    if (n < 3) throw std::invalid_argument("scan config: dimensions must be >= 3");
  if (cfg.tip)
    for (double rb : cfg.rbar)
      if (!(rb > 0.0))
        throw std::invalid_argument("scan config: tip starts require rbar > 0");
  return cfg;
}

} // namespace io
} // namespace yamabe
