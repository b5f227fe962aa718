// yamabe-lab: integrate, classify and batch-verify warp-function trajectories
// of expanding gradient Yamabe solitons.
//
// Exit codes: 0 success, 1 check failure, 2 usage or config error,
// 3 integration failure (step underflow), 4 inconclusive classification.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "yamabe/classify.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/integrate.hpp"
#include "yamabe/io.hpp"
#include "yamabe/scan.hpp"
#include "yamabe/suites.hpp"

namespace {

using namespace yamabe;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIntegration = 3;
constexpr int kExitInconclusive = 4;

struct CommonArgs {
  int n = 3;
  double lambda = -1.0;
  double rbar = 0.0;
  double rho0 = 1.0;
  double drho0 = 0.0;
  bool tip = false;
  double r_span = 100.0;
  double rtol = 1e-10;
  double atol = 1e-12;
  double max_dr = 0.05;
  double converge_eps = 1e-8;
  double converge_window = 5.0;
  std::string direction = "both";
  std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_init = true) {
  cmd->add_option("--n", a.n, "manifold dimension (>= 3)");
  cmd->add_option("--lambda", a.lambda, "soliton constant (expanding: < 0)");
  cmd->add_option("--rbar", a.rbar, "fiber scalar curvature");
  if (with_init) {
    cmd->add_option("--rho0", a.rho0, "initial warp value");
    cmd->add_option("--drho0", a.drho0, "initial warp slope");
    cmd->add_flag("--tip", a.tip, "start from the smooth-tip expansion (rbar > 0)");
  }
  cmd->add_option("--r-span", a.r_span, "half-width of the integration window");
  cmd->add_option("--rtol", a.rtol, "relative tolerance");
  cmd->add_option("--atol", a.atol, "absolute tolerance");
  cmd->add_option("--max-dr", a.max_dr, "dense output spacing (0 = step endpoints)");
  cmd->add_option("--converge-eps", a.converge_eps, "asymptote detector threshold");
  cmd->add_option("--converge-window", a.converge_window, "asymptote detector window");
  cmd->add_option("--direction", a.direction, "forward | backward | both");
  cmd->add_option("--out", a.out_path, "write output to a file instead of stdout");
}

IntegrationOptions options_of(const CommonArgs& a) {
  IntegrationOptions o;
  o.rtol = a.rtol;
  o.atol = a.atol;
  o.r_span = a.r_span;
  o.max_output_dr = a.max_dr;
  o.converge_eps = a.converge_eps;
  o.converge_window = a.converge_window;
  o.validate();
  return o;
}

Direction direction_of(const std::string& d) {
  if (d == "forward") return Direction::Forward;
  if (d == "backward") return Direction::Backward;
  if (d == "both") return Direction::Both;
  throw CLI::ValidationError("--direction must be forward, backward or both");
}

std::ostream& open_out(const CommonArgs& a, std::unique_ptr<std::ofstream>& file) {
  if (a.out_path.empty() || a.out_path == "-") return std::cout;
  file = std::make_unique<std::ofstream>(a.out_path);
  if (!*file) throw std::runtime_error("cannot open output file: " + a.out_path);
  return *file;
}

Trajectory integrate_args(const CommonArgs& a) {
  const SolitonParams p = SolitonParams::permissive(a.n, a.lambda, a.rbar);
  const SolitonState init =
      a.tip ? sphere_tip_initialize(p) : SolitonState{0.0, a.rho0, a.drho0};
  return integrate(p, init, direction_of(a.direction), options_of(a));
}

int exit_for_integration(const Trajectory& t) {
  if (t.termination_fwd == Termination::StepUnderflow ||
      t.termination_bwd == Termination::StepUnderflow)
    return kExitIntegration;
  return kExitOk;
}

int cmd_integrate(const CommonArgs& a) {
  const Trajectory t = integrate_args(a);
  std::unique_ptr<std::ofstream> file;
  io::write_trajectory_stream(open_out(a, file), t);
  return exit_for_integration(t);
}

int cmd_classify(const CommonArgs& a, double tol) {
  CommonArgs b = a;
  b.direction = "both";
  const Trajectory t = integrate_args(b);
  if (exit_for_integration(t) != kExitOk) return kExitIntegration;
  const Classification cls = classify(t, tol > 0 ? tol : 1e-6);

  nlohmann::json j = io::classification_json(cls);
  bool checks_pass = true;
  if (cls.branch == Branch::LineRLessLambda) {
    const auto rep = verify_r_less_lambda(t, t.params, 1e-3);
    j["report"] = io::report_json(rep);
    checks_pass = rep.passed();
  } else if (cls.branch == Branch::LineRGreaterLambda) {
    const auto rep = verify_r_greater_lambda(t, t.params, 1e-3);
    j["report"] = io::report_json(rep);
    checks_pass = rep.passed();
  }
  std::unique_ptr<std::ofstream> file;
  open_out(a, file) << j.dump(2) << "\n";
  if (cls.branch == Branch::Inconclusive) return kExitInconclusive;
  return checks_pass ? kExitOk : kExitCheckFailed;
}

int cmd_scan(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "scan: cannot open config " << config_path << "\n";
    return kExitUsage;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  io::ScanConfig cfg;
  try {
    cfg = io::parse_scan_config(ss.str());
  } catch (const std::exception& e) {
    std::cerr << "scan: " << e.what() << "\n";
    return kExitUsage;
  }
  std::cerr << "scan: grid size " << cfg.grid_size() << "\n";
  const auto records = io::run_scan(cfg);
  const auto summary = io::summarize(records);

  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;
  if (!cfg.output_path.empty() && cfg.output_path != "-") {
    file = std::make_unique<std::ofstream>(cfg.output_path);
    if (!*file) {
      std::cerr << "scan: cannot open output " << cfg.output_path << "\n";
      return kExitUsage;
    }
    os = file.get();
  }
  if (cfg.format == io::ScanFormat::Jsonl)
    io::write_scan_jsonl(*os, cfg, records, summary);
  else
    io::write_scan_csv(*os, cfg, records, summary);

  nlohmann::json js{{"grid_size", summary.grid_size},
                    {"branch_counts", summary.branch_counts},
                    {"suites_run", summary.suites_run},
                    {"suites_passed", summary.suites_passed},
                    {"failures", summary.failures}};
  std::cerr << "scan: " << js.dump() << "\n";
  return summary.all_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_verify(const std::string& suite, const std::string& out_path) {
  VerificationReport rep;
  try {
    rep = suites::run_suite(suite);
  } catch (const std::invalid_argument& e) {
    std::cerr << "verify: " << e.what() << "\n";
    return kExitUsage;
  }
  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &std::cout;
  if (!out_path.empty() && out_path != "-") {
    file = std::make_unique<std::ofstream>(out_path);
    os = file.get();
  }
  *os << io::report_json(rep).dump(2) << "\n";
  return rep.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_example(const std::string& name, const CommonArgs& a) {
  std::unique_ptr<std::ofstream> file;
  if (name == "constant") {
    if (!(a.lambda < 0.0) || !(a.rbar < 0.0)) {
      std::cerr << "example constant: requires --lambda < 0 and --rbar < 0\n";
      return kExitUsage;
    }
    const Trajectory t =
        make_constant_example(a.n, a.lambda, a.rbar, a.r_span, std::max(a.max_dr, 1e-3));
    io::write_trajectory_stream(open_out(a, file), t);
    return kExitOk;
  }
  if (name == "sphere-tip") {
    if (!(a.rbar > 0.0)) {
      std::cerr << "example sphere-tip: requires --rbar > 0\n";
      return kExitUsage;
    }
    CommonArgs b = a;
    b.tip = true;
    const Trajectory t = integrate_args(b);
    io::write_trajectory_stream(open_out(a, file), t);
    return exit_for_integration(t);
  }
  std::cerr << "example: unknown --name " << name << " (constant | sphere-tip)\n";
  return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for the expanding gradient Yamabe soliton warp equation"};
  app.require_subcommand(1);

  CommonArgs ia;
  auto* integrate_cmd = app.add_subcommand("integrate", "integrate one trajectory and stream samples");
  add_common(integrate_cmd, ia);

  CommonArgs ca;
  double tol = 1e-6;
  auto* classify_cmd = app.add_subcommand("classify", "integrate and classify one trajectory");
  add_common(classify_cmd, ca);
  classify_cmd->add_option("--tol", tol, "classification tolerance");

  std::string config_path;
  auto* scan_cmd = app.add_subcommand("scan", "run a parameter scan from a JSON config");
  scan_cmd->add_option("--config", config_path, "scan configuration file")->required();

  std::string suite_name, verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "run a named verification suite");
  verify_cmd->add_option("--suite", suite_name, "suite name")->required();
  verify_cmd->add_option("--out", verify_out, "write the JSON report to a file");

  CommonArgs ea;
  std::string example_name;
  auto* example_cmd = app.add_subcommand("example", "emit a closed-form or shooting example");
  example_cmd->add_option("--name", example_name, "constant | sphere-tip")->required();
  add_common(example_cmd, ea, /*with_init=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e); // prints the message
    return kExitUsage;
  }

  try {
    if (integrate_cmd->parsed()) return cmd_integrate(ia);
    if (classify_cmd->parsed()) return cmd_classify(ca, tol);
    if (scan_cmd->parsed()) return cmd_scan(config_path);
    if (verify_cmd->parsed()) return cmd_verify(suite_name, verify_out);
    if (example_cmd->parsed()) return cmd_example(example_name, ea);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIntegration;
  }
  return kExitUsage;
}
