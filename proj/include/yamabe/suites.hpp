#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/classify.hpp"
#include "yamabe/geometry.hpp"
#include "yamabe/integrate.hpp"
#include "yamabe/soliton_ode.hpp"

// Curated verification suites.  Each suite runs a fixed parameter grid (and,
// for the two line branches, shooting-built exemplar trajectories) and
// reports named pass/fail checks.
//
// Why shooting: the constant-warp state (sqrt(rbar/lambda), 0) is a saddle of
// the phase flow, so the line branches of the taxonomy are realized exactly
// on its stable/unstable manifolds.  Off-manifold initial data veer off or
// collapse after approaching the saddle (they are honest NotGlobal /
// Inconclusive outcomes, and the grids below report them as such); the branch
// exemplars are therefore constructed by bisecting the initial slope onto the
// manifold until the convergence detector fires.

namespace yamabe {
namespace suites {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "eq-consistency", "r-less-lambda", "r-greater-lambda", "claim1",
      "claim2",         "epsilon",       "scaling",          "curvature-routes"};
  return names;
}

namespace detail_s {

inline IntegrationOptions grid_options() {
  IntegrationOptions o;
  o.rtol = 1e-10;
  o.atol = 1e-12;
  o.r_span = 60.0;
  o.h_max = 0.1;
  o.converge_eps = 1e-4;
  o.converge_window = 5.0;
  return o;
}

inline IntegrationOptions exemplar_options(double conv_eps, double window) {
  IntegrationOptions o;
  o.rtol = 1e-12;
  o.atol = 1e-14;
  o.r_span = 60.0;
  o.h_max = 0.1;
  o.converge_eps = conv_eps;
  o.converge_window = window;
  o.max_output_dr = 0.05;
  return o;
}

// Shooting: outcome of one trial slope.  +1 = veered across the branch's
// sign condition, -1 = collapsed (or ran past -lambda), 0 = settled.
inline int outcome_less(const SolitonParams& p, double rho0, double drho0,
                        const IntegrationOptions& opts) {
  const Trajectory t =
      integrate(p, SolitonState{0.0, rho0, drho0}, Direction::Forward, opts);
  for (const auto& s : t.samples)
    if (s.drho > 1e-9) return +1;
  if (t.termination_fwd == Termination::RhoZero ||
      t.termination_fwd == Termination::Blowup ||
      t.termination_fwd == Termination::StepUnderflow)
    return -1;
  return 0;
}

inline int outcome_greater(const SolitonParams& p, double rho0, double drho0,
                           const IntegrationOptions& opts) {
  const Trajectory t =
      integrate(p, SolitonState{0.0, rho0, drho0}, Direction::Backward, opts);
  // scan in integration order: samples are ascending in r, backward time
  // runs right to left
  for (auto it = t.samples.rbegin(); it != t.samples.rend(); ++it) {
    if (it->drho < -1e-9) return +1;            // veered down
    if (it->drho > -p.lambda + 1e-9) return -1; // ran past -lambda
  }
  if (t.termination_bwd == Termination::RhoZero ||
      t.termination_bwd == Termination::Blowup ||
      t.termination_bwd == Termination::StepUnderflow)
    return -1;
  return 0;
}

// Bisect the initial slope between a collapsing and a veering trial until the
// settled outcome appears, then integrate both directions.
inline Trajectory shoot_exemplar(const SolitonParams& p, double rho0,
                                 bool less_branch,
                                 const IntegrationOptions& opts) {
  auto outcome = [&](double d) {
    return less_branch ? outcome_less(p, rho0, d, opts)
                       : outcome_greater(p, rho0, d, opts);
  };
  double crash = less_branch ? -4.0 : -p.lambda * (1.0 - 1e-3);
  double veer = less_branch ? -1e-3 : 1e-3;
  if (outcome(crash) != -1 || outcome(veer) != +1)
    throw std::runtime_error("shoot_exemplar: bracket does not straddle the manifold");
  double mid = 0.5 * (crash + veer);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (crash + veer);
    if (mid == crash || mid == veer) break;
    const int o = outcome(mid);
    if (o == 0) break;
    (o < 0 ? crash : veer) = mid;
  }
  return integrate(p, SolitonState{0.0, rho0, mid}, Direction::Both, opts);
}

struct ExemplarCase {
  int n;
  double lambda, rbar, rho0, conv_eps, conv_window;
};

// rbar = 0 cases ride a degenerate separatrix whose closest approach is
// limited by round-off amplified like (rho0/rho)^n, hence the smaller rho0
// and wider convergence bands there.
inline std::vector<ExemplarCase> less_exemplars() {
  std::vector<ExemplarCase> v;
  for (int n : {3, 4, 5})
    for (double lam : {-1.0, -2.0}) {
      v.push_back({n, lam, -1.0, 2.0, 1e-5, 3.0});
      v.push_back({n, lam, 0.0, n >= 5 ? 0.4 : 0.5, 5e-4, 3.0});
    }
  return v;
}

inline std::vector<ExemplarCase> greater_exemplars() {
  return {
      {3, -1.0, -1.0, 2.0, 1e-5, 3.0},
      {3, -1.0, 0.0, 0.5, 1e-3, 3.0},
      {4, -1.0, -1.0, 2.0, 1e-5, 3.0},
      {4, -1.0, 0.0, 0.5, 1e-3, 3.0},
  };
}

struct GridPoint {
  SolitonParams params;
  SolitonState init;
  Trajectory traj;
  Classification cls;
};

inline std::vector<GridPoint> run_less_grid() {
  std::vector<GridPoint> out;
  const IntegrationOptions opts = grid_options();
  for (int n : {3, 4, 5})
    for (double lam : {-1.0, -2.0})
      for (double rbar : {0.0, -1.0})
        for (double rho0 : {2.0, 3.0})
          for (double drho0 : {-0.2, -0.5}) {
            GridPoint g;
            g.params = SolitonParams(n, lam, rbar);
            g.init = SolitonState{0.0, rho0, drho0};
            g.traj = integrate(g.params, g.init, Direction::Both, opts);
            g.cls = classify(g.traj);
            out.push_back(std::move(g));
          }
  return out;
}

inline std::vector<GridPoint> run_greater_grid() {
  std::vector<GridPoint> out;
  const IntegrationOptions opts = grid_options();
  for (int n : {3, 4})
    for (double rbar : {0.0, -1.0})
      for (double rho0 : {1.0, 2.0})
        for (double drho0 : {0.2, 0.5, 0.8}) {
          GridPoint g;
          g.params = SolitonParams(n, -1.0, rbar);
          g.init = SolitonState{0.0, rho0, drho0};
          g.traj = integrate(g.params, g.init, Direction::Both, opts);
          g.cls = classify(g.traj);
          out.push_back(std::move(g));
        }
  return out;
}

inline std::string point_name(const GridPoint& g, std::size_t i) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "grid[%zu] n=%d lambda=%g rbar=%g rho0=%g drho0=%g -> %s",
                i, g.params.n, g.params.lambda, g.params.rbar, g.init.rho,
                g.init.drho, to_string(g.cls.branch));
  return buf;
}

// Shared skeleton of the two line-branch suites.
inline VerificationReport line_branch_suite(bool less) {
  VerificationReport rep;
  rep.suite = less ? "r-less-lambda" : "r-greater-lambda";
  const Branch target = less ? Branch::LineRLessLambda : Branch::LineRGreaterLambda;
  const Branch opposite = less ? Branch::LineRGreaterLambda : Branch::LineRLessLambda;

  auto grid = less ? run_less_grid() : run_greater_grid();
  std::size_t specimens = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& g = grid[i];
    bool ok;
    double worst = 0.0;
    if (g.cls.branch == target) {
      const auto r = less ? verify_r_less_lambda(g.traj, g.params, 1e-3)
                          : verify_r_greater_lambda(g.traj, g.params, 1e-3);
      ok = r.passed();
      for (const auto& c : r.checks) worst = std::max(worst, std::fabs(c.worst_residual));
      ++specimens;
    } else {
      // off-manifold data legitimately veer or collapse (saddle structure);
      // anything landing in the opposite branch would be a real error
      ok = g.cls.branch != opposite && g.cls.branch != Branch::Trivial &&
           g.cls.branch != Branch::RotationallySymmetricHalfLine;
    }
    rep.add(point_name(g, i), ok, worst, g.init.rho);
  }

  const auto cases = less ? less_exemplars() : greater_exemplars();
  for (const auto& c : cases) {
    const SolitonParams p(c.n, c.lambda, c.rbar);
    const auto opts = exemplar_options(c.conv_eps, c.conv_window);
    char name[160];
    std::snprintf(name, sizeof(name), "exemplar n=%d lambda=%g rbar=%g rho0=%g",
                  c.n, c.lambda, c.rbar, c.rho0);
    try {
      const Trajectory t = shoot_exemplar(p, c.rho0, less, opts);
      const Classification cls = classify(t);
      if (cls.branch != target) {
        rep.add(std::string(name) + " -> " + to_string(cls.branch), false, 0.0, 0.0);
        continue;
      }
      ++specimens;
      const auto r = less ? verify_r_less_lambda(t, p, 1e-3)
                          : verify_r_greater_lambda(t, p, 1e-3);
      double worst = 0.0;
      for (const auto& ck : r.checks) worst = std::max(worst, std::fabs(ck.worst_residual));
      rep.add(std::string(name) + (r.passed() ? " verified" : " FAILED checks"),
              r.passed(), worst, c.rho0);
    } catch (const std::exception& e) {
      rep.add(std::string(name) + " threw: " + e.what(), false, 0.0, 0.0);
    }
  }
  rep.add("at_least_one_specimen", specimens > 0,
          static_cast<double>(specimens), 0.0);
  return rep;
}

} // namespace detail_s

inline VerificationReport suite_r_less_lambda() {
  return detail_s::line_branch_suite(true);
}

inline VerificationReport suite_r_greater_lambda() {
  return detail_s::line_branch_suite(false);
}

inline VerificationReport suite_claim1() {
  SolitonParams p(3, -1.0, 2.0);
  std::vector<std::pair<double, double>> grid;
  for (double rho0 : {0.5, 1.0, 2.0})
    for (double drho0 : {0.1, 0.5, 1.0, 2.0}) grid.emplace_back(rho0, drho0);
  IntegrationOptions opts;
  opts.r_span = 100.0;
  return falsify_claim1(p, grid, opts, 800.0);
}

inline VerificationReport suite_claim2() {
  VerificationReport rep;
  rep.suite = "claim2";
  std::size_t n_events = 0;
  auto scan = [&](const SolitonParams& p, const Trajectory& t,
                  const std::string& tag) {
    for (const auto& ev : t.events) {
      if (ev.kind != EventKind::DDRhoZero) continue;
      if (!(ev.drho > 1e-9)) continue; // claim applies on the R > lambda side
      const Claim2Check c = check_claim2_event(p, ev);
      ++n_events;
      char name[200];
      std::snprintf(name, sizeof(name),
                    "%s ddrho=0 at r=%.6g: dddrho=%.6g rho=%.6g ident_err=%.2e",
                    tag.c_str(), ev.r, c.dddrho, ev.rho, c.root_identity_rel_err);
      rep.add(name, c.dddrho_positive && c.rho_above_sqrt && c.root_identity_ok,
              c.root_identity_rel_err, ev.r);
    }
  };
  auto grid = detail_s::run_greater_grid();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    char tag[64];
    std::snprintf(tag, sizeof(tag), "grid[%zu]", j);
    scan(grid[j].params, grid[j].traj, tag);
  }
  for (const auto& c : detail_s::greater_exemplars()) {
    const SolitonParams p(c.n, c.lambda, c.rbar);
    try {
      const Trajectory t = detail_s::shoot_exemplar(
          p, c.rho0, false, detail_s::exemplar_options(c.conv_eps, c.conv_window));
      char tag[64];
      std::snprintf(tag, sizeof(tag), "exemplar n=%d rbar=%g", c.n, c.rbar);
      scan(p, t, tag);
    } catch (const std::exception&) {
      // exemplar failures are reported by the r-greater-lambda suite
    }
  }
  rep.add("at_least_one_event", n_events > 0, static_cast<double>(n_events), 0.0);
  return rep;
}

inline VerificationReport suite_epsilon() {
  VerificationReport rep;
  rep.suite = "epsilon";
  const double eps = 0.1;
  IntegrationOptions opts = detail_s::grid_options();

  struct Case {
    SolitonParams p;
    SolitonState init;
    const char* tag;
  };
  std::vector<Case> cases;
  cases.push_back({SolitonParams(3, -1.0, 0.0), SolitonState{0.0, 1.0, -0.5},
                   "collapse rbar=0"});
  cases.push_back({SolitonParams(3, -1.0, -1.0), SolitonState{0.0, 1.0, -2.0},
                   "collapse rbar=-1"});
  {
    SolitonParams p(3, -1.0, 2.0);
    cases.push_back({p, sphere_tip_initialize(p), "tip rbar=2"});
  }
  {
    SolitonParams p(3, -1.0, 3.0);
    cases.push_back({p, sphere_tip_initialize(p), "tip rbar=3"});
  }
  cases.push_back({SolitonParams(3, -1.0, -1.0), SolitonState{0.0, 1.0, 0.0},
                   "constant"});

  std::size_t nonvac_fwd = 0, nonvac_bwd = 0;
  for (const auto& c : cases) {
    const Trajectory t = integrate(c.p, c.init, Direction::Both, opts);
    const auto r = epsilon_propositions_check(c.p, t, eps);
    for (const auto& ck : r.checks) {
      rep.add(std::string(c.tag) + ": " + ck.name, ck.passed, ck.worst_residual,
              ck.at_r);
      if (ck.passed && ck.name.find("vacuous") == std::string::npos) {
        if (ck.name.rfind("forward", 0) == 0) ++nonvac_fwd;
        if (ck.name.rfind("backward", 0) == 0) ++nonvac_bwd;
      }
    }
  }
  rep.add("nonvacuous_forward_case", nonvac_fwd > 0, static_cast<double>(nonvac_fwd), 0.0);
  rep.add("nonvacuous_backward_case", nonvac_bwd > 0, static_cast<double>(nonvac_bwd), 0.0);
  return rep;
}

inline VerificationReport suite_scaling() {
  VerificationReport rep;
  rep.suite = "scaling";

  // residual covariance on random admissible states
  std::mt19937 rng(20240517u);
  std::uniform_real_distribution<double> rho_d(0.3, 3.0), drho_d(-2.0, 2.0),
      lam_d(-2.0, -0.5), rbar_d(-2.0, 2.0);
  std::uniform_int_distribution<int> n_d(3, 5);
  double worst_rel = 0.0;
  for (int i = 0; i < 200; ++i) {
    const SolitonParams p = SolitonParams::permissive(n_d(rng), lam_d(rng), rbar_d(rng));
    const SolitonState s{0.0, rho_d(rng), drho_d(rng)};
    const double dd = rho_second(p, s.rho, s.drho);
    for (double b : {0.5, 2.0}) {
      const auto [pi, si] = scale_transform(p, s, b);
      const double ddi = b * b * b * dd;
      const OdeResidual r = eq1_residual(pi, si.rho, si.drho, ddi);
      worst_rel = std::max(worst_rel, std::fabs(r.eq1_res) / r.scale);
    }
  }
  rep.add("zero_residual_preserved", worst_rel <= 1e-10, worst_rel, 0.0);

  // branch preservation on one representative per branch; the integration
  // window and detector thresholds transform covariantly with the states
  // (r -> r/b, rho' -> b^2 rho'), so the image run is the scaled experiment
  struct Rep {
    const char* tag;
    IntegrationOptions opts;
    SolitonParams p;
    SolitonState s0;
    Branch want;
  };
  auto scaled_options = [](const IntegrationOptions& o, double b) {
    IntegrationOptions s = o;
    s.r_span = o.r_span / b;
    s.h_init = o.h_init / b;
    s.h_max = o.h_max / b;
    s.converge_eps = o.converge_eps * b * b;
    s.converge_window = o.converge_window / b;
    s.rho_zero_tol = o.rho_zero_tol * b;
    s.atol = o.atol * b * b;
    if (o.max_output_dr > 0.0) s.max_output_dr = o.max_output_dr / b;
    return s;
  };

  std::vector<Rep> reps;
  reps.push_back({"trivial", detail_s::grid_options(), SolitonParams(3, -1.0, -1.0),
                  SolitonState{0.0, 1.0, 0.0}, Branch::Trivial});
  {
    SolitonParams p(3, -1.0, 2.0);
    reps.push_back({"half-line", detail_s::grid_options(), p,
                    sphere_tip_initialize(p), Branch::RotationallySymmetricHalfLine});
  }
  {
    // manifold exemplars: reuse the shot initial slope for both branches
    const auto opts = detail_s::exemplar_options(1e-5, 3.0);
    SolitonParams p(3, -1.0, -1.0);
    const Trajectory less = detail_s::shoot_exemplar(p, 2.0, true, opts);
    const Trajectory greater = detail_s::shoot_exemplar(p, 2.0, false, opts);
    reps.push_back({"line-r-less", opts, p, less.initial, Branch::LineRLessLambda});
    reps.push_back({"line-r-greater", opts, p, greater.initial,
                    Branch::LineRGreaterLambda});
  }

  for (const auto& r : reps) {
    const Classification src =
        classify(integrate(r.p, r.s0, Direction::Both, r.opts));
    bool ok = src.branch == r.want;
    std::string note;
    for (double b : {0.5, 2.0}) {
      const auto [pi, si] = scale_transform(r.p, r.s0, b);
      const Classification img =
          classify(integrate(pi, si, Direction::Both, scaled_options(r.opts, b)));
      if (img.branch != src.branch) {
        ok = false;
        note = std::string(" image(") + std::to_string(b) +
               ") -> " + to_string(img.branch);
      }
    }
    rep.add(std::string("branch_preserved: ") + r.tag + " (" +
                to_string(src.branch) + ")" + note,
            ok, 0.0, 0.0);
  }
  return rep;
}

inline VerificationReport suite_eq_consistency() {
  VerificationReport rep;
  rep.suite = "eq-consistency";

  struct Case {
    std::string tag;
    SolitonParams p;
    Trajectory t;
  };
  std::vector<Case> cases;

  IntegrationOptions opts = detail_s::grid_options();
  opts.max_output_dr = 0.01;
  opts.r_span = 25.0;

  {
    SolitonParams p(3, -1.0, -1.0);
    cases.push_back({"constant", p,
                     integrate(p, SolitonState{0.0, 1.0, 0.0}, Direction::Both, opts)});
  }
  {
    SolitonParams p(3, -1.0, 3.0);
    cases.push_back({"tip", p,
                     integrate(p, sphere_tip_initialize(p), Direction::Both, opts)});
  }
  {
    SolitonParams p(3, -1.0, -1.0);
    auto e = detail_s::exemplar_options(1e-5, 3.0);
    e.max_output_dr = 0.01;
    e.r_span = 25.0;
    cases.push_back({"line-r-greater n=3", p, detail_s::shoot_exemplar(p, 2.0, false, e)});
    // the R < lambda branch blows up at finite r backward; the difference
    // quotient is probed on the smooth forward leg
    const Trajectory shot = detail_s::shoot_exemplar(p, 2.0, true, e);
    cases.push_back({"line-r-less n=3", p,
                     integrate(p, shot.initial, Direction::Forward, e)});
  }
  {
    SolitonParams p(4, -1.0, 0.0);
    auto e = detail_s::exemplar_options(1e-3, 3.0);
    e.max_output_dr = 0.01;
    e.r_span = 25.0;
    cases.push_back({"line-r-greater n=4 rbar=0", p,
                     detail_s::shoot_exemplar(p, 0.5, false, e)});
  }

  const double h = 1e-3;
  for (const auto& c : cases) {
    double scale = 0.0;
    for (const auto& s : c.t.samples)
      if (s.rho > 0.0)
        scale = std::max(scale, std::fabs(rho_third(c.p, s.rho, s.drho, s.ddrho)));
    const double floor = 1e-8 * scale;
    double worst = 0.0, worst_r = 0.0;
    bool ok = true;
    std::size_t checked = 0;
    for (const auto& s : c.t.samples) {
      if (!c.t.covers(s.r - h) || !c.t.covers(s.r + h)) continue;
      if (!(s.rho > 0.0)) continue;
      const Sample lo = c.t.eval(s.r - h), hi = c.t.eval(s.r + h);
      const double fd = (hi.ddrho - lo.ddrho) / (2.0 * h);
      const double ref = rho_third(c.p, s.rho, s.drho, s.ddrho);
      const double err = std::fabs(fd - ref);
      const double allowed = 1e-4 * std::max(std::fabs(ref), std::fabs(fd)) + floor;
      ++checked;
      if (err > allowed) {
        ok = false;
        if (err > worst) { worst = err; worst_r = s.r; }
      }
    }
    rep.add(c.tag + " fd(ddrho) vs rho_third (" + std::to_string(checked) + " samples)",
            ok && checked > 10, worst, worst_r);
  }
  return rep;
}

inline VerificationReport suite_curvature_routes() {
  VerificationReport rep;
  rep.suite = "curvature-routes";
  auto check_traj = [&](const SolitonParams& p, const Trajectory& t,
                        const std::string& tag) {
    double worst = 0.0, worst_r = 0.0;
    bool ok = true;
    for (const auto& s : t.samples) {
      if (!(s.rho > 0.0)) continue;
      const double rd = scalar_curvature_direct(s.drho, p.lambda);
      const double rw = scalar_curvature_warped(p, s.rho, s.drho, s.ddrho);
      const double err = std::fabs(rd - rw);
      // the warped route divides an O(T) cancellation by rho^2; near a
      // collapse or blowup that round-off floor dominates the tolerance
      const double nm1 = p.n - 1.0, nm2 = p.n - 2.0;
      const double T = std::max({std::fabs(p.rbar), nm1 * nm2 * s.drho * s.drho,
                                 2.0 * nm1 * s.rho * std::fabs(s.ddrho)});
      const double cancel =
          64.0 * std::numeric_limits<double>::epsilon() * T / (s.rho * s.rho);
      const double allowed =
          20.0 * (t.opts.rtol * std::fabs(rd) + t.opts.atol) + cancel;
      if (err > allowed) {
        ok = false;
        if (err > worst) { worst = err; worst_r = s.r; }
      }
    }
    rep.add(tag + " |R_direct - R_warped|", ok, worst, worst_r);
  };

  auto less = detail_s::run_less_grid();
  for (std::size_t i = 0; i < less.size(); ++i)
    check_traj(less[i].params, less[i].traj, detail_s::point_name(less[i], i));
  auto greater = detail_s::run_greater_grid();
  for (std::size_t i = 0; i < greater.size(); ++i)
    check_traj(greater[i].params, greater[i].traj, detail_s::point_name(greater[i], i));
  return rep;
}

inline VerificationReport run_suite(const std::string& name) {
  if (name == "eq-consistency") return suite_eq_consistency();
  if (name == "r-less-lambda") return suite_r_less_lambda();
  if (name == "r-greater-lambda") return suite_r_greater_lambda();
  if (name == "claim1") return suite_claim1();
  if (name == "claim2") return suite_claim2();
  if (name == "epsilon") return suite_epsilon();
  if (name == "scaling") return suite_scaling();
  if (name == "curvature-routes") return suite_curvature_routes();
  throw std::invalid_argument("unknown suite: " + name);
}

} // namespace suites
} // namespace yamabe
