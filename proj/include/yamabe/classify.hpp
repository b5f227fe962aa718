#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/integrate.hpp"
#include "yamabe/soliton_ode.hpp"

// Maps a bidirectional trajectory onto the soliton taxonomy and verifies the
// sign and asymptotic structure of each branch on the numerical solution.
//
// Branch semantics, in decision order:
//   Trivial                        max |rho'| <= trivial_eps: the constant
//                                  warp rho = sqrt(rbar/lambda).
//   RotationallySymmetricHalfLine  rho hits zero in exactly one direction
//                                  with the smooth-tip slope
//                                  |rho'| = sqrt(rbar/((n-1)(n-2))), rbar > 0.
//   LineRLessLambda                rho' < 0 at every sample and the forward
//                                  end settled onto the rho = sqrt(rbar/lambda)
//                                  asymptote (Converged).  The backward end
//                                  may run out the window or blow up at finite
//                                  r: no complete specimen extends backward,
//                                  so the label describes the forward
//                                  asymptotic regime.
//   LineRGreaterLambda             rho' > 0 at every sample, backward end
//                                  Converged onto the asymptote, forward end
//                                  running out the window (linear growth).
//   NotGlobal                      a contradiction was observed: rho -> 0
//                                  without the tip slope, or a blowup that no
//                                  branch accounts for.
//   Inconclusive                   no contradiction, but either rho' changes
//                                  sign inside the window or the window ended
//                                  before the asymptote settled; finite
//                                  windows cannot certify completeness.

namespace yamabe {

enum class Branch {
  Trivial,
  RotationallySymmetricHalfLine,
  LineRLessLambda,
  LineRGreaterLambda,
  NotGlobal,
  Inconclusive,
};

inline const char* to_string(Branch b) {
  switch (b) {
    case Branch::Trivial: return "Trivial";
    case Branch::RotationallySymmetricHalfLine: return "RotationallySymmetricHalfLine";
    case Branch::LineRLessLambda: return "LineRLessLambda";
    case Branch::LineRGreaterLambda: return "LineRGreaterLambda";
    case Branch::NotGlobal: return "NotGlobal";
    case Branch::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct Classification {
  Branch branch = Branch::Inconclusive;
  std::optional<double> asymptote_c;
  std::string details;
};

struct VerificationCheck {
  std::string name;
  bool passed = false;
  double worst_residual = 0.0;
  double at_r = 0.0;
};

struct VerificationReport {
  std::string suite;
  std::vector<VerificationCheck> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  void add(std::string name, bool ok, double worst, double at_r) {
    checks.push_back(VerificationCheck{std::move(name), ok, worst, at_r});
  }
};

inline constexpr double kTrivialEps = 1e-9;
inline constexpr double kTipSlopeRelTol = 0.05;

namespace detail {

inline double tip_slope(const SolitonParams& p) {
  return std::sqrt(p.rbar / ((p.n - 1.0) * (p.n - 2.0)));
}

inline bool tip_compatible(const SolitonParams& p, const Event& ev) {
  if (!(p.rbar > 0.0)) return false;
  const double s = tip_slope(p);
  return std::fabs(std::fabs(ev.drho) - s) <= kTipSlopeRelTol * std::max(1.0, s);
}

inline const Event* find_terminal_event(const Trajectory& traj, EventKind kind,
                                        bool backward) {
  // terminal events sit at the extreme ends of the event list
  const Event* best = nullptr;
  for (const auto& ev : traj.events) {
    if (ev.kind != kind) continue;
    if (!best || (backward ? ev.r < best->r : ev.r > best->r)) best = &ev;
  }
  return best;
}

// Asymptote read-off near the converged end of a direction.  rho itself
// estimates the limit to the size of the remaining deviation; where the state
// rides a single decaying mode toward zero, rho'^2 / rho'' equals that
// deviation exactly to leading order and sharpens the estimate to O(rho^2).
// The smallest candidate over the converged tail wins (late samples can be
// bent by the growing transverse mode).
inline std::optional<double> read_asymptote(const Trajectory& traj,
                                            bool backward) {
  if (traj.samples.empty()) return std::nullopt;
  const double window = 2.0 * traj.opts.converge_window;
  const double edge = backward ? traj.r_min() : traj.r_max();
  std::optional<double> c;
  for (const auto& s : traj.samples) {
    if (std::fabs(s.r - edge) > window) continue;
    double cand = s.rho;
    if (s.ddrho > 0.0 && std::isfinite(s.ddrho)) {
      const double dev = s.drho * s.drho / s.ddrho;
      // the quotient is trusted only when it accounts for (essentially all
      // of) rho, i.e. in the rho -> 0 regime; near a positive limit the two
      // saddle modes mix and it is meaningless
      if (dev >= 0.5 * s.rho && dev <= 1.25 * s.rho)
        cand = std::max(0.0, s.rho - dev);
    }
    if (!c || cand < *c) c = cand;
  }
  return c;
}

} // namespace detail

/// Classify a bidirectional trajectory.  `tol` is the absolute slack used for
/// the rho' sign predicates (noise near an asymptote must not flip a branch).
inline Classification classify(const Trajectory& traj, double tol = 1e-6) {
  if (traj.samples.empty())
    throw std::invalid_argument("classify: empty trajectory");
  if (!(traj.params.lambda < 0.0))
    throw std::invalid_argument("classify: only expanding solitons (lambda < 0) are classified");
  if (traj.termination_fwd == Termination::NotRun ||
      traj.termination_bwd == Termination::NotRun)
    throw std::invalid_argument("classify: trajectory must be integrated in both directions");

  Classification cls;

  if (traj.termination_fwd == Termination::StepUnderflow ||
      traj.termination_bwd == Termination::StepUnderflow) {
    cls.branch = Branch::Inconclusive;
    cls.details = "integration stalled (step underflow)";
    return cls;
  }

  double max_dr = -1e300, min_dr = 1e300, max_abs_dr = 0.0;
  for (const auto& s : traj.samples) {
    max_dr = std::max(max_dr, s.drho);
    min_dr = std::min(min_dr, s.drho);
    max_abs_dr = std::max(max_abs_dr, std::fabs(s.drho));
  }

  if (max_abs_dr <= kTrivialEps) {
    cls.branch = Branch::Trivial;
    cls.asymptote_c = traj.samples.front().rho;
    cls.details = "constant warp";
    return cls;
  }

  const auto fwd = traj.termination_fwd;
  const auto bwd = traj.termination_bwd;
  const bool zero_fwd = fwd == Termination::RhoZero;
  const bool zero_bwd = bwd == Termination::RhoZero;

  if (zero_fwd != zero_bwd) {
    const Event* tip = detail::find_terminal_event(traj, EventKind::RhoZero, zero_bwd);
    const auto other = zero_bwd ? fwd : bwd;
    if (tip && detail::tip_compatible(traj.params, *tip) &&
        (other == Termination::WindowEnd || other == Termination::Converged)) {
      cls.branch = Branch::RotationallySymmetricHalfLine;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "smooth tip at r=%.6g (slope %.6g)",
                    tip->r, tip->drho);
      cls.details = buf;
      return cls;
    }
    cls.branch = Branch::NotGlobal;
    cls.details = tip ? "rho -> 0 without the smooth-tip slope"
                      : "rho -> 0 at one end";
    return cls;
  }
  if (zero_fwd && zero_bwd) {
    cls.branch = Branch::NotGlobal;
    cls.details = "rho -> 0 at both ends";
    return cls;
  }

  const bool sign_negative = max_dr <= tol && min_dr < -kTrivialEps;
  const bool sign_positive = min_dr >= -tol && max_dr > kTrivialEps;

  if (sign_negative && fwd == Termination::Converged &&
      (bwd == Termination::WindowEnd || bwd == Termination::Blowup)) {
    cls.branch = Branch::LineRLessLambda;
    cls.asymptote_c = detail::read_asymptote(traj, /*backward=*/false);
    cls.details = "rho' < 0 throughout; forward end settled";
    return cls;
  }
  if (sign_positive && bwd == Termination::Converged &&
      fwd == Termination::WindowEnd) {
    cls.branch = Branch::LineRGreaterLambda;
    cls.asymptote_c = detail::read_asymptote(traj, /*backward=*/true);
    cls.details = "rho' > 0 throughout; backward end settled";
    return cls;
  }

  const bool contradiction = fwd == Termination::Blowup || bwd == Termination::Blowup;
  if (contradiction) {
    cls.branch = Branch::NotGlobal;
    cls.details = (min_dr < -tol && max_dr > tol)
                      ? "rho' changes sign and the run ends in a blowup"
                      : "blowup not accounted for by any branch";
    return cls;
  }

  cls.branch = Branch::Inconclusive;
  cls.details = (min_dr < -tol && max_dr > tol)
                    ? "rho' changes sign inside the window"
                    : "window ended before the asymptote settled";
  return cls;
}

namespace detail {

inline double drho_noise_floor(const Trajectory& traj, double x) {
  return 10.0 * (traj.opts.rtol * std::fabs(x) + traj.opts.atol);
}

// Samples this close to a Converged end sit inside the detector's band, where
// the signal has decayed to the size of the integration noise; sign checks
// there carry converge_eps slack instead of the round-off floor.
inline bool in_converged_tail(const Trajectory& traj, double r) {
  const double w = 2.0 * traj.opts.converge_window;
  if (traj.termination_fwd == Termination::Converged && r >= traj.r_max() - w)
    return true;
  if (traj.termination_bwd == Termination::Converged && r <= traj.r_min() + w)
    return true;
  return false;
}

} // namespace detail

/// Verify the R < lambda branch structure on a LineRLessLambda trajectory:
/// rho'' > 0 everywhere, rbar <= 0, rho' strictly increasing, and the forward
/// asymptote c matching sqrt(rbar/lambda) (|c| <= tol when rbar == 0).
inline VerificationReport verify_r_less_lambda(const Trajectory& traj,
                                               const SolitonParams& p,
                                               double tol) {
  const Classification cls = classify(traj);
  if (cls.branch != Branch::LineRLessLambda)
    throw std::invalid_argument(std::string("verify_r_less_lambda: trajectory classifies as ") +
                                to_string(cls.branch));
  VerificationReport rep;
  rep.suite = "r-less-lambda";

  bool dd_ok = true;
  double worst_dd = 1e300, worst_dd_r = 0.0;
  for (const auto& s : traj.samples) {
    const double slack =
        detail::in_converged_tail(traj, s.r) ? traj.opts.converge_eps : 0.0;
    if (!(s.ddrho > -slack)) dd_ok = false;
    if (s.ddrho < worst_dd) { worst_dd = s.ddrho; worst_dd_r = s.r; }
  }
  rep.add("ddrho_positive", dd_ok, worst_dd, worst_dd_r);

  rep.add("rbar_nonpositive", p.rbar <= 0.0, p.rbar, 0.0);

  if (traj.termination_fwd == Termination::Converged && cls.asymptote_c) {
    const double c = *cls.asymptote_c;
    const double target = p.rbar < 0.0 ? std::sqrt(p.rbar / p.lambda) : 0.0;
    const double err = std::fabs(c - target);
    rep.add("forward_asymptote", err <= tol, err, traj.r_max());
  } else {
    rep.add("forward_asymptote", false, std::numeric_limits<double>::quiet_NaN(),
            traj.r_max());
  }

  bool increasing = true;
  double worst_gap = 0.0, worst_gap_r = 0.0;
  for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
    const double gap = traj.samples[i + 1].drho - traj.samples[i].drho;
    const double slack = detail::in_converged_tail(traj, traj.samples[i].r)
                             ? traj.opts.converge_eps
                             : detail::drho_noise_floor(traj, traj.samples[i].drho);
    if (gap < -slack) {
      increasing = false;
      if (gap < worst_gap) { worst_gap = gap; worst_gap_r = traj.samples[i].r; }
    }
  }
  rep.add("drho_strictly_increasing", increasing, worst_gap, worst_gap_r);
  return rep;
}

/// Verify the R > lambda branch structure on a LineRGreaterLambda trajectory:
/// 0 < rho' < -lambda (hence lambda < R < 0), rho'' >= 0 with no flat run,
/// backward asymptote c = sqrt(rbar/lambda), rbar <= 0.
inline VerificationReport verify_r_greater_lambda(const Trajectory& traj,
                                                  const SolitonParams& p,
                                                  double tol) {
  const Classification cls = classify(traj);
  if (cls.branch != Branch::LineRGreaterLambda)
    throw std::invalid_argument(std::string("verify_r_greater_lambda: trajectory classifies as ") +
                                to_string(cls.branch));
  VerificationReport rep;
  rep.suite = "r-greater-lambda";

  bool range_ok = true;
  double min_dr = 1e300, min_dr_r = 0.0, max_dr = -1e300, max_dr_r = 0.0;
  for (const auto& s : traj.samples) {
    const double slack =
        detail::in_converged_tail(traj, s.r) ? traj.opts.converge_eps : 0.0;
    if (!(s.drho > -slack) || !(s.drho < -p.lambda)) range_ok = false;
    if (s.drho < min_dr) { min_dr = s.drho; min_dr_r = s.r; }
    if (s.drho > max_dr) { max_dr = s.drho; max_dr_r = s.r; }
  }
  rep.add("drho_in_range", range_ok,
          min_dr > 0.0 ? (-p.lambda - max_dr) : min_dr,
          min_dr > 0.0 ? max_dr_r : min_dr_r);

  bool dd_ok = true;
  double worst_dd = 1e300, worst_dd_r = 0.0;
  for (const auto& s : traj.samples) {
    const double slack = detail::in_converged_tail(traj, s.r)
                             ? traj.opts.converge_eps
                             : detail::drho_noise_floor(traj, s.ddrho);
    if (!(s.ddrho >= -slack)) dd_ok = false;
    if (s.ddrho < worst_dd) { worst_dd = s.ddrho; worst_dd_r = s.r; }
  }
  rep.add("ddrho_nonnegative", dd_ok, worst_dd, worst_dd_r);

  // no open interval with rho'' == 0: no sample run of length >= the
  // convergence window sits below the root tolerance, converged tail aside
  double dd_scale = 0.0;
  for (const auto& s : traj.samples) dd_scale = std::max(dd_scale, std::fabs(s.ddrho));
  const double flat_tol = traj.opts.root_tol * std::max(1.0, dd_scale);
  const double tail_lo = traj.r_min() + 2.0 * traj.opts.converge_window;
  bool flat_ok = true;
  double flat_start = 0.0, flat_worst_r = 0.0;
  bool in_flat = false;
  for (const auto& s : traj.samples) {
    if (s.r < tail_lo) continue; // converged tail excluded
    if (std::fabs(s.ddrho) < flat_tol) {
      if (!in_flat) { in_flat = true; flat_start = s.r; }
      if (s.r - flat_start >= traj.opts.converge_window) {
        flat_ok = false;
        flat_worst_r = s.r;
        break;
      }
    } else {
      in_flat = false;
    }
  }
  rep.add("no_flat_ddrho_interval", flat_ok, flat_ok ? 0.0 : flat_tol, flat_worst_r);

  if (cls.asymptote_c) {
    const double c = *cls.asymptote_c;
    const double target = p.rbar < 0.0 ? std::sqrt(p.rbar / p.lambda) : 0.0;
    const double err = std::fabs(c - target);
    rep.add("backward_asymptote", err <= tol, err, traj.r_min());
  } else {
    rep.add("backward_asymptote", false, std::numeric_limits<double>::quiet_NaN(),
            traj.r_min());
  }

  rep.add("rbar_nonpositive", p.rbar <= 0.0, p.rbar, 0.0);
  return rep;
}

// Claim-2 style checks at a rho'' = 0 event on an R > lambda trajectory.
struct Claim2Check {
  bool dddrho_positive = false;
  bool rho_above_sqrt = false;
  bool root_identity_ok = false;
  double dddrho = 0.0;
  double root_identity_rel_err = 0.0;
};

/// At a DDRhoZero event with rho' > 0, lambda < 0 and rbar <= 0: checks
/// rho''' > 0, rho > sqrt(rbar/lambda), and the quadratic-root identity
///   rho' = (-rho^2 + sqrt(rho^4 + 4(n-1)(n-2)(rbar - lambda rho^2)))
///          / (2(n-1)(n-2))
/// to relative tolerance 1e-8.
inline Claim2Check check_claim2_event(const SolitonParams& p, const Event& ev) {
  if (ev.kind != EventKind::DDRhoZero)
    throw std::invalid_argument("check_claim2_event: event must be a DDRhoZero crossing");
  if (!(p.lambda < 0.0) || !(p.rbar <= 0.0))
    throw std::invalid_argument("check_claim2_event: requires lambda < 0 and rbar <= 0");

  Claim2Check out;
  out.dddrho = rho_third(p, ev.rho, ev.drho, ev.ddrho);
  out.dddrho_positive = out.dddrho > 0.0;

  const double target = p.rbar < 0.0 ? std::sqrt(p.rbar / p.lambda) : 0.0;
  out.rho_above_sqrt = ev.rho > target;

  const double nm1 = p.n - 1.0, nm2 = p.n - 2.0;
  const double rho2 = ev.rho * ev.rho;
  const double disc = rho2 * rho2 + 4.0 * nm1 * nm2 * (p.rbar - p.lambda * rho2);
  if (disc >= 0.0) {
    const double root = (-rho2 + std::sqrt(disc)) / (2.0 * nm1 * nm2);
    out.root_identity_rel_err =
        std::fabs(ev.drho - root) /
        std::max({std::fabs(ev.drho), std::fabs(root), 1e-300});
    out.root_identity_ok = out.root_identity_rel_err <= 1e-8;
  }
  return out;
}

/// Falsification harness for positive fiber curvature: with rbar > 0, no
/// initial condition with rho, rho' > 0 may survive as a global line.  Each
/// grid trajectory must end in RhoZero, a blowup, or a rho' sign change;
/// window-ends are retried with doubled r_span up to `r_span_cap`, after
/// which a survivor fails the suite.
inline VerificationReport
falsify_claim1(const SolitonParams& p,
               const std::vector<std::pair<double, double>>& grid,
               IntegrationOptions opts, double r_span_cap = 800.0) {
  if (!(p.rbar > 0.0))
    throw std::invalid_argument("falsify_claim1: requires rbar > 0");
  VerificationReport rep;
  rep.suite = "claim1";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto [rho0, drho0] = grid[i];
    if (!(rho0 > 0.0) || !(drho0 > 0.0))
      throw std::invalid_argument("falsify_claim1: grid states need rho0, drho0 > 0");
    IntegrationOptions o = opts;
    bool dead = false;
    double at_r = 0.0, span_used = o.r_span;
    while (true) {
      const Trajectory traj =
          integrate(p, SolitonState{0.0, rho0, drho0}, Direction::Both, o);
      double mn = 1e300, mx = -1e300;
      for (const auto& s : traj.samples) {
        mn = std::min(mn, s.drho);
        mx = std::max(mx, s.drho);
      }
      const bool contradiction =
          traj.termination_fwd == Termination::RhoZero ||
          traj.termination_bwd == Termination::RhoZero ||
          traj.termination_fwd == Termination::Blowup ||
          traj.termination_bwd == Termination::Blowup ||
          (mn < -1e-9 && mx > 1e-9);
      if (contradiction) {
        dead = true;
        at_r = traj.termination_bwd == Termination::RhoZero ? traj.r_min()
                                                            : traj.r_max();
        break;
      }
      span_used = o.r_span;
      if (o.r_span >= r_span_cap) break; // survivor
      o.r_span = std::min(2.0 * o.r_span, r_span_cap);
    }
    char name[96];
    std::snprintf(name, sizeof(name), "ic[%zu] rho0=%g drho0=%g", i, rho0, drho0);
    rep.add(name, dead, dead ? 0.0 : span_used, at_r);
  }
  return rep;
}

/// Linear-bound checks for the epsilon propositions: if rho' < -eps at every
/// forward sample then rho must vanish within rho(start)/eps of the start,
/// and mirror-wise backward for rho' > eps.  Hypotheses that never hold make
/// the corresponding check pass vacuously.
inline VerificationReport epsilon_propositions_check(const SolitonParams& p,
                                                     const Trajectory& traj,
                                                     double eps) {
  (void)p;
  if (!(eps > 0.0))
    throw std::invalid_argument("epsilon_propositions_check: eps must be positive");
  VerificationReport rep;
  rep.suite = "epsilon";
  const double r0 = traj.initial.r;
  const double rho_start = traj.initial.rho;
  const double bound = rho_start / eps;

  bool hyp_fwd = true, hyp_bwd = true;
  for (const auto& s : traj.samples) {
    if (s.r >= r0 && !(s.drho < -eps)) hyp_fwd = false;
    if (s.r <= r0 && !(s.drho > eps)) hyp_bwd = false;
  }

  if (hyp_fwd) {
    const bool hit = traj.termination_fwd == Termination::RhoZero;
    const double dist = traj.r_max() - r0;
    rep.add("forward_linear_bound", hit && dist <= bound, dist - bound, traj.r_max());
  } else {
    rep.add("forward_linear_bound (vacuous)", true, 0.0, r0);
  }
  if (hyp_bwd) {
    const bool hit = traj.termination_bwd == Termination::RhoZero;
    const double dist = r0 - traj.r_min();
    rep.add("backward_linear_bound", hit && dist <= bound, dist - bound, traj.r_min());
  } else {
    rep.add("backward_linear_bound (vacuous)", true, 0.0, r0);
  }
  return rep;
}

} // namespace yamabe
