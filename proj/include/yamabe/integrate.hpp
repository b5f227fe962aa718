#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/rootfind.hpp"
#include "yamabe/soliton_ode.hpp"

// Adaptive explicit Runge-Kutta integration of the first-order system
// (rho, rho') with rho'' supplied by the closed-form right-hand side.
// Embedded Dormand-Prince 4(5) pair, PI step-size control, quartic dense
// output, bidirectional in r.  Backward integration negates the independent
// variable (s = -r) inside one code path.
//
// Termination, per direction, is the first of:
//   RhoZero   - rho reaches the rho_zero_tol floor (the equation is singular
//               at rho = 0, so the floor stands in for the exact zero; a
//               step-size underflow deep in the rho -> 0 collapse is rescued
//               to the same reason),
//   Blowup    - |rho| or |rho'| exceeds blowup_threshold,
//   Converged - |rho'| and |rho''| stay below converge_eps over a window of
//               length converge_window, after |rho'| >= converge_eps has been
//               observed at least once (so equilibrium starts run out the
//               window instead of "converging" at once),
//   WindowEnd - |r - r0| reaches r_span.
// DRhoZero, DDRhoZero and DRhoPlusLambdaZero crossings are recorded and
// integration continues.

namespace yamabe {

struct IntegrationOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double r_span = 100.0;
  double h_init = 1e-3;
  double h_max = 0.1;
  double blowup_threshold = 1e8;
  double converge_eps = 1e-8;
  double converge_window = 5.0;
  double root_tol = 1e-12;
  double rho_zero_tol = 1e-10; // rho floor treated as the zero of the warp
  double max_output_dr = 0.0;  // >0: record dense samples at this spacing

  void validate() const {
    auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
    if (!pos(rtol) || !pos(atol) || !pos(r_span) || !pos(h_init) ||
        !pos(h_max) || !pos(blowup_threshold) || !pos(converge_eps) ||
        !pos(converge_window) || !pos(root_tol) || !pos(rho_zero_tol))
      throw std::invalid_argument("IntegrationOptions: tolerances, spans and thresholds must be positive");
    if (h_init > h_max)
      throw std::invalid_argument("IntegrationOptions: h_init must not exceed h_max");
    if (max_output_dr < 0.0)
      throw std::invalid_argument("IntegrationOptions: max_output_dr must be >= 0");
  }
};

enum class EventKind {
  RhoZero,
  DRhoZero,
  DDRhoZero,
  DRhoPlusLambdaZero,
  Blowup,
  Converged,
  WindowEnd,
};

enum class Termination {
  NotRun,
  WindowEnd,
  RhoZero,
  Blowup,
  Converged,
  StepUnderflow,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::RhoZero: return "RhoZero";
    case EventKind::DRhoZero: return "DRhoZero";
    case EventKind::DDRhoZero: return "DDRhoZero";
    case EventKind::DRhoPlusLambdaZero: return "DRhoPlusLambdaZero";
    case EventKind::Blowup: return "Blowup";
    case EventKind::Converged: return "Converged";
    case EventKind::WindowEnd: return "WindowEnd";
  }
  return "?";
}

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::NotRun: return "NotRun";
    case Termination::WindowEnd: return "WindowEnd";
    case Termination::RhoZero: return "RhoZero";
    case Termination::Blowup: return "Blowup";
    case Termination::Converged: return "Converged";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "?";
}

// Trajectory state at an event location, with derived jets attached.
struct Event {
  EventKind kind;
  double r = 0.0;
  double rho = 0.0;
  double drho = 0.0;
  double ddrho = 0.0;
  double dddrho = 0.0;
};

struct Sample {
  double r = 0.0;
  double rho = 0.0;
  double drho = 0.0;
  double ddrho = 0.0;
};

enum class Direction { Forward, Backward, Both };

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights (quartic continuous extension).
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

using Vec2 = std::array<double, 2>;

} // namespace detail

// One accepted step's dense interpolant, stored in physical coordinates.
// theta = (r - r_start) / dr runs over [0, 1]; dr is signed, its sign is the
// direction of integration.  Component 0 interpolates rho, component 1 the
// internal derivative v with rho' = sign(dr) * v.
struct DenseSegment {
  double r_start = 0.0;
  double dr = 0.0;
  std::array<detail::Vec2, 5> rcont{};

  double r_lo() const { return std::min(r_start, r_start + dr); }
  double r_hi() const { return std::max(r_start, r_start + dr); }

  void eval(double r, double& rho, double& drho) const {
    const double th = (r - r_start) / dr;
    const double th1 = 1.0 - th;
    detail::Vec2 y;
    for (int i = 0; i < 2; ++i)
      y[i] = rcont[0][i] +
             th * (rcont[1][i] +
                   th1 * (rcont[2][i] + th * (rcont[3][i] + th1 * rcont[4][i])));
    rho = y[0];
    drho = (dr < 0.0 ? -y[1] : y[1]);
  }
};

struct Trajectory {
  SolitonParams params;
  IntegrationOptions opts;
  SolitonState initial;
  std::vector<Sample> samples;        // strictly increasing in r
  std::vector<Event> events;          // sorted by r
  std::vector<DenseSegment> segments; // sorted by r_lo
  Termination termination_fwd = Termination::NotRun;
  Termination termination_bwd = Termination::NotRun;

  double r_min() const { return samples.front().r; }
  double r_max() const { return samples.back().r; }
  bool covers(double r) const {
    return !segments.empty() && r >= segments.front().r_lo() &&
           r <= segments.back().r_hi();
  }

  // Dense evaluation anywhere inside the integrated range.
  Sample eval(double r) const {
    if (!covers(r))
      throw std::out_of_range("Trajectory::eval: r outside the integrated range");
    auto it = std::upper_bound(segments.begin(), segments.end(), r,
                               [](double x, const DenseSegment& s) { return x < s.r_lo(); });
    if (it != segments.begin()) --it;
    while (it + 1 != segments.end() && r > it->r_hi()) ++it;
    Sample s;
    s.r = r;
    it->eval(r, s.rho, s.drho);
    s.ddrho = s.rho > 0.0
                  ? detail::rho_second_raw(params.n, params.lambda, params.rbar,
                                           s.rho, s.drho)
                  : std::numeric_limits<double>::quiet_NaN();
    return s;
  }

  const Sample& terminal_backward() const { return samples.front(); }
  const Sample& terminal_forward() const { return samples.back(); }
};

/// First-order Taylor start of the rotationally symmetric (sphere-fiber)
/// branch: at a tip the equation forces (n-1)(n-2) rho'(0)^2 = rbar, so
/// rho'(0) = sqrt(rbar / ((n-1)(n-2))).  Returns the state at a small r0 > 0
/// with rho = rho'(0) * r0; the truncation error is O(r0^3).
inline SolitonState sphere_tip_initialize(const SolitonParams& p,
                                          double r0 = 1e-4) {
  if (!(p.rbar > 0.0))
    throw std::domain_error("sphere_tip_initialize: a tip requires rbar > 0");
  if (!(r0 > 0.0) || r0 > 0.1)
    throw std::invalid_argument("sphere_tip_initialize: r0 must lie in (0, 0.1]");
  const double slope = std::sqrt(p.rbar / ((p.n - 1.0) * (p.n - 2.0)));
  return SolitonState{r0, slope * r0, slope};
}

namespace detail {

struct DirectionRun {
  std::vector<Sample> samples;        // in integration order
  std::vector<Event> events;          // in integration order
  std::vector<DenseSegment> segments; // in integration order
  Termination termination = Termination::NotRun;
};

class Stepper {
 public:
  Stepper(const SolitonParams& p, const SolitonState& init, int sign,
          const IntegrationOptions& opts)
      : p_(p), opts_(opts), sign_(sign), r0_(init.r) {
    y_ = {init.rho, sign_ * init.drho};
    k1_ = rhs(y_);
  }

  DirectionRun run() {
    DirectionRun out;
    emit_sample(out, 0.0, y_);
    prev_mon_ = monitors(y_);
    maybe_arm(y_);

    double h = std::min(opts_.h_init, opts_.h_max);
    const double h_min = 1e-12 * opts_.r_span;
    double facold = 1e-4;
    bool rejected = false;

    while (true) {
      if (t_ >= opts_.r_span) {
        finish(out, Termination::WindowEnd, EventKind::WindowEnd, t_, y_);
        return out;
      }
      bool last = false;
      if (t_ + h >= opts_.r_span) {
        h = opts_.r_span - t_;
        last = true;
      }

      Vec2 ynew, k7;
      double err = attempt(h, ynew, k7);

      if (!std::isfinite(err)) {
        // a stage left the admissible region (rho <= 0) or overflowed
        h *= 0.25;
        if (!last && h < h_min) return underflow(out);
        rejected = true;
        continue;
      }
      if (err > 1.0) {
        const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
        h /= std::min(1.0 / kFacl, fac11 / kSafe);
        if (!last && h < h_min) return underflow(out);
        rejected = true;
        continue;
      }

      // accepted
      const double fac11 = std::pow(err, 0.2 - kBeta * 0.75);
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::max(1.0 / kFacr, std::min(1.0 / kFacl, fac / kSafe));
      double h_next = std::min(h / fac, opts_.h_max);
      if (rejected) h_next = std::min(h_next, h);
      rejected = false;
      facold = std::max(err, 1e-4);

      DenseSegment seg = make_segment(h, ynew, k7);
      out.segments.push_back(seg);

      if (scan_step(out, seg, t_, t_ + h)) return out; // terminal inside step

      t_ += h;
      y_ = ynew;
      k1_ = k7;

      if (std::fabs(y_[0]) > opts_.blowup_threshold ||
          std::fabs(y_[1]) > opts_.blowup_threshold) {
        emit_dense_until(out, seg, t_);
        finish(out, Termination::Blowup, EventKind::Blowup, t_, y_);
        return out;
      }

      emit_dense_until(out, seg, t_);
      emit_sample(out, t_, y_);
      h = h_next;
    }
  }

 private:
  static constexpr double kSafe = 0.9, kFacl = 0.2, kFacr = 10.0, kBeta = 0.04;
  static constexpr int kScan = 8; // monitor subsamples per accepted step

  const SolitonParams& p_;
  const IntegrationOptions& opts_;
  int sign_;
  double r0_;
  double t_ = 0.0;
  Vec2 y_{}, k1_{};
  std::array<double, 4> prev_mon_{};
  bool armed_ = false;
  bool in_small_ = false;
  double small_start_ = 0.0;
  double last_sampled_ = 0.0;
  std::array<double, 4> last_event_r_ = {
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN()};

  double r_of(double t) const { return r0_ + sign_ * t; }

  Vec2 rhs(const Vec2& y) const {
    if (!(y[0] > 0.0) || !std::isfinite(y[0]) || !std::isfinite(y[1]))
      return {std::numeric_limits<double>::quiet_NaN(),
              std::numeric_limits<double>::quiet_NaN()};
    const double drho = sign_ * y[1];
    return {y[1], rho_second_raw(p_.n, p_.lambda, p_.rbar, y[0], drho)};
  }

  // One DP45 attempt; returns the scaled error norm (NaN if a stage failed).
  double attempt(double h, Vec2& ynew, Vec2& k7) {
    Vec2 k2, k3, k4, k5, k6, yt;
    auto stage = [&](const Vec2& incr) {
      for (int i = 0; i < 2; ++i) yt[i] = y_[i] + h * incr[i];
    };
    stage({a21 * k1_[0], a21 * k1_[1]});
    k2 = rhs(yt);
    stage({a31 * k1_[0] + a32 * k2[0], a31 * k1_[1] + a32 * k2[1]});
    k3 = rhs(yt);
    stage({a41 * k1_[0] + a42 * k2[0] + a43 * k3[0],
           a41 * k1_[1] + a42 * k2[1] + a43 * k3[1]});
    k4 = rhs(yt);
    stage({a51 * k1_[0] + a52 * k2[0] + a53 * k3[0] + a54 * k4[0],
           a51 * k1_[1] + a52 * k2[1] + a53 * k3[1] + a54 * k4[1]});
    k5 = rhs(yt);
    stage({a61 * k1_[0] + a62 * k2[0] + a63 * k3[0] + a64 * k4[0] + a65 * k5[0],
           a61 * k1_[1] + a62 * k2[1] + a63 * k3[1] + a64 * k4[1] + a65 * k5[1]});
    k6 = rhs(yt);
    for (int i = 0; i < 2; ++i)
      ynew[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3[i] + b4 * k4[i] +
                             b5 * k5[i] + b6 * k6[i]);
    k7 = rhs(ynew);
    k2_ = k2; k3_ = k3; k4_ = k4; k5_ = k5; k6_ = k6;

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double ee = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] +
                             e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opts_.atol + opts_.rtol * std::max(std::fabs(y_[i]),
                                                           std::fabs(ynew[i]));
      const double q = ee / sc;
      err += q * q;
    }
    return std::sqrt(err / 2.0);
  }

  Vec2 k2_{}, k3_{}, k4_{}, k5_{}, k6_{};

  DenseSegment make_segment(double h, const Vec2& ynew, const Vec2& k7) const {
    DenseSegment seg;
    seg.r_start = r_of(t_);
    seg.dr = sign_ * h;
    for (int i = 0; i < 2; ++i) {
      const double ydiff = ynew[i] - y_[i];
      const double bspl = h * k1_[i] - ydiff;
      seg.rcont[0][i] = y_[i];
      seg.rcont[1][i] = ydiff;
      seg.rcont[2][i] = bspl;
      seg.rcont[3][i] = ydiff - h * k7[i] - bspl;
      seg.rcont[4][i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] +
                             d5 * k5_[i] + d6 * k6_[i] + d7 * k7[i]);
    }
    return seg;
  }

  struct Phys {
    double rho, drho, ddrho;
  };

  Phys phys_at(const DenseSegment& seg, double t) const {
    Phys ph{};
    seg.eval(r_of(t), ph.rho, ph.drho);
    ph.ddrho = ph.rho > 0.0 ? rho_second_raw(p_.n, p_.lambda, p_.rbar, ph.rho,
                                             ph.drho)
                            : std::numeric_limits<double>::quiet_NaN();
    return ph;
  }

  // Monitored quantities: rho - floor, rho', rho'', rho' + lambda.
  std::array<double, 4> monitors(const Vec2& y) const {
    const double rho = y[0];
    const double drho = sign_ * y[1];
    const double dd = rho > 0.0
                          ? rho_second_raw(p_.n, p_.lambda, p_.rbar, rho, drho)
                          : std::numeric_limits<double>::quiet_NaN();
    return {rho - opts_.rho_zero_tol, drho, dd, drho + p_.lambda};
  }

  std::array<double, 4> monitors_at(const DenseSegment& seg, double t) const {
    const Phys ph = phys_at(seg, t);
    return {ph.rho - opts_.rho_zero_tol, ph.drho, ph.ddrho, ph.drho + p_.lambda};
  }

  void maybe_arm(const Vec2& y) {
    if (std::fabs(sign_ * y[1]) >= opts_.converge_eps) armed_ = true;
  }

  Event make_event(EventKind kind, const Phys& ph, double t) const {
    Event ev;
    ev.kind = kind;
    ev.r = r_of(t);
    ev.rho = ph.rho;
    ev.drho = ph.drho;
    ev.ddrho = ph.ddrho;
    ev.dddrho = ph.rho > 0.0 && std::isfinite(ph.ddrho)
                    ? rho_third_raw(p_.n, p_.lambda, ph.rho, ph.drho, ph.ddrho)
                    : std::numeric_limits<double>::quiet_NaN();
    return ev;
  }

  void emit_sample(DirectionRun& out, double t, const Vec2& y) {
    const double r = r_of(t);
    if (!out.samples.empty() && out.samples.back().r == r) return;
    const double rho = y[0];
    const double drho = sign_ * y[1];
    Sample s;
    s.r = r;
    s.rho = rho;
    s.drho = drho;
    s.ddrho = rho > 0.0
                  ? rho_second_raw(p_.n, p_.lambda, p_.rbar, rho, drho)
                  : std::numeric_limits<double>::quiet_NaN();
    out.samples.push_back(s);
    last_sampled_ = t;
  }

  void emit_phys_sample(DirectionRun& out, double t, const Phys& ph) {
    const double r = r_of(t);
    if (!out.samples.empty() && out.samples.back().r == r) return;
    out.samples.push_back(Sample{r, ph.rho, ph.drho, ph.ddrho});
    last_sampled_ = t;
  }

  void emit_dense_until(DirectionRun& out, const DenseSegment& seg, double t_hi) {
    if (opts_.max_output_dr <= 0.0) return;
    for (double t = last_sampled_ + opts_.max_output_dr; t < t_hi;
         t += opts_.max_output_dr)
      emit_phys_sample(out, t, phys_at(seg, t));
  }

  void finish(DirectionRun& out, Termination term, EventKind kind, double t,
              const Vec2& y) {
    const Phys ph{y[0], sign_ * y[1],
                  y[0] > 0.0 ? rho_second_raw(p_.n, p_.lambda, p_.rbar, y[0],
                                              sign_ * y[1])
                             : std::numeric_limits<double>::quiet_NaN()};
    out.events.push_back(make_event(kind, ph, t));
    emit_sample(out, t, y);
    out.termination = term;
  }

  void finish_dense(DirectionRun& out, const DenseSegment& seg,
                    Termination term, EventKind kind, double t) {
    const Phys ph = phys_at(seg, t);
    out.events.push_back(make_event(kind, ph, t));
    emit_phys_sample(out, t, ph);
    out.termination = term;
  }

  DirectionRun& underflow(DirectionRun& out) {
    // Deep in a rho -> 0 collapse the equation is singular and the step size
    // degenerates with rho; report the collapse as the RhoZero it is.  A
    // stall anywhere else is an honest failure.
    const double rho = y_[0];
    const double drho = std::fabs(sign_ * y_[1]);
    if (rho <= 1e-5 || (rho <= 1e-3 && drho >= 1e2)) {
      finish(out, Termination::RhoZero, EventKind::RhoZero, t_, y_);
    } else if (rho > opts_.blowup_threshold / 100.0 ||
               drho > opts_.blowup_threshold / 100.0) {
      finish(out, Termination::Blowup, EventKind::Blowup, t_, y_);
    } else {
      emit_sample(out, t_, y_);
      out.termination = Termination::StepUnderflow;
    }
    return out;
  }

  // Scan one accepted step [t_lo, t_hi] for events and convergence.
  // Returns true if a terminal event truncated the run.
  bool scan_step(DirectionRun& out, const DenseSegment& seg, double t_lo,
                 double t_hi) {
    const double dt = (t_hi - t_lo) / kScan;
    double t_prev = t_lo;
    // re-anchor the monitors on this segment's interpolant so every root
    // bracket is sign-consistent within one segment; a flip across the step
    // seam is an event at the seam itself
    auto mon_prev = monitors_at(seg, t_lo);
    if (prev_mon_[0] > 0.0 && !(mon_prev[0] > 0.0)) {
      finish_dense(out, seg, Termination::RhoZero, EventKind::RhoZero, t_lo);
      return true;
    }
    for (int j = 1; j <= kScan; ++j) {
      const double t = (j == kScan) ? t_hi : t_lo + j * dt;
      auto mon = monitors_at(seg, t);

      // rho floor: terminal
      if (mon_prev[0] > 0.0 && !(mon[0] > 0.0)) {
        const double t_star = locate_root(
            [&](double tt) { return monitors_at(seg, tt)[0]; }, t_prev, t,
            opts_.root_tol);
        emit_dense_until(out, seg, t_star);
        finish_dense(out, seg, Termination::RhoZero, EventKind::RhoZero, t_star);
        return true;
      }

      // non-terminal sign changes
      static constexpr EventKind kKinds[3] = {EventKind::DRhoZero,
                                              EventKind::DDRhoZero,
                                              EventKind::DRhoPlusLambdaZero};
      for (int m = 1; m <= 3; ++m) {
        if (!std::isfinite(mon_prev[m]) || !std::isfinite(mon[m])) continue;
        if (mon_prev[m] * mon[m] < 0.0) {
          const double t_star = locate_root(
              [&](double tt) { return monitors_at(seg, tt)[m]; }, t_prev, t,
              opts_.root_tol);
          const double r_star = r_of(t_star);
          if (!(std::fabs(r_star - last_event_r_[m]) <
                1e-9 * std::max(1.0, std::fabs(r_star)))) {
            out.events.push_back(
                make_event(kKinds[m - 1], phys_at(seg, t_star), t_star));
            last_event_r_[m] = r_star;
          }
        }
      }

      // convergence window
      const Phys ph = phys_at(seg, t);
      if (std::fabs(ph.drho) >= opts_.converge_eps) armed_ = true;
      const bool small = armed_ && std::isfinite(ph.ddrho) &&
                         std::fabs(ph.drho) < opts_.converge_eps &&
                         std::fabs(ph.ddrho) < opts_.converge_eps;
      if (small) {
        if (!in_small_) {
          in_small_ = true;
          small_start_ = t;
        } else if (t - small_start_ >= opts_.converge_window) {
          emit_dense_until(out, seg, t);
          finish_dense(out, seg, Termination::Converged, EventKind::Converged, t);
          return true;
        }
      } else {
        in_small_ = false;
      }

      t_prev = t;
      mon_prev = mon;
    }
    prev_mon_ = mon_prev;
    return false;
  }
};

inline DirectionRun run_direction(const SolitonParams& p,
                                  const SolitonState& init, int sign,
                                  const IntegrationOptions& opts) {
  Stepper st(p, init, sign, opts);
  return st.run();
}

} // namespace detail

/// Integrate the warp equation from `init`, forward and/or backward in r.
/// The returned trajectory's samples are strictly increasing in r and every
/// sample carries the derived rho''.
inline Trajectory integrate(const SolitonParams& p, const SolitonState& init,
                            Direction dir, const IntegrationOptions& opts) {
  opts.validate();
  if (!(init.rho > 0.0))
    throw std::invalid_argument("integrate: init.rho must be positive "
                                "(tip starts go through sphere_tip_initialize)");
  if (!std::isfinite(init.r) || !std::isfinite(init.drho))
    throw std::invalid_argument("integrate: initial state must be finite");

  Trajectory traj;
  traj.params = p;
  traj.opts = opts;
  traj.initial = init;

  detail::DirectionRun fwd, bwd;
  if (dir == Direction::Forward || dir == Direction::Both) {
    fwd = detail::run_direction(p, init, +1, opts);
    traj.termination_fwd = fwd.termination;
  }
  if (dir == Direction::Backward || dir == Direction::Both) {
    bwd = detail::run_direction(p, init, -1, opts);
    traj.termination_bwd = bwd.termination;
  }

  // backward output is in integration order (descending r): reverse it
  traj.samples.assign(bwd.samples.rbegin(), bwd.samples.rend());
  traj.segments.assign(bwd.segments.rbegin(), bwd.segments.rend());
  traj.events.assign(bwd.events.rbegin(), bwd.events.rend());

  auto append_fwd_samples = [&](const std::vector<Sample>& s) {
    for (const auto& x : s) {
      if (!traj.samples.empty() && x.r <= traj.samples.back().r) continue;
      traj.samples.push_back(x);
    }
  };
  append_fwd_samples(fwd.samples);
  traj.segments.insert(traj.segments.end(), fwd.segments.begin(),
                       fwd.segments.end());
  traj.events.insert(traj.events.end(), fwd.events.begin(), fwd.events.end());
  std::sort(traj.events.begin(), traj.events.end(),
            [](const Event& a, const Event& b) { return a.r < b.r; });

  if (traj.samples.empty()) // single-direction run that terminated at once
    traj.samples.push_back(Sample{
        init.r, init.rho, init.drho,
        detail::rho_second_raw(p.n, p.lambda, p.rbar, init.rho, init.drho)});
  return traj;
}

} // namespace yamabe
