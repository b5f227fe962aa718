#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "yamabe/integrate.hpp"
#include "yamabe/soliton_ode.hpp"

// Geometric quantities of the warped product reconstructed from a trajectory.
// The radial component of the soliton equation gives R = rho' + lambda; the
// warped-product curvature identity gives the same R by an independent route,
//   rho^2 R = rbar - (n-1)(n-2) rho'^2 - 2(n-1) rho rho'',
// and the potential F is the antiderivative of rho.

namespace yamabe {

struct GeometrySample {
  double r = 0.0;
  double warp = 0.0;     // rho = |grad F|
  double F = 0.0;        // potential value
  double R_direct = 0.0; // scalar curvature via the soliton identity
  double R_warped = 0.0; // scalar curvature via the warped-product identity
};

/// R from the rr-component of the soliton equation: rho' = R - lambda.
inline double scalar_curvature_direct(double drho, double lambda) {
  return drho + lambda;
}

/// R from the warped-product curvature identity.
inline double scalar_curvature_warped(const SolitonParams& p, double rho,
                                      double drho, double ddrho) {
  detail::require_positive_rho(rho, "scalar_curvature_warped");
  const double nm1 = p.n - 1.0, nm2 = p.n - 2.0;
  return (p.rbar - nm1 * nm2 * drho * drho - 2.0 * nm1 * rho * ddrho) /
         (rho * rho);
}

namespace detail {

// Integral of the quadratic through (x0,y0),(x1,y1),(x2,y2) over [x1, x2].
inline double quad_integral_right(double x0, double y0, double x1, double y1,
                                  double x2, double y2) {
  const double h1 = x1 - x0, h2 = x2 - x1;
  const double f12 = (y2 - y1) / h2;
  const double f01 = (y1 - y0) / h1;
  const double f2nd = (f12 - f01) / (h1 + h2);
  return h2 * 0.5 * (y1 + y2) - (h2 * h2 * h2 / 6.0) * f2nd;
}

// Same quadratic family, interval [x0, x1].
inline double quad_integral_left(double x0, double y0, double x1, double y1,
                                 double x2, double y2) {
  const double h1 = x1 - x0, h2 = x2 - x1;
  const double f12 = (y2 - y1) / h2;
  const double f01 = (y1 - y0) / h1;
  const double f2nd = (f12 - f01) / (h1 + h2);
  return h1 * 0.5 * (y0 + y1) - (h1 * h1 * h1 / 6.0) * f2nd;
}

} // namespace detail

/// Potential F reconstructed by quadrature of rho over the trajectory's
/// samples (composite Simpson with local 3-point fits on the non-uniform
/// grid), anchored to F(r_ref) = F_ref.  Returns one (r, F) pair per sample.
inline std::vector<std::pair<double, double>>
potential(const Trajectory& traj, double r_ref, double F_ref) {
  const auto& s = traj.samples;
  if (s.size() < 2)
    throw std::invalid_argument("potential: trajectory needs at least two samples");
  if (!(r_ref >= s.front().r && r_ref <= s.back().r))
    throw std::invalid_argument("potential: r_ref outside the trajectory range");

  const std::size_t m = s.size();
  std::vector<double> F(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    double piece;
    if (m == 2) {
      piece = 0.5 * (s[i].rho + s[i + 1].rho) * (s[i + 1].r - s[i].r);
    } else if (i == 0) {
      piece = detail::quad_integral_left(s[0].r, s[0].rho, s[1].r, s[1].rho,
                                         s[2].r, s[2].rho);
    } else if (i + 2 == m) {
      piece = detail::quad_integral_right(s[i - 1].r, s[i - 1].rho, s[i].r,
                                          s[i].rho, s[i + 1].r, s[i + 1].rho);
    } else {
      piece = 0.5 * (detail::quad_integral_right(s[i - 1].r, s[i - 1].rho,
                                                 s[i].r, s[i].rho, s[i + 1].r,
                                                 s[i + 1].rho) +
                     detail::quad_integral_left(s[i].r, s[i].rho, s[i + 1].r,
                                                s[i + 1].rho, s[i + 2].r,
                                                s[i + 2].rho));
    }
    F[i + 1] = F[i] + piece;
  }

  // anchor: interpolate the cumulative integral at r_ref
  auto it = std::lower_bound(s.begin(), s.end(), r_ref,
                             [](const Sample& a, double x) { return a.r < x; });
  std::size_t j = static_cast<std::size_t>(it - s.begin());
  double F_at_ref;
  if (j < m && s[j].r == r_ref) {
    F_at_ref = F[j];
  } else {
    j = (j == 0) ? 0 : j - 1;
    // quadratic-consistent partial piece via trapezoid of dense samples
    const Sample a = s[j];
    Sample mid{};
    if (traj.covers(0.5 * (a.r + r_ref)))
      mid = traj.eval(0.5 * (a.r + r_ref));
    else
      mid = Sample{0.5 * (a.r + r_ref), 0.5 * (a.rho + traj.eval(r_ref).rho), 0, 0};
    const Sample b = traj.eval(r_ref);
    F_at_ref = F[j] + (r_ref - a.r) / 6.0 * (a.rho + 4.0 * mid.rho + b.rho);
  }

  std::vector<std::pair<double, double>> out(m);
  for (std::size_t i = 0; i < m; ++i)
    out[i] = {s[i].r, F[i] - F_at_ref + F_ref};
  return out;
}

/// Geometry table for a trajectory: warp, potential, and both curvature
/// routes at every sample.
inline std::vector<GeometrySample>
make_geometry_samples(const Trajectory& traj, double r_ref, double F_ref) {
  const auto F = potential(traj, r_ref, F_ref);
  std::vector<GeometrySample> out(traj.samples.size());
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const Sample& s = traj.samples[i];
    GeometrySample g;
    g.r = s.r;
    g.warp = s.rho;
    g.F = F[i].second;
    g.R_direct = scalar_curvature_direct(s.drho, traj.params.lambda);
    g.R_warped = scalar_curvature_warped(traj.params, s.rho, s.drho, s.ddrho);
    out[i] = g;
  }
  return out;
}

/// The closed-form constant-warp soliton: rho == sqrt(rbar/lambda) with
/// R == lambda, realized as an analytic trajectory on [-r_span, r_span].
/// Requires lambda < 0 and rbar < 0 so the square root exists.
inline Trajectory make_constant_example(int n, double lambda, double rbar,
                                        double r_span = 10.0, double dr = 0.1) {
  if (!(lambda < 0.0) || !(rbar < 0.0))
    throw std::invalid_argument("make_constant_example: requires lambda < 0 and rbar < 0");
  if (!(r_span > 0.0) || !(dr > 0.0))
    throw std::invalid_argument("make_constant_example: window must be positive");
  const double c = std::sqrt(rbar / lambda);

  Trajectory traj;
  traj.params = SolitonParams(n, lambda, rbar);
  traj.opts = IntegrationOptions{};
  traj.initial = SolitonState{0.0, c, 0.0};
  const int half = static_cast<int>(std::ceil(r_span / dr));
  for (int k = -half; k <= half; ++k) {
    const double r = std::clamp(k * dr, -r_span, r_span);
    traj.samples.push_back(Sample{r, c, 0.0, 0.0});
  }
  for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
    DenseSegment seg;
    seg.r_start = traj.samples[i].r;
    seg.dr = traj.samples[i + 1].r - traj.samples[i].r;
    seg.rcont[0] = {c, 0.0};
    // remaining coefficients are zero: the interpolant is the constant
    traj.segments.push_back(seg);
  }
  traj.termination_fwd = Termination::WindowEnd;
  traj.termination_bwd = Termination::WindowEnd;
  Event e1;
  e1.kind = EventKind::WindowEnd;
  e1.r = -r_span;
  e1.rho = c;
  Event e2 = e1;
  e2.r = r_span;
  traj.events = {e1, e2};
  return traj;
}

} // namespace yamabe
