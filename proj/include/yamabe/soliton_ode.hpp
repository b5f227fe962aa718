#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

// Warp-function ODE of an expanding gradient Yamabe soliton in warped-product
// form.  The radial warp rho(r) = F'(r) = |grad F| of an n-dimensional soliton
// with constant lambda over a fiber of constant scalar curvature rbar obeys
//
//   2(n-1) rho rho'' + (n-1)(n-2) rho'^2 + rho^2 (rho' + lambda) = rbar
//
// and, differentiating once,
//
//   2(n-1)^2 rho' rho'' + 2(n-1) rho rho''' + 2 rho rho' (rho' + lambda)
//     + rho^2 rho'' = 0.
//
// This header holds the parameter/state types, the closed-form right-hand
// sides solved for rho'' and rho''', residual evaluators, and the scaling
// symmetry rho(r) -> b rho(b r), (lambda, rbar) -> (b^2 lambda, b^4 rbar).

namespace yamabe {

struct SolitonParams {
  int n = 3;            // manifold dimension, n >= 3
  double lambda = -1.0; // soliton constant; expanding means lambda < 0
  double rbar = 0.0;    // constant scalar curvature of the fiber

  SolitonParams() = default;

  // Expanding-soliton constructor: requires n >= 3 and lambda < 0.
  SolitonParams(int n_, double lambda_, double rbar_)
      : n(n_), lambda(lambda_), rbar(rbar_) {
    validate();
    if (!(lambda < 0.0))
      throw std::invalid_argument("SolitonParams: expanding soliton requires lambda < 0 "
                                  "(use SolitonParams::permissive for exploration)");
  }

  // Admits any lambda; the classifier still refuses lambda >= 0.
  static SolitonParams permissive(int n_, double lambda_, double rbar_) {
    SolitonParams p;
    p.n = n_;
    p.lambda = lambda_;
    p.rbar = rbar_;
    p.validate();
    return p;
  }

  bool expanding() const { return lambda < 0.0; }

 private:
  void validate() const {
    if (n < 3)
      throw std::invalid_argument("SolitonParams: dimension n must be >= 3");
    if (!std::isfinite(lambda) || !std::isfinite(rbar))
      throw std::invalid_argument("SolitonParams: lambda and rbar must be finite");
  }
};

// A point on a trajectory.  rho > 0 at interior points; rho == 0 is admissible
// only as a tip boundary state.
struct SolitonState {
  double r = 0.0;
  double rho = 1.0;
  double drho = 0.0;
};

// Residuals of the two equations at a state, with the magnitude scale used for
// relative comparisons.  `scale` is the largest |summand| entering the
// residual, so it is positive whenever the state is nondegenerate.
struct OdeResidual {
  double eq1_res = 0.0; // LHS - rbar of the second-order equation
  double eq2_res = 0.0; // LHS of the differentiated equation
  double scale = 0.0;
};

namespace detail {

// Unguarded rho'' formula; callers must ensure rho != 0.
inline double rho_second_raw(int n, double lambda, double rbar, double rho,
                             double drho) {
  const double nm1 = n - 1.0, nm2 = n - 2.0;
  return (rbar - nm1 * nm2 * drho * drho - rho * rho * (drho + lambda)) /
         (2.0 * nm1 * rho);
}

inline double rho_third_raw(int n, double lambda, double rho, double drho,
                            double ddrho) {
  const double nm1 = n - 1.0;
  return -(2.0 * nm1 * nm1 * drho * ddrho +
           2.0 * rho * drho * (drho + lambda) + rho * rho * ddrho) /
         (2.0 * nm1 * rho);
}

inline void require_positive_rho(double rho, const char* who) {
  if (!(rho > 0.0))
    throw std::domain_error(std::string(who) +
                            ": rho must be positive (tip states go through "
                            "sphere_tip_initialize)");
}

inline double max4(double a, double b, double c, double d) {
  return std::max(std::max(a, b), std::max(c, d));
}

} // namespace detail

/// rho'' from the second-order equation, solved at (rho, rho').
inline double rho_second(const SolitonParams& p, double rho, double drho) {
  detail::require_positive_rho(rho, "rho_second");
  return detail::rho_second_raw(p.n, p.lambda, p.rbar, rho, drho);
}

/// rho''' from the differentiated equation.  At ddrho == 0 this reduces to
/// -drho (drho + lambda) / (n-1).
inline double rho_third(const SolitonParams& p, double rho, double drho,
                        double ddrho) {
  detail::require_positive_rho(rho, "rho_third");
  return detail::rho_third_raw(p.n, p.lambda, rho, drho, ddrho);
}

/// Residual of the second-order equation (LHS - rbar) at a full state.
/// Exactly zero (up to round-off) when ddrho = rho_second(p, rho, drho).
inline OdeResidual eq1_residual(const SolitonParams& p, double rho, double drho,
                                double ddrho) {
  detail::require_positive_rho(rho, "eq1_residual");
  const double nm1 = p.n - 1.0, nm2 = p.n - 2.0;
  const double t1 = 2.0 * nm1 * rho * ddrho;
  const double t2 = nm1 * nm2 * drho * drho;
  const double t3 = rho * rho * (drho + p.lambda);
  OdeResidual res;
  res.eq1_res = t1 + t2 + t3 - p.rbar;
  res.scale = std::max(detail::max4(std::fabs(t1), std::fabs(t2), std::fabs(t3),
                                    std::fabs(p.rbar)),
                       std::numeric_limits<double>::min());
  return res;
}

/// Residual of the differentiated equation (its LHS) at a full jet.
/// Exactly zero when dddrho = rho_third(p, rho, drho, ddrho).
inline OdeResidual eq2_residual(const SolitonParams& p, double rho, double drho,
                                double ddrho, double dddrho) {
  detail::require_positive_rho(rho, "eq2_residual");
  const double nm1 = p.n - 1.0;
  const double t1 = 2.0 * nm1 * nm1 * drho * ddrho;
  const double t2 = 2.0 * nm1 * rho * dddrho;
  const double t3 = 2.0 * rho * drho * (drho + p.lambda);
  const double t4 = rho * rho * ddrho;
  OdeResidual res;
  res.eq2_res = t1 + t2 + t3 + t4;
  res.scale = std::max(detail::max4(std::fabs(t1), std::fabs(t2), std::fabs(t3),
                                    std::fabs(t4)),
                       std::numeric_limits<double>::min());
  return res;
}

/// Scaling symmetry: if rho(r) solves with (lambda, rbar) then b rho(b r)
/// solves with (b^2 lambda, b^4 rbar).  Maps a state on the source solution to
/// the corresponding state on the image; rho'' picks up a factor b^3 and the
/// eq1 residual a factor b^4.
inline std::pair<SolitonParams, SolitonState>
scale_transform(const SolitonParams& p, const SolitonState& s, double b) {
  if (!(b > 0.0))
    throw std::invalid_argument("scale_transform: b must be positive");
  SolitonParams q = SolitonParams::permissive(p.n, b * b * p.lambda,
                                              b * b * b * b * p.rbar);
  SolitonState t;
  t.r = s.r / b;
  t.rho = b * s.rho;
  t.drho = b * b * s.drho;
  return {q, t};
}

} // namespace yamabe
