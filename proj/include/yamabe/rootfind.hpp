#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace yamabe {

/// Bisection root location for a scalar monitor along a bracket (r_a, r_b).
/// Requires a sign change across the bracket.  Returns r* with
/// |monitor(r*)| <= root_tol * max(|m(a)|, |m(b)|) or with the bracket shrunk
/// to one ulp, whichever comes first; at most 200 iterations.
template <typename F>
double locate_root(F&& monitor, double r_a, double r_b, double root_tol) {
  double fa = monitor(r_a);
  double fb = monitor(r_b);
  if (fa == 0.0) return r_a;
  if (fb == 0.0) return r_b;
  if (std::signbit(fa) == std::signbit(fb))
    throw std::invalid_argument("locate_root: monitor does not change sign over the bracket");
  const double scale =
      std::max(std::max(std::fabs(fa), std::fabs(fb)),
               std::numeric_limits<double>::min());
  double lo = r_a, hi = r_b;
  double best = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) return mid; // bracket at one ulp
    const double fm = monitor(mid);
    best = mid;
    if (fm == 0.0 || std::fabs(fm) <= root_tol * scale) return mid;
    if (std::signbit(fm) == std::signbit(fa)) {
      lo = mid;
      fa = fm;
    } else {
      hi = mid;
    }
  }
  return best;
}

} // namespace yamabe
