#pragma once

// Scalar numerical building blocks shared by every module: bracketed root
// finding, adaptive quadrature, 1-D maximization and finite differences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "cfmm/error.hpp"

namespace cfmm::numerics {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// Plain bisection on a sign change. Runs until the bracket collapses to
// adjacent doubles or `max_iter` halvings, whichever comes first.
template <class F>
double bisect(F&& f, double lo, double hi, int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  require(std::signbit(flo) != std::signbit(fhi), ErrorKind::NoRoot, "bisection bracket has no sign change");
  for (int i = 0; i < max_iter; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= std::min(lo, hi) || mid >= std::max(lo, hi)) break;
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if (std::signbit(fmid) == std::signbit(flo)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
      fhi = fmid;
    }
  }
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

// Brent-style bracketed solve (TOMS 748) to full double precision.
template <class F>
double toms748(F&& f, double lo, double hi, std::uintmax_t max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  require(std::signbit(flo) != std::signbit(fhi), ErrorKind::NoRoot, "root bracket has no sign change");
  std::uintmax_t iters = max_iter;
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 1);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  require(iters < max_iter, ErrorKind::NoRoot, "root finder exhausted its iteration budget");
  return a + 0.5 * (b - a);
}

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm, double whole,
                    double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  // Refinement below the roundoff of the panel sums cannot make progress.
  const bool at_roundoff = std::abs(delta) <= 1e-14 * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol || at_roundoff) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with Richardson correction. Orientation is
// respected: integrating from b to a (b > a) returns the negated value.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 48) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_simpson(f, b, a, abs_tol, max_depth);
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

struct Extremum {
  double x;
  double value;
};

// Golden-section search for the maximum of a unimodal function on [a, b].
template <class F>
Extremum golden_section_max(F&& f, double a, double b, double x_tol = 1e-12, int max_iter = 300) {
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > x_tol * std::max(1.0, std::abs(a) + std::abs(b)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? Extremum{c, fc} : Extremum{d, fd};
}

// One-sided difference quotient with one Richardson step: 2 D(h/2) - D(h).
// `direction` is +1 for a forward and -1 for a backward quotient.
template <class F>
double richardson_one_sided(F&& f, double x, double h, int direction = +1) {
  const double s = direction >= 0 ? 1.0 : -1.0;
  const double f0 = f(x);
  const double d_h = (f(x + s * h) - f0) / (s * h);
  const double d_half = (f(x + s * 0.5 * h) - f0) / (s * 0.5 * h);
  return 2.0 * d_half - d_h;
}

template <class F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

template <class F>
double central_second_difference(F&& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace cfmm::numerics
