#pragma once

#include <functional>

#include "perptail/qlaw.hpp"

namespace perptail {

/// Solution record of psi'_alpha(s) = t. The bracket is the one found by the
/// geometric search, so psi'(bracket_lo) < t < psi'(bracket_hi) strictly.
struct SaddlePoint {
  double t = 0.0;
  double s = 0.0;
  double residual = 0.0;  // psi'_alpha(s) - t
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// psi'_alpha(s) = alpha (g(s)-1)/s, extended by continuity to alpha E[Q] at 0.
double psi_prime(double alpha, const QLaw& law, double s);

/// psi''_alpha(s); switches to the moment series near 0 where the closed form
/// cancels catastrophically.
double psi_second(double alpha, const QLaw& law, double s);

double psi_third(double alpha, const QLaw& law, double s);

/// psi_alpha(s) = alpha * integral_0^s (g(y)-1)/y dy.
/// Taylor patch on [0, y0] from exact moments, adaptive Gauss-Kronrod panels
/// beyond; absolute error target 1e-10 * (1 + |psi|).
double psi(double alpha, const QLaw& law, double s);

/// Unique positive root of psi'_alpha(s) = t; requires a finite-b law and
/// t > max(alpha E[Q], 0).
SaddlePoint solve_saddle(double alpha, const QLaw& law, double t);

namespace detail {

struct RootOptions {
  double rel_tol = 1e-10;
  double s_max = 1e4;
  double s_min = 1e-13;
  int max_iterations = 200;
};

/// Safeguarded Newton for f(s) = t with f strictly increasing on (0, inf).
/// Brackets by doubling/halving from s = 1, then Newton with bisection
/// fallback. Shared by the saddle and Legendre solvers.
SaddlePoint solve_increasing(const std::function<double(double)>& f,
                             const std::function<double(double)>& df, double t,
                             double guess, const char* below_range_msg,
                             const RootOptions& opts = {});

/// Adaptive Gauss-Kronrod 15(7) integration of a smooth integrand.
double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double abs_tol, double rel_tol);

}  // namespace detail

}  // namespace perptail
