#pragma once

#include <span>
#include <vector>

#include "perptail/saddle.hpp"

namespace perptail {

/// Asymptotic log-density / log-tail of Z_alpha at t, assembled from the
/// saddle point. Everything is kept in natural log; the exponent is never
/// exponentiated, so all fields stay finite far beyond the underflow point
/// of the density itself.
struct TailEstimate {
  double t = 0.0;
  SaddlePoint saddle;
  double exponent = 0.0;              // -t s + psi(s)
  double log_prefactor_density = 0.0; // log[t^{1/2} s / (alpha (2 pi b)^{1/2})]
  double log_prefactor_tail = 0.0;    // log[t^{1/2} / (alpha (2 pi b)^{1/2})]
  double log_density = 0.0;
  double log_tail = 0.0;
};

/// phi_alpha^(k)(s) where phi_alpha(s) = log E[e^{s Z_alpha}] = log g + psi.
double phi(double alpha, const QLaw& law, double s, int k = 0);

TailEstimate tail_estimate(double alpha, const QLaw& law, double t);

/// Legendre transform I(t) = sup_{s>=0} (st - phi_alpha(s)), attained at the
/// root of phi'_alpha(s) = t. Requires t > phi'_alpha(0+).
double legendre_exponent(double alpha, const QLaw& law, double t);

/// de Bruijn's classical formula for the Dickman density, log q_1(t) =
/// -log sqrt(2 pi t) - [(e^s - 1) - psi_1(s)] at s = s_1(t); requires t > e.
double debruijn_log_density(double t);

enum class Exec { serial, parallel };

/// Evaluates tail_estimate over a grid of targets; embarrassingly parallel.
/// The serial path is the reference the parallel one is tested against.
std::vector<TailEstimate> tail_grid(double alpha, const QLaw& law,
                                    std::span<const double> ts,
                                    Exec exec = Exec::parallel);

/// Geometric or linear grid helper for the CLI and tests.
std::vector<double> make_grid(double start, double stop, int points, bool log_spaced);

}  // namespace perptail
