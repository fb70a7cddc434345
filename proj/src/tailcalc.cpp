#include "perptail/tailcalc.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "perptail/errors.hpp"

namespace perptail {

namespace {

constexpr double kE = 2.718281828459045235360287471353;
constexpr double kLog2Pi = 1.837877066409345483560659472811;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

double phi_prime_at(double alpha, const QLaw& law, double s) {
  if (s == 0.0) return (1.0 + alpha) * moment(law, 1);
  return mgf_ratio(law, s, 1) + psi_prime(alpha, law, s);
}

double phi_second_at(double alpha, const QLaw& law, double s) {
  const double r1 = mgf_ratio(law, s, 1);
  return mgf_ratio(law, s, 2) - r1 * r1 + psi_second(alpha, law, s);
}

}  // namespace

double phi(double alpha, const QLaw& law, double s, int k) {
  if (law.b_infinite)
    bad("phi requires a finite essential supremum; the exp validation law is not admissible");
  if (!(alpha > 0)) bad("phi: alpha must be positive");
  if (!(s >= 0)) bad("phi: s must be nonnegative");
  switch (k) {
    case 0:
      return log_mgf(law, s) + psi(alpha, law, s);
    case 1:
      return phi_prime_at(alpha, law, s);
    case 2:
      return phi_second_at(alpha, law, s);
    case 3: {
      const double r1 = mgf_ratio(law, s, 1);
      const double r2 = mgf_ratio(law, s, 2);
      const double r3 = mgf_ratio(law, s, 3);
      return r3 - 3.0 * r2 * r1 + 2.0 * r1 * r1 * r1 + psi_third(alpha, law, s);
    }
    default:
      bad("phi: derivative order k must be in 0..3");
  }
}

TailEstimate tail_estimate(double alpha, const QLaw& law, double t) {
  TailEstimate est;
  est.t = t;
  est.saddle = solve_saddle(alpha, law, t);
  const double s = est.saddle.s;
  est.exponent = -t * s + psi(alpha, law, s);
  est.log_prefactor_tail =
      0.5 * std::log(t) - std::log(alpha) - 0.5 * (kLog2Pi + std::log(law.b));
  est.log_prefactor_density = est.log_prefactor_tail + std::log(s);
  est.log_density = est.exponent + est.log_prefactor_density;
  est.log_tail = est.exponent + est.log_prefactor_tail;
  return est;
}

double legendre_exponent(double alpha, const QLaw& law, double t) {
  if (law.b_infinite)
    bad("legendre_exponent requires a finite essential supremum");
  if (!(alpha > 0)) bad("legendre_exponent: alpha must be positive");
  const double floor = (1.0 + alpha) * moment(law, 1);
  if (!(t > floor) || !(t > 0.0))
    throw numeric_error("subcritical t: I(t)=0 boundary case");

  const double ta = t / alpha;
  const double guess =
      ta > kE ? (std::log(ta) + std::log(std::log(ta))) / law.b : -1.0;
  const SaddlePoint sp = detail::solve_increasing(
      [&](double s) { return phi_prime_at(alpha, law, s); },
      [&](double s) { return phi_second_at(alpha, law, s); }, t, guess,
      "subcritical t: I(t)=0 boundary case");
  return t * sp.s - phi(alpha, law, sp.s, 0);
}

double debruijn_log_density(double t) {
  if (!(t > kE)) bad("debruijn_log_density requires t > e");
  const QLaw dickman = QLaw::point_mass(1.0);
  const SaddlePoint sp = solve_saddle(1.0, dickman, t);
  // integral_0^s (y e^y - e^y + 1)/y dy = (e^s - 1) - psi_1(s); at the root
  // e^s - 1 = t s, so the overflow-safe form below agrees to the residual.
  const double lead = sp.s < 700.0 ? std::expm1(sp.s) : t * sp.s;
  return -0.5 * (kLog2Pi + std::log(t)) - (lead - psi(1.0, dickman, sp.s));
}

std::vector<TailEstimate> tail_grid(double alpha, const QLaw& law,
                                    std::span<const double> ts, Exec exec) {
  std::vector<TailEstimate> out(ts.size());
  std::string first_error;
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(dynamic) if (par)
  for (long i = 0; i < static_cast<long>(ts.size()); ++i) {
    try {
      out[static_cast<std::size_t>(i)] = tail_estimate(alpha, law, ts[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) throw numeric_error(first_error);
  return out;
}

std::vector<double> make_grid(double start, double stop, int points, bool log_spaced) {
  if (points < 1) bad("grid: points must be >= 1");
  if (log_spaced && (!(start > 0) || !(stop > 0)))
    bad("grid: log spacing requires positive endpoints");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = start;
    return out;
  }
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    out[static_cast<std::size_t>(i)] =
        log_spaced ? start * std::pow(stop / start, f) : start + f * (stop - start);
  }
  return out;
}

}  // namespace perptail
