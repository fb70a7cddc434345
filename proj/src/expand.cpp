#include "perptail/expand.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "perptail/errors.hpp"

namespace perptail {

namespace {

constexpr double kE = 2.718281828459045235360287471353;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

void check_series_params(double alpha, double b, double p) {
  if (!(alpha > 0)) bad("expansion: alpha must be positive");
  if (!(b > 0)) bad("expansion: b must be positive");
  if (!(p > 0) || !(p <= 1)) bad("expansion: p must lie in (0,1]");
}

}  // namespace

StirlingTable::StirlingTable(int max_n) : max_n_(max_n) {
  if (max_n < 0 || max_n > 64) bad("StirlingTable: max_n must be in 0..64");
  c_.resize(static_cast<std::size_t>(max_n + 1) * (max_n + 2) / 2);
  auto idx = [](int n, int k) { return static_cast<std::size_t>(n) * (n + 1) / 2 + k; };
  c_[idx(0, 0)] = 1;
  for (int n = 1; n <= max_n; ++n) {
    c_[idx(n, 0)] = 0;
    for (int k = 1; k <= n; ++k) {
      bigint v = bigint(n - 1) * c_[idx(n - 1, k)];
      if (k - 1 <= n - 1) v += c_[idx(n - 1, k - 1)];
      c_[idx(n, k)] = v;
    }
  }
}

const bigint& StirlingTable::at(int n, int k) const {
  if (n < 0 || n > max_n_ || k < 0 || k > n)
    bad("stirling_first_unsigned: require 0 <= k <= n <= " + std::to_string(max_n_));
  return c_[static_cast<std::size_t>(n) * (n + 1) / 2 + k];
}

const StirlingTable& StirlingTable::shared() {
  static const StirlingTable table(64);
  return table;
}

bigint stirling_first_unsigned(int n, int k) { return StirlingTable::shared().at(n, k); }

ExpansionResult salpha_series(double alpha, double b, double p, double t, int n_terms) {
  check_series_params(alpha, b, p);
  if (n_terms < 0 || n_terms > 20) bad("salpha_series: n_terms must be in 0..20");
  const double delta = 1.0 / (alpha * b * p);
  const double L1 = std::log(delta * t);
  if (!(L1 > 1.0))
    throw numeric_error("series precondition violated: log(delta t) must exceed 1");
  const double L2 = std::log(L1);

  const StirlingTable& st = StirlingTable::shared();
  ExpansionResult res;
  res.t = t;
  res.terms_used = n_terms;
  double value = L1 + L2;
  double prev_mag = std::numeric_limits<double>::infinity();
  double last = std::numeric_limits<double>::quiet_NaN();
  for (int n = 1; n <= n_terms; ++n) {
    double inner = 0.0;
    double mfact = 1.0;
    double L2m = 1.0;
    for (int m = 1; m <= n; ++m) {
      mfact *= m;
      L2m *= L2;
      const double sign = ((n + m) % 2 == 0) ? 1.0 : -1.0;
      inner += sign * st.at(n, n - m + 1).convert_to<double>() * L2m / mfact;
    }
    const double term = (((n + 1) % 2 == 0) ? 1.0 : -1.0) * inner / std::pow(L1, n);
    value += term;
    last = term;
    const double mag = std::fabs(term);
    if (mag > prev_mag) res.converged = false;
    prev_mag = mag;
  }
  res.value = value / b;
  res.last_term_magnitude = n_terms == 0 ? 0.0 : std::fabs(last);
  return res;
}

double salpha_expansion_k5(double alpha, double b, double p, double t) {
  check_series_params(alpha, b, p);
  const double delta = 1.0 / (alpha * b * p);
  const double L1 = std::log(delta * t);
  if (!(L1 > 1.0))
    throw numeric_error("series precondition violated: log(delta t) must exceed 1");
  const double L2 = std::log(L1);
  return (L1 + L2 + L2 / L1 + L2 * (2.0 - L2) / (2.0 * L1 * L1) +
          L2 * (6.0 - 9.0 * L2 + 2.0 * L2 * L2) / (6.0 * L1 * L1 * L1) +
          L2 * (12.0 - 36.0 * L2 + 22.0 * L2 * L2 - 3.0 * L2 * L2 * L2) /
              (12.0 * L1 * L1 * L1 * L1)) /
         b;
}

double logdensity_expansion_k3(double alpha, double b, double p, double t) {
  check_series_params(alpha, b, p);
  const double delta = 1.0 / (alpha * b * p);
  const double L1 = std::log(delta * t);
  if (!(L1 > 1.0))
    throw numeric_error("series precondition violated: log(delta t) must exceed 1");
  const double L2 = std::log(L1);
  const double bracket =
      L1 + L2 - 1.0 + (L2 - 1.0) / L1 + (L2 * (4.0 - L2) - 4.0) / (2.0 * L1 * L1) +
      L2 * (36.0 - 15.0 * L2 + 2.0 * L2 * L2) / (6.0 * L1 * L1 * L1);
  return -t * bracket / b;
}

double verv_expansion(double alpha, double t) {
  if (!(alpha > 0)) bad("verv_expansion: alpha must be positive");
  if (!(t > kE)) throw numeric_error("verv_expansion requires t > e");
  const double L1 = std::log(t);
  const double L2 = std::log(L1);
  return -t * (L1 + L2 - (1.0 + std::log(alpha)) * (1.0 + 1.0 / L1) + L2 / L1);
}

double example4_s_shift_coeff(double theta, double lambda, double b) {
  return theta * b / lambda + (1.0 + theta) * (1.0 + theta) * std::log(1.0 / b);
}

double example4_logdensity_shift_coeff(double theta, double lambda, double b) {
  return example4_s_shift_coeff(theta, lambda, b) - 1.0 - theta;
}

Example4Expansion example4_expansions(double alpha, double b, double theta,
                                      double lambda, double t) {
  if (!(alpha > 0) || !(b > 0) || !(theta > 0) || !(lambda > 0))
    bad("example4_expansions: parameters must be positive");
  const double ratio = t / alpha;
  if (!(ratio > std::exp(kE)))
    throw numeric_error("example4_expansions requires t/alpha > e^e");
  const double l = std::log(ratio);
  const double ll = std::log(l);
  const double op_theta = 1.0 + theta;
  Example4Expansion out;
  out.s_expansion =
      (l + op_theta * ll + op_theta * op_theta * ll / l +
       example4_s_shift_coeff(theta, lambda, b) / l) /
      b;
  out.logdensity_expansion =
      -t / b *
      (l + op_theta * ll - 1.0 + op_theta * op_theta * ll / l +
       example4_logdensity_shift_coeff(theta, lambda, b) / l);
  return out;
}

}  // namespace perptail
