#pragma once

#include <string>
#include <string_view>

#include "perptail/rng.hpp"

namespace perptail {

enum class QKind { point_mass, two_point, gamma_shift, exp_validation };

/// Law of the payment variable Q. All tail machinery requires a finite
/// essential supremum b; the exponential variant exists only to validate the
/// simulator against the known gamma fixed point and is rejected everywhere
/// else (b_infinite is set).
struct QLaw {
  QKind kind = QKind::point_mass;
  double b = 1.0;       // essential supremum, finite variants
  double p = 1.0;       // two_point: P{Q = b}
  double q0 = 0.0;      // two_point: atom at q0 <= 0
  double theta = 1.0;   // gamma_shift: Q = b - eta, eta ~ Gamma(theta, scale lambda)
  double lambda = 1.0;
  double c = 1.0;       // exp_validation: Q ~ Exp(rate c)
  bool b_infinite = false;

  static QLaw point_mass(double b);
  static QLaw two_point(double b, double p, double q0);
  static QLaw gamma_shift(double b, double theta, double lambda);
  static QLaw exp_validation(double c);
};

/// g^(k)(s) = d^k/ds^k E[e^{sQ}] in closed form, k in 0..3.
double mgf(const QLaw& law, double s, int k = 0);

/// g(s) - 1 evaluated without cancellation (expm1 forms); exact down to
/// denormal s, which is what the psi integrand needs near the origin.
double mgf_m1(const QLaw& law, double s);

/// log g(s); never overflows for admissible s.
double log_mgf(const QLaw& law, double s);

/// g^(k)(s)/g(s); stays finite where g itself would overflow.
double mgf_ratio(const QLaw& law, double s, int k);

/// E[Q^k], any k >= 0.
double moment(const QLaw& law, int k);

/// f(s) = E[e^{-s(b-Q)}] = e^{-bs} g(s); value in (0,1], nonincreasing.
double f_ratio(const QLaw& law, double s);

/// One draw of Q.
double sample_q(const QLaw& law, RngStream& rng);

/// Throws std::invalid_argument if the parameters violate the law invariants.
void check_law(const QLaw& law);

/// Parses the CLI law specifier, e.g. "twopoint:b=1,p=0.5,q0=-1".
QLaw parse_law(std::string_view text);

/// Inverse of parse_law; parse(format(law)) reproduces law exactly and
/// format(parse(text)) == text for canonical specifiers.
std::string format_law(const QLaw& law);

}  // namespace perptail
