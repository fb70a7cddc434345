#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

namespace perptail {

using bigint = boost::multiprecision::cpp_int;

/// Unsigned Stirling numbers of the first kind, exact via the recurrence
/// c(n,k) = (n-1) c(n-1,k) + c(n-1,k-1). Values overflow every fixed-width
/// integer well before n = 64, hence the big-integer entries.
class StirlingTable {
 public:
  explicit StirlingTable(int max_n = 64);

  const bigint& at(int n, int k) const;
  int max_n() const { return max_n_; }

  /// Process-wide table, built once and shared read-only.
  static const StirlingTable& shared();

 private:
  int max_n_;
  std::vector<bigint> c_;  // row-major triangular, row n holds n+1 entries
};

/// c(n,k) for 0 <= k <= n <= 64.
bigint stirling_first_unsigned(int n, int k);

struct ExpansionResult {
  double t = 0.0;
  double value = 0.0;
  int terms_used = 0;
  double last_term_magnitude = 0.0;
  bool converged = true;  // false if the reported terms grew in magnitude
};

/// Convergent series for the saddle point when P{Q=b}=p, P{Q<=0}=1-p:
/// s(t) = b^{-1}[log(dt) + loglog(dt) + sum ...], d = 1/(alpha b p).
ExpansionResult salpha_series(double alpha, double b, double p, double t, int n_terms);

/// The explicit k=5 truncation of the same series, transcribed term by term.
double salpha_expansion_k5(double alpha, double b, double p, double t);

/// Predicted log-density through the (log dt)^{-3} term, times -t/b.
double logdensity_expansion_k3(double alpha, double b, double p, double t);

/// Classical expansion of log q_alpha(t) for Q = 1:
/// -t[log t + loglog t - (1+log alpha)(1 + 1/log t) + loglog t/log t].
double verv_expansion(double alpha, double t);

struct Example4Expansion {
  double s_expansion = 0.0;
  double logdensity_expansion = 0.0;
};

/// Both displayed expansions for Q = b - Gamma(theta, scale lambda),
/// transcribed literally with the composite constants below.
Example4Expansion example4_expansions(double alpha, double b, double theta,
                                      double lambda, double t);

/// theta*b/lambda + (1+theta)^2 log(1/b) — the 1/log(t/alpha) coefficient in
/// the saddle expansion.
double example4_s_shift_coeff(double theta, double lambda, double b);

/// Same constant shifted by -(1+theta) for the log-density expansion.
double example4_logdensity_shift_coeff(double theta, double lambda, double b);

}  // namespace perptail
