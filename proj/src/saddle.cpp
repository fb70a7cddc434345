#include "perptail/saddle.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "perptail/errors.hpp"

namespace perptail {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

void require_finite_b(const QLaw& law, const char* op) {
  if (law.b_infinite)
    throw std::invalid_argument(std::string(op) +
                                " requires a finite essential supremum; the exp validation law is not admissible");
}

// Integral of the Taylor series of (g(y)-1)/y over [0, x]:
//   sum_{k>=1} m_k x^k / (k * k!).
// Returns nullopt when the terms do not decay, so the caller can shrink x.
std::optional<double> taylor_head(const QLaw& law, double x) {
  double acc = 0.0;
  double pk = 1.0;  // x^k / k!
  double prev = std::numeric_limits<double>::infinity();
  int below = 0;
  for (int k = 1; k <= 48; ++k) {
    pk *= x / k;
    const double term = moment(law, k) * pk / k;
    acc += term;
    const double mag = std::fabs(term);
    if (k >= 4 && mag > prev) return std::nullopt;
    prev = mag;
    if (mag <= 1e-17 * (std::fabs(acc) + 1e-300)) {
      if (++below >= 2) return acc;
    } else {
      below = 0;
    }
  }
  return std::nullopt;
}

// Magnitude scale of Q; controls series switchover points.
double law_scale(const QLaw& law) {
  switch (law.kind) {
    case QKind::point_mass:
      return law.b;
    case QKind::two_point:
      return std::max(law.b, -law.q0);
    case QKind::gamma_shift:
      return law.b + law.lambda * (law.theta + 1.0);
    case QKind::exp_validation:
      return 1.0 / law.c;
  }
  return 1.0;
}

// sum_{k>=n0} m_k * c(k) * s^{k-n0} / k! for the psi derivative series
double derivative_series(const QLaw& law, double s, int n0) {
  double acc = 0.0;
  double pk = 1.0;  // s^{k-n0} * (n0 leading factorial part folded in below)
  double kfact = 1.0;
  for (int k = 1; k < n0; ++k) kfact *= k;
  for (int k = n0; k <= 40; ++k) {
    kfact *= k;
    double coeff = 1.0;
    for (int j = 1; j < n0; ++j) coeff *= (k - j);
    const double term = moment(law, k) * coeff * pk / kfact;
    acc += term;
    if (std::fabs(term) <= 1e-17 * (std::fabs(acc) + 1e-300) && k > n0 + 2) break;
    pk *= s;
  }
  return acc;
}

// --- Gauss-Kronrod 15(7) ---

constexpr double kGKNodes[8] = {
    0.991455371120812639206854697526, 0.949107912342758524526189684048,
    0.864864423359769072789712788641, 0.741531185599394439863864773281,
    0.586087235467691130294144838259, 0.405845151377397166906606412077,
    0.207784955007898467600689403773, 0.0};
constexpr double kKWeights[8] = {
    0.022935322010529224963732008059, 0.063092092629978553290700663189,
    0.104790010322250183839876322542, 0.140653259715525918745189590510,
    0.169004726639267902826583426599, 0.190350578064785409913256402421,
    0.204432940075298892414161999235, 0.209482141084727828012999174891};
constexpr double kGWeights[4] = {
    0.129484966168869693270611432679, 0.279705391489276667901467771424,
    0.381830050505118944950369775489, 0.417959183673469387755102040816};

struct PanelEval {
  double kronrod, err;
};

PanelEval gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fk = 0.0, fg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double x = h * kGKNodes[i];
    const double v = (i == 7) ? f(c) : f(c - x) + f(c + x);
    fk += kKWeights[i] * v;
    // the odd-index Kronrod nodes (and the center) carry the embedded G7 rule
    if (i % 2 == 1) fg += kGWeights[i / 2] * v;
  }
  fk *= h;
  fg *= h;
  return {fk, std::fabs(fk - fg)};
}

}  // namespace

namespace detail {

double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double abs_tol, double rel_tol) {
  if (!(b > a)) return 0.0;
  struct Panel {
    double a, b, value, err;
  };
  std::vector<Panel> work;
  {
    const PanelEval e = gk15(f, a, b);
    work.push_back({a, b, e.kronrod, e.err});
  }
  const double total_len = b - a;
  double acc = 0.0;
  std::size_t splits = 0;
  while (!work.empty()) {
    const Panel p = work.back();
    work.pop_back();
    const double len = p.b - p.a;
    const double tol_here =
        std::max(abs_tol * (len / total_len), rel_tol * std::fabs(p.value));
    if (p.err <= tol_here || len <= 1e-14 * (std::fabs(p.a) + std::fabs(p.b) + 1.0)) {
      acc += p.value;
      continue;
    }
    if (++splits > 20000) {
      double rest = acc;
      for (const Panel& q : work) rest += q.value;
      throw numeric_error("adaptive quadrature did not converge after max refinement",
                          rest + p.value);
    }
    const double mid = 0.5 * (p.a + p.b);
    const PanelEval l = gk15(f, p.a, mid);
    const PanelEval r = gk15(f, mid, p.b);
    work.push_back({p.a, mid, l.kronrod, l.err});
    work.push_back({mid, p.b, r.kronrod, r.err});
  }
  return acc;
}

SaddlePoint solve_increasing(const std::function<double(double)>& f,
                             const std::function<double(double)>& df, double t,
                             double guess, const char* below_range_msg,
                             const RootOptions& opts) {
  double hi = 1.0;
  while (true) {
    const double v = f(hi);
    if (!(v <= t)) break;
    hi *= 2.0;
    if (hi > opts.s_max)
      throw numeric_error("target out of numeric range: bracket search exceeded s_max");
  }
  double lo = std::min(1.0, hi);
  while (true) {
    const double v = f(lo);
    if (!(v >= t)) break;
    lo *= 0.5;
    if (lo < opts.s_min) throw numeric_error(below_range_msg);
  }

  SaddlePoint sp;
  sp.t = t;
  sp.bracket_lo = lo;
  sp.bracket_hi = hi;
  double x = (guess > lo && guess < hi) ? guess : std::sqrt(lo * hi);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const double fx = f(x);
    sp.iterations = it;
    sp.s = x;
    sp.residual = fx - t;
    if (std::isfinite(fx) && std::fabs(fx - t) <= opts.rel_tol * t) return sp;
    if (!std::isfinite(fx) || fx > t)
      hi = x;
    else
      lo = x;
    const double dfx = df(x);
    double xn = x - (fx - t) / dfx;
    if (!std::isfinite(xn) || xn <= lo || xn >= hi) xn = 0.5 * (lo + hi);
    x = xn;
  }
  throw numeric_error("saddle iteration did not converge within the residual tolerance",
                      sp.s);
}

}  // namespace detail

double psi_prime(double alpha, const QLaw& law, double s) {
  require_finite_b(law, "psi_prime");
  if (!(alpha > 0)) bad("psi_prime: alpha must be positive");
  if (!(s >= 0)) bad("psi_prime: s must be nonnegative");
  if (s == 0.0) return alpha * moment(law, 1);
  return alpha * mgf_m1(law, s) / s;
}

double psi_second(double alpha, const QLaw& law, double s) {
  require_finite_b(law, "psi_second");
  if (!(s >= 0)) bad("psi_second: s must be nonnegative");
  if (s * law_scale(law) < 0.01)
    return alpha * derivative_series(law, s, 2);
  return alpha * (mgf(law, s, 1) - mgf_m1(law, s) / s) / s;
}

double psi_third(double alpha, const QLaw& law, double s) {
  require_finite_b(law, "psi_third");
  if (!(s >= 0)) bad("psi_third: s must be nonnegative");
  if (s * law_scale(law) < 0.01)
    return alpha * derivative_series(law, s, 3);
  return (alpha * mgf(law, s, 2) - 2.0 * psi_second(alpha, law, s)) / s;
}

double psi(double alpha, const QLaw& law, double s) {
  require_finite_b(law, "psi");
  if (!(alpha > 0)) bad("psi: alpha must be positive");
  if (!(s >= 0)) bad("psi: s must be nonnegative");
  if (s == 0.0) return 0.0;

  double y0 = std::min(s, std::min(0.1, 0.1 / law.b));
  std::optional<double> head;
  for (;;) {
    head = taylor_head(law, y0);
    if (head) break;
    y0 *= 0.5;
    if (y0 < 1e-300) throw numeric_error("psi: Taylor patch failed to converge");
  }
  double total = *head;
  if (s > y0) {
    total += detail::adaptive_gk([&law](double y) { return mgf_m1(law, y) / y; },
                                 y0, s, 1e-12, 1e-12);
  }
  return alpha * total;
}

SaddlePoint solve_saddle(double alpha, const QLaw& law, double t) {
  require_finite_b(law, "solve_saddle");
  if (!(alpha > 0)) bad("solve_saddle: alpha must be positive");
  const double floor = alpha * moment(law, 1);
  if (!(t > 0.0) || !(t > floor))
    throw numeric_error("target below saddle range");

  const double ta = t / alpha;
  const double guess =
      (ta > 2.718281828459045 && law.b > 0)
          ? (std::log(ta) + std::log(std::log(ta))) / law.b
          : -1.0;
  return detail::solve_increasing(
      [&](double s) { return psi_prime(alpha, law, s); },
      [&](double s) { return psi_second(alpha, law, s); }, t, guess,
      "target below saddle range");
}

}  // namespace perptail
