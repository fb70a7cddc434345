#include "perptail/exactdens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "perptail/errors.hpp"

namespace perptail {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

double lse2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Composite Newton-Cotes weights over n uniform intervals: Simpson when n is
// even, Simpson + 3/8 tail when odd (trapezoid for the lone n = 1).
std::vector<double> composite_weights(int n, double h) {
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  int m = n;
  if (m % 2 == 1) {
    w[static_cast<std::size_t>(n)] += 3.0 * h / 8.0;
    w[static_cast<std::size_t>(n) - 1] += 9.0 * h / 8.0;
    w[static_cast<std::size_t>(n) - 2] += 9.0 * h / 8.0;
    w[static_cast<std::size_t>(n) - 3] += 3.0 * h / 8.0;
    m -= 3;
  }
  if (m > 0) {
    w[0] += h / 3.0;
    w[static_cast<std::size_t>(m)] += h / 3.0;
    for (int j = 1; j < m; ++j)
      w[static_cast<std::size_t>(j)] += (j % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
  }
  return w;
}

double lse_span(std::span<const double> terms) {
  double m = kNegInf;
  for (double v : terms) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : terms) s += std::exp(v - m);
  return m + std::log(s);
}

// --- singular template on (b, 2b] ---
//
// The density q inherits a ((t-b)/b)^alpha Holder term at t = b+ from the end
// of the closed-form first interval; plain Simpson then converges like
// h^{1+alpha} for alpha < 1. The stepping therefore integrates the template
//   sigma(y) = kappa~ b / y * ((y-b)/b)^alpha
// analytically on (b, 2b] and applies the grid rule to the smooth remainder
// r = q + sigma.

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

// int_0^x u^alpha/(1+u) du by alternating series, x <= 0.5
double sing_primitive_series(double alpha, double x) {
  double acc = 0.0;
  const double xp = std::pow(x, alpha + 1.0);
  double xj = 1.0;
  for (int j = 0; j < 80; ++j) {
    const double term = xp * xj / (alpha + 1.0 + j);
    acc += (j % 2 == 0) ? term : -term;
    if (term < 1e-18 * (std::fabs(acc) + 1e-300)) break;
    xj *= x;
  }
  return acc;
}

// cumulative J[j] = int_0^{j/spu} u^alpha/(1+u) du at every window node
std::vector<double> sing_primitive_table(double alpha, int spu) {
  std::vector<double> J(static_cast<std::size_t>(spu) + 1, 0.0);
  const double h = 1.0 / spu;
  const auto f = [alpha](double u) { return std::pow(u, alpha) / (1.0 + u); };
  for (int j = 1; j <= spu; ++j) {
    const double x = j * h;
    if (x <= 0.5) {
      J[static_cast<std::size_t>(j)] = sing_primitive_series(alpha, x);
    } else {
      double cell = 0.0;
      const double c = x - 0.5 * h, hh = 0.5 * h;
      for (int i = 0; i < 8; ++i) {
        const double dx = hh * kGKNodes[i];
        cell += kKWeights[i] * (i == 7 ? f(c) : f(c - dx) + f(c + dx));
      }
      J[static_cast<std::size_t>(j)] = J[static_cast<std::size_t>(j) - 1] + cell * hh;
    }
  }
  return J;
}

struct GridWorkspace {
  double alpha = 1.0, b = 1.0, h = 0.0;
  std::size_t spu = 0, n_nodes = 0;
  std::vector<double> lq;     // log q~ at nodes, kappa~ = 1
  std::vector<double> sigma;  // template values at nodes spu..2spu (index j-spu)
  std::vector<double> J;      // cumulative singular primitive at window nodes

  double t_of(std::size_t i) const { return static_cast<double>(i) * h; }
  double q_of(std::size_t i) const { return std::exp(lq[i]); }
  // r-representation value at node j in [spu, 2spu]
  double r_of(std::size_t j) const { return q_of(j) + sigma[j - spu]; }
  // int sigma over [t_j1, t_j2], node indices in [spu, 2spu];
  // y = b(1+u) turns it into b * int u^alpha/(1+u) du
  double sigma_integral(std::size_t j1, std::size_t j2) const {
    return b * (J[j2 - spu] - J[j1 - spu]);
  }
};

// Window integral over [t_i - b, t_i] excluding the implicit endpoint node i;
// returns the known part and the endpoint weight. Splits the composite rule
// at 2b so no panel mixes the r- and q-representations.
struct WindowSum {
  double known = 0.0;
  double w_end = 0.0;
};

WindowSum window_integral_direct(const GridWorkspace& g, std::size_t i) {
  WindowSum out;
  const std::size_t lo = i - g.spu;
  const std::size_t two_b = 2 * g.spu;
  double known = 0.0;
  if (lo < g.spu) {
    // analytic piece over [t_lo, b] of the first-interval closed form
    const double x = static_cast<double>(lo) / g.spu;
    known += g.b / g.alpha * (1.0 - std::pow(x, g.alpha));
  }
  const std::size_t grid_lo = std::max(lo, g.spu);
  const std::size_t split = std::min(i, two_b);
  if (split > grid_lo) {  // r-representation segment [grid_lo, split]
    const auto w = composite_weights(static_cast<int>(split - grid_lo), g.h);
    for (std::size_t j = grid_lo; j <= split; ++j) {
      const double wt = w[j - grid_lo];
      if (wt == 0.0) continue;
      if (j == i) {
        out.w_end = wt;
        known += wt * g.sigma[j - g.spu];  // the unknown is q_i, not r_i
      } else {
        known += wt * g.r_of(j);
      }
    }
    known -= g.sigma_integral(grid_lo, split);
  }
  if (i > split) {  // q-representation segment [split, i]
    const auto w = composite_weights(static_cast<int>(i - split), g.h);
    for (std::size_t j = split; j < i; ++j)
      if (w[j - split] != 0.0) known += w[j - split] * g.q_of(j);
    out.w_end = w[i - split];
  }
  out.known = known;
  return out;
}

}  // namespace

DensityGrid detail_build_grid(double alpha, double b, double t_max, int spu,
                              bool reference_stepping) {
  if (!(alpha > 0)) bad("build_density_grid: alpha must be positive");
  if (!(b > 0)) bad("build_density_grid: b must be positive");
  if (!(t_max >= 3.0 * b)) bad("build_density_grid: t_max must be at least 3b");
  if (spu < 256) bad("build_density_grid: steps_per_unit must be at least 256");
  if (spu % 2 != 0) bad("build_density_grid: steps_per_unit must be even");
  if (!(alpha < 3.0 * spu))
    bad("build_density_grid: alpha too large for the implicit step at this resolution");

  DensityGrid grid;
  grid.alpha = alpha;
  grid.b = b;
  grid.steps_per_unit = spu;
  const double h = b / spu;
  grid.h = h;
  const std::size_t N = static_cast<std::size_t>(std::llround(t_max / h));
  grid.t_max = static_cast<double>(N) * h;
  const std::size_t uspu = static_cast<std::size_t>(spu);

  GridWorkspace g;
  g.alpha = alpha;
  g.b = b;
  g.h = h;
  g.spu = uspu;
  g.n_nodes = N;
  g.lq.assign(N + 1, kNegInf);

  // (i) closed-form first interval, provisional kappa~ = 1
  for (std::size_t i = 1; i <= uspu; ++i)
    g.lq[i] = (alpha - 1.0) * std::log(static_cast<double>(i) / spu);

  g.sigma.assign(uspu + 1, 0.0);
  for (std::size_t j = 0; j <= uspu; ++j) {
    const double x = static_cast<double>(j) / spu;
    g.sigma[j] = b / g.t_of(uspu + j) * std::pow(x, alpha);
  }
  g.J = sing_primitive_table(alpha, spu);

  // (ii) Volterra stepping of t q(t) = alpha * integral_{t-b}^{t} q. Direct
  // window sums while any window touches the template region (t <= 3b), then
  // either the sliding scheme or the per-node reference beyond.
  const std::size_t direct_end = std::min(N, 3 * uspu);
  for (std::size_t i = uspu + 1; i <= direct_end; ++i) {
    const WindowSum ws = window_integral_direct(g, i);
    g.lq[i] = std::log(alpha * ws.known / (g.t_of(i) - alpha * ws.w_end));
  }

  if (reference_stepping) {
    std::vector<double> scratch;
    const std::vector<double> w = composite_weights(spu, h);
    for (std::size_t i = direct_end + 1; i <= N; ++i) {
      scratch.clear();
      for (std::size_t j = i - uspu; j < i; ++j)
        scratch.push_back(std::log(w[j - (i - uspu)]) + g.lq[j]);
      const double s_known = lse_span(scratch);
      g.lq[i] = std::log(alpha) + s_known - std::log(g.t_of(i) - alpha * h / 3.0);
    }
  } else if (N > direct_end) {
    // Sliding parity sums. The Simpson weight of node j inside the window
    // [i-spu, i] depends only on parity(j+i), so a slide touches one element
    // per bucket. Periodic exact rebuilds stop roundoff accumulation.
    double scale = kNegInf;
    double p_even = 0.0, p_odd = 0.0;
    std::size_t since_rebuild = 0;
    auto rebuild = [&](std::size_t i) {
      scale = kNegInf;
      for (std::size_t j = i - uspu; j < i; ++j) scale = std::max(scale, g.lq[j]);
      p_even = p_odd = 0.0;
      for (std::size_t j = i - uspu; j < i; ++j) {
        const double e = std::exp(g.lq[j] - scale);
        if (j % 2 == 0)
          p_even += e;
        else
          p_odd += e;
      }
      since_rebuild = 0;
    };
    rebuild(direct_end + 1);
    for (std::size_t i = direct_end + 1; i <= N; ++i) {
      if (since_rebuild >= uspu / 2) rebuild(i);
      double e_left = std::exp(g.lq[i - uspu] - scale);
      double& p_same = (i % 2 == 0) ? p_even : p_odd;
      double& p_other = (i % 2 == 0) ? p_odd : p_even;
      double s_scaled = (h / 3.0) * (4.0 * p_other + 2.0 * p_same - e_left);
      if (!(s_scaled > 0.0)) {
        rebuild(i);
        e_left = std::exp(g.lq[i - uspu] - scale);
        s_scaled = (h / 3.0) * (4.0 * p_other + 2.0 * p_same - e_left);
        if (!(s_scaled > 0.0))
          throw numeric_error("density grid stepping lost positivity at t = " +
                              std::to_string(g.t_of(i)));
      }
      g.lq[i] = std::log(alpha) + scale + std::log(s_scaled) -
                std::log(g.t_of(i) - alpha * h / 3.0);
      p_same += std::exp(g.lq[i] - scale) - e_left;
      ++since_rebuild;
      if (g.lq[i] - scale > 60.0) rebuild(i + 1);
    }
  }

  // (iii) normalize: the equation is linear in q, so a global rescale makes
  // the total mass one; kappa is the rescaled first-interval constant.
  // The [b, 2b] stretch integrates in the r-representation, the rest by
  // log-sum-exp Simpson.
  const std::size_t two_b = std::min(2 * uspu, N);
  auto integrate_split = [&](auto&& node_value_r, auto&& node_log_value_q,
                             double sing_part) {
    double linear = 0.0;
    {
      const auto w = composite_weights(static_cast<int>(two_b - uspu), h);
      for (std::size_t j = uspu; j <= two_b; ++j)
        linear += w[j - uspu] * node_value_r(j);
      linear -= sing_part;
    }
    if (N > two_b) {
      const auto w = composite_weights(static_cast<int>(N - two_b), h);
      std::vector<double> terms;
      terms.reserve(N - two_b + 1);
      for (std::size_t j = two_b; j <= N; ++j)
        if (w[j - two_b] > 0.0) terms.push_back(std::log(w[j - two_b]) + node_log_value_q(j));
      linear += std::exp(lse_span(terms));
    }
    return linear;
  };

  // everything below runs in the unnormalized kappa~ = 1 space
  const double mass =
      b / alpha +  // analytic (0, b] piece of the first interval
      integrate_split([&](std::size_t j) { return g.r_of(j); },
                      [&](std::size_t j) { return g.lq[j]; },
                      g.sigma_integral(uspu, two_b));

  // independent trapezoid re-integration of the raw grid values as the
  // internal consistency check
  double trap = b / alpha;
  for (std::size_t j = uspu; j <= N; ++j) {
    const double wt = (j == uspu || j == N) ? 0.5 * h : h;
    trap += wt * g.q_of(j);
  }

  // grid mean; integral_0^b t q dt = b^2/(alpha+1) analytically, and
  // t sigma(t) = b x^alpha has the elementary primitive b^2 x^{1+alpha}/(1+alpha)
  const double sing_mean = b * b / (1.0 + alpha) *
                           std::pow(static_cast<double>(two_b - uspu) / spu, 1.0 + alpha);
  const double mean_unnorm =
      b * b / (alpha + 1.0) +
      integrate_split([&](std::size_t j) { return g.t_of(j) * g.r_of(j); },
                      [&](std::size_t j) { return std::log(g.t_of(j)) + g.lq[j]; },
                      sing_mean);

  const double log_mass = std::log(mass);
  for (std::size_t i = 1; i <= N; ++i) g.lq[i] -= log_mass;
  grid.kappa = 1.0 / mass;
  grid.mass_check = trap / mass;
  grid.mean = mean_unnorm / mass;
  if (std::fabs(grid.mass_check - 1.0) > 1e-4)
    throw numeric_error("density grid mass inconsistency after rescale: " +
                            std::to_string(grid.mass_check),
                        grid.mass_check);

  // (iv) tails of W, accumulated from the far end: G(t-b) = G(t) + t q(t)/alpha
  // sums positive terms, so no precision is lost to the subtraction in the
  // forward form of the recursion.
  std::vector<double>& lG = grid.log_tail_;
  lG.assign(N + 1, 0.0);
  const double s_hat = (g.lq[N - 1] - g.lq[N]) / h;
  if (!(s_hat > 0.0))
    throw numeric_error("density grid: density is not decaying at t_max; enlarge t_max");
  double acc = g.lq[N] - std::log(s_hat);  // remainder beyond the grid, ~ q/|dlogq/dt|
  lG[N] = acc;
  for (std::size_t i = N - 1; i + uspu > N; --i) {
    acc = lse2(acc, std::log(0.5 * h) + lse2(g.lq[i], g.lq[i + 1]));
    lG[i] = acc;
  }
  const double log_alpha = std::log(alpha);
  for (std::size_t ii = N - uspu + 1; ii-- > 0;) {
    const std::size_t j = ii + uspu;
    lG[ii] = lse2(lG[j], std::log(g.t_of(j)) + g.lq[j] - log_alpha);
  }
  grid.tail_at_zero = lG[0];
  grid.log_q_ = std::move(g.lq);
  return grid;
}

double DensityGrid::log_q_at(double t) const {
  if (!(t > 0) || !(t <= t_max + 0.5 * h)) bad("log_q_at: t outside (0, t_max]");
  if (t <= b) return std::log(kappa) + (alpha - 1.0) * std::log(t / b);
  const double x = t / h;
  std::size_t i0 = static_cast<std::size_t>(x);
  const std::size_t N = nodes();
  if (i0 >= N) i0 = N - 1;
  const double frac = x - static_cast<double>(i0);
  return log_q_[i0] + frac * (log_q_[i0 + 1] - log_q_[i0]);
}

double DensityGrid::log_tail_W_at(double t) const {
  if (t <= 0) return 0.0;
  if (!(t <= t_max + 0.5 * h)) bad("log_tail_W_at: t beyond t_max");
  const double x = t / h;
  std::size_t i0 = static_cast<std::size_t>(x);
  const std::size_t N = nodes();
  if (i0 >= N) return log_tail_[N];
  const double frac = x - static_cast<double>(i0);
  return log_tail_[i0] + frac * (log_tail_[i0 + 1] - log_tail_[i0]);
}

DensityGrid build_density_grid(double alpha, double b, double t_max,
                               int steps_per_unit, const DensityGridOptions& options) {
  DensityGrid grid =
      detail_build_grid(alpha, b, t_max, steps_per_unit, options.reference_stepping);
  if (options.richardson_check) {
    const DensityGrid fine = detail_build_grid(alpha, b, t_max, 2 * steps_per_unit,
                                               options.reference_stepping);
    const double probe = grid.t_max / 2.0;
    const double drift = std::fabs(grid.log_q_at(probe) - fine.log_q_at(probe));
    grid.richardson_drift = drift;
    if (drift > 1e-6)
      throw numeric_error("density grid step too coarse: Richardson drift " +
                              std::to_string(drift),
                          drift);
  }
  return grid;
}

double exact_log_tail_Z(const DensityGrid& grid, double t) {
  if (t <= grid.b) return 0.0;
  if (!(t <= grid.t_max)) bad("exact_log_tail_Z: t outside (b, t_max]");
  return grid.log_tail_W_at(t - grid.b);
}

double asymp1_ratio(const DensityGrid& grid, double t) {
  if (!(t > grid.b) || !(t <= grid.t_max))
    bad("asymp1_ratio: t outside (b, t_max]");
  return std::exp(std::log(t) + grid.log_q_at(t) - std::log(grid.alpha) -
                  grid.log_tail_W_at(t - grid.b));
}

}  // namespace perptail
