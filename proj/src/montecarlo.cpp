#include "perptail/montecarlo.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

#include "perptail/errors.hpp"

namespace perptail {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

void check_config(const SimConfig& config) {
  if (!(config.alpha > 0)) bad("sim: alpha must be positive");
  if (config.n_paths < 1) bad("sim: n_paths must be at least 1");
  if (!(config.truncation_eps > 0) || !(config.truncation_eps <= 1))
    bad("sim: truncation_eps must lie in (0,1]");
  check_law(config.law);
}

// magnitude used by the reported truncation bias bound; a high quantile
// stands in for sup|Q| where Q is unbounded below or above
double bias_scale(const QLaw& law) {
  switch (law.kind) {
    case QKind::point_mass:
      return law.b;
    case QKind::two_point:
      return std::max(law.b, -law.q0);
    case QKind::gamma_shift:
      return law.b + law.lambda * (law.theta + 10.0 * std::sqrt(law.theta));
    case QKind::exp_validation:
      return -std::log(1e-4) / law.c;  // 0.9999 quantile
  }
  return 0.0;
}

double pairwise_block(const double* v, std::size_t n) {
  if (n <= 64) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_block(v, half) + pairwise_block(v + half, n - half);
}

template <class F>
double pairwise_transform_sum(std::span<const double> values, F f) {
  // fixed 4096-element tiles keep a bounded scratch buffer; the topology does
  // not depend on thread count, so the reduction is reproducible
  std::vector<double> partials;
  partials.reserve(values.size() / 4096 + 1);
  std::vector<double> tile(std::min<std::size_t>(values.size(), 4096));
  std::size_t pos = 0;
  while (pos < values.size()) {
    const std::size_t len = std::min<std::size_t>(4096, values.size() - pos);
    for (std::size_t i = 0; i < len; ++i) tile[i] = f(values[pos + i]);
    partials.push_back(pairwise_block(tile.data(), len));
    pos += len;
  }
  return pairwise_block(partials.data(), partials.size());
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_block(values.data(), values.size());
}

double sample_perpetuity(const SimConfig& config, RngStream& rng) {
  const double inv_alpha = 1.0 / config.alpha;
  double z = sample_q(config.law, rng);
  double prod = 1.0;
  for (int k = 0; k < 1'000'000; ++k) {
    const double m =
        config.alpha == 1.0 ? rng.u01o() : std::pow(rng.u01o(), inv_alpha);
    prod *= m;
    if (prod < config.truncation_eps) return z;
    z += prod * sample_q(config.law, rng);
  }
  throw numeric_error("sample_perpetuity: truncation cap of 1e6 factors exceeded");
}

SimSummary simulate(const SimConfig& config, Exec exec) {
  check_config(config);
  const std::int64_t n = config.n_paths;
  std::vector<double> samples(static_cast<std::size_t>(n));
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::int64_t i = 0; i < n; ++i) {
    RngStream rng = RngStream::for_path(config.seed, static_cast<std::uint64_t>(i));
    samples[static_cast<std::size_t>(i)] = sample_perpetuity(config, rng);
  }

  SimSummary out;
  out.n_paths = n;
  const double dn = static_cast<double>(n);
  out.mean = pairwise_sum(samples) / dn;

  const double mean = out.mean;
  const double m2 = pairwise_transform_sum(
                        samples, [mean](double x) { return (x - mean) * (x - mean); }) /
                    dn;
  const double m4 =
      pairwise_transform_sum(samples,
                             [mean](double x) {
                               const double d = (x - mean) * (x - mean);
                               return d * d;
                             }) /
      dn;
  out.variance = n > 1 ? m2 * dn / (dn - 1.0) : 0.0;
  out.mean_stderr = std::sqrt(out.variance / dn);
  out.variance_stderr = std::sqrt(std::max(0.0, m4 - m2 * m2) / dn);

  // empirical 0.9999 quantile guards the e^{sX} estimator against overflow
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double q9999 = sorted[static_cast<std::size_t>(
      std::min<double>(dn - 1.0, std::ceil(0.9999 * dn)))];

  for (double s : config.mgf_points) {
    MgfEstimate est;
    est.s = s;
    if (s == 0.0) {
      est.estimate = 1.0;
      est.stderr_ = 0.0;
      out.mgf.push_back(est);
      continue;
    }
    if (s * q9999 > 700.0) {
      est.stable = false;
      out.mgf.push_back(est);
      continue;
    }
    const double m1 = pairwise_transform_sum(
                          samples, [s](double x) { return std::exp(s * x); }) /
                      dn;
    const double v = pairwise_transform_sum(samples,
                                            [s, m1](double x) {
                                              const double d = std::exp(s * x) - m1;
                                              return d * d;
                                            }) /
                     dn;
    est.estimate = m1;
    est.stderr_ = std::sqrt(v / dn);
    est.stable = est.estimate > 0 && est.stderr_ / est.estimate <= 0.1;
    out.mgf.push_back(est);
  }

  out.ecdf_quantiles.resize(257);
  for (int k = 0; k <= 256; ++k) {
    const std::size_t idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(k) / 256.0 * (dn - 1.0)));
    out.ecdf_quantiles[static_cast<std::size_t>(k)] = sorted[idx];
  }

  out.truncation_bias_bound =
      config.truncation_eps * bias_scale(config.law) * (config.alpha + 1.0);
  return out;
}

SimSummary empirical_mgf(const SimConfig& config, Exec exec) {
  if (config.mgf_points.empty()) bad("empirical_mgf: mgf_points must be nonempty");
  return simulate(config, exec);
}

GammaValidationReport gamma_case_validate(double alpha, double c, std::int64_t n_paths,
                                          std::uint64_t seed, double ks_threshold) {
  if (!(alpha > 0) || !(c > 0)) bad("gamma_case_validate: alpha and c must be positive");
  SimConfig config;
  config.alpha = alpha;
  config.law = QLaw::exp_validation(c);
  config.n_paths = n_paths;
  config.seed = seed;

  const std::int64_t n = n_paths;
  std::vector<double> samples(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    RngStream rng = RngStream::for_path(seed, static_cast<std::uint64_t>(i));
    samples[static_cast<std::size_t>(i)] = sample_perpetuity(config, rng);
  }
  std::sort(samples.begin(), samples.end());

  const double shape = alpha + 1.0;
  const double dn = static_cast<double>(n);
  double ks = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double F = boost::math::gamma_p(shape, c * samples[static_cast<std::size_t>(i)]);
    const double hi = static_cast<double>(i + 1) / dn - F;
    const double lo = F - static_cast<double>(i) / dn;
    ks = std::max(ks, std::max(hi, lo));
  }

  const double mean = pairwise_sum(samples) / dn;
  const double m2 =
      pairwise_transform_sum(samples, [mean](double x) { return (x - mean) * (x - mean); }) / dn;
  const double m4 = pairwise_transform_sum(samples,
                                           [mean](double x) {
                                             const double d = (x - mean) * (x - mean);
                                             return d * d;
                                           }) /
                    dn;
  const double var = m2 * dn / (dn - 1.0);
  const double mean_se = std::sqrt(var / dn);
  const double var_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / dn);

  GammaValidationReport rep;
  rep.n_paths = n;
  rep.ks = ks;
  rep.ks_scaled = ks * std::sqrt(dn);
  rep.mean_z = (mean - shape / c) / mean_se;
  rep.var_z = (var - shape / (c * c)) / var_se;
  rep.ks_threshold = ks_threshold;
  rep.pass = rep.ks_scaled <= ks_threshold && std::fabs(rep.mean_z) <= 4.0 &&
             std::fabs(rep.var_z) <= 4.0;
  return rep;
}

}  // namespace perptail
