#pragma once

#include <cstdint>
#include <vector>

#include "perptail/qlaw.hpp"
#include "perptail/tailcalc.hpp"

namespace perptail {

struct SimConfig {
  double alpha = 1.0;
  QLaw law;
  std::int64_t n_paths = 0;
  double truncation_eps = 1e-12;  // stop a path once M_1...M_k < eps
  std::uint64_t seed = 0;
  std::vector<double> mgf_points;
};

struct MgfEstimate {
  double s = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  bool stable = true;  // false when the estimator is too noisy to trust
};

struct SimSummary {
  std::int64_t n_paths = 0;
  double mean = 0.0;
  double mean_stderr = 0.0;
  double variance = 0.0;
  double variance_stderr = 0.0;
  std::vector<MgfEstimate> mgf;
  std::vector<double> ecdf_quantiles;  // 257-point sketch of the sorted sample
  double truncation_bias_bound = 0.0;
};

/// One truncated realization of Q_1 + sum_k M_1...M_k Q_{k+1} with
/// M = U^{1/alpha}. Deterministic given the stream state.
double sample_perpetuity(const SimConfig& config, RngStream& rng);

/// Runs the paths (path i always uses stream i of the seed, so the result is
/// bit-identical under any schedule), then reduces with a fixed pairwise
/// order. The serial path is the reference for the parallel one.
SimSummary simulate(const SimConfig& config, Exec exec = Exec::parallel);

/// simulate() with mgf_points required; Proposition-1(b) witness.
SimSummary empirical_mgf(const SimConfig& config, Exec exec = Exec::parallel);

struct GammaValidationReport {
  std::int64_t n_paths = 0;
  double ks = 0.0;         // sup-distance of the ECDF from Gamma(alpha+1, c)
  double ks_scaled = 0.0;  // ks * sqrt(n)
  double mean_z = 0.0;
  double var_z = 0.0;
  double ks_threshold = 1.95;
  bool pass = false;
};

/// Simulates with the exponential validation law and tests the sample against
/// the known Gamma(alpha+1, c) fixed point.
GammaValidationReport gamma_case_validate(double alpha, double c, std::int64_t n_paths,
                                          std::uint64_t seed,
                                          double ks_threshold = 1.95);

/// Fixed-topology pairwise reduction used by every summary statistic;
/// deterministic regardless of thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace perptail
