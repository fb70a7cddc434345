#pragma once

#include <optional>
#include <span>
#include <vector>

namespace perptail {

struct DensityGridOptions {
  /// Rebuild at doubled resolution and require the log-density at t_max/2 to
  /// move by <= 1e-6.
  bool richardson_check = true;
  /// Direct per-node log-sum-exp over the delay window instead of the
  /// sliding-window stepping; O(window) per node, kept as the reference the
  /// fast path is tested against.
  bool reference_stepping = false;
};

/// Exact density and tail of W = Z_alpha - Q_1 for Q = b, from the delay
/// equation t q(t) = alpha * integral_{t-b}^{t} q(y) dy. Everything is held
/// in natural log: q underflows doubles near t = 130 while the grid runs to
/// t = 205 by default.
class DensityGrid {
 public:
  double alpha = 1.0;
  double b = 1.0;
  double h = 0.0;           // grid step, b / steps_per_unit
  int steps_per_unit = 0;
  double t_max = 0.0;       // last node, n_nodes * h
  double kappa = 0.0;       // first-interval constant: q = kappa (t/b)^{alpha-1} on (0,b)
  double mass_check = 0.0;  // independent (trapezoid) re-integration of the grid
  double mean = 0.0;        // grid mean, analytically alpha*b
  double tail_at_zero = 0.0;  // computed log P{W>0}, exactly 0 in exact arithmetic
  std::optional<double> richardson_drift;

  std::size_t nodes() const { return log_q_.size() - 1; }
  double node_time(std::size_t i) const { return static_cast<double>(i) * h; }
  std::span<const double> log_q_nodes() const { return log_q_; }     // index i ~ t = i h
  std::span<const double> log_tail_nodes() const { return log_tail_; }

  /// log q(t) for 0 < t <= t_max; closed form on (0,b], log-linear
  /// interpolation between nodes beyond.
  double log_q_at(double t) const;

  /// log P{W > t} for t <= t_max (0 for t <= 0).
  double log_tail_W_at(double t) const;

 private:
  friend DensityGrid detail_build_grid(double, double, double, int, bool);
  std::vector<double> log_q_;     // [0..N], node 0 unused
  std::vector<double> log_tail_;  // [0..N]
};

/// Internal single-resolution builder; use build_density_grid.
DensityGrid detail_build_grid(double alpha, double b, double t_max, int steps_per_unit,
                              bool reference_stepping);

DensityGrid build_density_grid(double alpha, double b, double t_max,
                               int steps_per_unit,
                               const DensityGridOptions& options = {});

/// log P{Z_alpha > t} = log P{W > t-b}; 0 for t <= b.
double exact_log_tail_Z(const DensityGrid& grid, double t);

/// alpha^{-1} t q(t) / P{Z_alpha > t}; approaches 1 from below.
double asymp1_ratio(const DensityGrid& grid, double t);

}  // namespace perptail
