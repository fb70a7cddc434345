#pragma once

// Test-only oracles. Each lives here, independent of the library code paths
// it is used to check.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// 200-step bisection for strictly increasing f; needs f(lo) < target < f(hi)
inline double bisect_increasing(const std::function<double(double)>& f, double target,
                                double lo, double hi, int steps = 200) {
  if (!(f(lo) < target && f(hi) > target))
    throw std::runtime_error("oracle bisection: invalid bracket");
  for (int i = 0; i < steps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double fd1(const std::function<double(double)>& f, double s, double h) {
  return (f(s + h) - f(s - h)) / (2.0 * h);
}

inline double fd2(const std::function<double(double)>& f, double s, double h) {
  return (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
}

inline double fd3(const std::function<double(double)>& f, double s, double h) {
  return (f(s + 2 * h) - 2.0 * f(s + h) + 2.0 * f(s - h) - f(s - 2 * h)) /
         (2.0 * h * h * h);
}

// partial sum of int_0^x (e^y - 1)/y dy = sum_{n>=1} x^n/(n n!)
inline double exp_integral_series(double x, int terms = 30) {
  double acc = 0.0, p = 1.0;
  for (int n = 1; n <= terms; ++n) {
    p *= x / n;
    acc += p / n;
  }
  return acc;
}

// composite Simpson on a fine uniform grid; n must be even
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int j = 1; j < n; ++j) acc += f(a + j * h) * (j % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// coefficients of x(x+1)...(x+n-1), exact in int64 for n <= 10;
// coeff[k] multiplies x^k
inline std::vector<std::int64_t> rising_factorial_coeffs(int n) {
  std::vector<std::int64_t> poly{0, 1};  // x
  for (int m = 1; m < n; ++m) {
    std::vector<std::int64_t> next(poly.size() + 1, 0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k] += poly[k] * m;  // * (x + m)
      next[k + 1] += poly[k];
    }
    poly = std::move(next);
  }
  return poly;
}

}  // namespace oracle
