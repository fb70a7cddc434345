#include <cmath>
#include <doctest.h>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "perptail/errors.hpp"
#include "perptail/saddle.hpp"

using namespace perptail;

namespace {

const double kE = 2.718281828459045;

std::vector<std::pair<double, QLaw>> solver_fixtures() {
  return {{1.0, QLaw::point_mass(1.0)},
          {2.0, QLaw::point_mass(1.0)},
          {1.0, QLaw::point_mass(2.0)},
          {1.0, QLaw::two_point(1.0, 0.5, -1.0)},
          {1.0, QLaw::gamma_shift(1.0, 1.0, 1.0)},
          {0.5, QLaw::gamma_shift(1.5, 2.0, 0.5)}};
}

}  // namespace

TEST_CASE("psi at pinned points") {
  const QLaw pm = QLaw::point_mass(1.0);
  SUBCASE("empty integral") {
    for (const auto& [alpha, law] : solver_fixtures()) CHECK(psi(alpha, law, 0.0) == 0.0);
  }
  SUBCASE("series oracle for the Dickman integrand") {
    // int_0^1 (e^y - 1)/y dy = 1.3179021514544039 (30-term partial sum)
    CHECK(psi(1.0, pm, 1.0) == doctest::Approx(1.3179021514544039).epsilon(1e-12));
    CHECK(psi(1.0, pm, 1.0) == doctest::Approx(oracle::exp_integral_series(1.0)).epsilon(1e-12));
    CHECK(psi(3.0, pm, 1.0) == doctest::Approx(3.0 * 1.3179021514544039).epsilon(1e-12));
    for (double s : {0.25, 2.0, 5.0, 12.0})
      CHECK(psi(1.0, pm, s) ==
            doctest::Approx(oracle::exp_integral_series(s, 80)).epsilon(1e-11));
  }
  SUBCASE("fine Simpson oracle for the other laws") {
    for (const auto& [alpha, law] : solver_fixtures()) {
      for (double s : {0.7, 3.0, 9.0}) {
        const auto integrand = [&law = law](double y) { return mgf_m1(law, y) / y; };
        const double ref = alpha * oracle::simpson(integrand, 1e-12, s, 400000);
        CHECK(psi(alpha, law, s) == doctest::Approx(ref).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("psi_prime closed form and limit at zero") {
  const QLaw pm = QLaw::point_mass(1.0);
  CHECK(psi_prime(1.0, pm, 1.0) == doctest::Approx(kE - 1.0).epsilon(1e-14));
  CHECK(psi_prime(2.0, pm, 1.0) == doctest::Approx(2.0 * (kE - 1.0)).epsilon(1e-14));
  const QLaw tp = QLaw::two_point(1.0, 0.5, -1.0);
  CHECK(std::fabs(psi_prime(1.0, tp, 1e-8)) <= 1e-7);
  for (const auto& [alpha, law] : solver_fixtures())
    CHECK(psi_prime(alpha, law, 0.0) == doctest::Approx(alpha * moment(law, 1)).epsilon(1e-14));
}

TEST_CASE("psi_second and psi_third match differences of psi_prime") {
  for (const auto& [alpha, law] : solver_fixtures()) {
    for (double s : {1e-4, 0.5, 2.0, 8.0}) {
      const auto p1 = [&](double y) { return psi_prime(alpha, law, y); };
      const double d2 = psi_second(alpha, law, s);
      const double h = 1e-5 * std::max(0.03, s);
      CHECK(std::fabs(d2 - oracle::fd1(p1, s, h)) <= 1e-5 * std::max(1.0, std::fabs(d2)));
      const double d3 = psi_third(alpha, law, s);
      const double h3 = 3e-4 * std::max(0.03, s);
      CHECK(std::fabs(d3 - oracle::fd2(p1, s, h3)) <= 1e-4 * std::max(1.0, std::fabs(d3)));
    }
  }
}

TEST_CASE("psi is convex") {
  for (const auto& [alpha, law] : solver_fixtures()) {
    std::vector<double> vals;
    for (int i = 1; i <= 14; ++i) vals.push_back(psi(alpha, law, 0.5 * i));
    for (std::size_t i = 1; i + 1 < vals.size(); ++i)
      CHECK(vals[i - 1] + vals[i + 1] - 2.0 * vals[i] >= 0.0);
  }
}

TEST_CASE("solve_saddle pinned examples") {
  const QLaw pm = QLaw::point_mass(1.0);
  SUBCASE("t = e-1 has the root s = 1") {
    const SaddlePoint sp = solve_saddle(1.0, pm, kE - 1.0);
    CHECK(std::fabs(sp.s - 1.0) <= 1e-9);
    CHECK(sp.bracket_lo < sp.s);
    CHECK(sp.bracket_hi > sp.s);
  }
  SUBCASE("t = 100 brackets in (6,7)") {
    // psi'(6) = 67.07 < 100 < psi'(7) = 156.52
    CHECK(psi_prime(1.0, pm, 6.0) == doctest::Approx(67.07146558212251).epsilon(1e-12));
    CHECK(psi_prime(1.0, pm, 7.0) == doctest::Approx(156.51902263263693).epsilon(1e-12));
    const SaddlePoint sp = solve_saddle(1.0, pm, 100.0);
    CHECK(sp.s > 6.0);
    CHECK(sp.s < 7.0);
    CHECK(std::fabs(sp.residual) <= 1e-8);
    const double ref = oracle::bisect_increasing(
        [&](double s) { return psi_prime(1.0, pm, s); }, 100.0, 6.0, 7.0);
    CHECK(sp.s == doctest::Approx(ref).epsilon(1e-11));
  }
  SUBCASE("two-point law with E[Q] = 0 at t = 10") {
    const QLaw tp = QLaw::two_point(1.0, 0.5, -1.0);
    const SaddlePoint sp = solve_saddle(1.0, tp, 10.0);
    CHECK(std::fabs(psi_prime(1.0, tp, sp.s) - 10.0) <= 1e-9 * 10.0);
    CHECK(psi_prime(1.0, tp, sp.s / 2.0) < 10.0);
    const double ref = oracle::bisect_increasing(
        [&](double s) { return psi_prime(1.0, tp, s); }, 10.0, 1e-6, 64.0);
    CHECK(sp.s == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("solve_saddle residual tolerance and round trip on a wide grid") {
  for (const auto& [alpha, law] : solver_fixtures()) {
    double prev_s = 0.0;
    for (double t : {10.0, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8}) {
      const SaddlePoint sp = solve_saddle(alpha, law, t);
      CHECK(std::fabs(sp.residual) <= 1e-10 * t);
      CHECK(psi_prime(alpha, law, sp.s) == doctest::Approx(t).epsilon(1e-10));
      CHECK(sp.s > prev_s);  // strict monotonicity in t
      CHECK(sp.bracket_lo < sp.s);
      CHECK(sp.s < sp.bracket_hi);
      CHECK(psi_prime(alpha, law, sp.bracket_lo) < t);
      CHECK(psi_prime(alpha, law, sp.bracket_hi) > t);
      prev_s = sp.s;
    }
  }
}

TEST_CASE("Example-1 asymptotics: s_alpha(t) ~ b^{-1} log t") {
  for (const auto& [alpha, law] : solver_fixtures()) {
    double prev_dev = std::numeric_limits<double>::infinity();
    for (double t : {1e3, 1e6, 1e9, 1e12}) {
      const double ratio = solve_saddle(alpha, law, t).s / (std::log(t) / law.b);
      const double dev = std::fabs(ratio - 1.0);
      CHECK(dev < prev_dev);
      prev_dev = dev;
    }
  }
}

TEST_CASE("Example-2 refinement: (b s - log t)/loglog t approaches 1+theta") {
  struct Case {
    double alpha;
    QLaw law;
    double theta;
  };
  const std::vector<Case> cases = {{1.0, QLaw::gamma_shift(1.0, 1.0, 1.0), 1.0},
                                   {1.0, QLaw::two_point(1.0, 0.5, -1.0), 0.0},
                                   {1.0, QLaw::point_mass(1.0), 0.0}};
  for (const Case& c : cases) {
    double prev_dev = std::numeric_limits<double>::infinity();
    for (double t : {1e3, 1e6, 1e9, 1e12}) {
      const double s = solve_saddle(c.alpha, c.law, t).s;
      const double val = (c.law.b * s - std::log(t)) / std::log(std::log(t));
      const double dev = std::fabs(val - (1.0 + c.theta));
      CHECK(dev < prev_dev);
      prev_dev = dev;
    }
  }
}

TEST_CASE("solve_saddle error paths") {
  const QLaw pm = QLaw::point_mass(1.0);
  // psi'(0+) = alpha E[Q] = 1; targets at or below are out of range
  CHECK_THROWS_WITH_AS((void)solve_saddle(1.0, pm, 0.5), "target below saddle range",
                       numeric_error);
  CHECK_THROWS_AS((void)solve_saddle(1.0, pm, -3.0), numeric_error);
  CHECK_THROWS_AS((void)solve_saddle(1.0, QLaw::two_point(1.0, 0.5, -1.0), 0.0), numeric_error);
  CHECK_THROWS_AS((void)solve_saddle(1.0, QLaw::exp_validation(1.0), 10.0), std::invalid_argument);
  CHECK_NOTHROW((void)solve_saddle(1.0, pm, 1.01));
  // root would sit near b^{-1} log t = 7e5, beyond the bracket cap s_max = 1e4
  CHECK_THROWS_WITH_AS((void)solve_saddle(1.0, QLaw::point_mass(1e-3), 1e300),
                       "target out of numeric range: bracket search exceeded s_max",
                       numeric_error);
}
