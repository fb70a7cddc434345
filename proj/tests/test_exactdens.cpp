#include <cmath>
#include <doctest.h>
#include <limits>
#include <vector>

#include "perptail/errors.hpp"
#include "perptail/exactdens.hpp"
#include "perptail/tailcalc.hpp"

using namespace perptail;

namespace {

constexpr double kExpNegGamma = 0.5614594835668852;

const DensityGrid& dickman_grid() {
  static const DensityGrid grid = build_density_grid(1.0, 1.0, 40.0, 512);
  return grid;
}

}  // namespace

TEST_CASE("Dickman case: constant first interval and kappa = e^{-gamma}") {
  const DensityGrid& g = dickman_grid();
  const double lk = std::log(g.kappa);
  for (std::size_t i = 1; i <= 512; ++i)
    CHECK(g.log_q_nodes()[i] == doctest::Approx(lk).epsilon(1e-13));
  // the normalization itself reproduces the classical constant
  CHECK(std::fabs(g.kappa - kExpNegGamma) <= 1e-9);
  CHECK(g.richardson_drift.has_value());
  CHECK(*g.richardson_drift <= 1e-6);
}

TEST_CASE("mass and mean diagnostics") {
  const DensityGrid& g = dickman_grid();
  CHECK(std::fabs(g.mass_check - 1.0) <= 5e-7);
  CHECK(std::fabs(g.mean - 1.0) <= 1e-8);
  CHECK(std::fabs(g.tail_at_zero) <= 1e-8);

  const DensityGrid g2 = build_density_grid(2.0, 1.0, 20.0, 512);
  CHECK(std::fabs(g2.mass_check - 1.0) <= 1e-6);
  CHECK(std::fabs(g2.mean - 2.0) <= 1e-8);
  const DensityGrid gh = build_density_grid(0.5, 1.0, 20.0, 512);
  CHECK(std::fabs(gh.mass_check - 1.0) <= 2e-5);
  CHECK(std::fabs(gh.mean - 0.5) <= 1e-8);
}

TEST_CASE("alpha=2: density is linear on the first interval") {
  const DensityGrid g = build_density_grid(2.0, 1.0, 20.0, 512);
  const double c0 = g.log_q_nodes()[128] - std::log(g.node_time(128));
  for (std::size_t i : {1u, 64u, 256u, 512u})
    CHECK(g.log_q_nodes()[i] - std::log(g.node_time(i)) ==
          doctest::Approx(c0).epsilon(1e-12));
}

TEST_CASE("tail values: first-interval closed form") {
  const DensityGrid& g = dickman_grid();
  // P{Z > t} = 1 for t <= b
  CHECK(exact_log_tail_Z(g, 0.5) == 0.0);
  CHECK(exact_log_tail_Z(g, 1.0) == 0.0);
  // P{Z > 2} = P{W > 1} = 1 - e^{-gamma}
  CHECK(exact_log_tail_Z(g, 2.0) == doctest::Approx(-0.8243030736432959).epsilon(1e-9));
}

TEST_CASE("tail is strictly decreasing") {
  const DensityGrid& g = dickman_grid();
  double prev = 0.5;
  double prev_val = exact_log_tail_Z(g, prev);
  for (double t : {1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 39.0}) {
    const double v = exact_log_tail_Z(g, t);
    CHECK(v < prev_val);
    prev_val = v;
  }
}

TEST_CASE("Eq.(3) residual on the grid") {
  const DensityGrid& g = dickman_grid();
  const std::size_t spu = static_cast<std::size_t>(g.steps_per_unit);
  const auto lq = g.log_q_nodes();
  const auto lG = g.log_tail_nodes();
  double worst = 0.0;
  for (std::size_t i = spu + 1; i < g.nodes(); i += 7) {
    const double log_lhs = std::log(g.node_time(i)) + lq[i] - std::log(g.alpha);
    // P{Z>t} - P{Z-Q1>t} = G(t-b) - G(t), relative to G(t-b)
    const double rhs_rel = -std::expm1(lG[i] - lG[i - spu]);
    const double lhs_rel = std::exp(log_lhs - lG[i - spu]);
    worst = std::max(worst, std::fabs(lhs_rel - rhs_rel));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("Eq.(4) ratio: in (0,1], increasing, close to 1 late") {
  const DensityGrid& g = dickman_grid();
  for (double t : {1.5, 3.0, 7.0, 15.0, 30.0}) {
    const double r = asymp1_ratio(g, t);
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
  }
  CHECK(asymp1_ratio(g, 25.0) > asymp1_ratio(g, 10.0));
  CHECK(1.0 - asymp1_ratio(g, 39.0) < 0.01);
}

TEST_CASE("Theorem-1 estimate converges to the exact tail") {
  const DensityGrid& g = dickman_grid();
  const QLaw pm = QLaw::point_mass(1.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {10.0, 20.0, 39.0}) {
    const double exact = exact_log_tail_Z(g, t);
    const double est = tail_estimate(1.0, pm, t).log_tail;
    const double rel = std::fabs(exact - est) / std::fabs(exact);
    CHECK(rel < prev);
    prev = rel;
  }
  CHECK(prev <= 0.001);
}

TEST_CASE("unimodality and monotonicity of the density") {
  SUBCASE("alpha <= 1: nonincreasing everywhere") {
    for (const DensityGrid& g :
         {build_density_grid(1.0, 1.0, 12.0, 512), build_density_grid(0.5, 1.0, 12.0, 512)}) {
      const auto lq = g.log_q_nodes();
      for (std::size_t i = 2; i <= g.nodes(); ++i)
        CHECK(lq[i] <= lq[i - 1] + 1e-12);
    }
  }
  SUBCASE("alpha > 1: a single interior mode") {
    const DensityGrid g = build_density_grid(2.0, 1.0, 20.0, 512);
    const auto lq = g.log_q_nodes();
    std::size_t mode = 1;
    for (std::size_t i = 2; i <= g.nodes(); ++i)
      if (lq[i] > lq[mode]) mode = i;
    CHECK(mode > 1);
    CHECK(mode < g.nodes());
    for (std::size_t i = 2; i <= mode; ++i) CHECK(lq[i] >= lq[i - 1] - 1e-12);
    for (std::size_t i = mode + 1; i <= g.nodes(); ++i) CHECK(lq[i] <= lq[i - 1] + 1e-12);
  }
}

TEST_CASE("sliding stepping matches the direct reference stepping") {
  DensityGridOptions reference;
  reference.reference_stepping = true;
  reference.richardson_check = false;
  DensityGridOptions fast;
  fast.richardson_check = false;
  for (double alpha : {1.0, 0.5, 2.0}) {
    const DensityGrid a = build_density_grid(alpha, 1.0, 20.0, 256, fast);
    const DensityGrid b = build_density_grid(alpha, 1.0, 20.0, 256, reference);
    double worst_q = 0.0, worst_g = 0.0;
    for (std::size_t i = 1; i <= a.nodes(); ++i) {
      worst_q = std::max(worst_q, std::fabs(a.log_q_nodes()[i] - b.log_q_nodes()[i]));
      worst_g = std::max(worst_g, std::fabs(a.log_tail_nodes()[i] - b.log_tail_nodes()[i]));
    }
    CHECK(worst_q <= 1e-9);
    CHECK(worst_g <= 1e-9);
  }
}

TEST_CASE("tail recursion consistency in linear space at small t") {
  const DensityGrid& g = dickman_grid();
  for (double t : {1.5, 3.0, 5.0, 8.0}) {
    const double G_tb = std::exp(g.log_tail_W_at(t - 1.0));
    const double G_t = std::exp(g.log_tail_W_at(t));
    const double dq = t * std::exp(g.log_q_at(t)) / g.alpha;
    CHECK(std::fabs(G_tb - G_t - dq) <= 1e-10);
  }
}

TEST_CASE("b-scaling: the b=2 grid is the b=1 grid with Z doubled") {
  const DensityGrid g2 = build_density_grid(1.0, 2.0, 40.0, 512, {.richardson_check = false});
  const DensityGrid& g1 = dickman_grid();
  CHECK(std::fabs(g2.mean - 2.0) <= 1e-8);
  CHECK(std::fabs(g2.kappa - kExpNegGamma / 2.0) <= 1e-9);
  for (double t : {3.0, 10.0, 30.0})
    CHECK(exact_log_tail_Z(g2, t) ==
          doctest::Approx(exact_log_tail_Z(g1, t / 2.0)).epsilon(1e-9));
  const double est = tail_estimate(1.0, QLaw::point_mass(2.0), 30.0).log_tail;
  const double exact = exact_log_tail_Z(g2, 30.0);
  CHECK(std::fabs(est - exact) / std::fabs(exact) <= 0.01);
}

TEST_CASE("builds are deterministic") {
  const DensityGrid a = build_density_grid(1.0, 2.0, 12.0, 256, {.richardson_check = false});
  const DensityGrid b = build_density_grid(1.0, 2.0, 12.0, 256, {.richardson_check = false});
  for (std::size_t i = 1; i <= a.nodes(); ++i) {
    CHECK(a.log_q_nodes()[i] == b.log_q_nodes()[i]);
    CHECK(a.log_tail_nodes()[i] == b.log_tail_nodes()[i]);
  }
}

TEST_CASE("build preconditions") {
  CHECK_THROWS_AS((void)build_density_grid(1.0, 1.0, 2.0, 512), std::invalid_argument);
  CHECK_THROWS_AS((void)build_density_grid(1.0, 1.0, 20.0, 100), std::invalid_argument);
  CHECK_THROWS_AS((void)build_density_grid(1.0, 1.0, 20.0, 511), std::invalid_argument);
  CHECK_THROWS_AS((void)build_density_grid(-1.0, 1.0, 20.0, 512), std::invalid_argument);
}

TEST_CASE("query preconditions") {
  const DensityGrid& g = dickman_grid();
  CHECK_THROWS_AS((void)exact_log_tail_Z(g, 41.5), std::invalid_argument);
  CHECK_THROWS_AS((void)asymp1_ratio(g, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)g.log_q_at(-1.0), std::invalid_argument);
}
