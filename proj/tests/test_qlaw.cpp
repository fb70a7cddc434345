#include <cmath>
#include <doctest.h>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "perptail/qlaw.hpp"

using namespace perptail;

namespace {

std::vector<QLaw> finite_b_fixtures() {
  return {QLaw::point_mass(1.0),
          QLaw::point_mass(2.0),
          QLaw::two_point(1.0, 0.5, -1.0),
          QLaw::two_point(2.0, 0.3, -0.5),
          QLaw::gamma_shift(1.0, 1.0, 1.0),
          QLaw::gamma_shift(1.5, 2.0, 0.5)};
}

}  // namespace

TEST_CASE("mgf at zero is one for every variant") {
  std::vector<QLaw> laws = finite_b_fixtures();
  laws.push_back(QLaw::exp_validation(1.0));
  for (const QLaw& law : laws) {
    CHECK(mgf(law, 0.0, 0) == 1.0);
    CHECK(mgf_m1(law, 0.0) == 0.0);
    CHECK(log_mgf(law, 0.0) == 0.0);
  }
}

TEST_CASE("mgf closed forms at pinned points") {
  CHECK(mgf(QLaw::point_mass(1.0), 1.0, 0) == doctest::Approx(2.718281828459045).epsilon(1e-14));
  // Example 4 law at s=1: e^{bs}(1+lambda s)^{-theta} = e/2
  CHECK(mgf(QLaw::gamma_shift(1.0, 1.0, 1.0), 1.0, 0) ==
        doctest::Approx(1.3591409142295225).epsilon(1e-14));
  // E[Q] = 0.5*1 + 0.5*(-1) = 0, against a central difference of g near 0
  const QLaw tp = QLaw::two_point(1.0, 0.5, -1.0);
  CHECK(mgf(tp, 0.0, 1) == 0.0);
  const double fd = oracle::fd1([&](double s) { return mgf(tp, s, 0); }, 1e-6, 1e-6);
  CHECK(std::fabs(fd) < 2e-6);  // g'(1e-6) = m2*1e-6 + O(1e-12)
}

// long-double closed form so the k=3 stencil is not limited by double roundoff
static long double mgf_ld(const QLaw& law, long double s) {
  switch (law.kind) {
    case QKind::point_mass:
      return expl(law.b * s);
    case QKind::two_point:
      return law.p * expl(law.b * s) + (1.0L - law.p) * expl(law.q0 * s);
    case QKind::gamma_shift:
      return expl(law.b * s) * powl(1.0L + law.lambda * s, -static_cast<long double>(law.theta));
    case QKind::exp_validation:
      return law.c / (law.c - s);
  }
  return 0.0L;
}

static double fd3_ld(const QLaw& law, double s, double h) {
  const long double hl = h, sl = s;
  return static_cast<double>((mgf_ld(law, sl + 2 * hl) - 2.0L * mgf_ld(law, sl + hl) +
                              2.0L * mgf_ld(law, sl - hl) - mgf_ld(law, sl - 2 * hl)) /
                             (2.0L * hl * hl * hl));
}

TEST_CASE("closed-form derivatives match central finite differences") {
  for (const QLaw& law : finite_b_fixtures()) {
    for (double s : {0.5, 1.0, 2.0, 5.0}) {
      const auto g = [&](double y) { return mgf(law, y, 0); };
      const double scale = std::max(1.0, law.b);
      const double d1 = mgf(law, s, 1), d2 = mgf(law, s, 2), d3 = mgf(law, s, 3);
      CHECK(std::fabs(d1 - oracle::fd1(g, s, 6e-6 / scale)) <= 1e-6 * std::max(1.0, std::fabs(d1)));
      CHECK(std::fabs(d2 - oracle::fd2(g, s, 1.2e-4 / scale)) <= 1e-6 * std::max(1.0, std::fabs(d2)));
      CHECK(std::fabs(d3 - fd3_ld(law, s, 7.5e-4 / scale)) <= 1e-6 * std::max(1.0, std::fabs(d3)));
    }
  }
  const QLaw ev = QLaw::exp_validation(10.0);
  for (double s : {0.5, 1.0, 2.0}) {
    const auto g = [&](double y) { return mgf(ev, y, 0); };
    for (int k = 1; k <= 3; ++k) {
      const double d = mgf(ev, s, k);
      const double fd = k == 1   ? oracle::fd1(g, s, 6e-6)
                        : k == 2 ? oracle::fd2(g, s, 1.2e-4)
                                 : oracle::fd3(g, s, 7.5e-4);
      CHECK(std::fabs(d - fd) <= 1e-5 * std::max(1.0, std::fabs(d)));
    }
  }
}

TEST_CASE("moments agree with derivatives at zero") {
  for (const QLaw& law : finite_b_fixtures())
    for (int k = 0; k <= 3; ++k)
      CHECK(moment(law, k) == doctest::Approx(mgf(law, 0.0, k)).epsilon(1e-13));
}

TEST_CASE("g is strictly convex, and increasing when E[Q] >= 0") {
  const std::vector<QLaw> increasing = {QLaw::point_mass(1.0), QLaw::two_point(1.0, 0.5, -1.0),
                                        QLaw::gamma_shift(1.0, 1.0, 1.0)};
  for (const QLaw& law : increasing) {
    double prev = mgf(law, 0.1, 0);
    for (int i = 2; i <= 200; ++i) {
      const double cur = mgf(law, 0.1 * i, 0);
      CHECK(cur > prev);
      prev = cur;
    }
  }
  for (const QLaw& law : finite_b_fixtures()) {
    for (int i = 1; i <= 198; ++i) {
      const double a = mgf(law, 0.1 * i, 0), b = mgf(law, 0.1 * (i + 1), 0),
                   c = mgf(law, 0.1 * (i + 2), 0);
      CHECK(a + c - 2.0 * b > 0.0);
    }
  }
}

TEST_CASE("Corollary-1 limit: g^(k)/g approaches b^k monotonically") {
  for (const QLaw& law : finite_b_fixtures()) {
    for (int k = 1; k <= 3; ++k) {
      const double target = std::pow(law.b, k);
      double prev_dev = std::numeric_limits<double>::infinity();
      for (double s : {10.0, 50.0, 200.0}) {
        const double dev = std::fabs(mgf_ratio(law, s, k) - target);
        CHECK(dev <= prev_dev);
        prev_dev = dev;
      }
    }
  }
}

TEST_CASE("two-point with p=1 reduces exactly to the point mass") {
  const QLaw tp = QLaw::two_point(1.0, 1.0, -3.0);
  const QLaw pm = QLaw::point_mass(1.0);
  for (double s : {0.0, 0.3, 1.0, 4.0, 20.0}) {
    CHECK(std::fabs(mgf(tp, s, 0) - mgf(pm, s, 0)) <= 1e-12 * mgf(pm, s, 0));
    CHECK(std::fabs(mgf_m1(tp, s) - mgf_m1(pm, s)) <= 1e-12 * std::max(1.0, mgf_m1(pm, s)));
    CHECK(std::fabs(log_mgf(tp, s) - log_mgf(pm, s)) <= 1e-12 * std::max(1.0, log_mgf(pm, s)));
    CHECK(std::fabs(f_ratio(tp, s) - 1.0) <= 1e-12);
    for (int k = 1; k <= 3; ++k)
      CHECK(std::fabs(mgf(tp, s, k) - mgf(pm, s, k)) <= 1e-12 * mgf(pm, s, k));
  }
}

TEST_CASE("f_ratio closed forms and limits") {
  for (double s : {0.0, 1.0, 7.0, 100.0})
    CHECK(f_ratio(QLaw::point_mass(2.0), s) == 1.0);
  CHECK(f_ratio(QLaw::gamma_shift(1.0, 2.0, 1.0), 3.0) == doctest::Approx(0.0625).epsilon(1e-14));
  // limit is P{Q=b}; the e^{-50} correction of the q0=0 atom is ~1.3e-22
  CHECK(std::fabs(f_ratio(QLaw::two_point(1.0, 0.3, 0.0), 50.0) -
                  (0.3 + 0.7 * std::exp(-50.0))) <= 1e-15);
  CHECK(std::fabs(f_ratio(QLaw::two_point(1.0, 0.3, 0.0), 50.0) - 0.3) <= 1e-12);
  // nonincreasing in s, value in (0,1]
  for (const QLaw& law : finite_b_fixtures()) {
    double prev = f_ratio(law, 0.0);
    CHECK(prev == 1.0);
    for (double s : {0.5, 1.0, 2.0, 5.0, 20.0}) {
      const double v = f_ratio(law, s);
      CHECK(v > 0.0);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
  CHECK_THROWS_AS((void)f_ratio(QLaw::exp_validation(1.0), 1.0), std::invalid_argument);
}

TEST_CASE("mgf rejections") {
  CHECK_THROWS_AS((void)mgf(QLaw::point_mass(1.0), 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS((void)mgf(QLaw::exp_validation(1.0), 1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)mgf(QLaw::exp_validation(2.0), 2.5, 0), std::invalid_argument);
  CHECK_NOTHROW((void)mgf(QLaw::exp_validation(2.0), 1.9, 0));
}

TEST_CASE("sample_q matches the law") {
  SUBCASE("point mass is degenerate") {
    RngStream rng(42, 0);
    const QLaw pm = QLaw::point_mass(2.0);
    for (int i = 0; i < 10; ++i) CHECK(sample_q(pm, rng) == 2.0);
  }
  SUBCASE("two-point hits b with probability p") {
    const QLaw tp = QLaw::two_point(1.0, 0.25, -2.0);
    RngStream rng(7, 1);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i)
      if (sample_q(tp, rng) == 1.0) ++hits;
    CHECK(std::fabs(hits / static_cast<double>(n) - 0.25) <= 0.006);  // 4 sigma
  }
  SUBCASE("empirical means within 4 stderr of E[Q]") {
    struct Case {
      QLaw law;
      double band;  // 4 * sqrt(Var Q / n)
    };
    const int n = 100000;
    const std::vector<Case> cases = {
        {QLaw::gamma_shift(1.0, 1.0, 1.0), 0.013},  // Var = theta lambda^2 = 1
        {QLaw::exp_validation(1.0), 0.013},
        {QLaw::two_point(1.0, 0.5, -1.0), 0.013}};
    int stream = 0;
    for (const Case& c : cases) {
      RngStream rng(99, static_cast<std::uint64_t>(stream++));
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += sample_q(c.law, rng);
      CHECK(std::fabs(acc / n - moment(c.law, 1)) <= c.band);
    }
  }
}

TEST_CASE("law specifier parse/format round trip") {
  // the four canonical spellings are format-stable
  for (const char* text : {"pointmass:b=1", "twopoint:b=1,p=0.5,q0=-1",
                           "gammashift:b=1,theta=1,lambda=1", "exp:c=1"})
    CHECK(format_law(parse_law(text)) == text);

  for (const QLaw& law : finite_b_fixtures()) {
    const QLaw back = parse_law(format_law(law));
    CHECK(back.kind == law.kind);
    CHECK(back.b == law.b);
    CHECK(back.p == law.p);
    CHECK(back.q0 == law.q0);
    CHECK(back.theta == law.theta);
    CHECK(back.lambda == law.lambda);
  }
  const QLaw ev = parse_law(format_law(QLaw::exp_validation(0.75)));
  CHECK(ev.kind == QKind::exp_validation);
  CHECK(ev.c == 0.75);
  CHECK(ev.b_infinite);
}

TEST_CASE("law specifier rejections") {
  CHECK_THROWS_AS((void)parse_law("uniform:a=0,b=1"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("pointmass"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("pointmass:c=1"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("pointmass:b=1,extra=2"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("pointmass:b=abc"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("twopoint:b=1,p=0,q0=-1"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("twopoint:b=1,p=0.5,q0=0.5"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("gammashift:b=1,theta=-1,lambda=1"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("pointmass:b=-2"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_law("exp:c=0"), std::invalid_argument);
}
