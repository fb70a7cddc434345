#include "perptail/qlaw.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace perptail {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

double rising(double x, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= x + i;
  return r;
}

// binomial coefficients for k <= 3
constexpr int kBinom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};

void require_finite_b(const QLaw& law, const char* op) {
  if (law.b_infinite)
    bad(std::string(op) + " requires a finite essential supremum; the exp validation law is not admissible");
}

}  // namespace

QLaw QLaw::point_mass(double b) {
  QLaw law;
  law.kind = QKind::point_mass;
  law.b = b;
  check_law(law);
  return law;
}

QLaw QLaw::two_point(double b, double p, double q0) {
  QLaw law;
  law.kind = QKind::two_point;
  law.b = b;
  law.p = p;
  law.q0 = q0;
  check_law(law);
  return law;
}

QLaw QLaw::gamma_shift(double b, double theta, double lambda) {
  QLaw law;
  law.kind = QKind::gamma_shift;
  law.b = b;
  law.theta = theta;
  law.lambda = lambda;
  check_law(law);
  return law;
}

QLaw QLaw::exp_validation(double c) {
  QLaw law;
  law.kind = QKind::exp_validation;
  law.c = c;
  law.b_infinite = true;
  law.b = std::numeric_limits<double>::infinity();
  check_law(law);
  return law;
}

void check_law(const QLaw& law) {
  switch (law.kind) {
    case QKind::point_mass:
      if (!(law.b > 0) || !std::isfinite(law.b)) bad("pointmass: b must be a positive real");
      break;
    case QKind::two_point:
      if (!(law.b > 0) || !std::isfinite(law.b)) bad("twopoint: b must be a positive real");
      if (!(law.p > 0) || !(law.p <= 1)) bad("twopoint: p must lie in (0,1]");
      if (!(law.q0 <= 0)) bad("twopoint: q0 must be nonpositive");
      break;
    case QKind::gamma_shift:
      if (!(law.b > 0) || !std::isfinite(law.b)) bad("gammashift: b must be a positive real");
      if (!(law.theta > 0)) bad("gammashift: theta must be positive");
      if (!(law.lambda > 0)) bad("gammashift: lambda must be positive");
      break;
    case QKind::exp_validation:
      if (!(law.c > 0)) bad("exp: c must be positive");
      if (!law.b_infinite) bad("exp: b_infinite flag must be set");
      break;
  }
}

double mgf(const QLaw& law, double s, int k) {
  if (k < 0 || k > 3) bad("mgf: derivative order k must be in 0..3");
  if (!(s >= 0)) bad("mgf: s must be nonnegative");
  switch (law.kind) {
    case QKind::point_mass:
      return std::pow(law.b, k) * std::exp(law.b * s);
    case QKind::two_point:
      return law.p * std::pow(law.b, k) * std::exp(law.b * s) +
             (1.0 - law.p) * std::pow(law.q0, k) * std::exp(law.q0 * s);
    case QKind::gamma_shift: {
      // Leibniz on e^{bs} * (1+lam s)^{-theta}
      const double u = std::exp(law.b * s);
      double acc = 0.0;
      for (int j = 0; j <= k; ++j) {
        const double vj = ((j % 2) ? -1.0 : 1.0) * std::pow(law.lambda, j) *
                          rising(law.theta, j) *
                          std::pow(1.0 + law.lambda * s, -law.theta - j);
        acc += kBinom[k][j] * std::pow(law.b, k - j) * vj;
      }
      return u * acc;
    }
    case QKind::exp_validation: {
      if (s >= law.c) bad("mgf: exp validation law diverges for s >= c");
      double kfact = 1.0;
      for (int i = 2; i <= k; ++i) kfact *= i;
      return kfact * law.c / std::pow(law.c - s, k + 1);
    }
  }
  return 0.0;  // unreachable
}

double mgf_m1(const QLaw& law, double s) {
  if (!(s >= 0)) bad("mgf_m1: s must be nonnegative");
  switch (law.kind) {
    case QKind::point_mass:
      return std::expm1(law.b * s);
    case QKind::two_point:
      return law.p * std::expm1(law.b * s) + (1.0 - law.p) * std::expm1(law.q0 * s);
    case QKind::gamma_shift:
      return std::expm1(law.b * s - law.theta * std::log1p(law.lambda * s));
    case QKind::exp_validation:
      if (s >= law.c) bad("mgf_m1: exp validation law diverges for s >= c");
      return s / (law.c - s);
  }
  return 0.0;
}

double log_mgf(const QLaw& law, double s) {
  if (!(s >= 0)) bad("log_mgf: s must be nonnegative");
  switch (law.kind) {
    case QKind::point_mass:
      return law.b * s;
    case QKind::two_point:
      return law.b * s + std::log1p((1.0 - law.p) * std::expm1((law.q0 - law.b) * s));
    case QKind::gamma_shift:
      return law.b * s - law.theta * std::log1p(law.lambda * s);
    case QKind::exp_validation:
      if (s >= law.c) bad("log_mgf: exp validation law diverges for s >= c");
      return -std::log1p(-s / law.c);
  }
  return 0.0;
}

double mgf_ratio(const QLaw& law, double s, int k) {
  if (k < 0 || k > 3) bad("mgf_ratio: derivative order k must be in 0..3");
  if (!(s >= 0)) bad("mgf_ratio: s must be nonnegative");
  if (k == 0) return 1.0;
  switch (law.kind) {
    case QKind::point_mass:
      return std::pow(law.b, k);
    case QKind::two_point: {
      // weight of the q0 atom relative to the b atom
      const double w = (1.0 - law.p) * std::exp((law.q0 - law.b) * s);
      return (law.p * std::pow(law.b, k) + w * std::pow(law.q0, k)) / (law.p + w);
    }
    case QKind::gamma_shift: {
      const double r = law.lambda / (1.0 + law.lambda * s);
      double acc = 0.0;
      for (int j = 0; j <= k; ++j)
        acc += kBinom[k][j] * std::pow(law.b, k - j) *
               (((j % 2) ? -1.0 : 1.0) * rising(law.theta, j) * std::pow(r, j));
      return acc;
    }
    case QKind::exp_validation: {
      if (s >= law.c) bad("mgf_ratio: exp validation law diverges for s >= c");
      double kfact = 1.0;
      for (int i = 2; i <= k; ++i) kfact *= i;
      return kfact / std::pow(law.c - s, k);
    }
  }
  return 0.0;
}

double moment(const QLaw& law, int k) {
  if (k < 0) bad("moment: k must be nonnegative");
  if (k == 0) return 1.0;
  switch (law.kind) {
    case QKind::point_mass:
      return std::pow(law.b, k);
    case QKind::two_point:
      return law.p * std::pow(law.b, k) + (1.0 - law.p) * std::pow(law.q0, k);
    case QKind::gamma_shift: {
      // E[(b - eta)^k], E[eta^j] = lambda^j (theta)_j
      double acc = 0.0;
      double binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        acc += binom * std::pow(law.b, k - j) *
               (((j % 2) ? -1.0 : 1.0) * std::pow(law.lambda, j) * rising(law.theta, j));
        binom = binom * (k - j) / (j + 1);
      }
      return acc;
    }
    case QKind::exp_validation: {
      double kfact = 1.0;
      for (int i = 2; i <= k; ++i) kfact *= i;
      return kfact / std::pow(law.c, k);
    }
  }
  return 0.0;
}

double f_ratio(const QLaw& law, double s) {
  require_finite_b(law, "f_ratio");
  if (!(s >= 0)) bad("f_ratio: s must be nonnegative");
  switch (law.kind) {
    case QKind::point_mass:
      return 1.0;
    case QKind::two_point:
      return law.p + (1.0 - law.p) * std::exp((law.q0 - law.b) * s);
    case QKind::gamma_shift:
      return std::exp(-law.theta * std::log1p(law.lambda * s));
    default:
      return 0.0;
  }
}

double sample_q(const QLaw& law, RngStream& rng) {
  switch (law.kind) {
    case QKind::point_mass:
      return law.b;
    case QKind::two_point:
      return rng.u01() < law.p ? law.b : law.q0;
    case QKind::gamma_shift:
      return law.b - law.lambda * rng.gamma(law.theta);
    case QKind::exp_validation:
      return rng.exponential(law.c);
  }
  return 0.0;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    bad("law specifier: cannot parse number '" + std::string(text) + "' for " + std::string(what));
  return v;
}

struct KV {
  std::string_view key, value;
};

std::vector<KV> split_kv(std::string_view body) {
  std::vector<KV> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      bad("law specifier: expected key=value, got '" + std::string(item) + "'");
    out.push_back({item.substr(0, eq), item.substr(eq + 1)});
    body = (comma == std::string_view::npos) ? std::string_view{} : body.substr(comma + 1);
  }
  return out;
}

double take(std::vector<KV>& kvs, std::string_view key) {
  for (auto it = kvs.begin(); it != kvs.end(); ++it) {
    if (it->key == key) {
      const double v = parse_double(it->value, key);
      kvs.erase(it);
      return v;
    }
  }
  bad("law specifier: missing field '" + std::string(key) + "'");
}

}  // namespace

QLaw parse_law(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    bad("law specifier: expected '<variant>:<params>', got '" + std::string(text) + "'");
  const std::string_view head = text.substr(0, colon);
  auto kvs = split_kv(text.substr(colon + 1));
  QLaw law;
  if (head == "pointmass") {
    law = QLaw::point_mass(take(kvs, "b"));
  } else if (head == "twopoint") {
    const double b = take(kvs, "b"), p = take(kvs, "p"), q0 = take(kvs, "q0");
    law = QLaw::two_point(b, p, q0);
  } else if (head == "gammashift") {
    const double b = take(kvs, "b"), th = take(kvs, "theta"), lam = take(kvs, "lambda");
    law = QLaw::gamma_shift(b, th, lam);
  } else if (head == "exp") {
    law = QLaw::exp_validation(take(kvs, "c"));
  } else {
    bad("law specifier: unknown variant '" + std::string(head) + "'");
  }
  if (!kvs.empty())
    bad("law specifier: unexpected field '" + std::string(kvs.front().key) + "'");
  return law;
}

std::string format_law(const QLaw& law) {
  switch (law.kind) {
    case QKind::point_mass:
      return "pointmass:b=" + fmt_double(law.b);
    case QKind::two_point:
      return "twopoint:b=" + fmt_double(law.b) + ",p=" + fmt_double(law.p) +
             ",q0=" + fmt_double(law.q0);
    case QKind::gamma_shift:
      return "gammashift:b=" + fmt_double(law.b) + ",theta=" + fmt_double(law.theta) +
             ",lambda=" + fmt_double(law.lambda);
    case QKind::exp_validation:
      return "exp:c=" + fmt_double(law.c);
  }
  return {};
}

}  // namespace perptail
