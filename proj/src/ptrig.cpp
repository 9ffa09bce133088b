#include "pspectral/ptrig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "pspectral/quadrature.hpp"

namespace pspectral {

PExponent::PExponent(double p) : p_(p) {
  if (!std::isfinite(p) || !(p > 1.0)) throw std::invalid_argument("p must be finite and > 1");
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// The defining integral is split at s* = 2^(-1/p), where s*^p = 1/2.
//
//   head(s) = int_0^s (1 - t^p)^(-1/p) dt                    for s <= s*
//   tail(r) = int_{1 - r^q}^1 (1 - t^p)^(-1/p) dt
//           = int_0^r q u^(q-1) (1 - (1 - u^q)^p)^(-1/p) du   (q = p/(p-1))
//
// The substitution t = 1 - u^q makes the tail integrand bounded, with
// limit q p^(-1/p) at u = 0.
struct Kernel {
  double p;
  double q;
  double inv_p;
  double half_pi_p;

  explicit Kernel(PExponent e)
      : p(e.value()), q(e.conjugate()), inv_p(1.0 / e.value()), half_pi_p(0.5 * pi_p(e)) {}

  double head_integrand(double t) const {
    if (t <= 0.0) return 1.0;
    return std::exp(-inv_p * std::log1p(-std::pow(t, p)));
  }

  // 1 - (1 - u^q)^p, accurate for small u.
  double tail_complement(double u) const {
    if (u <= 0.0) return 0.0;
    return -std::expm1(p * std::log1p(-std::pow(u, q)));
  }

  double tail_integrand(double u) const {
    const double log_u = std::log(u);
    // Below this u^q underflows; the integrand has reached its limit value.
    if (u <= 0.0 || q * log_u < -600.0) return q * std::pow(p, -inv_p);
    const double d = tail_complement(u);
    return q * std::exp((q - 1.0) * log_u - inv_p * std::log(d));
  }

  double head(double s) const {
    if (s <= 0.0) return 0.0;
    return tanh_sinh([this](double t) { return head_integrand(t); }, 0.0, s, 1e-13).value;
  }

  double tail(double r) const {
    if (r <= 0.0) return 0.0;
    return tanh_sinh([this](double u) { return tail_integrand(u); }, 0.0, r, 1e-13).value;
  }

  double split() const { return std::pow(2.0, -inv_p); }
};

// Value of sin_p at x in [0, pi_p/2] together with 1 - sin_p^p.
struct Principal {
  double s;
  double comp;
};

// Safeguarded Newton on an increasing function G with G' = g, solving
// G(z) = target on [lo, hi]. Steps that stay short relative to the distance
// from the singular endpoints 0 and 1 update G incrementally with a
// Gauss-Legendre rule; anything else recomputes it by tanh-sinh.
template <class Full, class Deriv>
double newton_inverse(double target, double lo, double hi, double z, Full full, Deriv deriv) {
  double gz = full(z);
  for (int it = 0; it < 100; ++it) {
    const double r = gz - target;
    if (r == 0.0) return z;
    if (r > 0.0) hi = std::min(hi, z); else lo = std::max(lo, z);
    double zn = z - r / deriv(z);
    if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
    const double step = zn - z;
    if (std::abs(step) <= 2.0 * kEps * std::max(std::abs(z), std::numeric_limits<double>::min())) return zn;
    const double room = std::min(std::min(zn, z), 1.0 - std::max(zn, z));
    if (std::abs(step) <= 0.2 * room) {
      gz += gauss_legendre10(deriv, z, zn);
    } else {
      gz = full(zn);
    }
    z = zn;
    if (hi - lo <= 2.0 * kEps * std::abs(z)) return z;
  }
  return z;
}

Principal principal_sin(double x, const Kernel& k) {
  if (x <= 0.0) return {0.0, 1.0};
  if (x >= k.half_pi_p) return {1.0, 0.0};
  const double s_star = k.split();
  if (x <= s_star) {
    // head(s) >= s, so the root lies in [0, x].
    const double s = newton_inverse(
        x, 0.0, x, x, [&](double z) { return k.head(z); },
        [&](double z) { return k.head_integrand(z); });
    return {s, -std::expm1(k.p * std::log(s))};
  }
  const double target = k.half_pi_p - x;
  const double g0 = k.tail_integrand(0.0);
  const double hi = std::min(1.0, target / g0);
  const double r = newton_inverse(
      target, 0.0, hi, hi, [&](double z) { return k.tail(z); },
      [&](double z) { return k.tail_integrand(z); });
  return {1.0 - std::pow(r, k.q), k.tail_complement(r)};
}

// Inverse on [0, 1] given s and 1 - s^p.
double principal_inverse(double s, double comp, const Kernel& k) {
  if (s <= 0.0) return 0.0;
  if (comp <= 0.0) return k.half_pi_p;
  if (s <= k.split()) return k.head(s);
  // 1 - s from the complement keeps accuracy when s is close to 1.
  const double one_minus_s = -std::expm1(k.inv_p * std::log1p(-comp));
  return k.half_pi_p - k.tail(std::pow(one_minus_s, 1.0 / k.q));
}

}  // namespace

double pi_p(PExponent p) {
  const double e = p.value();
  return 2.0 * std::numbers::pi / (e * std::sin(std::numbers::pi / e));
}

double pi_p_quadrature(PExponent p) {
  const Kernel k(p);
  const double s_star = k.split();
  const double r_star = std::pow(1.0 - s_star, 1.0 / k.q);
  return 2.0 * (k.head(s_star) + k.tail(r_star));
}

PSinCos sincos_p(double x, PExponent p) {
  const Kernel k(p);
  const double period = 4.0 * k.half_pi_p;
  // Reduce to [-pi_p/2, 3 pi_p/2).
  double r = x - period * std::floor((x + k.half_pi_p) / period);
  double cos_sign = 1.0;
  if (r > k.half_pi_p) {
    r = 2.0 * k.half_pi_p - r;
    cos_sign = -1.0;
  }
  const double sin_sign = r < 0.0 ? -1.0 : 1.0;
  const Principal pr = principal_sin(std::abs(r), k);
  return {sin_sign * pr.s, cos_sign * std::pow(pr.comp, k.inv_p), pr.comp};
}

double sin_p(double x, PExponent p) { return sincos_p(x, p).sin; }

double cos_p(double x, PExponent p) { return sincos_p(x, p).cos; }

double tan_p(double x, PExponent p) {
  const PSinCos sc = sincos_p(x, p);
  return sc.sin / sc.cos;
}

double inv_sin_p(double s, PExponent p) {
  if (!(std::abs(s) <= 1.0)) throw std::domain_error("inv_sin_p: |s| > 1");
  const Kernel k(p);
  const double a = std::abs(s);
  const double comp = a <= 0.5 ? -std::expm1(k.p * std::log(a)) : 1.0 - std::pow(a, k.p);
  const double v = principal_inverse(a, a == 1.0 ? 0.0 : comp, k);
  return s < 0.0 ? -v : v;
}

double arctan_p(double y, PExponent p) {
  const Kernel k(p);
  if (std::isnan(y)) throw std::domain_error("arctan_p: NaN argument");
  if (std::isinf(y)) return y > 0.0 ? k.half_pi_p : -k.half_pi_p;
  const double a = std::abs(y);
  // tan_p(phi) = a  <=>  sin_p^p = a^p / (1 + a^p),  1 - sin_p^p = 1 / (1 + a^p).
  double v;
  if (a == 0.0) {
    v = 0.0;
  } else {
    const double lp = k.p * std::log(a);
    double s;
    double comp;
    if (lp < 0.0) {
      s = a * std::exp(-k.inv_p * std::log1p(std::exp(lp)));
      comp = 1.0 / (1.0 + std::exp(lp));
    } else {
      const double inv = std::exp(-lp);  // a^-p
      s = std::exp(-k.inv_p * std::log1p(inv));
      comp = inv / (1.0 + inv);
    }
    v = principal_inverse(s, comp, k);
  }
  return y < 0.0 ? -v : v;
}

}  // namespace pspectral
