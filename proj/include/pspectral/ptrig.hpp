#pragma once

// Generalized (p-)trigonometric functions.
//
// sin_p is the inverse of x = int_0^s (1 - t^p)^(-1/p) dt on [-pi_p/2, pi_p/2],
// continued by sin_p(pi_p - x) = sin_p(x) and 2 pi_p periodicity. cos_p is its
// derivative and |sin_p|^p + |cos_p|^p = 1. For p = 2 everything reduces to
// the classical functions.

#include <cmath>

namespace pspectral {

/// Exponent p of the p-Laplacian; always finite and > 1.
class PExponent {
 public:
  explicit PExponent(double p);

  double value() const noexcept { return p_; }
  /// Conjugate exponent p/(p-1).
  double conjugate() const noexcept { return p_ / (p_ - 1.0); }

 private:
  double p_;
};

/// Signed power x^(e) = |x|^e sign(x).
inline double spow(double x, double e) {
  return x < 0.0 ? -std::pow(-x, e) : std::pow(x, e);
}

/// pi_p = 2 pi / (p sin(pi/p)), the half period of sin_p.
double pi_p(PExponent p);

/// pi_p from the defining integral, by quadrature of both halves with the
/// endpoint singularity removed by substitution. Used as a self-check.
double pi_p_quadrature(PExponent p);

struct PSinCos {
  double sin;
  double cos;
  /// 1 - |sin|^p, carried separately so cos^p keeps full relative accuracy
  /// near the critical points.
  double cos_pow_p;
};

PSinCos sincos_p(double x, PExponent p);
double sin_p(double x, PExponent p);
double cos_p(double x, PExponent p);
/// sin_p / cos_p on (-pi_p/2, pi_p/2) continued with period pi_p.
double tan_p(double x, PExponent p);

/// Principal inverse of sin_p; s in [-1, 1], result in [-pi_p/2, pi_p/2].
/// Throws std::domain_error for |s| > 1.
double inv_sin_p(double s, PExponent p);

/// Inverse of tan_p onto (-pi_p/2, pi_p/2); +-infinity maps to +-pi_p/2.
double arctan_p(double y, PExponent p);

}  // namespace pspectral
