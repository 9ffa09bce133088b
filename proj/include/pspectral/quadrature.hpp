#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace pspectral {

/// Result of a refined quadrature: the value, the difference between the
/// last two refinement levels, and the number of integrand evaluations.
struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
  int levels = 0;
};

/// Double-exponential (tanh-sinh) quadrature on a finite interval.
///
/// Abscissae are never placed on the endpoints. Near an endpoint e they
/// approach to within the spacing of doubles at e, so an algebraic
/// singularity at 0 is resolved in relative precision while one at a
/// nonzero endpoint is truncated at that spacing; transform such integrands
/// so the singularity sits at 0.
/// Refinement stops once two successive levels agree to `rel_tol`.
QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-13, int max_level = 15);

/// Fixed 10-point Gauss-Legendre rule on [a, b]; for short subintervals of
/// smooth integrands.
double gauss_legendre10(const std::function<double(double)>& f, double a, double b);

/// Composite trapezoid over samples (x_i, y_i); x need not be uniform.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace pspectral
