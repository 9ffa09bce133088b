#include "pspectral/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <stdexcept>

namespace pspectral {

QuadratureResult tanh_sinh(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, int max_level) {
  if (!(b > a)) {
    if (a == b) return {};
    throw std::invalid_argument("tanh_sinh: require a <= b");
  }
  thread_local boost::math::quadrature::tanh_sinh<double> rule(static_cast<std::size_t>(max_level));
  QuadratureResult out;
  std::size_t levels = 0;
  double l1 = 0.0;
  auto g = [&](double x) {
    ++out.evaluations;
    return f(x);
  };
  out.value = rule.integrate(g, a, b, rel_tol, &out.error_estimate, &l1, &levels);
  out.levels = static_cast<int>(levels);
  if (!std::isfinite(out.value)) throw std::domain_error("tanh_sinh: non-finite integrand");
  return out;
}

double gauss_legendre10(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

}  // namespace pspectral
