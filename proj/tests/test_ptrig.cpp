#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "pspectral/ptrig.hpp"

using namespace pspectral;

namespace {

const std::vector<double> kExponents = {1.2, 1.5, 2.0, 3.0, 5.0};

// int_0^s (1 - t^p)^(-1/p) dt through the regularized incomplete beta function.
double incomplete_integral(double s, double p) {
  const double a = 1.0 / p;
  const double b = 1.0 - 1.0 / p;
  return boost::math::beta(a, b) * boost::math::ibeta(a, b, std::pow(s, p)) / p;
}

// Full integral over [-1, 1] with t = 1 - u^q on the upper half.
double pi_p_by_kronrod(double p) {
  const double q = p / (p - 1.0);
  auto g = [p, q](double u) {
    if (u <= 0.0) return q * std::pow(p, -1.0 / p);
    const double d = -std::expm1(p * std::log1p(-std::pow(u, q)));
    return q * std::pow(u, q - 1.0) * std::pow(d, -1.0 / p);
  };
  return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 1.0, 15, 1e-14);
}

}  // namespace

TEST_CASE("exponent validation") {
  CHECK_THROWS_AS(PExponent{1.0}, std::invalid_argument);
  CHECK_THROWS_AS(PExponent{0.5}, std::invalid_argument);
  CHECK_THROWS_AS(PExponent{INFINITY}, std::invalid_argument);
  CHECK_THROWS_AS(PExponent{NAN}, std::invalid_argument);
  CHECK(PExponent(3.0).conjugate() == doctest::Approx(1.5));
}

TEST_CASE("pi_p closed form against independent oracles") {
  CHECK(pi_p(PExponent(2.0)) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
  for (double p : {1.1, 1.2, 1.5, 2.0, 3.0, 4.0, 5.0, 10.0}) {
    const PExponent e(p);
    const double closed = pi_p(e);
    const double beta = 2.0 / p * boost::math::beta(1.0 / p, 1.0 - 1.0 / p);
    CHECK(std::abs(closed - beta) <= 1e-13 * closed);
    CHECK(std::abs(closed - pi_p_by_kronrod(p)) <= 1e-10 * closed);
    CHECK(std::abs(closed - pi_p_quadrature(e)) <= 1e-10 * closed);
  }
}

TEST_CASE("inverse sine against the incomplete beta function") {
  for (double p : kExponents) {
    const PExponent e(p);
    for (int i = 0; i <= 200; ++i) {
      const double s = i / 200.0;
      const double expect = incomplete_integral(s, p);
      INFO("p=" << p << " s=" << s);
      CHECK(std::abs(inv_sin_p(s, e) - expect) <= 1e-11);
      CHECK(inv_sin_p(-s, e) == -inv_sin_p(s, e));
    }
    CHECK(inv_sin_p(1.0, e) == doctest::Approx(pi_p(e) / 2).epsilon(1e-15));
    CHECK_THROWS_AS(inv_sin_p(1.0 + 1e-12, e), std::domain_error);
  }
}

TEST_CASE("trivial values") {
  for (double p : kExponents) {
    const PExponent e(p);
    const double hp = pi_p(e) / 2;
    CHECK(sin_p(0.0, e) == 0.0);
    CHECK(cos_p(0.0, e) == 1.0);
    CHECK(sin_p(hp, e) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(cos_p(hp, e)) <= 1e-5);
    CHECK(inv_sin_p(0.0, e) == 0.0);
    CHECK(arctan_p(0.0, e) == 0.0);
    CHECK(arctan_p(INFINITY, e) == hp);
    CHECK(arctan_p(-INFINITY, e) == -hp);
  }
  const PExponent two(2.0);
  CHECK(sin_p(std::numbers::pi / 6, two) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(cos_p(std::numbers::pi / 3, two) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(inv_sin_p(std::sqrt(0.5), two) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
  CHECK(arctan_p(1.0, two) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-14));
}

TEST_CASE("Pythagorean identity on a dense grid") {
  for (double p : kExponents) {
    const PExponent e(p);
    const double pp = pi_p(e);
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = -2 * pp + 4 * pp * i / 1000.0;
      const PSinCos sc = sincos_p(x, e);
      worst = std::max(worst, std::abs(std::pow(std::abs(sc.sin), p) + std::pow(std::abs(sc.cos), p) - 1));
      CHECK(std::abs(sc.sin) <= 1.0);
    }
    INFO("p=" << p);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("symmetries and round trips") {
  for (double p : kExponents) {
    const PExponent e(p);
    const double pp = pi_p(e);
    for (int i = 0; i <= 100; ++i) {
      const double x = -0.5 * pp + pp * i / 100.0;
      INFO("p=" << p << " x=" << x);
      const double s = sin_p(x, e);
      CHECK(sin_p(-x, e) == doctest::Approx(-s).epsilon(1e-14));
      CHECK(std::abs(sin_p(pp - x, e) - s) <= 1e-12);
      CHECK(std::abs(sin_p(x + 2 * pp, e) - s) <= 1e-12);
      CHECK(std::abs(inv_sin_p(s, e) - x) <= 1e-8);
    }
    for (int i = -100; i <= 100; ++i) {
      const double s = (1.0 - 1e-6) * i / 100.0;
      CHECK(std::abs(sin_p(inv_sin_p(s, e), e) - s) <= 1e-10);
    }
  }
}

TEST_CASE("cos_p is the derivative of sin_p") {
  for (double p : kExponents) {
    const PExponent e(p);
    const double hp = pi_p(e) / 2;
    for (double h : {1e-3, 5e-4}) {
      double worst = 0.0;
      // sin_p is only C^{2,p-1} at the zeros when p < 2, so stay clear of them too.
      for (int i = -100; i <= 100; ++i) {
        if (i == 0) continue;
        const double x = (i < 0 ? -1 : 1) * (0.1 + (0.9 * hp - 0.1) * std::abs(i) / 100.0);
        const double fd = (sin_p(x + h, e) - sin_p(x - h, e)) / (2 * h);
        worst = std::max(worst, std::abs(fd - cos_p(x, e)));
      }
      INFO("p=" << p << " h=" << h);
      CHECK(worst <= 50 * h * h);
    }
    // One-sided near the critical point, relaxed band.
    const double h = 1e-6;
    const double x = hp - 1e-3;
    const double fd = (sin_p(x, e) - sin_p(x - h, e)) / h;
    CHECK(std::abs(fd - cos_p(x, e)) <= 1e-3);
  }
}

TEST_CASE("classical reduction at p = 2") {
  const PExponent two(2.0);
  for (int i = 0; i <= 400; ++i) {
    const double x = -10.0 + 20.0 * i / 400.0;
    CHECK(std::abs(sin_p(x, two) - std::sin(x)) <= 1e-10);
    CHECK(std::abs(cos_p(x, two) - std::cos(x)) <= 1e-10);
    const double y = -50.0 + 100.0 * i / 400.0;
    CHECK(std::abs(arctan_p(y, two) - std::atan(y)) <= 1e-10);
  }
}

TEST_CASE("arctan_p inverts tan_p and is monotone") {
  for (double p : kExponents) {
    const PExponent e(p);
    const double hp = pi_p(e) / 2;
    double prev = -hp;
    for (int i = -300; i <= 300; ++i) {
      const double y = std::sinh(i / 20.0);
      const double v = arctan_p(y, e);
      CHECK(v >= prev);
      prev = v;
    }
    for (int i = 1; i < 100; ++i) {
      const double x = -hp + 2 * hp * i / 100.0;
      CHECK(std::abs(arctan_p(tan_p(x, e), e) - x) <= 1e-10);
    }
    CHECK(hp - arctan_p(1e300, e) <= 1e-12);
  }
}
