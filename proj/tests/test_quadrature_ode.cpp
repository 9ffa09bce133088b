#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pspectral/ode.hpp"
#include "pspectral/quadrature.hpp"

using namespace pspectral;

TEST_CASE("tanh-sinh handles algebraic endpoint singularities") {
  const auto r = tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  const auto r2 = tanh_sinh([](double x) { return std::pow(x, -0.75); }, 0.0, 1.0);
  CHECK(r2.value == doctest::Approx(4.0).epsilon(1e-11));
  const auto r3 = tanh_sinh([](double x) { return std::exp(x); }, -1.0, 2.0);
  CHECK(r3.value == doctest::Approx(std::exp(2.0) - std::exp(-1.0)).epsilon(1e-14));
  CHECK(tanh_sinh([](double) { return 1.0; }, 1.0, 1.0).value == 0.0);
}

TEST_CASE("Gauss-Legendre and trapezoid rules") {
  CHECK(gauss_legendre10([](double x) { return std::pow(x, 19); }, 0.0, 1.0) ==
        doctest::Approx(1.0 / 20).epsilon(1e-14));
  CHECK(gauss_legendre10([](double x) { return std::cos(x); }, 1.0, 0.0) ==
        doctest::Approx(-std::sin(1.0)).epsilon(1e-14));
  const std::vector<double> x = {0.0, 0.5, 2.0};
  const std::vector<double> y = {0.0, 0.5, 2.0};
  CHECK(trapezoid(x, y) == doctest::Approx(2.0));
}

TEST_CASE("Dormand-Prince on the harmonic oscillator") {
  const ode::Rhs<2> f = [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -y[0]}; };
  ode::Options opt;
  opt.rtol = opt.atol = 1e-11;
  const auto res = ode::integrate<2>(f, 0.0, {0.0, 1.0}, 10.0, opt);
  CHECK(std::abs(res.y[0] - std::sin(10.0)) <= 1e-9);
  CHECK(res.t == 10.0);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 10.0 * i / 1000.0;
    worst = std::max(worst, std::abs(res.trajectory.eval(t)[0] - std::sin(t)));
  }
  CHECK(worst <= 1e-8);

  SUBCASE("backward") {
    const auto back = ode::integrate<2>(f, 10.0, res.y, 0.0, opt);
    CHECK(std::abs(back.y[0]) <= 1e-8);
    CHECK(std::abs(back.trajectory.eval(3.0)[0] - std::sin(3.0)) <= 1e-8);
  }

  SUBCASE("terminal event") {
    const ode::EventFn<2> ev = [](double, const ode::State<2>& y) { return y[1]; };
    const auto hit = ode::integrate<2>(f, 0.0, {0.0, 1.0}, 10.0, opt, ev);
    CHECK(hit.event);
    CHECK(std::abs(hit.t - std::numbers::pi / 2) <= 1e-10);
    CHECK(hit.trajectory.t_end() == hit.t);
  }
}
