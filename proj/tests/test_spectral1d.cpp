#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pspectral/spectral1d.hpp"

using namespace pspectral;

namespace {

// Eigenfunction of the equality case on a segment of length d, sampled.
EigenResult sine_on_segment(double p, double d, int N, double amplitude = 1.0) {
  const PExponent pe(p);
  const double alpha = pi_p(pe) / d;
  EigenResult r;
  r.lambda = (p - 1.0) * std::pow(alpha, p);
  const Domain1D dom = Domain1D::segment(0.0, d, N);
  std::vector<double> u;
  for (double x : dom.nodes()) u.push_back(amplitude * sin_p(alpha * x - pi_p(pe) / 2, pe));
  r.u = {dom, u};
  return r;
}

ModelSolution flat_model(double p, double lambda) {
  return solve_model(ModelProblem(PParams(p, 1.0, lambda), kInfiniteStart));
}

}  // namespace

TEST_CASE("domain construction") {
  const Domain1D s = Domain1D::segment(0.0, 1.0, 17);
  CHECK(s.size() == 17);
  CHECK(s.cells() == 16);
  CHECK(s.spacing() == doctest::Approx(1.0 / 16));
  CHECK(s.nodes().back() == 1.0);
  double mass = 0.0;
  for (double w : s.weights()) mass += w;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));

  const Domain1D c = Domain1D::circle(2 * std::numbers::pi, 64);
  CHECK(c.cells() == 64);
  CHECK(c.next(63) == 0);
  CHECK(c.diameter() == doctest::Approx(std::numbers::pi));

  const Domain1D r = Domain1D::radial(1.0, 3.0, 33);
  CHECK(r.weights()[0] == 0.0);
  for (int i = 1; i + 1 < r.size(); ++i)
    CHECK(r.weights()[i] == doctest::Approx(r.spacing() * r.nodes()[i] * r.nodes()[i]));

  CHECK_THROWS_AS(Domain1D::segment(0, 1, 15), std::invalid_argument);
  CHECK_THROWS_AS(Domain1D::segment(1, 1, 32), std::invalid_argument);
  CHECK_THROWS_AS(Domain1D::circle(-1, 32), std::invalid_argument);
  CHECK_THROWS_AS(Domain1D::radial(1, 0.5, 32), std::invalid_argument);
}

TEST_CASE("Rayleigh quotient") {
  // p = 2, cos(pi x) on [0, 1].
  const Domain1D s = Domain1D::segment(0.0, 1.0, 2001);
  std::vector<double> u;
  for (double x : s.nodes()) u.push_back(std::cos(std::numbers::pi * x));
  CHECK(rayleigh_quotient({s, u}, 2.0) == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-5));

  // sin_p samples on a segment of length pi_p give lambda/(p-1) -> 1.
  for (double p : {1.5, 3.0}) {
    const EigenResult e = sine_on_segment(p, pi_p(PExponent(p)), 4001);
    CHECK(rayleigh_quotient(e.u, p) / (p - 1.0) == doctest::Approx(1.0).epsilon(1e-4));
  }

  const Domain1D c = Domain1D::circle(1.0, 32);
  CHECK_THROWS_AS(rayleigh_quotient({c, std::vector<double>(32, 3.0)}, 2.0), std::domain_error);
  CHECK_THROWS_AS(rayleigh_quotient({c, std::vector<double>(31, 3.0)}, 2.0), std::invalid_argument);
}

TEST_CASE("p-mean shift") {
  const Domain1D s = Domain1D::segment(0.0, 1.0, 101);
  std::vector<double> u;
  for (double x : s.nodes()) u.push_back(x * x);
  for (double p : {1.5, 2.0, 4.0}) {
    const double c = p_mean_shift(s, u, p);
    double sum = 0.0;
    for (int i = 0; i < s.size(); ++i) sum += s.weights()[i] * spow(u[i] - c, p - 1.0);
    CHECK(std::abs(sum) <= 1e-13);
  }
  // p = 2 is the weighted mean.
  double mean = 0.0;
  for (int i = 0; i < s.size(); ++i) mean += s.weights()[i] * u[i];
  CHECK(p_mean_shift(s, u, 2.0) == doctest::Approx(mean).epsilon(1e-13));
}

TEST_CASE("variational solver in the equality case") {
  for (double p : {1.5, 2.0, 3.0}) {
    INFO("p=" << p);
    const double target = std::pow(pi_p(PExponent(p)), p);
    const EigenResult seg = solve_eigen_variational(Domain1D::segment(0.0, 1.0, 400), p);
    CHECK(seg.converged);
    CHECK(seg.lambda / (p - 1.0) == doctest::Approx(target).epsilon(5e-3));
    CHECK(std::abs(seg.p_mean) <= 1e-10);
    const auto [mn, mx] = std::minmax_element(seg.u.values.begin(), seg.u.values.end());
    CHECK(*mn == -1.0);
    CHECK(std::abs(*mx - 1.0) <= 10.0 / 400);
    CHECK(rayleigh_quotient(seg.u, p) == doctest::Approx(seg.lambda).epsilon(1e-12));

    const EigenResult circ = solve_eigen_variational(Domain1D::circle(2.0, 400), p);
    CHECK(circ.lambda / (p - 1.0) == doctest::Approx(target).epsilon(5e-3));
    // Every computed value respects the sharp bound up to discretization.
    CHECK(circ.lambda / (p - 1.0) >= target * (1.0 - 1e-3));
  }
}

TEST_CASE("equality case converges with mesh refinement") {
  const double p = 3.0;
  const double target = std::pow(pi_p(PExponent(p)), p);
  double prev = INFINITY;
  for (int N : {64, 128, 256}) {
    const double err = std::abs(solve_eigen_variational(Domain1D::segment(0.0, 1.0, N), p).lambda / 2.0 - target);
    if (std::isfinite(prev)) CHECK(std::log2(prev / err) >= 1.0);
    prev = err;
  }
}

TEST_CASE("solver is deterministic for a seed") {
  VariationalOptions o;
  o.seed = 7;
  const EigenResult a = solve_eigen_variational(Domain1D::radial(1.0, 3.0, 200), 2.5, o);
  const EigenResult b = solve_eigen_variational(Domain1D::radial(1.0, 3.0, 200), 2.5, o);
  CHECK(a.lambda == b.lambda);
  CHECK(a.u.values == b.u.values);
}

TEST_CASE("shooting backend") {
  for (double p : {1.5, 2.0, 3.0}) {
    const double b1 = radial_unit_extent(p, 3.0);
    CHECK(b1 > pi_p(PExponent(p)));
    const EigenResult fixed = solve_eigen_shooting(Domain1D::radial(b1, 3.0, 100), p);
    CHECK(fixed.lambda == doctest::Approx(p - 1.0).epsilon(1e-14));
  }
  const double l1 = solve_eigen_shooting(Domain1D::radial(1.0, 2.0, 100), 3.0).lambda;
  const double l2 = solve_eigen_shooting(Domain1D::radial(2.0, 2.0, 100), 3.0).lambda;
  CHECK(l2 == doctest::Approx(l1 / 8.0).epsilon(1e-14));
  // p = 2, n = 2: Neumann eigenvalue of the unit disk is j'_{0,1}^2 = j_{1,1}^2.
  CHECK(solve_eigen_shooting(Domain1D::radial(1.0, 2.0, 100), 2.0).lambda ==
        doctest::Approx(3.8317059702075123 * 3.8317059702075123).epsilon(1e-9));
  CHECK_THROWS_AS(solve_eigen_shooting(Domain1D::segment(0, 1, 100), 2.0), std::invalid_argument);
}

TEST_CASE("backends agree on radial domains") {
  for (double n : {2.0, 3.0}) {
    for (double p : {1.5, 3.0}) {
      INFO("n=" << n << " p=" << p);
      const Domain1D d = Domain1D::radial(1.0, n, 400);
      const double v = solve_eigen_variational(d, p).lambda;
      const double s = solve_eigen_shooting(d, p).lambda;
      CHECK(std::abs(v / s - 1.0) <= 5e-3);
    }
  }
}

TEST_CASE("gradient comparison") {
  for (double p : {1.5, 2.0, 3.0}) {
    INFO("p=" << p);
    const EigenResult e = sine_on_segment(p, 1.0, 1000);
    const GradientReport g = gradient_comparison_check(e, flat_model(p, e.lambda));
    CHECK(g.pass);
    CHECK(g.max_violation <= 5.0 * g.h);
    CHECK(g.max_violation >= -10.0 * g.h * g.h);  // saturated

    const EigenResult half = sine_on_segment(p, 1.0, 1000, 0.5);
    const GradientReport gh = gradient_comparison_check(half, flat_model(p, half.lambda));
    CHECK(gh.min_slack > 0.0);

    const EigenResult rad = solve_eigen_shooting(Domain1D::radial(1.0, 3.0, 1000), p);
    const ModelSolution sol = solve_model(ModelProblem(PParams(p, 3.0, rad.lambda), 0.0));
    CHECK(sol.b() == doctest::Approx(1.0).epsilon(1e-9));
    const GradientReport gr = gradient_comparison_check(rad, sol);
    CHECK(gr.pass);
  }
  const EigenResult e = sine_on_segment(2.0, 1.0, 200);
  CHECK_THROWS_AS(gradient_comparison_check(e, flat_model(2.0, 2.0 * e.lambda)), std::invalid_argument);
  const EigenResult big = sine_on_segment(2.0, 1.0, 200, 1.5);
  CHECK_THROWS_AS(gradient_comparison_check(big, flat_model(2.0, big.lambda)), std::invalid_argument);
}

TEST_CASE("E profile") {
  for (double p : {1.5, 2.0, 3.0}) {
    INFO("p=" << p);
    const EigenResult e = sine_on_segment(p, 1.0, 1000);
    const EProfile prof = E_profile(e, flat_model(p, e.lambda));
    CHECK(prof.constant);
    CHECK(prof.monotone);
    CHECK(prof.E[100] == doctest::Approx(1.0).epsilon(1e-3));

    const EigenResult rad = solve_eigen_shooting(Domain1D::radial(1.0, 3.0, 1000), p);
    const ModelSolution sol = solve_model(ModelProblem(PParams(p, 3.0, rad.lambda), 0.0));
    const EProfile pr = E_profile(rad, sol);
    CHECK(pr.constant);
    CHECK(pr.monotone);

    // Extra mass near the minimum breaks monotonicity.
    const EProfile bad = E_profile(perturb_measure(rad, -0.9, 1.5), sol);
    CHECK_FALSE(bad.monotone);
  }
}

TEST_CASE("radial variational eigenfunction near the centre") {
  const Domain1D d = Domain1D::radial(1.0, 3.0, 400);
  const EigenResult v = solve_eigen_variational(d, 2.0);
  const EigenResult sh = solve_eigen_shooting(d, 2.0);
  CHECK(v.u.values[0] == v.u.values[1]);
  double worst = 0.0;
  for (int i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(v.u.values[i] - sh.u.values[i]));
  CHECK(worst < 20.0 * d.spacing() * d.spacing());
  const ModelSolution sol = solve_model(ModelProblem(PParams(2.0, 3.0, v.lambda), 0.0));
  CHECK(E_profile(v, sol).constant);
  CHECK(gradient_comparison_check(v, sol).pass);
}

TEST_CASE("bounds table") {
  const auto rows = bounds_table(2.0, std::numbers::pi, 2.0);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].name == "sharp");
  CHECK(rows[0].value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rows[1].value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(rows[3].value == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(rows[4].value == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto& r : rows) CHECK(r.applicable);

  const auto r3 = bounds_table(3.0, 1.0, 2.0);
  const double pi3 = pi_p(PExponent(3.0));
  CHECK(r3[0].value == doctest::Approx(2.0 * pi3 * pi3 * pi3).epsilon(1e-14));
  CHECK(r3[0].value / r3[1].value == doctest::Approx(8.0).epsilon(1e-14));
  CHECK_FALSE(r3[3].applicable);
  CHECK_FALSE(bounds_table(1.5, 1.0, 2.0)[2].applicable);
  CHECK_THROWS_AS(bounds_table(1.0, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(bounds_table(2.0, 0.0, 2.0), std::invalid_argument);
}
