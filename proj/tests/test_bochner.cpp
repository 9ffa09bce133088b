#include <doctest.h>

#include <cmath>

#include "pspectral/bochner.hpp"
#include "pspectral/ptrig.hpp"

using namespace pspectral;

namespace {

Eigen::VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }
Eigen::VectorXd v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

ScalarField half_norm2(int dim) {
  return {dim, [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); }};
}

ScalarField sine_field(double p, double alpha) {
  const PExponent pe(p);
  return {1, [pe, alpha](const Eigen::VectorXd& x) { return sin_p(alpha * x[0], pe); }};
}

}  // namespace

TEST_CASE("stencils on polynomials") {
  const ScalarField affine{2, [](const Eigen::VectorXd& x) { return 3.0 * x[0] - 0.5 * x[1] + 1.0; }};
  const DiffReport ra = differentiate(affine, v2(0.4, -1.2));
  CHECK(ra.grad[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ra.grad[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(ra.hess.cwiseAbs().maxCoeff() <= 1e-8);
  for (double t : ra.third) CHECK(std::abs(t) <= 1e-4);

  Eigen::Matrix3d Q;
  Q << 2, 0.5, -1, 0.5, 1, 0.3, -1, 0.3, 4;
  const ScalarField quad{3, [Q](const Eigen::VectorXd& x) { return 0.5 * x.dot(Q * x); }};
  const DiffReport rq = differentiate(quad, v3(0.1, 0.2, -0.3));
  CHECK((rq.hess - Q).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((rq.grad - Q * v3(0.1, 0.2, -0.3)).cwiseAbs().maxCoeff() <= 1e-10);

  const ScalarField mono{2, [](const Eigen::VectorXd& x) { return x[0] * x[0] * x[1]; }};
  const DiffReport rm = differentiate(mono, v2(1.0, 1.0));
  CHECK(rm.third_at(0, 0, 1) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(rm.third_at(1, 0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(rm.third_at(0, 0, 0)) <= 1e-4);
  CHECK(std::abs(rm.third_at(1, 1, 0)) <= 1e-4);
  CHECK(rm.est_error <= 1e-6);
}

TEST_CASE("third derivatives are symmetric") {
  const auto& c = catalog_field("mixed3");
  const DiffReport r = differentiate(c.field, c.point);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        CHECK(r.third_at(i, j, k) == r.third_at(j, i, k));
        CHECK(r.third_at(i, j, k) == r.third_at(k, j, i));
      }
  // x y z has u_xyz = 1; -z^3/2 has u_zzz = -3.
  CHECK(r.third_at(0, 1, 2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.third_at(2, 2, 2) == doctest::Approx(-3.0).epsilon(1e-6));
}

TEST_CASE("non-finite and degenerate inputs") {
  const ScalarField bad{1, [](const Eigen::VectorXd& x) { return std::log(x[0]); }};
  Eigen::VectorXd zero(1);
  zero << 0.0;
  CHECK_THROWS_AS(differentiate(bad, zero), std::domain_error);
  CHECK_THROWS_AS(p_laplacian_at(half_norm2(2), v2(0, 0), 3.0), DegenerateGradient);
  CHECK_THROWS_AS(differentiate(half_norm2(2), v3(1, 1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(differentiate(half_norm2(2), v2(1, 1), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(catalog_field("nope"), std::invalid_argument);
}

TEST_CASE("p-Laplacian of the half squared norm") {
  for (int n : {2, 3}) {
    for (double p : {1.5, 2.0, 3.0, 4.5}) {
      const Eigen::VectorXd x = n == 2 ? v2(0.3, -0.8) : v3(0.3, -0.8, 0.5);
      const double r = x.norm();
      const double expected = (n + p - 2.0) * std::pow(r, p - 2.0);
      const double got = p_laplacian_at(half_norm2(n), x, p);
      CHECK(got == doctest::Approx(expected).epsilon(1e-9));
      // Divergence of the flux |x|^(p-2) x by central differences.
      const double h = 1e-4;
      double div = 0.0;
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd a = x, b = x;
        a[i] += h;
        b[i] -= h;
        div += (std::pow(a.norm(), p - 2.0) * a[i] - std::pow(b.norm(), p - 2.0) * b[i]) / (2 * h);
      }
      CHECK(got == doctest::Approx(div).epsilon(1e-6));
    }
  }
}

TEST_CASE("p-Laplacian of the p-sine") {
  for (double p : {1.5, 2.0, 3.0}) {
    const double alpha = 1.3;
    const double lambda = (p - 1.0) * std::pow(alpha, p);
    const ScalarField u = sine_field(p, alpha);
    for (double x : {0.2, 0.5, 0.9}) {
      Eigen::VectorXd pt(1);
      pt << x;
      const double s = sin_p(alpha * x, PExponent(p));
      CHECK(p_laplacian_at(u, pt, p) == doctest::Approx(-lambda * spow(s, p - 1.0)).epsilon(1e-7));
    }
  }
}

TEST_CASE("P^II reductions") {
  for (const auto& c : field_catalog()) {
    INFO(c.name);
    for (double p : {1.5, 3.0}) {
      CHECK(pII_at(c.field, c.field, c.point, p) == doctest::Approx(p_laplacian_at(c.field, c.point, p)).epsilon(1e-12));
    }
    // p = 2 is the Laplacian of the second argument.
    const ScalarField g{c.field.dim, [](const Eigen::VectorXd& x) { return std::sin(x.sum()) + x.squaredNorm(); }};
    const double lap = -c.field.dim * std::sin(c.point.sum()) + 2.0 * c.field.dim;
    CHECK(pII_at(c.field, g, c.point, 2.0) == doctest::Approx(lap).epsilon(1e-8));
    // Linearity in the second argument.
    const ScalarField h{c.field.dim, [](const Eigen::VectorXd& x) { return std::exp(0.3 * x[0]) * x[x.size() - 1]; }};
    const ScalarField comb{c.field.dim, [&](const Eigen::VectorXd& x) { return 2.0 * g.eval(x) - 0.7 * h.eval(x); }};
    const double lin = 2.0 * pII_at(c.field, g, c.point, 2.5, 1e-2) - 0.7 * pII_at(c.field, h, c.point, 2.5, 1e-2);
    CHECK(std::abs(pII_at(c.field, comb, c.point, 2.5, 1e-2) - lin) <= 1e-10 * (1.0 + std::abs(lin)));
  }
}

TEST_CASE("chain rule for P^II") {
  auto phi = [](double s) { return std::exp(0.5 * s) + s * s * s; };
  auto dphi = [](double s) { return 0.5 * std::exp(0.5 * s) + 3 * s * s; };
  auto ddphi = [](double s) { return 0.25 * std::exp(0.5 * s) + 6 * s; };
  for (const auto& c : field_catalog()) {
    for (double p : {1.5, 2.0, 3.0}) {
      INFO(c.name << " p=" << p);
      const ScalarField comp{c.field.dim, [&](const Eigen::VectorXd& x) { return phi(c.field.eval(x)); }};
      const DiffReport r = differentiate(c.field, c.point);
      const double u = r.value;
      const double expected = dphi(u) * p_laplacian(r, p) + (p - 1.0) * ddphi(u) * std::pow(r.grad.norm(), p);
      const double got = pII_at(c.field, comp, c.point, p);
      CHECK(std::abs(got - expected) <= 1e-6 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("p-Bochner identity against symbolic values") {
  // Both sides evaluated symbolically for u = x + 2y + x^2 y at (0.3, -0.7).
  const auto& c = catalog_field("cubic2");
  struct Ref {
    double p, value, plap;
  };
  for (const Ref& ref : {Ref{1.5, 2.9300873011008713208, -1.0215915858912207882}, Ref{2.0, 6.86, -1.4},
                         Ref{3.0, 37.329943016558614093, -2.5830596231133756183}}) {
    INFO("p=" << ref.p);
    const BochnerTerms bt = bochner_terms(c.field, c.point, ref.p);
    CHECK(bt.lhs == doctest::Approx(ref.value).epsilon(1e-6));
    CHECK(bt.rhs == doctest::Approx(ref.value).epsilon(1e-6));
    CHECK(std::abs(bt.residual) <= 1e-4 * bt.scale);
    CHECK(p_laplacian_at(c.field, c.point, ref.p) == doctest::Approx(ref.plap).epsilon(1e-9));
  }
  const auto& c3 = catalog_field("cubic3");
  CHECK(bochner_terms(c3.field, c3.point, 1.5).lhs == doctest::Approx(3.0856006530166631477).epsilon(1e-6));
}

TEST_CASE("classical Bochner at p = 2") {
  // 1/2 Delta |grad u|^2 = |H|^2 + <grad Delta u, grad u> for u = x + 2y + x^2 y.
  const auto& c = catalog_field("cubic2");
  for (const Eigen::VectorXd& pt : {v2(0.3, -0.7), v2(-0.5, 0.2), v2(1.1, 0.9)}) {
    const double x = pt[0], y = pt[1];
    const double classical = 4 * y * y + 8 * x * x + 2 * (2 + x * x);
    const BochnerTerms bt = bochner_terms(c.field, pt, 2.0);
    CHECK(std::abs(bt.lhs - classical) <= 1e-6 * classical);
    CHECK(std::abs(bt.rhs - classical) <= 1e-6 * classical);
  }
}

TEST_CASE("Bochner residual over the catalog") {
  for (const auto& c : field_catalog()) {
    for (double p : {1.5, 2.0, 3.0}) {
      INFO(c.name << " p=" << p);
      const BochnerTerms bt = bochner_terms(c.field, c.point, p);
      CHECK(std::abs(bt.residual) <= 1e-4 * bt.scale);
    }
  }
}

TEST_CASE("Bochner residual converges under step halving") {
  for (const auto& c : field_catalog()) {
    for (double p : {1.5, 2.0, 3.0}) {
      INFO(c.name << " p=" << p);
      const Convergence cv = bochner_convergence(c.field, c.point, p);
      CHECK(cv.order >= 1.8);
      // Polynomial fields at p = 2 and affine fields are differentiated exactly.
      CHECK(cv.exact == (p == 2.0 || c.name == "linear2"));
    }
  }
}

TEST_CASE("one-dimensional eigenfunction") {
  for (double p : {1.5, 2.0, 3.0}) {
    const double alpha = 1.1;
    const double lambda = (p - 1.0) * std::pow(alpha, p);
    const ScalarField u = sine_field(p, alpha);
    for (double x : {0.3, 0.6, 1.0}) {
      INFO("p=" << p << " x=" << x);
      Eigen::VectorXd pt(1);
      pt << x;
      const BochnerTerms bt = bochner_terms(u, pt, p);
      CHECK(std::abs(bt.residual) <= 1e-4 * bt.scale);
      const InequalityResult est = eigen_estimate_check(u, pt, p, 2.0, lambda);
      CHECK(est.ok);
      CHECK_THROWS_AS(eigen_estimate_check(u, pt, p, 2.0, 1.5 * lambda), std::invalid_argument);
    }
  }
}

TEST_CASE("Hessian inequality") {
  // H = I: equality direction holds for every p with m = dim.
  for (double p : {1.5, 2.0, 3.0}) {
    const InequalityResult r = hessian_inequality_check(half_norm2(3), v3(0.3, 0.1, -0.4), p, 3.0);
    CHECK(r.ok);
    CHECK(r.lhs - r.rhs >= -1e-12);
  }
  // Larger m gives a smaller right-hand side.
  const auto& c = catalog_field("mixed3");
  double prev = INFINITY;
  for (double m : {3.0, 3.5, 5.0, 10.0}) {
    const InequalityResult r = hessian_inequality_check(c.field, c.point, 2.5, m);
    CHECK(r.ok);
    CHECK(r.rhs <= prev);
    prev = r.rhs;
  }
  CHECK_THROWS_AS(hessian_inequality_check(c.field, c.point, 2.5, 2.0), std::invalid_argument);
}

TEST_CASE("Hessian inequality sweep") {
  const SweepSummary s = hessian_sweep(2000, 12345);
  CHECK(s.cases == 2000);
  CHECK(s.violations == 0);
  CHECK(s.skipped < 10);
  const SweepSummary again = hessian_sweep(2000, 12345);
  CHECK(again.worst == s.worst);
}
