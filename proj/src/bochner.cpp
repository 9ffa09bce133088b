#include "pspectral/bochner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace pspectral {

namespace {

// 1D stencils by derivative order: offsets -2..2, weights before scaling by h^order.
constexpr std::array<double, 5> kFourth1 = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
constexpr std::array<double, 5> kFourth2 = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
constexpr std::array<double, 5> kSecond1 = {0.0, -0.5, 0.0, 0.5, 0.0};
constexpr std::array<double, 5> kSecond2 = {0.0, 1.0, -2.0, 1.0, 0.0};
constexpr std::array<double, 5> kSecond3 = {-0.5, 1.0, 0.0, -1.0, 0.5};

double checked(const ScalarField& f, const Eigen::VectorXd& x) {
  const double v = f.eval(x);
  if (!std::isfinite(v)) throw std::domain_error("field evaluation is not finite");
  return v;
}

// Tensor product of per-axis stencils. `axes` and `stencils` have equal length
// and distinct axes.
double tensor_stencil(const ScalarField& f, const Eigen::VectorXd& x, double h, const std::vector<int>& axes,
                      const std::vector<const std::array<double, 5>*>& stencils, int order) {
  const std::size_t k = axes.size();
  std::vector<int> idx(k, 0);
  double sum = 0.0;
  Eigen::VectorXd y = x;
  while (true) {
    double w = 1.0;
    for (std::size_t a = 0; a < k; ++a) w *= (*stencils[a])[idx[a]];
    if (w != 0.0) {
      y = x;
      for (std::size_t a = 0; a < k; ++a) y[axes[a]] += (idx[a] - 2) * h;
      sum += w * checked(f, y);
    }
    std::size_t a = 0;
    while (a < k && ++idx[a] == 5) idx[a++] = 0;
    if (a == k) break;
  }
  return sum / std::pow(h, order);
}

// Derivative for a multi-index given as a list of axes (with repetition).
double partial(const ScalarField& f, const Eigen::VectorXd& x, double h, std::vector<int> multi, bool fourth) {
  std::sort(multi.begin(), multi.end());
  std::vector<int> axes;
  std::vector<const std::array<double, 5>*> st;
  for (std::size_t i = 0; i < multi.size();) {
    std::size_t j = i;
    while (j < multi.size() && multi[j] == multi[i]) ++j;
    const std::size_t count = j - i;
    axes.push_back(multi[i]);
    if (fourth) st.push_back(count == 1 ? &kFourth1 : &kFourth2);
    else st.push_back(count == 1 ? &kSecond1 : count == 2 ? &kSecond2 : &kSecond3);
    i = j;
  }
  return tensor_stencil(f, x, h, axes, st, static_cast<int>(multi.size()));
}

Eigen::VectorXd gradient4(const ScalarField& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(f.dim);
  for (int i = 0; i < f.dim; ++i) g[i] = partial(f, x, h, {i}, true);
  return g;
}

Eigen::MatrixXd hessian4(const ScalarField& f, const Eigen::VectorXd& x, double h) {
  Eigen::MatrixXd H(f.dim, f.dim);
  for (int i = 0; i < f.dim; ++i)
    for (int j = i; j < f.dim; ++j) H(i, j) = H(j, i) = partial(f, x, h, {i, j}, true);
  return H;
}

std::vector<double> third2(const ScalarField& f, const Eigen::VectorXd& x, double h) {
  const int d = f.dim;
  std::vector<double> t(static_cast<std::size_t>(d) * d * d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      for (int k = j; k < d; ++k) {
        const double v = partial(f, x, h, {i, j, k}, false);
        const int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
        for (const auto& q : perm) t[(static_cast<std::size_t>(q[0]) * d + q[1]) * d + q[2]] = v;
      }
  return t;
}

void require_point(const ScalarField& f, const Eigen::VectorXd& x) {
  if (f.dim < 1 || x.size() != f.dim) throw std::invalid_argument("point dimension does not match field");
}

void require_nondegenerate(const DiffReport& r) {
  if (r.grad.norm() < 1e-8 * std::max(1.0, std::abs(r.value))) throw DegenerateGradient("gradient vanishes at point");
}

}  // namespace

DiffReport differentiate(const ScalarField& field, const Eigen::VectorXd& point, double step) {
  require_point(field, point);
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  DiffReport r;
  r.point = point;
  r.value = checked(field, point);
  r.grad = gradient4(field, point, step);
  r.hess = hessian4(field, point, step);
  r.third = third2(field, point, step);
  r.step = step;
  const double h2 = 0.5 * step;
  double err = (gradient4(field, point, h2) - r.grad).cwiseAbs().maxCoeff();
  err = std::max(err, (hessian4(field, point, h2) - r.hess).cwiseAbs().maxCoeff());
  const std::vector<double> t2 = third2(field, point, h2);
  for (std::size_t i = 0; i < t2.size(); ++i) err = std::max(err, std::abs(t2[i] - r.third[i]));
  r.est_error = err;
  return r;
}

double a_u(const DiffReport& r) {
  require_nondegenerate(r);
  return r.grad.dot(r.hess * r.grad) / r.grad.squaredNorm();
}

double p_laplacian(const DiffReport& r, double p) {
  require_nondegenerate(r);
  return std::pow(r.grad.norm(), p - 2.0) * (r.hess.trace() + (p - 2.0) * a_u(r));
}

double p_laplacian_at(const ScalarField& field, const Eigen::VectorXd& point, double p, double step) {
  require_point(field, point);
  DiffReport r;
  r.point = point;
  r.value = checked(field, point);
  r.grad = gradient4(field, point, step);
  r.hess = hessian4(field, point, step);
  r.step = step;
  r.est_error = 0.0;
  return p_laplacian(r, p);
}

double pII(const DiffReport& u, const Eigen::MatrixXd& hess_g, double p) {
  require_nondegenerate(u);
  const double g = u.grad.norm();
  return std::pow(g, p - 2.0) * hess_g.trace() + (p - 2.0) * std::pow(g, p - 4.0) * u.grad.dot(hess_g * u.grad);
}

double pII_at(const ScalarField& u, const ScalarField& g, const Eigen::VectorXd& point, double p, double step) {
  require_point(u, point);
  require_point(g, point);
  DiffReport r;
  r.point = point;
  r.value = checked(u, point);
  r.grad = gradient4(u, point, step);
  r.step = step;
  r.est_error = 0.0;
  return pII(r, hessian4(g, point, step), p);
}

ScalarField grad_power_field(const ScalarField& u, double p, double step) {
  return {u.dim, [u, p, step](const Eigen::VectorXd& x) { return std::pow(gradient4(u, x, step).norm(), p); }};
}

ScalarField p_laplacian_field(const ScalarField& u, double p, double step) {
  return {u.dim, [u, p, step](const Eigen::VectorXd& x) { return p_laplacian_at(u, x, p, step); }};
}

BochnerTerms bochner_terms(const ScalarField& field, const Eigen::VectorXd& point, double p, double step) {
  const DiffReport r = differentiate(field, point, step);
  require_nondegenerate(r);
  const double outer = std::pow(step, 2.0 / 3.0);
  const double g = r.grad.norm();
  const double A = a_u(r);
  const double dp = p_laplacian(r, p);

  const Eigen::MatrixXd hg = hessian4(grad_power_field(field, p, step), point, outer);
  const double lhs = pII(r, hg, p) / p;

  // Derivative of Delta_p u along the unit gradient direction.
  const ScalarField lap = p_laplacian_field(field, p, step);
  const Eigen::VectorXd dir = r.grad / g;
  double dd = 0.0;
  for (int k = 0; k < 5; ++k)
    if (kFourth1[k] != 0.0) dd += kFourth1[k] * checked(lap, point + (k - 2) * outer * dir);
  const double directional = dd / outer * g;

  const double w = std::pow(g, 2.0 * (p - 2.0));
  const double h2 = r.hess.squaredNorm();
  const double t1 = w * std::pow(g, 2.0 - p) * directional;
  const double t2 = -w * std::pow(g, 2.0 - p) * (p - 2.0) * A * dp;
  const double t3 = w * h2;
  const double t4 = w * p * (p - 2.0) * A * A;
  BochnerTerms out;
  out.lhs = lhs;
  out.rhs = t1 + t2 + t3 + t4;
  out.directional = directional;
  out.residual = lhs - out.rhs;
  out.scale = std::abs(lhs) + std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + std::pow(g, 2.0 * p - 2.0);
  out.est_error = r.est_error;
  return out;
}

double bochner_residual(const ScalarField& field, const Eigen::VectorXd& point, double p, double step) {
  return bochner_terms(field, point, p, step).residual;
}

Convergence bochner_convergence(const ScalarField& field, const Eigen::VectorXd& point, double p, double step,
                                double floor) {
  const BochnerTerms a = bochner_terms(field, point, p, step);
  const BochnerTerms b = bochner_terms(field, point, p, 0.5 * step);
  Convergence c;
  c.coarse = std::abs(a.residual) / a.scale;
  c.fine = std::abs(b.residual) / b.scale;
  c.exact = c.coarse < floor;
  c.order = c.exact ? std::numeric_limits<double>::infinity() : std::log2(c.coarse / c.fine);
  return c;
}

InequalityResult hessian_inequality(const DiffReport& r, double p, double m, double tol) {
  if (!(m > 1.0) || m < r.grad.size()) throw std::invalid_argument("m must satisfy m >= dim and m > 1");
  const double g = r.grad.norm();
  const double A = a_u(r);
  const double dp = p_laplacian(r, p);
  const double lhs = std::pow(g, 2.0 * p - 4.0) * (r.hess.squaredNorm() + p * (p - 2.0) * A * A);
  const double y = (p - 1.0) * std::pow(g, p - 2.0) * A;
  const double rhs = dp * dp / m + m / (m - 1.0) * (dp / m - y) * (dp / m - y);
  return {lhs, rhs, lhs >= rhs - tol * std::max(1.0, std::abs(lhs))};
}

InequalityResult hessian_inequality_check(const ScalarField& field, const Eigen::VectorXd& point, double p,
                                          double m, double tol) {
  require_point(field, point);
  DiffReport r;
  r.point = point;
  r.value = checked(field, point);
  r.grad = gradient4(field, point, 1e-3);
  r.hess = hessian4(field, point, 1e-3);
  r.step = 1e-3;
  r.est_error = 0.0;
  return hessian_inequality(r, p, m, tol);
}

InequalityResult eigen_estimate_check(const ScalarField& field, const Eigen::VectorXd& point, double p, double n,
                                      double lambda, double step, double eigen_tol) {
  if (!(n > 1.0) || n < field.dim) throw std::invalid_argument("n must satisfy n >= dim and n > 1");
  const BochnerTerms bt = bochner_terms(field, point, p, step);
  const DiffReport r = differentiate(field, point, step);
  const double u = r.value;
  const double g = r.grad.norm();
  const double A = a_u(r);
  const double dp = p_laplacian(r, p);
  const double up = std::copysign(std::pow(std::abs(u), p - 1.0), u);
  const double eig = std::abs(dp + lambda * up) / std::max({std::abs(dp), lambda * std::abs(up), 1e-300});
  if (eig > eigen_tol)
    throw std::invalid_argument("point does not satisfy the eigen-equation, relative residual " + std::to_string(eig));

  const double terms[5] = {
      lambda * lambda * std::pow(std::abs(u), 2.0 * p - 2.0) / (n - 1.0),
      2.0 * (p - 1.0) * lambda / (n - 1.0) * up * std::pow(g, p - 2.0) * A,
      n / (n - 1.0) * (p - 1.0) * (p - 1.0) * std::pow(g, 2.0 * p - 4.0) * A * A,
      -lambda * (p - 1.0) * std::pow(std::abs(u), p - 2.0) * std::pow(g, p),
      lambda * (p - 2.0) * std::pow(g, p - 2.0) * A * up,
  };
  double rhs = 0.0;
  double scale = std::abs(bt.lhs);
  for (double t : terms) {
    rhs += t;
    scale += std::abs(t);
  }
  return {bt.lhs, rhs, bt.lhs >= rhs - 1e-6 * scale};
}

namespace {

ScalarField poly2(double (*f)(double, double)) {
  return {2, [f](const Eigen::VectorXd& v) { return f(v[0], v[1]); }};
}
ScalarField poly3(double (*f)(double, double, double)) {
  return {3, [f](const Eigen::VectorXd& v) { return f(v[0], v[1], v[2]); }};
}
Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

const std::vector<CatalogField>& field_catalog() {
  static const std::vector<CatalogField> catalog = {
      {"linear2", poly2([](double x, double y) { return x + 2.0 * y; }), vec({0.2, 0.1})},
      {"cubic2", poly2([](double x, double y) { return x + 2.0 * y + x * x * y; }), vec({0.3, -0.7})},
      {"harmonic2", poly2([](double x, double y) { return x * x * x - 3.0 * x * y * y + 0.5 * y; }), vec({0.6, 0.4})},
      {"mixed2", poly2([](double x, double y) { return 0.5 * x * x - y * y * y + x * y + 0.3 * x; }), vec({-0.4, 0.5})},
      {"quadratic3",
       poly3([](double x, double y, double z) { return 0.5 * (x * x + y * y + z * z) + 0.2 * x; }),
       vec({0.3, -0.2, 0.5})},
      {"cubic3", poly3([](double x, double y, double z) { return x + y * z + x * x * z + 0.3 * y * y * y; }),
       vec({0.2, 0.6, -0.3})},
      {"mixed3",
       poly3([](double x, double y, double z) { return x * y * z + x * x - 0.5 * z * z * z + y; }),
       vec({0.7, -0.3, 0.4})},
  };
  return catalog;
}

const CatalogField& catalog_field(const std::string& name) {
  for (const auto& c : field_catalog())
    if (c.name == name) return c;
  throw std::invalid_argument("unknown field: " + name);
}

ScalarField random_cubic_field(int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("dim must be positive");
  struct Term {
    std::vector<int> exps;
    double coeff;
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<Term> terms;
  std::vector<int> e(dim, 0);
  // Enumerate exponent vectors of total degree <= 3.
  while (true) {
    int deg = 0;
    for (int v : e) deg += v;
    if (deg <= 3) terms.push_back({e, coef(rng)});
    int a = 0;
    while (a < dim && ++e[a] > 3) e[a++] = 0;
    if (a == dim) break;
  }
  return {dim, [terms](const Eigen::VectorXd& x) {
            double s = 0.0;
            for (const auto& t : terms) {
              double m = t.coeff;
              for (std::size_t i = 0; i < t.exps.size(); ++i) m *= std::pow(x[static_cast<Eigen::Index>(i)], t.exps[i]);
              s += m;
            }
            return s;
          }};
}

SweepSummary hessian_sweep(int cases, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> extra(0.0, 3.0);
  const double ps[3] = {1.5, 2.0, 3.0};
  SweepSummary s;
  for (int c = 0; c < cases; ++c) {
    const int dim = 2 + static_cast<int>(rng() % 2);
    const ScalarField f = random_cubic_field(dim, rng());
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x[i] = unit(rng);
    const double p = ps[rng() % 3];
    const double m = dim + extra(rng);
    ++s.cases;
    try {
      const InequalityResult r = hessian_inequality_check(f, x, p, m, tol);
      s.worst = std::max(s.worst, (r.rhs - r.lhs) / std::max(1.0, std::abs(r.lhs)));
      if (!r.ok) ++s.violations;
    } catch (const DegenerateGradient&) {
      ++s.skipped;
    }
  }
  return s;
}

}  // namespace pspectral
