#pragma once

// Finite-difference laboratory for the p-Laplacian on flat space: Delta_p,
// A_u = <H_u grad u, grad u> / |grad u|^2, the second-order part of the
// linearized p-Laplacian
//
//   P^II_u(g) = |grad u|^(p-2) tr H_g + (p-2) |grad u|^(p-4) <H_g grad u, grad u>,
//
// the p-Bochner identity and the Hessian inequalities built on them.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pspectral {

struct ScalarField {
  int dim;
  std::function<double(const Eigen::VectorXd&)> eval;
};

/// Derivatives at a point. `third` is stored densely, index (i*dim + j)*dim + k.
struct DiffReport {
  Eigen::VectorXd point;
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  std::vector<double> third;
  double step;
  double est_error;  // max difference against the same stencils at step/2

  double third_at(int i, int j, int k) const {
    const int d = static_cast<int>(grad.size());
    return third[(static_cast<std::size_t>(i) * d + j) * d + k];
  }
};

/// Fourth-order central stencils for grad and hess, second-order for third
/// derivatives. Throws std::domain_error on a non-finite evaluation.
DiffReport differentiate(const ScalarField& field, const Eigen::VectorXd& point, double step = 1e-3);

/// Raised when |grad u| is below 1e-8 times the field scale.
class DegenerateGradient : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double a_u(const DiffReport& r);
double p_laplacian(const DiffReport& r, double p);
double p_laplacian_at(const ScalarField& field, const Eigen::VectorXd& point, double p, double step = 1e-3);

/// P^II_u applied to g. Only the Hessian of g enters.
double pII(const DiffReport& u, const Eigen::MatrixXd& hess_g, double p);
double pII_at(const ScalarField& u, const ScalarField& g, const Eigen::VectorXd& point, double p,
              double step = 1e-3);

/// The field |grad u|^p, with the gradient taken by the same stencils.
ScalarField grad_power_field(const ScalarField& u, double p, double step);
/// The field Delta_p u.
ScalarField p_laplacian_field(const ScalarField& u, double p, double step);

struct BochnerTerms {
  double lhs;          // (1/p) P^II_u(|grad u|^p)
  double rhs;
  double directional;  // <grad Delta_p u, grad u>
  double residual;     // lhs - rhs
  double scale;        // |lhs| + sum of |terms| on the right + |grad u|^(2p-2)
  double est_error;    // differentiation error estimate at the point
};

/// Both sides of the flat-space p-Bochner identity. Derived fields are
/// differentiated with the outer step step^(2/3).
BochnerTerms bochner_terms(const ScalarField& field, const Eigen::VectorXd& point, double p, double step = 1e-3);
double bochner_residual(const ScalarField& field, const Eigen::VectorXd& point, double p, double step = 1e-3);

/// Relative residuals at `step` and `step/2` and the observed order
/// log2(coarse / fine). When the coarse residual is already at rounding
/// level (below `floor`) the stencils are exact for the field and `exact`
/// is set instead of an order.
struct Convergence {
  double coarse;
  double fine;
  double order;
  bool exact;
};
Convergence bochner_convergence(const ScalarField& field, const Eigen::VectorXd& point, double p, double step = 0.04,
                                double floor = 1e-10);

struct InequalityResult {
  double lhs;
  double rhs;
  bool ok;
};

/// |grad u|^(2p-4) (|H|^2 + p(p-2) A^2) >= (Delta_p u)^2/m + m/(m-1) (Delta_p u/m - (p-1)|grad u|^(p-2) A)^2.
InequalityResult hessian_inequality(const DiffReport& r, double p, double m, double tol = 1e-10);
InequalityResult hessian_inequality_check(const ScalarField& field, const Eigen::VectorXd& point, double p,
                                          double m, double tol = 1e-10);

/// Lower bound for (1/p) P^II_u |grad u|^p at a point where
/// Delta_p u = -lambda u^(p-1). Throws std::invalid_argument if the
/// eigen-equation residual exceeds `eigen_tol` relative.
InequalityResult eigen_estimate_check(const ScalarField& field, const Eigen::VectorXd& point, double p, double n,
                                      double lambda, double step = 1e-3, double eigen_tol = 1e-5);

/// Named polynomial test fields.
struct CatalogField {
  std::string name;
  ScalarField field;
  Eigen::VectorXd point;  // a default point with nonzero gradient
};
const std::vector<CatalogField>& field_catalog();
const CatalogField& catalog_field(const std::string& name);

/// Random cubic polynomial in `dim` variables with coefficients uniform in
/// [-1, 1], generated from `seed`.
ScalarField random_cubic_field(int dim, std::uint64_t seed);

struct SweepSummary {
  int cases = 0;
  int skipped = 0;      // degenerate gradient
  int violations = 0;
  double worst = 0.0;   // max (rhs - lhs) / max(1, |lhs|)
};

/// Seeded sweep of hessian_inequality_check over random cubic fields,
/// points in [-1, 1]^dim, dim in {2, 3}, p in {1.5, 2, 3} and m in [dim, dim + 3].
SweepSummary hessian_sweep(int cases, std::uint64_t seed, double tol = 1e-10);

}  // namespace pspectral
