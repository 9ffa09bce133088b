#pragma once

// Neumann eigenproblem for the p-Laplacian on weighted one-dimensional
// domains: circles, segments and the radial model t^(n-1) dt on [0, R].
//
// Discretization: nodes x_i with measure weights w_i, forward differences
// Du_c = (u_{c+1} - u_c)/h on cells with midpoint densities rho_c, and
//
//   RQ(u) = sum_c rho_c h |Du_c|^p / sum_i w_i |u_i|^p
//
// minimized over sum_i w_i u_i^(p-1) = 0.

#include <cstdint>
#include <string>
#include <vector>

#include "pspectral/model1d.hpp"

namespace pspectral {

enum class DomainKind { circle, segment, radial };

std::string to_string(DomainKind kind);

class Domain1D {
 public:
  Domain1D() = default;
  static Domain1D circle(double length, int N);
  static Domain1D segment(double x0, double x1, int N);
  static Domain1D radial(double R, double n, int N);

  DomainKind kind() const { return kind_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<double>& mutable_weights() { return weights_; }
  /// Density at the midpoint of each cell; a circle has N cells, otherwise N-1.
  const std::vector<double>& cell_density() const { return cell_density_; }
  double spacing() const { return h_; }
  int cells() const { return static_cast<int>(cell_density_.size()); }
  /// Right neighbour of node i along cell i (wraps on circles).
  int next(int i) const { return i + 1 == size() ? 0 : i + 1; }

  /// Half circumference, segment length, or radius.
  double diameter() const;
  double length() const { return length_; }
  double x0() const { return x0_; }
  double weight_dim() const { return n_; }

 private:
  DomainKind kind_ = DomainKind::segment;
  double length_ = 0.0;
  double x0_ = 0.0;
  double n_ = 1.0;
  double h_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> cell_density_;
};

struct DiscreteFunction {
  Domain1D domain;
  std::vector<double> values;
};

double rayleigh_quotient(const DiscreteFunction& u, double p);

/// The shift c with sum_i w_i (u_i - c)^(p-1) = 0.
double p_mean_shift(const Domain1D& domain, const std::vector<double>& values, double p);

enum class EigenMethod { variational, shooting };
std::string to_string(EigenMethod method);

struct Normalization {
  double scale = 1.0;  // factor making min u = -1
  double shift = 0.0;  // p-mean shift removed before scaling
};

struct EigenResult {
  double lambda = 0.0;
  DiscreteFunction u;
  EigenMethod method = EigenMethod::variational;
  int iterations = 0;
  double residual = 0.0;  // discrete Euler-Lagrange residual, relative
  double p_mean = 0.0;    // sum w_i u_i^(p-1) / sum w_i |u_i|^(p-1)
  bool converged = false;
  Normalization normalization;
};

struct VariationalOptions {
  double tol = 1e-10;          // relative change of RQ
  int max_iterations = 1000000;
  std::uint64_t seed = 1;
  double noise = 1e-3;         // amplitude of the seeded perturbation of the initial mode
};

/// Minimizes RQ by L-BFGS on the shift-projected quotient, started from the
/// first cosine mode plus seeded noise. The result is scaled so that
/// min u = -1 with |min u| >= |max u|.
EigenResult solve_eigen_variational(const Domain1D& domain, double p, const VariationalOptions& opts = {});

/// Radial domains: lambda(R) = (p-1) (b1/R)^p from the model started at 0
/// with lambda = p - 1, and u the model sampled at t b1/R.
EigenResult solve_eigen_shooting(const Domain1D& domain, double p);

/// b(0) for lambda = p - 1 on the radial model of dimension n.
double radial_unit_extent(double p, double n);

/// Discrete Euler-Lagrange residual sum_i |E_i| / sum_i lambda w_i |u_i|^(p-1).
double euler_lagrange_residual(const DiscreteFunction& u, double p, double lambda);

struct GradientReport {
  double max_violation;   // max over cells of |Du| - w'(w^-1(u_mid))
  double min_slack;       // min over cells of w'(w^-1(u_mid)) - |Du|
  double h;
  double tol;
  bool pass;              // max_violation <= tol h
  int cells;
};

/// Requires res scaled to min u = -1 and max u <= m(sol) (up to h), and
/// sol.lambda equal to res.lambda. Throws std::invalid_argument otherwise.
GradientReport gradient_comparison_check(const EigenResult& res, const ModelSolution& sol, double tol = 5.0);

struct EProfileOptions {
  int samples = 200;
  double trim = 0.05;       // fraction of (b - a) left out at each end
  double tol_factor = 10.0; // constancy and monotonicity tolerance in units of h
};

struct EProfile {
  std::vector<double> s;
  std::vector<double> E;
  double spread;            // (max E - min E) / |mean E|
  double worst_monotone;    // largest relative step against the expected direction
  bool constant;            // spread <= tol_factor h
  bool monotone;            // worst_monotone <= tol_factor h
  double h;
};

/// E(s) = int_a^s w^(p-1) dm / int_a^s w^(p-1) t^(n-1) dt, where m is the
/// pushforward of the node weights under w^-1 o u. For infinite a the
/// reference measure is dt.
EProfile E_profile(const EigenResult& res, const ModelSolution& sol, const EProfileOptions& opt = {});

/// Copy of res with node weights multiplied by `factor` where u < threshold.
EigenResult perturb_measure(const EigenResult& res, double threshold, double factor);

struct BoundRow {
  std::string name;
  double value;
  bool applicable;
};

/// Lower bounds for the first nonzero Neumann eigenvalue at diameter d:
/// sharp (p-1)(pi_p/d)^p, hui (p-1)(pi_p/(2d))^p, kn (pi/(4d))^p/(p-1)
/// (p >= 2), li_yau pi^2/(4d^2) and zhong_yang pi^2/d^2 (p = 2).
std::vector<BoundRow> bounds_table(double p, double d, double n);

}  // namespace pspectral
