#pragma once

// One-dimensional model problem
//
//   d/dt (w')^(p-1) - T (w')^(p-1) + lambda w^(p-1) = 0,  w(a) = -1, w'(a) = 0,
//
// with T = -(n-1)/t (T = 0 when a is infinite), solved in Prüfer form
//
//   phi' = alpha - T/(p-1) cos_p^(p-1)(phi) sin_p(phi),
//   (log e)' = T/(p-1) |cos_p(phi)|^p,
//
// where alpha w = e sin_p(phi) and w' = e cos_p(phi). Here x^(k) denotes
// the signed power |x|^k sign(x).

#include <limits>
#include <string>
#include <vector>

#include "pspectral/ode.hpp"
#include "pspectral/ptrig.hpp"

namespace pspectral {

/// Sentinel for a = infinity (T identically zero).
inline constexpr double kInfiniteStart = std::numeric_limits<double>::infinity();

/// Exponent p, dimension n (any real >= 1), eigenvalue lambda > 0 and the
/// derived frequency alpha = (lambda/(p-1))^(1/p).
struct PParams {
  PExponent p;
  double n;
  double lambda;
  double alpha;

  PParams(double p, double n, double lambda);
};

/// Parameters plus the left endpoint a >= 0 (or kInfiniteStart).
struct ModelProblem {
  PParams params;
  double a;

  ModelProblem(PParams params, double a);
  bool infinite() const { return a == kInfiniteStart; }
};

/// Pointwise state of a solved model.
struct ModelState {
  double t;
  double phi;
  double e;
  double log_e_ratio;  // log(e / alpha), resolved even where e/alpha rounds to 1
  double w;
  double wdot;
  double sin;        // sin_p(phi)
  double cos;        // cos_p(phi)
  double cos_pow_p;  // |cos_p(phi)|^p
  double T;          // drift coefficient, 0 for infinite a
  double phi_dot;
};

struct ModelOptions {
  double event_tol = 1e-10;
  double rtol = 1e-12;
};

class ModelSolution {
 public:
  const ModelProblem& problem() const { return problem_; }
  const PParams& params() const { return problem_.params; }

  /// Left end of the solution window: a, or 0 for the translation-invariant
  /// infinite case.
  double t_begin() const { return t_begin_; }
  double t0() const { return t0_; }
  double b() const { return b_; }
  double delta() const { return delta_; }
  double m_max() const { return m_max_; }

  ModelState state(double t) const;
  double w(double t) const { return state(t).w; }
  double wdot(double t) const { return state(t).wdot; }
  double phi(double t) const;
  double drift(double t) const;

  /// Unique t in [t_begin, b] with w(t) = s, for s in [-1, m_max].
  double w_inverse(double s) const;

  /// Integrator knots on [t_begin, b] (a uniform grid for infinite a).
  std::vector<double> knots() const;

  /// Discrepancy between the series start and one integrated from half the
  /// initial step (a = 0 only, otherwise 0).
  double start_discrepancy() const { return start_discrepancy_; }
  int steps() const { return steps_; }

 private:
  friend ModelSolution solve_model(const ModelProblem&, const ModelOptions&);
  explicit ModelSolution(ModelProblem prob) : problem_(std::move(prob)) {}

  ModelProblem problem_;
  double t_begin_ = 0.0;
  double t0_ = 0.0;
  double b_ = 0.0;
  double delta_ = 0.0;
  double m_max_ = 1.0;
  double start_discrepancy_ = 0.0;
  int steps_ = 0;
  // Trajectory of (phi, log e) in the normalized variable s = alpha (t - a)
  // with lambda scaled to p - 1.
  ode::Trajectory<2> traj_;
};

ModelSolution solve_model(const ModelProblem& prob, const ModelOptions& opt = {});

double model_delta(const ModelProblem& prob, const ModelOptions& opt = {});
double model_m_max(const ModelProblem& prob, const ModelOptions& opt = {});

/// Result of integrating the Prüfer system past b.
struct Continuation {
  double t_reached;                 // where the phase first hit the target
  std::vector<double> zeros;        // zeros of w found on the way (phase = k pi_p)
  std::vector<double> critical;     // zeros of w' (phase = odd multiple of pi_p/2)
  bool reached = false;
};

/// Continues the trajectory of a finite-a problem from b until the phase
/// reaches `phase_target` or t exceeds b + `max_length`. The integration is
/// restarted at every odd multiple of pi_p/2 so the step never straddles a
/// point where cos_p^(p-1) loses smoothness.
Continuation continue_phase(const ModelSolution& sol, double phase_target, double max_length,
                            const ModelOptions& opt = {});

struct ScanRow {
  double a;
  double delta;
  double m_max;
  double t0;
  double b;
  std::string status;  // "ok" or an error description
};

std::vector<ScanRow> delta_scan(const std::vector<double>& a_grid, const PParams& params,
                                const ModelOptions& opt = {});

}  // namespace pspectral
