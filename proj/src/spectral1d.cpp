#include "pspectral/spectral1d.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pspectral/quadrature.hpp"

namespace pspectral {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::circle: return "circle";
    case DomainKind::segment: return "segment";
    case DomainKind::radial: return "radial";
  }
  return "unknown";
}

std::string to_string(EigenMethod method) {
  return method == EigenMethod::variational ? "variational" : "shooting";
}

namespace {

void require_nodes(int N) {
  if (N < 16) throw std::invalid_argument("domain needs at least 16 nodes");
}

double spow_local(double x, double e) { return x < 0 ? -std::pow(-x, e) : std::pow(x, e); }

}  // namespace

Domain1D Domain1D::circle(double length, int N) {
  require_nodes(N);
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("circle length must be positive");
  Domain1D d;
  d.kind_ = DomainKind::circle;
  d.length_ = length;
  d.h_ = length / N;
  for (int i = 0; i < N; ++i) d.nodes_.push_back(i * d.h_);
  d.weights_.assign(N, d.h_);
  d.cell_density_.assign(N, 1.0);
  return d;
}

Domain1D Domain1D::segment(double x0, double x1, int N) {
  require_nodes(N);
  if (!(x1 > x0) || !std::isfinite(x0) || !std::isfinite(x1)) throw std::invalid_argument("segment needs x0 < x1");
  Domain1D d;
  d.kind_ = DomainKind::segment;
  d.length_ = x1 - x0;
  d.x0_ = x0;
  d.h_ = d.length_ / (N - 1);
  for (int i = 0; i < N; ++i) d.nodes_.push_back(i + 1 == N ? x1 : x0 + i * d.h_);
  d.weights_.assign(N, d.h_);
  d.weights_.front() = d.weights_.back() = 0.5 * d.h_;
  d.cell_density_.assign(N - 1, 1.0);
  return d;
}

Domain1D Domain1D::radial(double R, double n, int N) {
  require_nodes(N);
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("radius must be positive");
  if (!(n >= 1.0)) throw std::invalid_argument("weight dimension must be >= 1");
  Domain1D d;
  d.kind_ = DomainKind::radial;
  d.length_ = R;
  d.n_ = n;
  d.h_ = R / (N - 1);
  for (int i = 0; i < N; ++i) {
    const double t = i + 1 == N ? R : i * d.h_;
    d.nodes_.push_back(t);
    d.weights_.push_back((i == 0 || i + 1 == N ? 0.5 : 1.0) * d.h_ * std::pow(t, n - 1.0));
  }
  for (int i = 0; i + 1 < N; ++i) d.cell_density_.push_back(std::pow(0.5 * (d.nodes_[i] + d.nodes_[i + 1]), n - 1.0));
  return d;
}

double Domain1D::diameter() const {
  return kind_ == DomainKind::circle ? 0.5 * length_ : length_;
}

namespace {

struct Energy {
  double num;
  double den;
};

Energy energy(const Domain1D& d, const double* u, double p) {
  double num = 0.0;
  const double h = d.spacing();
  const auto& rho = d.cell_density();
  for (int c = 0; c < d.cells(); ++c) num += rho[c] * h * std::pow(std::abs(u[d.next(c)] - u[c]) / h, p);
  double den = 0.0;
  const auto& w = d.weights();
  for (int i = 0; i < d.size(); ++i) den += w[i] * std::pow(std::abs(u[i]), p);
  return {num, den};
}

// Gradient of num - lambda den, divided by p.
void euler_lagrange(const Domain1D& d, const double* u, double p, double lambda, double* out) {
  const double h = d.spacing();
  const auto& rho = d.cell_density();
  const auto& w = d.weights();
  for (int i = 0; i < d.size(); ++i) out[i] = -lambda * w[i] * spow_local(u[i], p - 1.0);
  for (int c = 0; c < d.cells(); ++c) {
    const double flux = rho[c] * spow_local((u[d.next(c)] - u[c]) / h, p - 1.0);
    out[d.next(c)] += flux;
    out[c] -= flux;
  }
}

double shift_of(const Domain1D& d, const double* v, double p) {
  const auto& w = d.weights();
  const int N = d.size();
  auto F = [&](double c) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += w[i] * spow_local(v[i] - c, p - 1.0);
    return s;
  };
  double lo = *std::min_element(v, v + N);
  double hi = *std::max_element(v, v + N);
  if (lo == hi) return lo;
  const double flo = F(lo);
  const double fhi = F(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50),
                                                   iters);
  return 0.5 * (r.first + r.second);
}

// Diagonal scaling s_i = sqrt(m_i / max m) with m_i the mean density of the
// cells meeting node i; L-BFGS runs in z = s v, which equalizes the curvature
// of the radial quotient near the centre.
std::vector<double> variable_scale(const Domain1D& d) {
  const auto& rho = d.cell_density();
  const int N = d.size();
  std::vector<double> s(N);
  for (int i = 0; i < N; ++i) {
    const bool has_left = i > 0 || d.kind() == DomainKind::circle;
    const double left = has_left ? rho[i > 0 ? i - 1 : d.cells() - 1] : 0.0;
    const double right = i < d.cells() ? rho[i] : 0.0;
    s[i] = 0.5 * (left + right);
  }
  const double top = *std::max_element(s.begin(), s.end());
  for (double& x : s) x = std::sqrt(x / top);
  return s;
}

class ProjectedQuotient : public ceres::FirstOrderFunction {
 public:
  ProjectedQuotient(const Domain1D& d, double p, const std::vector<double>& scale)
      : d_(d), p_(p), scale_(scale), v_(d.size()), u_(d.size()), g_(d.size()) {}

  bool Evaluate(const double* z, double* cost, double* gradient) const override {
    const int N = d_.size();
    for (int i = 0; i < N; ++i) v_[i] = z[i] / scale_[i];
    const double c = shift_of(d_, v_.data(), p_);
    for (int i = 0; i < N; ++i) u_[i] = v_[i] - c;
    const Energy e = energy(d_, u_.data(), p_);
    if (!(e.den > 0.0)) return false;
    const double rq = e.num / e.den;
    *cost = rq;
    if (gradient != nullptr) {
      // The denominator is stationary in the shift, so the gradient in v is
      // the gradient of the quotient at u.
      euler_lagrange(d_, u_.data(), p_, rq, g_.data());
      for (int i = 0; i < N; ++i) gradient[i] = p_ * g_[i] / e.den / scale_[i];
    }
    return true;
  }
  int NumParameters() const override { return d_.size(); }

 private:
  const Domain1D& d_;
  double p_;
  const std::vector<double>& scale_;
  mutable std::vector<double> v_;
  mutable std::vector<double> u_;
  mutable std::vector<double> g_;
};

std::vector<double> initial_mode(const Domain1D& d, const VariationalOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> v(d.size());
  const double pi = std::numbers::pi;
  for (int i = 0; i < d.size(); ++i) {
    const double x = d.nodes()[i];
    double base = 0.0;
    switch (d.kind()) {
      case DomainKind::circle: base = std::cos(2.0 * pi * x / d.length()); break;
      case DomainKind::segment: base = -std::cos(pi * (x - d.x0()) / d.length()); break;
      case DomainKind::radial: base = -std::cos(pi * x / d.length()); break;
    }
    v[i] = base + opts.noise * unit(rng);
  }
  return v;
}

// Stops once RQ has changed by less than tol (relative) over `window` iterations.
class StallCallback : public ceres::IterationCallback {
 public:
  StallCallback(double tol, int window) : tol_(tol), window_(window) {}
  ceres::CallbackReturnType operator()(const ceres::IterationSummary& it) override {
    history_.push_back(it.cost);
    const std::size_t k = history_.size();
    if (k > static_cast<std::size_t>(window_) &&
        history_[k - 1 - window_] - history_[k - 1] <= tol_ * std::abs(history_[k - 1]))
      return ceres::SOLVER_TERMINATE_SUCCESSFULLY;
    return ceres::SOLVER_CONTINUE;
  }

 private:
  double tol_;
  int window_;
  std::vector<double> history_;
};

// Runs L-BFGS from v in place; returns (iterations, converged).
std::pair<int, bool> minimize(const Domain1D& d, double p, std::vector<double>& v, double tol, int max_iterations) {
  StallCallback stall(tol, 50);
  ceres::GradientProblemSolver::Options o;
  o.line_search_direction_type = ceres::LBFGS;
  o.max_lbfgs_rank = 20;
  o.max_num_iterations = max_iterations;
  o.function_tolerance = 0.0;
  o.gradient_tolerance = 0.0;
  o.parameter_tolerance = 0.0;
  o.logging_type = ceres::SILENT;
  o.minimizer_progress_to_stdout = false;
  o.callbacks.push_back(&stall);
  const std::vector<double> scale = variable_scale(d);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= scale[i];
  ceres::GradientProblem problem(new ProjectedQuotient(d, p, scale));
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(o, problem, v.data(), &summary);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] /= scale[i];
  const bool ok = summary.termination_type == ceres::USER_SUCCESS || summary.termination_type == ceres::CONVERGENCE;
  return {static_cast<int>(summary.iterations.size()), ok};
}

Domain1D same_kind(const Domain1D& d, int N) {
  switch (d.kind()) {
    case DomainKind::circle: return Domain1D::circle(d.length(), N);
    case DomainKind::segment: return Domain1D::segment(d.x0(), d.x0() + d.length(), N);
    case DomainKind::radial: return Domain1D::radial(d.length(), d.weight_dim(), N);
  }
  return d;
}

// Piecewise-linear transfer of coarse values onto the nodes of `fine`.
std::vector<double> prolong(const Domain1D& coarse, const std::vector<double>& v, const Domain1D& fine) {
  std::vector<double> out(fine.size());
  const double H = coarse.spacing();
  const int M = coarse.size();
  for (int i = 0; i < fine.size(); ++i) {
    const double x = fine.nodes()[i] - coarse.nodes()[0];
    int k = std::min(static_cast<int>(x / H), coarse.kind() == DomainKind::circle ? M - 1 : M - 2);
    const double th = x / H - k;
    out[i] = (1.0 - th) * v[k] + th * v[coarse.next(k)];
  }
  return out;
}

double p_mean_of(const Domain1D& d, const std::vector<double>& u, double p) {
  double s = 0.0;
  double a = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    s += d.weights()[i] * spow_local(u[i], p - 1.0);
    a += d.weights()[i] * std::pow(std::abs(u[i]), p - 1.0);
  }
  return a > 0.0 ? s / a : 0.0;
}

}  // namespace

double rayleigh_quotient(const DiscreteFunction& u, double p) {
  if (static_cast<int>(u.values.size()) != u.domain.size()) throw std::invalid_argument("values do not match domain");
  std::vector<double> v = u.values;
  const double c = shift_of(u.domain, v.data(), p);
  for (double& x : v) x -= c;
  const Energy e = energy(u.domain, v.data(), p);
  double scale = 0.0;
  for (double x : u.values) scale = std::max(scale, std::abs(x));
  if (!(e.den > 1e-28 * std::pow(scale, p) * u.domain.length()) || e.den == 0.0)
    throw std::domain_error("Rayleigh quotient of the zero function");
  return e.num / e.den;
}

double p_mean_shift(const Domain1D& domain, const std::vector<double>& values, double p) {
  if (static_cast<int>(values.size()) != domain.size()) throw std::invalid_argument("values do not match domain");
  return shift_of(domain, values.data(), p);
}

double euler_lagrange_residual(const DiscreteFunction& u, double p, double lambda) {
  const Domain1D& d = u.domain;
  std::vector<double> r(d.size());
  euler_lagrange(d, u.values.data(), p, lambda, r.data());
  double sum = 0.0;
  double scale = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    sum += std::abs(r[i]);
    scale += lambda * d.weights()[i] * std::pow(std::abs(u.values[i]), p - 1.0);
  }
  return sum / scale;
}

EigenResult solve_eigen_variational(const Domain1D& domain, double p, const VariationalOptions& opts) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be in (1, inf)");
  if (!(opts.tol > 0.0) || opts.max_iterations < 1) throw std::invalid_argument("invalid solver options");
  // Coarse-to-fine: solve on meshes with about N/2^k nodes and interpolate
  // each solution onto the next mesh as its starting point.
  std::vector<int> sizes = {domain.size()};
  while (sizes.back() / 2 >= 64) sizes.push_back(sizes.back() / 2);
  std::reverse(sizes.begin(), sizes.end());
  Domain1D level = same_kind(domain, sizes.front());
  std::vector<double> v = initial_mode(level, opts);
  EigenResult res;
  res.method = EigenMethod::variational;
  res.converged = true;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (k > 0) {
      const Domain1D next = k + 1 == sizes.size() ? domain : same_kind(domain, sizes[k]);
      v = prolong(level, v, next);
      level = next;
    }
    const auto [iters, ok] = minimize(level, p, v, opts.tol, opts.max_iterations - res.iterations);
    res.iterations += iters;
    if (k + 1 == sizes.size()) res.converged = ok;
  }
  // The centre of a radial domain has zero weight; its equation is Du_0 = 0.
  if (domain.kind() == DomainKind::radial) v[0] = v[1];
  const double c = shift_of(domain, v.data(), p);
  for (double& x : v) x -= c;
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  double scale = -1.0 / *mn;
  if (std::abs(*mx) > std::abs(*mn)) scale = -1.0 / *mx;
  for (double& x : v) x *= scale;
  res.normalization = {scale, c};
  res.u = {domain, v};
  const Energy e = energy(domain, v.data(), p);
  res.lambda = e.num / e.den;
  res.residual = euler_lagrange_residual(res.u, p, res.lambda);
  res.p_mean = p_mean_of(domain, v, p);
  return res;
}

double radial_unit_extent(double p, double n) {
  return solve_model(ModelProblem(PParams(p, n, p - 1.0), 0.0)).b();
}

EigenResult solve_eigen_shooting(const Domain1D& domain, double p) {
  if (domain.kind() != DomainKind::radial) throw std::invalid_argument("shooting needs a radial domain");
  const ModelSolution sol = solve_model(ModelProblem(PParams(p, domain.weight_dim(), p - 1.0), 0.0));
  const double b1 = sol.b();
  const double R = domain.length();
  EigenResult res;
  res.method = EigenMethod::shooting;
  res.lambda = (p - 1.0) * std::pow(b1 / R, p);
  std::vector<double> u;
  for (double t : domain.nodes()) u.push_back(sol.w(std::min(t * b1 / R, b1)));
  res.u = {domain, u};
  res.iterations = sol.steps();
  res.converged = true;
  res.residual = euler_lagrange_residual(res.u, p, res.lambda);
  res.p_mean = p_mean_of(domain, u, p);
  return res;
}

namespace {

// u clamped into [-1, m]; values beyond m by more than h are rejected.
double clamp_to_range(double u, const ModelSolution& sol, double h) {
  if (u < -1.0 - 1e-9 || u > sol.m_max() + h) throw std::invalid_argument("values outside [-1, m] of the model");
  return std::clamp(u, -1.0, sol.m_max());
}

void require_compatible(const EigenResult& res, const ModelSolution& sol) {
  const double lr = res.lambda;
  const double ls = sol.params().lambda;
  if (std::abs(lr - ls) > 1e-9 * std::max(lr, ls)) throw std::invalid_argument("model and eigenvalue differ");
  if (sol.params().p.value() <= 1.0) throw std::invalid_argument("invalid model");
}

}  // namespace

GradientReport gradient_comparison_check(const EigenResult& res, const ModelSolution& sol, double tol) {
  require_compatible(res, sol);
  const Domain1D& d = res.u.domain;
  const auto& u = res.u.values;
  const double h = d.spacing();
  GradientReport rep{-INFINITY, INFINITY, h, tol, false, d.cells()};
  for (int c = 0; c < d.cells(); ++c) {
    const double a = clamp_to_range(u[c], sol, h);
    const double b = clamp_to_range(u[d.next(c)], sol, h);
    const double du = std::abs(u[d.next(c)] - u[c]) / h;
    const double bound = sol.wdot(sol.w_inverse(0.5 * (a + b)));
    rep.max_violation = std::max(rep.max_violation, du - bound);
    rep.min_slack = std::min(rep.min_slack, bound - du);
  }
  rep.pass = rep.max_violation <= tol * h;
  return rep;
}

EProfile E_profile(const EigenResult& res, const ModelSolution& sol, const EProfileOptions& opt) {
  require_compatible(res, sol);
  if (opt.samples < 3 || !(opt.trim >= 0.0 && opt.trim < 0.5)) throw std::invalid_argument("invalid profile options");
  const Domain1D& d = res.u.domain;
  const double p = sol.params().p.value();
  const double h = d.spacing();
  const double a = sol.t_begin();
  const double b = sol.b();
  const double t0 = sol.t0();
  const bool flat = sol.problem().infinite() || sol.params().n == 1.0;
  const double n = sol.params().n;

  // Pushforward of the node weights: cumulative mass of w^(p-1) by g = w^-1(u).
  struct Node {
    double g;
    double f;
  };
  std::vector<Node> nodes;
  for (int i = 0; i < d.size(); ++i) {
    const double ui = clamp_to_range(res.u.values[i], sol, h);
    nodes.push_back({sol.w_inverse(ui), d.weights()[i] * spow_local(ui, p - 1.0)});
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node& x, const Node& y) { return x.g < y.g; });
  std::vector<double> gs, cum;
  double run = 0.0;
  for (const Node& nd : nodes) {
    gs.push_back(nd.g);
    cum.push_back(run + 0.5 * nd.f);
    run += nd.f;
  }
  auto numerator = [&](double s) {
    const auto it = std::upper_bound(gs.begin(), gs.end(), s);
    if (it == gs.begin()) return 0.0;
    if (it == gs.end()) return run;
    const std::size_t k = static_cast<std::size_t>(it - gs.begin());
    const double g0 = gs[k - 1], g1 = gs[k];
    if (g1 == g0) return cum[k];
    return cum[k - 1] + (cum[k] - cum[k - 1]) * (s - g0) / (g1 - g0);
  };
  auto density = [&](double t) {
    const double w = spow_local(sol.w(t), p - 1.0);
    return flat ? w : w * std::pow(t, n - 1.0);
  };

  EProfile out;
  out.h = h;
  const double lo = a + opt.trim * (b - a);
  const double hi = b - opt.trim * (b - a);
  double den = gauss_legendre10(density, a, std::min(lo, t0));
  if (lo > t0) den += gauss_legendre10(density, t0, lo);
  double prev = lo;
  for (int k = 0; k < opt.samples; ++k) {
    const double s = lo + (hi - lo) * k / (opt.samples - 1);
    if (prev < t0 && s > t0) {
      den += gauss_legendre10(density, prev, t0) + gauss_legendre10(density, t0, s);
    } else if (s > prev) {
      den += gauss_legendre10(density, prev, s);
    }
    prev = s;
    out.s.push_back(s);
    out.E.push_back(numerator(s) / den);
  }

  const auto [mn, mx] = std::minmax_element(out.E.begin(), out.E.end());
  const double mean = std::accumulate(out.E.begin(), out.E.end(), 0.0) / out.E.size();
  out.spread = (*mx - *mn) / std::abs(mean);
  // Largest drawdown against the expected direction on each side of t0.
  double worst = 0.0;
  double peak = -INFINITY;
  double trough = INFINITY;
  for (std::size_t k = 0; k < out.s.size(); ++k) {
    if (out.s[k] <= t0) {
      peak = std::max(peak, out.E[k]);
      worst = std::max(worst, peak - out.E[k]);
    } else {
      trough = std::min(trough, out.E[k]);
      worst = std::max(worst, out.E[k] - trough);
    }
  }
  out.worst_monotone = worst / std::abs(mean);
  out.constant = out.spread <= opt.tol_factor * h;
  out.monotone = out.worst_monotone <= opt.tol_factor * h;
  return out;
}

EigenResult perturb_measure(const EigenResult& res, double threshold, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("factor must be positive");
  EigenResult out = res;
  auto& w = out.u.domain.mutable_weights();
  for (std::size_t i = 0; i < w.size(); ++i)
    if (res.u.values[i] < threshold) w[i] *= factor;
  return out;
}

std::vector<BoundRow> bounds_table(double p, double d, double n) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be in (1, inf)");
  if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("d must be positive");
  if (!(n >= 1.0)) throw std::invalid_argument("n must be >= 1");
  const double pp = pi_p(PExponent(p));
  const double pi = std::numbers::pi;
  return {
      {"sharp", (p - 1.0) * std::pow(pp / d, p), true},
      {"hui", (p - 1.0) * std::pow(pp / (2.0 * d), p), true},
      {"kn", std::pow(pi / (4.0 * d), p) / (p - 1.0), p >= 2.0},
      {"li_yau", pi * pi / (4.0 * d * d), p == 2.0},
      {"zhong_yang", pi * pi / (d * d), p == 2.0},
  };
}

}  // namespace pspectral
