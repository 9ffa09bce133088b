#include "pspectral/model1d.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "pspectral/errors.hpp"

namespace pspectral {

namespace {

// Initial step at a = 0, relative to pi_p.
constexpr double kSeriesStep = 1e-7;

double bracket_root(const std::function<double(double)>& g, double lo, double hi, double tol) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0.0) == (ghi > 0.0)) throw NumericalError("root not bracketed");
  std::uintmax_t iters = 200;
  auto stop = [tol](double l, double r) { return std::abs(r - l) <= tol; };
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, stop, iters);
  return 0.5 * (r.first + r.second);
}

struct Normalized {
  double p;
  double n;
  double a1;       // alpha a
  double half_pi;  // pi_p / 2
  PExponent e;

  double drift(double s) const { return n == 1.0 ? 0.0 : -(n - 1.0) / (a1 + s); }

  ode::State<2> rhs(double s, const ode::State<2>& y) const {
    const double T = drift(s);
    if (T == 0.0) return {1.0, 0.0};
    const PSinCos sc = sincos_p(y[0], e);
    return {1.0 - T / (p - 1.0) * spow(sc.cos, p - 1.0) * sc.sin, T / (p - 1.0) * sc.cos_pow_p};
  }

  // Leading behaviour of the regular solution near s = 0 when a = 0:
  // w' = ((p-1) s / n)^(1/(p-1)), so phi + pi_p/2 = s/n and
  // log e = -(n-1)/(p-1) ((p-1)/n)^q s^q / q.
  ode::State<2> series(double s) const {
    const double q = p / (p - 1.0);
    return {-half_pi + s / n, -(n - 1.0) / (p - 1.0) * std::pow((p - 1.0) / n, q) * std::pow(s, q) / q};
  }
};

}  // namespace

PParams::PParams(double p_, double n_, double lambda_) : p(p_), n(n_), lambda(lambda_), alpha(0.0) {
  if (!std::isfinite(n) || n < 1.0) throw std::invalid_argument("dimension must be >= 1");
  if (!std::isfinite(lambda) || !(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  alpha = std::pow(lambda / (p_ - 1.0), 1.0 / p_);
}

ModelProblem::ModelProblem(PParams params_, double a_) : params(params_), a(a_) {
  if (std::isnan(a) || a < 0.0 || a == -kInfiniteStart)
    throw std::invalid_argument("a must be >= 0 or infinite");
}

double ModelSolution::drift(double t) const {
  if (problem_.infinite() || params().n == 1.0) return 0.0;
  return -(params().n - 1.0) / t;
}

double ModelSolution::phi(double t) const {
  const double alpha = params().alpha;
  const double half_pi = 0.5 * pi_p(params().p);
  if (problem_.infinite()) return alpha * t - half_pi;
  const double s = alpha * (t - problem_.a);
  if (s < traj_.t_begin()) {
    const Normalized nz{params().p.value(), params().n, alpha * problem_.a, half_pi, params().p};
    return s <= 0.0 ? -half_pi : nz.series(s)[0];
  }
  return traj_.eval(s)[0];
}

ModelState ModelSolution::state(double t) const {
  const PParams& pr = params();
  const double p = pr.p.value();
  const double alpha = pr.alpha;
  const double span = b_ - t_begin_;
  if (!(t >= t_begin_ - 1e-6 * span && t <= b_ + 1e-6 * span))
    throw std::domain_error("model state requested outside [a, b]");
  ModelState st{};
  st.t = t;
  double log_e1 = 0.0;
  if (problem_.infinite()) {
    st.phi = alpha * t - 0.5 * pi_p(pr.p);
  } else {
    const double s = alpha * (t - problem_.a);
    if (s < traj_.t_begin()) {
      const Normalized nz{p, pr.n, alpha * problem_.a, 0.5 * pi_p(pr.p), pr.p};
      const auto y = nz.series(std::max(s, 0.0));
      st.phi = y[0];
      log_e1 = y[1];
    } else if (t >= b_) {
      // b is defined by phi = pi_p/2; snap so w' vanishes there exactly.
      st.phi = 0.5 * pi_p(pr.p);
      log_e1 = std::log(m_max_);
    } else {
      const auto y = traj_.eval(s);
      st.phi = y[0];
      log_e1 = y[1];
    }
  }
  const PSinCos sc = sincos_p(st.phi, pr.p);
  st.sin = sc.sin;
  st.cos = sc.cos;
  st.cos_pow_p = sc.cos_pow_p;
  st.log_e_ratio = log_e1;
  st.e = alpha * std::exp(log_e1);
  st.w = std::exp(log_e1) * sc.sin;
  st.wdot = st.e * sc.cos;
  st.T = drift(t);
  if (st.T == 0.0) {
    st.phi_dot = alpha;
  } else if (t <= 0.0) {
    st.T = -std::numeric_limits<double>::infinity();
    st.phi_dot = alpha / pr.n;
  } else {
    st.phi_dot = alpha - st.T / (p - 1.0) * spow(sc.cos, p - 1.0) * sc.sin;
  }
  return st;
}

double ModelSolution::w_inverse(double s) const {
  if (s <= -1.0) return t_begin_;
  if (s >= m_max_) return b_;
  return bracket_root([&](double t) { return w(t) - s; }, t_begin_, b_, 1e-14 * std::max(1.0, b_));
}

std::vector<double> ModelSolution::knots() const {
  std::vector<double> out;
  if (problem_.infinite()) {
    for (int i = 0; i <= 200; ++i) out.push_back(t_begin_ + (b_ - t_begin_) * i / 200.0);
    return out;
  }
  const double alpha = params().alpha;
  out.push_back(t_begin_);
  for (double s : traj_.knots()) out.push_back(problem_.a + s / alpha);
  out.back() = b_;
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ModelSolution solve_model(const ModelProblem& prob, const ModelOptions& opt) {
  if (!(opt.event_tol > 0.0) || !(opt.rtol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
  ModelSolution sol(prob);
  const PParams& pr = prob.params;
  const double alpha = pr.alpha;
  const double pp = pi_p(pr.p);
  if (prob.infinite()) {
    sol.t_begin_ = 0.0;
    sol.b_ = pp / alpha;
    sol.delta_ = sol.b_;
    sol.t0_ = 0.5 * pp / alpha;
    sol.m_max_ = 1.0;
    return sol;
  }

  const Normalized nz{pr.p.value(), pr.n, alpha * prob.a, 0.5 * pp, pr.p};
  const ode::Rhs<2> f = [&nz](double s, const ode::State<2>& y) { return nz.rhs(s, y); };
  ode::Options o;
  o.rtol = opt.rtol;
  o.atol = opt.rtol;
  o.h_max = pp / 50.0;
  o.event_tol = 1e-3 * opt.event_tol;

  double s_start = 0.0;
  ode::State<2> y_start = {-0.5 * pp, 0.0};
  if (nz.a1 == 0.0 && pr.n > 1.0) {
    s_start = kSeriesStep * pp;
    y_start = nz.series(s_start);
    ode::Options oc = o;
    oc.h_initial = 0.1 * s_start;
    const auto check = ode::integrate<2>(f, 0.5 * s_start, nz.series(0.5 * s_start), s_start, oc);
    sol.start_discrepancy_ = std::max(std::abs(check.y[0] - y_start[0]), std::abs(check.y[1] - y_start[1]));
    o.h_initial = s_start;
  } else if (nz.a1 > 0.0) {
    o.h_initial = std::min(1e-3, 0.1 * nz.a1);
  }

  const ode::EventFn<2> at_top = [&nz](double, const ode::State<2>& y) { return y[0] - nz.half_pi; };
  const double s_limit = 2.0 * pr.n * pp + 10.0;
  auto run = ode::integrate<2>(f, s_start, y_start, s_limit, o, at_top);
  if (!run.event) throw NumericalError("model: phase did not reach pi_p/2");

  sol.traj_ = std::move(run.trajectory);
  sol.steps_ = run.accepted;
  const double b1 = run.t;
  const double t01 =
      bracket_root([&](double s) { return sol.traj_.eval(s)[0]; }, s_start, b1, 1e-3 * opt.event_tol);
  sol.t_begin_ = prob.a;
  sol.b_ = prob.a + b1 / alpha;
  sol.delta_ = b1 / alpha;
  sol.t0_ = prob.a + t01 / alpha;
  sol.m_max_ = std::exp(run.y[1]);
  return sol;
}

double model_delta(const ModelProblem& prob, const ModelOptions& opt) { return solve_model(prob, opt).delta(); }

double model_m_max(const ModelProblem& prob, const ModelOptions& opt) { return solve_model(prob, opt).m_max(); }

Continuation continue_phase(const ModelSolution& sol, double phase_target, double max_length,
                            const ModelOptions& opt) {
  const ModelProblem& prob = sol.problem();
  const PParams& pr = prob.params;
  const double alpha = pr.alpha;
  const double pp = pi_p(pr.p);
  Continuation out;
  out.t_reached = std::numeric_limits<double>::quiet_NaN();
  if (prob.infinite()) {
    // phi = alpha t - pi_p/2 exactly.
    const double t_hit = (phase_target + 0.5 * pp) / alpha;
    for (int k = 1; k * pp <= phase_target; ++k) out.zeros.push_back((k * pp + 0.5 * pp) / alpha);
    for (int k = 1; (k + 0.5) * pp <= phase_target; ++k) out.critical.push_back((k + 1.0) * pp / alpha);
    out.reached = t_hit - sol.b() <= max_length;
    if (out.reached) out.t_reached = t_hit;
    return out;
  }

  const Normalized nz{pr.p.value(), pr.n, alpha * prob.a, 0.5 * pp, pr.p};
  const ode::Rhs<2> f = [&nz](double s, const ode::State<2>& y) { return nz.rhs(s, y); };
  ode::Options o;
  o.rtol = opt.rtol;
  o.atol = opt.rtol;
  o.h_max = pp / 50.0;
  o.event_tol = 1e-3 * opt.event_tol;

  double s = alpha * (sol.b() - prob.a);
  ode::State<2> y = {0.5 * pp, std::log(sol.m_max())};
  const double s_limit = s + alpha * max_length;
  int kink = 1;  // next kink at (2 kink + 1) pi_p / 2
  while (s < s_limit) {
    const double next = std::min((kink + 0.5) * pp, phase_target);
    const ode::EventFn<2> ev = [next](double, const ode::State<2>& z) { return z[0] - next; };
    auto run = ode::integrate<2>(f, s, y, s_limit, o, ev);
    // Zero of w inside this segment at phase k pi_p.
    const double zero_phase = kink * pp;
    if (zero_phase > y[0] && zero_phase <= run.y[0]) {
      const double sz = bracket_root([&](double x) { return run.trajectory.eval(x)[0] - zero_phase; }, s, run.t,
                                     1e-3 * opt.event_tol);
      out.zeros.push_back(prob.a + sz / alpha);
    }
    s = run.t;
    y = run.y;
    if (!run.event) break;
    if (next == phase_target) {
      out.reached = true;
      out.t_reached = prob.a + s / alpha;
      break;
    }
    out.critical.push_back(prob.a + s / alpha);
    y[0] = next;
    ++kink;
  }
  return out;
}

std::vector<ScanRow> delta_scan(const std::vector<double>& a_grid, const PParams& params, const ModelOptions& opt) {
  std::vector<ScanRow> rows;
  rows.reserve(a_grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double a : a_grid) {
    ScanRow row{a, nan, nan, nan, nan, "ok"};
    try {
      const ModelSolution sol = solve_model(ModelProblem(params, a), opt);
      row.delta = sol.delta();
      row.m_max = sol.m_max();
      row.t0 = sol.t0();
      row.b = sol.b();
    } catch (const std::exception& ex) {
      row.status = std::string("error: ") + ex.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pspectral
