#include "pspectral/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pspectral/errors.hpp"

namespace pspectral {

namespace {

struct Local {
  double t;
  double T;
  double X;
  double Xp;  // X^(p-1)
  ModelState st;
};

void require_radial(const ModelSolution& sol) {
  if (sol.problem().infinite()) throw std::invalid_argument("certificate requires finite a");
  if (!(sol.params().n > 1.0)) throw std::invalid_argument("certificate requires n > 1");
}

Local local_at(const ModelSolution& sol, double t) {
  const PParams& pr = sol.params();
  const double p = pr.p.value();
  const ModelState st = sol.state(t);
  const double L = std::pow(pr.lambda, 1.0 / (p - 1.0));
  // w / w' = sin_p / (alpha cos_p)
  const double X = L * st.sin / (pr.alpha * st.cos);
  return {t, st.T, X, spow(X, p - 1.0), st};
}

double eta_of(double s, double T, double Xp, double p, double n) {
  return s / (p - 1.0) * (T - Xp) + s * s * (p - n) / (p * (n - 1.0));
}

double beta_of(double s, double T, double Xp, double p, double n) {
  return -p * T / (p - 1.0) * (n / (n - 1.0) * T - Xp) - s * s +
         s * ((2.0 * n / (n - 1.0) + 1.0 / (p - 1.0)) * T - p / (p - 1.0) * Xp);
}

// Derivatives of W = w'^(p-1) along the Prüfer trajectory. Wd is Delta_p w;
// R = W'' + lambda (p-1) |w|^(p-2) w' with the two terms that blow up at
// w = 0 for p < 2 cancelled analytically.
struct Jet {
  double W;
  double Wd;
  double R;
};

Jet jet_at(const ModelSolution& sol, const ModelState& st) {
  const PParams& pr = sol.params();
  const double p = pr.p.value();
  const double n = pr.n;
  const double alpha = pr.alpha;
  const double S = st.sin;
  const double C = st.cos;
  const double Cp = st.cos_pow_p;
  const double T = st.T;
  const double Td = T == 0.0 ? 0.0 : T * T / (n - 1.0);
  const double Sp = spow(S, p - 1.0);
  const double Cpm = spow(C, p - 1.0);
  const double ep = std::pow(st.e, p - 1.0);
  const double phid = st.phi_dot;

  const double g = T * Cp / (p - 1.0);  // (log e)'
  const double gd = (Td * Cp - p * T * Sp * C * phid) / (p - 1.0);
  const double phidd = -Td / (p - 1.0) * Cpm * S - T / (p - 1.0) * phid * (Cp - (p - 1.0) * (1.0 - Cp));
  const double K = g * Cpm - Sp * phid;
  const double Wdd_reg = (p - 1.0) * ep * ((p - 1.0) * g * K + gd * Cpm - (p - 1.0) * g * Sp * phid - Sp * phidd);
  const double R = Wdd_reg + (p - 1.0) * T * ep * Cp * (phid + alpha) * Sp;
  return {ep * Cpm, (p - 1.0) * ep * K, R};
}

A3Value a3_from(const ModelSolution& sol, const ModelState& st) {
  const PParams& pr = sol.params();
  const double p = pr.p.value();
  const double n = pr.n;
  const double lam = pr.lambda;
  const Jet j = jet_at(sol, st);
  const double t1 = (n + 1.0) / (n - 1.0) * lam * spow(st.w, p - 1.0) * j.Wd;
  const double t2 = lam * lam * std::pow(std::abs(st.w), 2.0 * p - 2.0) / (n - 1.0);
  const double t3 = -j.W * j.R;
  const double t4 = n / (n - 1.0) * j.Wd * j.Wd;
  return {t1 + t2 + t3 + t4, std::max(lam * lam, std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4))};
}

// First derivative of g at x by a five-point stencil: centred when `branch`
// is constant across it, one-sided otherwise. Returns NaN if no stencil fits
// in [lo, hi] with a constant branch.
template <class G, class B>
double derivative(const G& g, const B& branch, double x, double h, double lo, double hi) {
  static constexpr double central[5] = {1.0, -8.0, 0.0, 8.0, -1.0};  // / 12h, offsets -2..2
  static constexpr double onesided[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};  // / 12h, offsets 0..4
  const int b0 = branch(x);
  auto fits = [&](int first, int dir) {
    for (int k = 0; k < 5; ++k) {
      const double xk = x + dir * (first + k) * h;
      if (xk < lo || xk > hi || branch(xk) != b0) return false;
    }
    return true;
  };
  if (fits(-2, 1)) {
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += central[k] * g(x + (k - 2) * h);
    return s / (12.0 * h);
  }
  for (int dir : {1, -1}) {
    if (!fits(0, dir)) continue;
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += onesided[k] * g(x + dir * k * h);
    return dir * s / (12.0 * h);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double X_of(const ModelSolution& sol, double t) {
  if (!(t > sol.t_begin() && t < sol.b())) throw std::domain_error("X_of: t outside (a, b)");
  return local_at(sol, t).X;
}

std::pair<double, double> eta_beta(double s, double t, const ModelSolution& sol) {
  require_radial(sol);
  if (!(t > sol.t_begin() && t < sol.b())) throw std::domain_error("eta_beta: t outside (a, b)");
  const Local l = local_at(sol, t);
  const double p = sol.params().p.value();
  const double n = sol.params().n;
  return {eta_of(s, l.T, l.Xp, p, n), beta_of(s, l.T, l.Xp, p, n)};
}

double kappa_value(const PParams& pr, double X, double T) {
  const double p = pr.p.value();
  const double n = pr.n;
  const double L = std::pow(pr.lambda, 1.0 / (p - 1.0));
  return n * (p - 1.0) * (p - 1.0) * L + (n * (p - 1.0) + p) * X * (spow(X, p - 1.0) - n / (n - 1.0) * T);
}

double kappa_derivative(const PParams& pr, double X, double T) {
  const double p = pr.p.value();
  const double n = pr.n;
  const double L = std::pow(pr.lambda, 1.0 / (p - 1.0));
  const double c = n * (p - 1.0) + p;
  const double Xp = spow(X, p - 1.0);
  const double ax = std::abs(X);
  const double Xd = L - T * X / (p - 1.0) + std::pow(ax, p) / (p - 1.0);
  const double Xpd = (p - 1.0) * L * std::pow(ax, p - 2.0) - T * Xp + std::pow(ax, 2.0 * (p - 1.0));
  return c * Xd * (Xp - n / (n - 1.0) * T) + c * X * (Xpd - n * T * T / ((n - 1.0) * (n - 1.0)));
}

double kappa_closed_form(const PParams& pr, double X) {
  const double p = pr.p.value();
  const double n = pr.n;
  const double L = std::pow(pr.lambda, 1.0 / (p - 1.0));
  return -n * (p - 1.0) * (p - 1.0) * p * p * L * L / ((n * (p - 1.0) + p) * X);
}

A3Value a3_residual(const ModelSolution& sol, double t) {
  if (!(sol.params().n > 1.0)) throw std::invalid_argument("a3_residual requires n > 1");
  if (!(t >= sol.t_begin() && t <= sol.b())) throw std::domain_error("a3_residual: t outside [a, b]");
  return a3_from(sol, sol.state(t));
}

double Certificate::f(double t) const {
  const double t0 = sol_.t0();
  return t >= t0 ? forward_.eval(t)[0] : backward_.eval(t)[0];
}

double Certificate::fdot(double t) const {
  const Local l = local_at(sol_, t);
  const double p = sol_.params().p.value();
  const double n = sol_.params().n;
  const double fv = f(t);
  return std::min(eta_of(fv, l.T, l.Xp, p, n), beta_of(fv, l.T, l.Xp, p, n)) - offset_;
}

Certificate build_certificate(const ModelSolution& sol, const CertificateOptions& opt) {
  require_radial(sol);
  const PParams& pr = sol.params();
  const double p = pr.p.value();
  const double n = pr.n;
  const double delta = sol.delta();
  const double a = sol.t_begin();
  const double b = sol.b();
  const double t0 = sol.t0();

  Certificate cert(sol);
  cert.epsilon_ = opt.epsilon > 0.0 ? opt.epsilon : 1e-3 * delta;
  cert.offset_ = opt.offset > 0.0 ? opt.offset : 1e-6 * std::max(1.0, std::pow(pr.lambda, 2.0 / (p - 1.0)));
  if (!(cert.epsilon_ < 0.5 * std::min(t0 - a, b - t0))) throw std::invalid_argument("epsilon too large");
  if (opt.grid_points < 3) throw std::invalid_argument("grid needs at least 3 points");
  const double lo = a + cert.epsilon_;
  const double hi = b - cert.epsilon_;
  const double offset = cert.offset_;

  const ode::Rhs<1> rhs = [&](double t, const ode::State<1>& y) {
    const Local l = local_at(sol, t);
    return ode::State<1>{std::min(eta_of(y[0], l.T, l.Xp, p, n), beta_of(y[0], l.T, l.Xp, p, n)) - offset};
  };
  ode::Options o;
  o.rtol = 1e-11;
  o.atol = 1e-11;
  o.h_max = delta / 200.0;
  o.h_initial = 1e-4 * delta;
  const double f0 = p / (p - 1.0) * (-(n - 1.0) / t0);
  CertificateVerdict& v = cert.verdict_;
  try {
    cert.forward_ = ode::integrate<1>(rhs, t0, {f0}, hi, o).trajectory;
    cert.backward_ = ode::integrate<1>(rhs, t0, {f0}, lo, o).trajectory;
    v.f_finite = true;
  } catch (const NumericalError& ex) {
    v.failure = std::string("f could not be continued: ") + ex.what();
    return cert;
  }

  std::vector<double> grid;
  for (int i = 0; i < opt.grid_points; ++i) grid.push_back(lo + (hi - lo) * i / (opt.grid_points - 1));
  grid.push_back(t0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  v.min_slack = std::numeric_limits<double>::infinity();
  v.min_kappa = std::numeric_limits<double>::infinity();
  v.worst_ordering = std::numeric_limits<double>::infinity();
  const double fac = (p - 1.0) / p * n / (n - 1.0);
  bool finite = true;
  for (double t : grid) {
    const Local l = local_at(sol, t);
    CertificateRow r{};
    r.t = t;
    r.w = l.st.w;
    r.wdot = l.st.wdot;
    r.X = l.X;
    r.T = l.T;
    r.f = cert.f(t);
    r.eta = eta_of(r.f, l.T, l.Xp, p, n);
    r.beta = beta_of(r.f, l.T, l.Xp, p, n);
    r.y1 = p / (p - 1.0) * (l.T - (n - 1.0) / n * l.Xp);
    r.y2 = p / (p - 1.0) * l.T;
    r.kappa = kappa_value(pr, l.X, l.T);
    const double fd = std::min(r.eta, r.beta) - offset;
    r.slack1 = r.eta - fd;
    r.slack2 = r.beta - fd;
    const A3Value a3 = a3_from(sol, l.st);
    r.a3 = a3.value;
    r.a3_scale = a3.scale;
    finite = finite && std::isfinite(r.f);

    v.min_slack = std::min({v.min_slack, r.slack1, r.slack2});
    if (t != t0) {
      const double side = t > t0 ? 1.0 : -1.0;
      v.worst_ordering = std::min(v.worst_ordering, side * (r.f - r.y1) / (1.0 + std::abs(r.y1)));
      v.min_kappa = std::min(v.min_kappa, r.kappa);
    }
    v.worst_a3 = std::max(v.worst_a3, std::abs(r.a3) / r.a3_scale);
    v.factorization = std::max(v.factorization, std::abs(r.eta - r.beta - fac * (r.f - r.y1) * (r.f - r.y2)) /
                                                    (1.0 + std::abs(r.eta) + std::abs(r.beta)));
    cert.rows_.push_back(r);
  }
  cert.t0_index_ = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), t0) - grid.begin());

  // Differenced f' against the right-hand side, away from t0 and from
  // switches between the two branches of the minimum.
  const double hfd = 1e-4 * delta;
  auto branch = [&](double t) {
    const Local l = local_at(sol, t);
    const double fv = cert.f(t);
    const int side = t >= t0 ? 1 : 0;
    return 2 * side + (eta_of(fv, l.T, l.Xp, p, n) <= beta_of(fv, l.T, l.Xp, p, n) ? 1 : 0);
  };
  auto fval = [&](double t) { return cert.f(t); };
  const std::size_t stride = std::max<std::size_t>(1, grid.size() / 200);
  for (std::size_t i = 0; i < grid.size(); i += stride) {
    const double t = grid[i];
    const double d = derivative(fval, branch, t, hfd, lo, hi);
    if (std::isnan(d)) continue;
    const double exact = std::min(cert.rows_[i].eta, cert.rows_[i].beta) - offset;
    v.fdot_deviation = std::max(v.fdot_deviation, std::abs(d - exact) / (1.0 + std::abs(exact)));
  }

  v.f_finite = finite;
  v.slack_positive = v.min_slack >= 0.5 * offset;
  v.ordering = v.worst_ordering >= -opt.ordering_tol;
  v.kappa_positive = v.min_kappa > 0.0;
  v.a3_small = v.worst_a3 <= opt.a3_tol;
  return cert;
}

KappaReport kappa_check(const Certificate& cert) {
  const ModelSolution& sol = cert.solution();
  const PParams& pr = sol.params();
  const double p = pr.p.value();
  const double n = pr.n;
  const double L = std::pow(pr.lambda, 1.0 / (p - 1.0));
  KappaReport rep;

  const double k0 = n * (p - 1.0) * (p - 1.0) * L;
  rep.kappa_t0_error = std::abs(cert.rows()[cert.t0_index()].kappa - k0) / k0;
  rep.kappa_at_t0_ok = rep.kappa_t0_error <= 1e-8;

  const double delta = sol.delta();
  const double lo = sol.t_begin() + cert.epsilon();
  const double hi = sol.b() - cert.epsilon();
  const double h = 1e-5 * delta;
  auto kappa_at = [&](double t) {
    const Local l = local_at(sol, t);
    return kappa_value(pr, l.X, l.T);
  };
  // |X|^(p-2) in kappa' is singular at t0 for p < 2; stay a few stencil
  // widths away from it.
  const double guard = 50.0 * h;
  for (const CertificateRow& r : cert.rows()) {
    if (r.t - 2 * h < lo || r.t + 2 * h > hi || std::abs(r.t - sol.t0()) < guard) continue;
    const double fd = (kappa_at(r.t - 2 * h) - 8 * kappa_at(r.t - h) + 8 * kappa_at(r.t + h) - kappa_at(r.t + 2 * h)) /
                      (12 * h);
    const double general = kappa_derivative(pr, r.X, r.T);
    const double closed = kappa_closed_form(pr, r.X);
    const double scale = std::max({std::abs(general), L * L, 1.0});
    rep.max_fd_deviation = std::max(rep.max_fd_deviation, std::abs(fd - general) / scale);
    rep.max_closed_form_gap = std::max(rep.max_closed_form_gap, std::abs(fd - closed) / scale);
    ++rep.rows_checked;
    if ((general < 0.0) == (r.X > 0.0)) ++rep.sign_matches; else ++rep.sign_mismatches;
  }

  // States with kappa = 0: pick X and solve kappa(X, T) = 0 for T.
  for (double X : {-3.0, -1.0, -0.2, 0.3, 1.5, 4.0}) {
    const double c = n * (p - 1.0) + p;
    const double T = (n - 1.0) / n * (spow(X, p - 1.0) + n * (p - 1.0) * (p - 1.0) * L / (c * X));
    const double general = kappa_derivative(pr, X, T);
    const double closed = kappa_closed_form(pr, X);
    rep.max_reduction_deviation =
        std::max(rep.max_reduction_deviation, std::abs(general - closed) / std::max(std::abs(closed), 1e-300));
  }
  return rep;
}

PsiReconstruction reconstruct_psi(const Certificate& cert) {
  if (!cert.verdict().all()) throw std::invalid_argument("reconstruct_psi: certificate verdict is not all true");
  const ModelSolution& sol = cert.solution();
  const PParams& pr = sol.params();
  const double p = pr.p.value();
  const double n = pr.n;
  const double lam = pr.lambda;
  const double t0 = sol.t0();
  const double lo = sol.t_begin() + cert.epsilon();
  const double hi = sol.b() - cert.epsilon();
  const double hd = 1e-4 * sol.delta();
  const auto& rows = cert.rows();
  const std::size_t m = rows.size();

  PsiReconstruction out;
  out.samples.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    out.samples[i].t = rows[i].t;
    out.samples[i].s = rows[i].w;
    out.samples[i].h = -rows[i].f / rows[i].wdot;
  }
  // log psi by the trapezoid rule in s, anchored at s = 0 (t0).
  const std::size_t k0 = cert.t0_index();
  std::vector<double> logpsi(m, 0.0);
  for (std::size_t i = k0 + 1; i < m; ++i)
    logpsi[i] = logpsi[i - 1] + 0.5 * (out.samples[i].s - out.samples[i - 1].s) * (out.samples[i].h + out.samples[i - 1].h);
  for (std::size_t i = k0; i-- > 0;)
    logpsi[i] = logpsi[i + 1] - 0.5 * (out.samples[i + 1].s - out.samples[i].s) * (out.samples[i + 1].h + out.samples[i].h);

  auto hfun = [&](double t) { return -cert.f(t) / sol.wdot(t); };
  auto branch = [&](double t) {
    const Local l = local_at(sol, t);
    const double fv = cert.f(t);
    return 2 * (t >= t0 ? 1 : 0) + (eta_of(fv, l.T, l.Xp, p, n) <= beta_of(fv, l.T, l.Xp, p, n) ? 1 : 0);
  };

  out.psi_positive = out.a1_positive = out.a2_positive = true;
  const double cm1 = (p - n) / (p * (n - 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    PsiSample& smp = out.samples[i];
    const CertificateRow& r = rows[i];
    smp.psi = std::exp(logpsi[i]);
    const double step = std::min({hd, 0.02 * (r.t - sol.t_begin()), 0.02 * (sol.b() - r.t)});
    const double dh_dt = derivative(hfun, branch, r.t, step, lo, hi);
    const double hs = dh_dt / r.wdot;  // dh/ds
    const double h = smp.h;
    const double a1_terms = (p - 1.0) / smp.psi * (std::abs(hs) + std::abs(h * h * cm1));
    smp.a1 = (p - 1.0) / smp.psi * (hs + h * h * cm1);
    smp.a1_surrogate = (p - 1.0) * r.slack1 / (smp.psi * r.wdot * r.wdot);

    const ModelState st = sol.state(r.t);
    const Jet j = jet_at(sol, st);
    const double b1 = -(p - 1.0) * h * lam * spow(r.w, p - 1.0) * (n + 1.0) / (n - 1.0);
    const double b2 = -2.0 * n * (p - 1.0) / (n - 1.0) * h * j.Wd;
    const double b3 = -p * j.R / r.wdot;
    const double b4 = (p - 1.0) * std::pow(r.wdot, p) * hs;
    const double b5 = -(p - 1.0) * std::pow(r.wdot, p) * h * h;
    smp.a2 = b1 + b2 + b3 + b4 + b5;
    smp.a2_surrogate = (p - 1.0) * std::pow(r.wdot, p - 2.0) * r.slack2;
    const double a2_terms = std::abs(b1) + std::abs(b2) + std::abs(b3) + std::abs(b4) + std::abs(b5);

    out.psi_positive = out.psi_positive && smp.psi > 0.0;
    out.a1_positive = out.a1_positive && smp.a1_surrogate > 0.0;
    out.a2_positive = out.a2_positive && smp.a2_surrogate > 0.0;
    if (std::isnan(dh_dt)) continue;
    out.max_a1_deviation = std::max(out.max_a1_deviation, std::abs(smp.a1 - smp.a1_surrogate) /
                                                              std::max(std::abs(smp.a1_surrogate), a1_terms));
    out.max_a2_deviation = std::max(out.max_a2_deviation, std::abs(smp.a2 - smp.a2_surrogate) /
                                                              std::max(std::abs(smp.a2_surrogate), a2_terms));
  }
  return out;
}

}  // namespace pspectral
