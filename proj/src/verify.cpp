#include "pspectral/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pspectral/bochner.hpp"
#include "pspectral/comparison.hpp"
#include "pspectral/spectral1d.hpp"

namespace pspectral {

namespace {

struct Check {
  CheckResult r;
  Check(int id, std::string name) : r{id, std::move(name), true, {}} {}
  void metric(const std::string& k, double v) { r.metrics.emplace_back(k, v); }
  void require(bool ok) { r.pass = r.pass && ok; }
};

CheckResult pi_closed_form(double s) {
  Check c(1, "pi_p closed form vs quadrature");
  double worst = 0.0;
  for (double p : {1.1, 1.5, 2.0, 3.0, 4.0, 10.0}) {
    const PExponent pe(p);
    worst = std::max(worst, std::abs(pi_p(pe) - pi_p_quadrature(pe)) / pi_p(pe));
  }
  const double pi2 = std::abs(pi_p(PExponent(2.0)) - std::numbers::pi);
  c.metric("max_rel_diff", worst);
  c.metric("pi_2_error", pi2);
  c.require(worst <= 1e-10 * s && pi2 <= 1e-12 * s);
  return c.r;
}

CheckResult trig_identity(double s) {
  Check c(2, "p-trig identity");
  double worst = 0.0;
  for (double p : {1.2, 1.5, 2.0, 3.0, 6.0}) {
    const PExponent pe(p);
    const double period = 2.0 * pi_p(pe);
    for (int i = 0; i < 1000; ++i) {
      const PSinCos sc = sincos_p(-period / 2 + period * i / 1000.0, pe);
      worst = std::max(worst, std::abs(std::pow(std::abs(sc.sin), p) + std::pow(std::abs(sc.cos), p) - 1.0));
    }
  }
  c.metric("max_identity_error", worst);
  c.require(worst <= 1e-9 * s);
  return c.r;
}

struct Solves {
  std::vector<EigenResult> segment;  // p = 1.5, 2, 3 on [0, 1]
  std::vector<EigenResult> circle;   // p = 1.5, 2, 3, length 2
};

CheckResult equality_case(const Solves& sv, double s) {
  Check c(3, "equality case on segment and circle");
  const double ps[3] = {1.5, 2.0, 3.0};
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double target = std::pow(pi_p(PExponent(ps[k])), ps[k]);
    for (const EigenResult* e : {&sv.segment[k], &sv.circle[k]})
      worst = std::max(worst, std::abs(e->lambda / (ps[k] - 1.0) / target - 1.0));
  }
  const double classical = std::abs(sv.segment[1].lambda / (std::numbers::pi * std::numbers::pi) - 1.0);
  c.metric("max_rel_error", worst);
  c.metric("p2_segment_rel_error", classical);
  c.require(worst <= 5e-3 * s && classical <= 1e-3 * s);
  return c.r;
}

CheckResult sharp_gap(double s, std::vector<ModelSolution>& trajectories) {
  Check c(4, "sharp gap of the model");
  const double as[4] = {0.1, 1.0, 10.0, 100.0};
  double min_gap = INFINITY;
  int ordered = 0;
  int cases = 0;
  for (double p : {1.5, 2.0, 3.0}) {
    for (double n : {2.0, 3.0}) {
      double gap[4], one_minus_m[4];
      bool ok = true;
      for (int i = 0; i < 4; ++i) {
        ModelSolution sol = solve_model(ModelProblem(PParams(p, n, p - 1.0), as[i]));
        gap[i] = sol.delta() - pi_p(PExponent(p));
        one_minus_m[i] = 1.0 - sol.m_max();
        min_gap = std::min(min_gap, gap[i]);
        ok = ok && gap[i] > 0.0 && sol.m_max() < 1.0;
        trajectories.push_back(std::move(sol));
      }
      ok = ok && gap[3] < gap[0] && one_minus_m[3] < one_minus_m[0];
      ordered += ok ? 1 : 0;
      ++cases;
    }
  }
  (void)s;
  c.metric("min_gap", min_gap);
  c.metric("cases", cases);
  c.metric("cases_ok", ordered);
  c.require(ordered == cases);
  return c.r;
}

CheckResult phase_bound(const std::vector<ModelSolution>& trajectories, double s) {
  Check c(5, "phase speed bound");
  double worst = INFINITY;
  for (const auto& sol : trajectories) {
    const double floor = sol.params().alpha / sol.params().n;
    for (double t : sol.knots()) worst = std::min(worst, sol.state(t).phi_dot - floor);
  }
  c.metric("min_phi_dot_margin", worst);
  c.require(worst >= -1e-8 * s);
  return c.r;
}

CheckResult certificate_suite(const std::vector<ModelSolution>& trajectories, double s) {
  Check c(6, "certificate suite");
  double min_slack_ratio = INFINITY, worst_order = INFINITY, min_kappa = INFINITY, kappa_t0 = 0.0, kdot = 0.0,
         a3 = 0.0;
  int failures = 0;
  for (const auto& sol : trajectories) {
    CertificateOptions o;
    o.offset = 1e-6;
    o.ordering_tol = 1e-9 * s;
    o.a3_tol = 1e-6 * s;
    const Certificate cert = build_certificate(sol, o);
    const CertificateVerdict& v = cert.verdict();
    const KappaReport k = kappa_check(cert);
    min_slack_ratio = std::min(min_slack_ratio, v.min_slack / o.offset);
    worst_order = std::min(worst_order, v.worst_ordering);
    min_kappa = std::min(min_kappa, v.min_kappa);
    kappa_t0 = std::max(kappa_t0, k.kappa_t0_error);
    kdot = std::max(kdot, k.max_fd_deviation);
    a3 = std::max(a3, v.worst_a3);
    const bool ok = v.all() && k.kappa_t0_error <= 1e-8 * s && k.max_fd_deviation <= 1e-4 * s;
    failures += ok ? 0 : 1;
  }
  c.metric("min_slack_over_offset", min_slack_ratio);
  c.metric("worst_ordering", worst_order);
  c.metric("min_kappa", min_kappa);
  c.metric("kappa_t0_rel_error", kappa_t0);
  c.metric("kappa_dot_fd_deviation", kdot);
  c.metric("max_a3_over_scale", a3);
  c.metric("failures", failures);
  c.require(failures == 0);
  return c.r;
}

CheckResult bochner_suite(double s) {
  Check c(7, "p-Bochner identity");
  double worst = 0.0;
  double min_order = INFINITY;
  int exact = 0;
  for (const auto& f : field_catalog()) {
    for (double p : {1.5, 2.0, 3.0}) {
      const BochnerTerms bt = bochner_terms(f.field, f.point, p);
      worst = std::max(worst, std::abs(bt.residual) / bt.scale);
      const Convergence cv = bochner_convergence(f.field, f.point, p);
      if (cv.exact) ++exact;
      else min_order = std::min(min_order, cv.order);
    }
  }
  // Classical identity at p = 2: 1/2 Delta |grad u|^2 = |H|^2 + <grad Delta u, grad u>.
  double classical = 0.0;
  for (const auto& f : field_catalog()) {
    const BochnerTerms bt = bochner_terms(f.field, f.point, 2.0);
    const DiffReport r = differentiate(f.field, f.point);
    const double rhs = r.hess.squaredNorm() + bt.directional;
    classical = std::max(classical, std::abs(bt.lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  c.metric("max_residual_over_scale", worst);
  c.metric("min_order", min_order);
  c.metric("exact_cases", exact);
  c.metric("p2_classical_deviation", classical);
  c.require(worst <= 1e-4 * s && min_order >= 1.8 && classical <= 1e-6 * s);
  return c.r;
}

CheckResult hessian_suite(const VerifyOptions& opt) {
  Check c(8, "Hessian inequality sweep");
  const SweepSummary sw = hessian_sweep(opt.quick ? 2000 : 10000, opt.seed, 1e-10 * opt.tol_scale);
  c.metric("cases", sw.cases);
  c.metric("skipped", sw.skipped);
  c.metric("violations", sw.violations);
  c.metric("worst", sw.worst);
  c.require(sw.violations == 0);
  return c.r;
}

CheckResult chain_rule(double s) {
  Check c(9, "chain rule for P^II");
  auto phi = [](double x) { return std::exp(0.5 * x) + x * x * x; };
  auto d1 = [](double x) { return 0.5 * std::exp(0.5 * x) + 3 * x * x; };
  auto d2 = [](double x) { return 0.25 * std::exp(0.5 * x) + 6 * x; };
  double worst = 0.0;
  for (const auto& f : field_catalog()) {
    const ScalarField comp{f.field.dim, [&](const Eigen::VectorXd& x) { return phi(f.field.eval(x)); }};
    const DiffReport r = differentiate(f.field, f.point);
    for (double p : {1.5, 2.0, 3.0}) {
      const double expected = d1(r.value) * p_laplacian(r, p) + (p - 1.0) * d2(r.value) * std::pow(r.grad.norm(), p);
      const double got = pII_at(f.field, comp, f.point, p);
      worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
    }
  }
  c.metric("max_rel_deviation", worst);
  c.require(worst <= 1e-6 * s);
  return c.r;
}

ModelSolution matched_model(const EigenResult& e, double p, double n, bool flat) {
  return solve_model(ModelProblem(PParams(p, n, e.lambda), flat ? kInfiniteStart : 0.0));
}

struct RadialCases {
  std::vector<EigenResult> shooting;     // n = 3, p = 1.5, 2, 3
  std::vector<EigenResult> variational;
};

CheckResult gradient_suite(const Solves& sv, const RadialCases& rc, double s) {
  Check c(10, "gradient comparison");
  const double ps[3] = {1.5, 2.0, 3.0};
  auto ratio = [&](const EigenResult& e, double p, bool flat) {
    const GradientReport g = gradient_comparison_check(e, matched_model(e, p, flat ? 1.0 : 3.0, flat), 5.0 * s);
    return g.max_violation / g.h;
  };
  double segment = -INFINITY, radial = -INFINITY, radial_var = -INFINITY;
  for (int k = 0; k < 3; ++k) {
    segment = std::max(segment, ratio(sv.segment[k], ps[k], true));
    radial = std::max(radial, ratio(rc.shooting[k], ps[k], false));
    radial_var = std::max(radial_var, ratio(rc.variational[k], ps[k], false));
  }
  c.metric("segment_violation_over_h", segment);
  c.metric("radial_violation_over_h", radial);
  c.metric("radial_variational_violation_over_h", radial_var);
  c.require(segment <= 5.0 * s && radial <= 5.0 * s);
  return c.r;
}

CheckResult backend_agreement(int N, const VariationalOptions& vo, double s, RadialCases& rc) {
  Check c(11, "variational vs shooting");
  double worst = 0.0;
  for (double n : {2.0, 3.0, 5.0}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const Domain1D d = Domain1D::radial(1.0, n, N);
      EigenResult v = solve_eigen_variational(d, p, vo);
      EigenResult sh = solve_eigen_shooting(d, p);
      worst = std::max(worst, std::abs(v.lambda / sh.lambda - 1.0));
      if (n == 3.0) {
        rc.variational.push_back(std::move(v));
        rc.shooting.push_back(std::move(sh));
      }
    }
  }
  c.metric("max_rel_diff", worst);
  c.require(worst <= 5e-3 * s);
  return c.r;
}

CheckResult e_profile_suite(const Solves& sv, const RadialCases& rc, double s) {
  Check c(12, "E(s) profile");
  const double ps[3] = {1.5, 2.0, 3.0};
  EProfileOptions o;
  o.tol_factor = 10.0 * s;
  double spread = 0.0, radial_var = 0.0;
  bool ok = true;
  int flipped = 0;
  for (int k = 0; k < 3; ++k) {
    for (const EigenResult* e : {&sv.segment[k], &rc.shooting[k]}) {
      const bool flat = e->u.domain.kind() != DomainKind::radial;
      const ModelSolution sol = matched_model(*e, ps[k], flat ? 1.0 : 3.0, flat);
      const EProfile pr = E_profile(*e, sol, o);
      spread = std::max(spread, pr.spread / pr.h);
      ok = ok && pr.constant && pr.monotone;
      const EProfile bad = E_profile(perturb_measure(*e, -0.9, 1.5), sol, o);
      if (!bad.monotone) ++flipped;
    }
    const EigenResult& v = rc.variational[k];
    const EProfile pv = E_profile(v, matched_model(v, ps[k], 3.0, false), o);
    radial_var = std::max(radial_var, pv.spread / pv.h);
  }
  c.metric("max_spread_over_h", spread);
  c.metric("radial_variational_spread_over_h", radial_var);
  c.metric("negative_controls_flipped", flipped);
  c.require(ok && flipped == 6);
  return c.r;
}

CheckResult bounds_suite(double s) {
  Check c(13, "bounds table");
  double ratio_err = 0.0;
  bool ordered = true;
  for (double p : {2.0, 3.0, 4.0}) {
    const auto rows = bounds_table(p, 1.0, 2.0);
    ratio_err = std::max(ratio_err, std::abs(rows[0].value / rows[1].value / std::pow(2.0, p) - 1.0));
    ordered = ordered && rows[0].value > rows[1].value && rows[1].value > rows[2].value;
  }
  c.metric("max_ratio_error", ratio_err);
  c.metric("ordered", ordered ? 1.0 : 0.0);
  c.require(ratio_err <= 1e-12 * s && ordered);
  return c.r;
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
  const double s = opt.tol_scale;
  const int N = opt.quick ? 400 : 2000;
  VariationalOptions vo;
  vo.seed = opt.seed;

  std::vector<CheckResult> out;
  out.push_back(pi_closed_form(s));
  out.push_back(trig_identity(s));

  Solves sv;
  for (double p : {1.5, 2.0, 3.0}) {
    sv.segment.push_back(solve_eigen_variational(Domain1D::segment(0.0, 1.0, N), p, vo));
    sv.circle.push_back(solve_eigen_variational(Domain1D::circle(2.0, N), p, vo));
  }
  out.push_back(equality_case(sv, s));

  std::vector<ModelSolution> trajectories;
  out.push_back(sharp_gap(s, trajectories));
  out.push_back(phase_bound(trajectories, s));
  out.push_back(certificate_suite(trajectories, s));
  out.push_back(bochner_suite(s));
  out.push_back(hessian_suite(opt));
  out.push_back(chain_rule(s));

  RadialCases rc;
  CheckResult agreement = backend_agreement(N, vo, s, rc);
  out.push_back(gradient_suite(sv, rc, s));
  out.push_back(std::move(agreement));
  out.push_back(e_profile_suite(sv, rc, s));
  out.push_back(bounds_suite(s));
  return out;
}

}  // namespace pspectral
