#include "pspectral/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "pspectral/bochner.hpp"
#include "pspectral/comparison.hpp"
#include "pspectral/errors.hpp"
#include "pspectral/model1d.hpp"
#include "pspectral/ptrig.hpp"
#include "pspectral/spectral1d.hpp"
#include "pspectral/verify.hpp"

namespace pspectral {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_cell(const Cell& c) {
  struct {
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return csv_quote(v); }
  } visit;
  return std::visit(visit, c);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_quote(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += "\n";
  }
  return out;
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json json_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return json_number(*d);
  return std::visit([](const auto& v) { return Json(v); }, c);
}

Json to_json(const Table& t) {
  Json arr = Json::array();
  for (const auto& row : t.rows) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = json_cell(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

double parse_double(const std::string& flag, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || std::isnan(v)) throw UsageError(flag + ": not a number: " + text);
  return v;
}

std::vector<double> parse_list(const std::string& flag, const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& s : items) out.push_back(parse_double(flag, s));
  return out;
}

double tolerance_scale() {
  const char* env = std::getenv("PSPECTRAL_TOL");
  if (!env || !*env) return 1.0;
  const double v = parse_double("PSPECTRAL_TOL", env);
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("PSPECTRAL_TOL must be a positive finite number");
  return v;
}

struct Emitted {
  std::string text;
  int code = 0;
};

bool want_json(const std::string& format) { return format == "json"; }

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- subcommands ----

struct PtrigArgs {
  double p = 2.0;
  int points = 1000;
};

Emitted run_ptrig(const PtrigArgs& a, const std::string& format) {
  const PExponent pe(a.p);
  if (a.points < 1) throw UsageError("--points must be positive");
  const double period = 2.0 * pi_p(pe);
  Table t{{"x", "sin_p", "cos_p", "identity_residual"}, {}};
  for (int i = 0; i < a.points; ++i) {
    const double x = period * i / a.points;
    const PSinCos sc = sincos_p(x, pe);
    const double id = std::pow(std::abs(sc.sin), a.p) + std::pow(std::abs(sc.cos), a.p) - 1.0;
    t.rows.push_back({x, sc.sin, sc.cos, id});
  }
  if (!want_json(format)) return {to_csv(t)};
  Json j;
  j["p"] = a.p;
  j["pi_p"] = pi_p(pe);
  j["rows"] = to_json(t);
  return {dump(j)};
}

struct ModelArgs {
  double p = 2.0;
  double n = 1.0;
  std::string a = "inf";
  std::string lambda;
  int points = 1001;
};

PParams model_params(double p, double n, const std::string& lambda) {
  return PParams(p, n, lambda.empty() ? p - 1.0 : parse_double("--lambda", lambda));
}

Emitted run_model(const ModelArgs& a, const std::string& format) {
  if (a.points < 2) throw UsageError("--points must be at least 2");
  const ModelSolution sol = solve_model(ModelProblem(model_params(a.p, a.n, a.lambda), parse_double("--a", a.a)));
  Table t{{"t", "w", "wdot", "phi", "e"}, {}};
  const double t_lo = sol.t_begin(), t_hi = sol.b();
  for (int i = 0; i < a.points; ++i) {
    const double tt = i + 1 == a.points ? t_hi : t_lo + (t_hi - t_lo) * i / (a.points - 1);
    const ModelState s = sol.state(tt);
    t.rows.push_back({tt, s.w, s.wdot, s.phi, s.e});
  }
  if (!want_json(format)) return {to_csv(t)};
  Json j;
  j["p"] = a.p;
  j["n"] = a.n;
  j["lambda"] = sol.params().lambda;
  j["a"] = json_number(sol.problem().a);
  j["t0"] = sol.t0();
  j["b"] = sol.b();
  j["delta"] = sol.delta();
  j["m_max"] = sol.m_max();
  j["rows"] = to_json(t);
  return {dump(j)};
}

struct ScanArgs {
  double p = 2.0;
  double n = 2.0;
  std::string lambda;
  std::vector<std::string> a_grid;
};

Emitted run_scan(const ScanArgs& a, const std::string& format) {
  const auto rows = delta_scan(parse_list("--a-grid", a.a_grid), model_params(a.p, a.n, a.lambda));
  Table t{{"a", "delta", "m_max", "t0", "b", "status"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.a, r.delta, r.m_max, r.t0, r.b, r.status});
  return {want_json(format) ? dump(to_json(t)) : to_csv(t)};
}

struct CertifyArgs {
  double p = 2.0;
  double n = 2.0;
  double a = 1.0;
  std::string lambda;
  double epsilon = 0.0;
  double offset = 0.0;
  int grid = 1001;
};

Emitted run_certify(const CertifyArgs& a, const std::string& format, double tol_scale) {
  if (a.grid < 2) throw UsageError("--grid must be at least 2");
  if (a.epsilon < 0.0 || a.offset < 0.0) throw UsageError("--epsilon and --offset must be nonnegative");
  const ModelSolution sol = solve_model(ModelProblem(model_params(a.p, a.n, a.lambda), a.a));
  CertificateOptions o;
  o.epsilon = a.epsilon;
  o.offset = a.offset;
  o.grid_points = a.grid;
  o.ordering_tol *= tol_scale;
  o.a3_tol *= tol_scale;
  const Certificate cert = build_certificate(sol, o);
  const CertificateVerdict& v = cert.verdict();
  const int code = v.all() ? 0 : 1;

  Table t{{"t", "w", "wdot", "X", "T", "f", "eta", "beta", "y1", "y2", "kappa", "slack1", "slack2", "a3",
           "a3_scale"},
          {}};
  for (const auto& r : cert.rows())
    t.rows.push_back({r.t, r.w, r.wdot, r.X, r.T, r.f, r.eta, r.beta, r.y1, r.y2, r.kappa, r.slack1, r.slack2,
                      r.a3, r.a3_scale});
  if (!want_json(format)) {
    std::fprintf(stderr, "certificate %s\n", v.all() ? "holds" : "fails");
    return {to_csv(t), code};
  }

  Json j;
  j["p"] = a.p;
  j["n"] = a.n;
  j["a"] = a.a;
  j["lambda"] = sol.params().lambda;
  j["t0"] = sol.t0();
  j["b"] = sol.b();
  j["epsilon"] = cert.epsilon();
  j["offset"] = cert.offset();
  Json jv;
  jv["all"] = v.all();
  jv["f_finite"] = v.f_finite;
  jv["slack_positive"] = v.slack_positive;
  jv["ordering"] = v.ordering;
  jv["kappa_positive"] = v.kappa_positive;
  jv["a3_small"] = v.a3_small;
  jv["min_slack"] = json_number(v.min_slack);
  jv["worst_ordering"] = json_number(v.worst_ordering);
  jv["min_kappa"] = json_number(v.min_kappa);
  jv["worst_a3"] = json_number(v.worst_a3);
  jv["fdot_deviation"] = json_number(v.fdot_deviation);
  jv["factorization"] = json_number(v.factorization);
  jv["failure"] = v.failure;
  j["verdict"] = jv;
  if (v.f_finite) {
    const KappaReport k = kappa_check(cert);
    Json jk;
    jk["kappa_t0_ok"] = k.kappa_at_t0_ok;
    jk["kappa_t0_error"] = json_number(k.kappa_t0_error);
    jk["max_fd_deviation"] = json_number(k.max_fd_deviation);
    jk["max_reduction_deviation"] = json_number(k.max_reduction_deviation);
    jk["max_closed_form_gap"] = json_number(k.max_closed_form_gap);
    jk["rows_checked"] = k.rows_checked;
    j["kappa"] = jk;
  }
  j["rows"] = to_json(t);
  return {dump(j), code};
}

struct BochnerArgs {
  std::string field = "cubic2";
  double p = 2.0;
  std::vector<std::string> point;
  double step = 1e-3;
};

Emitted run_bochner(const BochnerArgs& a, const std::string& format) {
  const CatalogField& cf = catalog_field(a.field);
  Eigen::VectorXd x = cf.point;
  if (!a.point.empty()) {
    const auto v = parse_list("--point", a.point);
    if (static_cast<int>(v.size()) != cf.field.dim)
      throw UsageError("--point needs " + std::to_string(cf.field.dim) + " coordinates");
    x = Eigen::Map<const Eigen::VectorXd>(v.data(), cf.field.dim);
  }
  if (!(a.step > 0.0)) throw UsageError("--step must be positive");
  const BochnerTerms bt = bochner_terms(cf.field, x, a.p, a.step);
  const double lap = p_laplacian_at(cf.field, x, a.p, a.step);

  Json j;
  j["field"] = cf.name;
  j["dim"] = cf.field.dim;
  j["point"] = std::vector<double>(x.data(), x.data() + x.size());
  j["p"] = a.p;
  j["step"] = a.step;
  j["p_laplacian"] = json_number(lap);
  j["lhs"] = json_number(bt.lhs);
  j["rhs"] = json_number(bt.rhs);
  j["directional"] = json_number(bt.directional);
  j["residual"] = json_number(bt.residual);
  j["scale"] = json_number(bt.scale);
  j["relative_residual"] = json_number(bt.residual / bt.scale);
  j["est_error"] = json_number(bt.est_error);
  if (want_json(format)) return {dump(j)};
  Table t;
  std::vector<Cell> row;
  for (const auto& [k, v] : j.items()) {
    if (k == "point") continue;
    t.columns.push_back(k);
    if (v.is_string()) row.emplace_back(v.get<std::string>());
    else if (v.is_number_integer()) row.emplace_back(v.get<long long>());
    else if (v.is_null()) row.emplace_back(NAN);
    else row.emplace_back(v.get<double>());
  }
  t.rows.push_back(std::move(row));
  return {to_csv(t)};
}

struct EigenArgs {
  std::string kind = "segment";
  int N = 2000;
  double p = 2.0;
  double n = 2.0;
  double R = 1.0;
  double L = 2.0;
  double x0 = 0.0;
  double x1 = 1.0;
  std::uint64_t seed = 1;
  std::string method = "variational";
  std::string nodes_out;
};

Emitted run_eigensolve(const EigenArgs& a, const std::string& format) {
  Domain1D d;
  if (a.kind == "circle") d = Domain1D::circle(a.L, a.N);
  else if (a.kind == "segment") d = Domain1D::segment(a.x0, a.x1, a.N);
  else d = Domain1D::radial(a.R, a.n, a.N);

  EigenResult r;
  if (a.method == "shooting") {
    if (d.kind() != DomainKind::radial) throw UsageError("--method shooting needs --kind radial");
    r = solve_eigen_shooting(d, a.p);
  } else {
    VariationalOptions o;
    o.seed = a.seed;
    r = solve_eigen_variational(d, a.p, o);
  }

  if (!a.nodes_out.empty()) {
    Table nodes{{"x", "weight", "u"}, {}};
    for (int i = 0; i < d.size(); ++i) nodes.rows.push_back({d.nodes()[i], d.weights()[i], r.u.values[i]});
    std::ofstream f(a.nodes_out, std::ios::binary);
    if (!f) throw UsageError("cannot write " + a.nodes_out);
    f << to_csv(nodes);
  }

  Json j;
  j["kind"] = to_string(d.kind());
  j["N"] = a.N;
  j["p"] = a.p;
  j["n"] = d.weight_dim();
  j["diameter"] = d.diameter();
  j["method"] = to_string(r.method);
  j["seed"] = a.seed;
  j["lambda"] = json_number(r.lambda);
  j["lambda_over_p_minus_1"] = json_number(r.lambda / (a.p - 1.0));
  j["sharp_bound"] = std::pow(pi_p(PExponent(a.p)) / d.diameter(), a.p);
  j["iterations"] = r.iterations;
  j["residual"] = json_number(r.residual);
  j["p_mean"] = json_number(r.p_mean);
  j["converged"] = r.converged;
  j["normalization"] = {{"scale", json_number(r.normalization.scale)}, {"shift", json_number(r.normalization.shift)}};
  if (want_json(format)) return {dump(j), r.converged ? 0 : 1};
  Table t{{"kind", "N", "p", "n", "diameter", "method", "seed", "lambda", "lambda_over_p_minus_1", "sharp_bound",
           "iterations", "residual", "p_mean", "converged"},
          {}};
  t.rows.push_back({to_string(d.kind()), static_cast<long long>(a.N), a.p, d.weight_dim(), d.diameter(),
                    to_string(r.method), static_cast<long long>(a.seed), r.lambda, r.lambda / (a.p - 1.0),
                    j["sharp_bound"].get<double>(), static_cast<long long>(r.iterations), r.residual, r.p_mean,
                    r.converged});
  return {to_csv(t), r.converged ? 0 : 1};
}

struct BoundsArgs {
  double p = 2.0;
  double d = 1.0;
  double n = 1.0;
};

Emitted run_bounds(const BoundsArgs& a, const std::string& format) {
  Table t{{"name", "value", "applicable"}, {}};
  for (const auto& r : bounds_table(a.p, a.d, a.n)) t.rows.push_back({r.name, r.value, r.applicable});
  return {want_json(format) ? dump(to_json(t)) : to_csv(t)};
}

struct VerifyArgs {
  bool quick = false;
  std::uint64_t seed = VerifyOptions{}.seed;
};

Emitted run_verify_cmd(const VerifyArgs& a, const std::string& format, double tol_scale) {
  VerifyOptions o;
  o.quick = a.quick;
  o.seed = a.seed;
  o.tol_scale = tol_scale;
  const auto checks = run_verify(o);
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;

  if (!want_json(format)) {
    Table t{{"id", "name", "pass", "metric", "value"}, {}};
    for (const auto& c : checks)
      for (const auto& [k, v] : c.metrics) t.rows.push_back({static_cast<long long>(c.id), c.name, c.pass, k, v});
    return {to_csv(t), all ? 0 : 1};
  }
  Json j;
  j["quick"] = a.quick;
  j["seed"] = a.seed;
  j["tol_scale"] = tol_scale;
  j["pass"] = all;
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json jc;
    jc["id"] = c.id;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    Json m = Json::object();
    for (const auto& [k, v] : c.metrics) m[k] = json_number(v);
    jc["metrics"] = m;
    arr.push_back(std::move(jc));
  }
  j["checks"] = arr;
  return {dump(j), all ? 0 : 1};
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Numerical experiments on the first Neumann eigenvalue of the p-Laplacian"};
  app.require_subcommand(1);
  std::string format = "csv";
  std::string out_path;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", out_path, "Write output to this file instead of stdout");

  auto sub = [&](const char* name, const char* desc) {
    CLI::App* s = app.add_subcommand(name, desc);
    s->fallthrough();
    return s;
  };

  PtrigArgs pa;
  CLI::App* c_ptrig = sub("ptrig", "Tabulate sin_p and cos_p over one period");
  c_ptrig->add_option("--p", pa.p)->required();
  c_ptrig->add_option("--points", pa.points);

  ModelArgs ma;
  CLI::App* c_model = sub("model", "Solve the one-dimensional model and emit its trajectory");
  c_model->add_option("--p", ma.p)->required();
  c_model->add_option("--n", ma.n);
  c_model->add_option("--a", ma.a, "Left endpoint, or inf");
  c_model->add_option("--lambda", ma.lambda, "Default p - 1");
  c_model->add_option("--points", ma.points);

  ScanArgs sa;
  CLI::App* c_scan = sub("delta-scan", "Tabulate delta(a) and m(a)");
  c_scan->add_option("--p", sa.p)->required();
  c_scan->add_option("--n", sa.n);
  c_scan->add_option("--lambda", sa.lambda, "Default p - 1");
  c_scan->add_option("--a-grid", sa.a_grid, "Comma-separated left endpoints")->required()->delimiter(',');

  CertifyArgs ca;
  CLI::App* c_cert = sub("certify", "Build the comparison certificate for one model");
  c_cert->add_option("--p", ca.p)->required();
  c_cert->add_option("--n", ca.n);
  c_cert->add_option("--a", ca.a);
  c_cert->add_option("--lambda", ca.lambda, "Default p - 1");
  c_cert->add_option("--epsilon", ca.epsilon, "0 selects 1e-3 delta");
  c_cert->add_option("--offset", ca.offset, "0 selects the default");
  c_cert->add_option("--grid", ca.grid);

  BochnerArgs ba;
  CLI::App* c_boch = sub("bochner", "Evaluate the p-Bochner identity on a catalog field");
  std::vector<std::string> field_names;
  for (const auto& f : field_catalog()) field_names.push_back(f.name);
  c_boch->add_option("--field", ba.field)->check(CLI::IsMember(field_names));
  c_boch->add_option("--p", ba.p)->required();
  c_boch->add_option("--point", ba.point, "Comma-separated coordinates")->delimiter(',');
  c_boch->add_option("--step", ba.step);

  EigenArgs ea;
  CLI::App* c_eig = sub("eigensolve", "First nonzero Neumann eigenvalue on a 1D domain");
  c_eig->add_option("--kind", ea.kind)->check(CLI::IsMember({"circle", "segment", "radial"}));
  c_eig->add_option("--N", ea.N);
  c_eig->add_option("--p", ea.p)->required();
  c_eig->add_option("--n", ea.n, "Radial dimension");
  c_eig->add_option("--R", ea.R, "Radial extent");
  c_eig->add_option("--L", ea.L, "Circle length");
  c_eig->add_option("--x0", ea.x0);
  c_eig->add_option("--x1", ea.x1);
  c_eig->add_option("--seed", ea.seed);
  c_eig->add_option("--method", ea.method)->check(CLI::IsMember({"variational", "shooting"}));
  c_eig->add_option("--nodes-out", ea.nodes_out, "Write x, weight, u as CSV");

  BoundsArgs bo;
  CLI::App* c_bounds = sub("bounds", "Lower bounds for the first eigenvalue");
  c_bounds->add_option("--p", bo.p)->required();
  c_bounds->add_option("--d", bo.d)->required();
  c_bounds->add_option("--n", bo.n);

  VerifyArgs va;
  CLI::App* c_verify = sub("verify", "Run the property suite");
  c_verify->add_flag("--quick", va.quick, "Smaller meshes and sweeps");
  c_verify->add_option("--seed", va.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "pspectral: " << e.what() << "\n";
    return 2;
  }

  Emitted result;
  try {
    const double tol = tolerance_scale();
    if (c_ptrig->parsed()) result = run_ptrig(pa, format);
    else if (c_model->parsed()) result = run_model(ma, format);
    else if (c_scan->parsed()) result = run_scan(sa, format);
    else if (c_cert->parsed()) result = run_certify(ca, format, tol);
    else if (c_boch->parsed()) result = run_bochner(ba, format);
    else if (c_eig->parsed()) result = run_eigensolve(ea, format);
    else if (c_bounds->parsed()) result = run_bounds(bo, format);
    else result = run_verify_cmd(va, format, tol);
  } catch (const UsageError& e) {
    std::cerr << "pspectral: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "pspectral: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pspectral: " << e.what() << "\n";
    return 1;
  }

  if (out_path.empty()) {
    std::cout << result.text;
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "pspectral: cannot write " << out_path << "\n";
      return 2;
    }
    f << result.text;
  }
  return result.code;
}

}  // namespace pspectral
