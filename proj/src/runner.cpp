#include "dmo/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dmo/errors.hpp"
#include "dmo/fields.hpp"
#include "dmo/grid.hpp"
#include "dmo/oscillation.hpp"
#include "dmo/regularity.hpp"
#include "dmo/solver.hpp"
#include "dmo/util.hpp"
#include "dmo/weaktype.hpp"
#include "json.hpp"

namespace dmo {

namespace {

using nlohmann::json;

std::string g17(double v) { return fmt_g17(v); }

// Execution-only keys are excluded so the hash identifies the
// experiment, not where or how wide it ran.
std::string hash_of_config(const Config& cfg) {
  std::string canon;
  for (const auto& [k, v] : cfg.entries()) {
    if (k == "output_dir" || k == "threads") continue;
    canon += k;
    canon += '=';
    canon += v;
    canon += '\n';
  }
  return hex64(fnv1a(canon));
}

struct Context {
  Config cfg;
  RunOptions opts;
  std::string out_dir;
  std::string hash;
  std::uint64_t seed = 1;
  json manifest;
  RunResult result;
  std::vector<std::pair<std::string, std::string>> files;

  void emit(const std::string& name, const std::string& content) {
    files.push_back({name, content});
  }
  void check(bool ok, const std::string& what) {
    manifest["checks"].push_back({{"ok", ok}, {"assertion", what}});
    if (!ok) {
      result.check_ok = false;
      result.failures.push_back(what);
    }
  }
};

class Csv {
 public:
  explicit Csv(const std::string& header) { body_ = header + "\n"; }
  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((body_ += (first ? "" : ","), body_ += cell(cells), first = false), ...);
    body_ += '\n';
  }
  const std::string& str() const { return body_; }

 private:
  static std::string cell(double v) { return g17(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::string body_;
};

const std::vector<std::string> kCommonKeys = {
    "experiment", "seed", "output_dir", "threads"};
const std::vector<std::string> kFieldKeys = {
    "field",        "field.a11", "field.a12",          "field.a21",
    "field.a22",    "field.gamma", "field.sigma",      "field.angular_mode",
    "field.nu",     "field.r_cap"};
const std::vector<std::string> kGridKeys = {"n", "extent"};

std::vector<std::string> allowed_keys(
    std::initializer_list<std::vector<std::string>> groups,
    std::initializer_list<const char*> extra) {
  std::vector<std::string> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  for (const char* e : extra) out.push_back(e);
  return out;
}

Grid build_grid(const Config& cfg, long default_n) {
  const long n = cfg.get_int("n", default_n);
  const double extent = cfg.get_double("extent", 1.0);
  if (n < 8) throw ConfigError("key 'n': grid needs n >= 8");
  if (extent <= 0) throw ConfigError("key 'extent': must be positive");
  return Grid(int(n), extent);
}

CoefficientField build_field(const Config& cfg, const Grid& g) {
  const std::string name = cfg.get_string("field", "constant");
  if (name == "constant") {
    return constant_field(g, {cfg.get_double("field.a11", 1.0),
                              cfg.get_double("field.a12", 0.0),
                              cfg.get_double("field.a21", 0.0),
                              cfg.get_double("field.a22", 1.0)});
  }
  if (name == "log_family")
    return log_family(g, cfg.get_double("field.gamma", 0.25),
                      cfg.get_double("field.r_cap", 9.5e-7));
  if (name == "log_power_family")
    return log_power_family(g, cfg.get_double("field.sigma", 2.0),
                            int(cfg.get_int("field.angular_mode", 4)),
                            cfg.get_double("field.nu", 0.5),
                            cfg.get_double("field.r_cap", 9.5e-7));
  throw ConfigError("key 'field': unknown field '" + name + "'");
}

OperatorForm build_form(const Config& cfg) {
  const std::string name = cfg.get_string("form", "divergence");
  try {
    return form_from_name(name);
  } catch (const ConfigError&) {
    throw ConfigError("key 'form': unknown operator form '" + name + "'");
  }
}

Rank source_rank(OperatorForm form) {
  switch (form) {
    case OperatorForm::nondivergence: return Rank::scalar;
    case OperatorForm::adjoint: return Rank::matrix;
    default: return Rank::vector;
  }
}

GridFunction build_data(const Config& cfg, const Grid& g, Rank rank) {
  const std::string name = cfg.get_string("data", "trig");
  DataKind kind;
  if (name == "trig") kind = DataKind::trig;
  else if (name == "polynomial") kind = DataKind::polynomial;
  else throw ConfigError("key 'data': unknown data generator '" + name + "'");
  return smooth_data_field(g, kind, rank);
}

Modulus build_modulus(const Config& cfg) {
  const std::string name = cfg.get_string("modulus", "log_power");
  if (name == "linear") return modulus_linear();
  if (name == "log_power")
    return modulus_log_power(cfg.get_double("modulus.gamma", 1.5));
  if (name == "shifted_log_sq") return modulus_shifted_log_sq();
  if (name == "constant")
    return modulus_constant(cfg.get_double("modulus.value", 1.0));
  throw ConfigError("key 'modulus': unknown modulus '" + name + "'");
}

BumpKind default_bump(OperatorForm form, bool mean_zero) {
  if (!mean_zero) return BumpKind::nonneg_scalar;
  switch (form) {
    case OperatorForm::nondivergence: return BumpKind::mean_zero_scalar;
    case OperatorForm::adjoint: return BumpKind::mean_zero_matrix;
    default: return BumpKind::mean_zero_vector;
  }
}

void run_oscillation(Context& ctx) {
  ctx.cfg.restrict_keys(allowed_keys(
      {kCommonKeys, kFieldKeys, kGridKeys},
      {"r_top", "r_bottom", "centers_mode", "stride"}));
  const Grid g = build_grid(ctx.cfg, 512);
  const CoefficientField field = build_field(ctx.cfg, g);
  const double r_top = ctx.cfg.get_double("r_top", g.extent / 4.0);
  const double r_bottom = ctx.cfg.get_double("r_bottom", 0.0);
  const std::string mode = ctx.cfg.get_string("centers_mode", "zoom");
  std::vector<Point> centers;
  if (mode == "zoom") centers = zoom_centers(g);
  else if (mode == "lattice")
    centers = lattice_centers(g, int(ctx.cfg.get_int("stride", 4)));
  else
    throw ConfigError("key 'centers_mode': expected zoom or lattice");

  Timer timer;
  FieldScanner scanner(field.values);
  OscillationProfile prof = profile_from_field(scanner, centers, r_top,
                                               r_bottom);
  classify_dini(prof);
  ctx.manifest["stage_seconds"]["scan"] = timer.seconds();

  Csv csv("r,omega,config");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < prof.size(); ++k) {
    csv.row(prof.radii[k], prof.omega[k], ctx.hash);
    if (prof.omega[k] > 0) {
      lx.push_back(std::log(-std::log(prof.radii[k])));
      ly.push_back(std::log(prof.omega[k]));
    }
  }
  ctx.emit("oscillation.csv", csv.str());

  double slope = 0.0;
  if (lx.size() >= 2) slope = fit_line(lx, ly).slope;
  ctx.manifest["metrics"]["fitted_slope"] = slope;
  ctx.manifest["metrics"]["samples"] = prof.size();
  ctx.manifest["metrics"]["dini_flag"] = dini_flag_name(prof.flag);
  if (ctx.opts.check) {
    ctx.check(prof.size() >= 4, "profile carries at least 4 radii");
    ctx.check(slope < 0.0, "mean oscillation decays toward small radii");
  }
}

void run_dini(Context& ctx) {
  ctx.cfg.restrict_keys(allowed_keys(
      {kCommonKeys},
      {"modulus", "modulus.gamma", "modulus.value", "kappa", "radii", "r_top",
       "x_max"}));
  const Modulus m = build_modulus(ctx.cfg);
  const double kappa = ctx.cfg.get_double("kappa", 0.25);
  const TildeParams tp(kappa);
  const double r_top = ctx.cfg.get_double("r_top", 0.5);
  const double x_max = ctx.cfg.get_double("x_max", 240.0);
  const std::vector<double> radii = ctx.cfg.get_list(
      "radii", {std::pow(2.0, -4), std::pow(2.0, -8), std::pow(2.0, -12)});

  OscillationProfile prof = profile_from_modulus(m, r_top, x_max);
  classify_dini(prof);

  Csv csv("modulus,r,integral,divergent,tail_exponent,dyadic_ratio,config");
  bool all_finite = true;
  for (double r : radii) {
    DiniResult di = dini_integral(prof, r);
    DyadicSumResult dy = dyadic_sum_check(prof, kappa, r);
    csv.row(m.name, r, di.value, int(di.divergent), di.tail_exponent,
            dy.ratio, ctx.hash);
    all_finite = all_finite && std::isfinite(di.value);
  }
  ctx.emit("dini.csv", csv.str());

  Csv pcsv("r,omega,omega_tilde,config");
  for (std::size_t k = 0; k < prof.size(); ++k)
    pcsv.row(prof.radii[k], prof.omega[k],
             tilde_transform(prof, tp, prof.radii[k]), ctx.hash);
  ctx.emit("profile.csv", pcsv.str());

  MonotoneConstants mc = almost_monotone_constants(prof, kappa);
  ctx.manifest["metrics"]["flag"] = dini_flag_name(prof.flag);
  ctx.manifest["metrics"]["monotone_c1"] = mc.c1;
  ctx.manifest["metrics"]["monotone_c2"] = mc.c2;
  if (ctx.opts.check) {
    ctx.check(all_finite, "dini integrals evaluate to finite values");
    ctx.check(mc.ok, "modulus is almost monotone on sampled windows");
  }
}

void run_campanato(Context& ctx) {
  ctx.cfg.restrict_keys(allowed_keys(
      {kCommonKeys, kFieldKeys, kGridKeys},
      {"data", "form", "center", "r0", "kappa", "levels", "p", "tol"}));
  const Grid g = build_grid(ctx.cfg, 512);
  const CoefficientField field = build_field(ctx.cfg, g);
  const OperatorForm form = build_form(ctx.cfg);
  const GridFunction data = build_data(ctx.cfg, g, source_rank(form));
  const double p = ctx.cfg.get_double("p", 0.5);
  const double kappa = ctx.cfg.get_double("kappa", 0.25);
  const TildeParams tp(kappa);
  const double r0 = ctx.cfg.get_double("r0", 0.5);
  const double tol = ctx.cfg.get_double("tol", 1e-10);
  const Point center = ctx.cfg.get_points("center", {{0.0, 0.0}}).at(0);
  long J = ctx.cfg.get_int("levels", -1);
  if (J < 0) {
    J = 0;
    while (r0 * std::pow(kappa, double(J + 1)) >= 2.0 * g.h) ++J;
  }

  Timer timer;
  DiscreteOperator op = assemble(form, field, g);
  SolveReport sol = solve_form(op, data, tol);
  ctx.manifest["stage_seconds"]["solve"] = timer.seconds();
  GridFunction f = form_quantity(op, sol.solution);

  Timer decay_timer;
  CampanatoCurve curve =
      campanato_decay(f, center, r0, tp, int(J), p);
  ctx.manifest["stage_seconds"]["decay"] = decay_timer.seconds();

  std::string header = "j,r,phi";
  const std::size_t qn = curve.q.empty() ? 0 : curve.q[0].size();
  for (std::size_t c = 0; c < qn; ++c) header += ",q" + std::to_string(c);
  header += ",contraction,config";
  Csv csv(header);
  for (std::size_t j = 0; j < curve.phi.size(); ++j) {
    std::string row = std::to_string(j) + "," + g17(curve.radii[j]) + "," +
                      g17(curve.phi[j]);
    for (std::size_t c = 0; c < qn; ++c) row += "," + g17(curve.q[j][c]);
    row += ",";
    row += j + 1 < curve.phi.size() ? g17(curve.contraction[j]) : "nan";
    row += "," + ctx.hash;
    csv.row(row);
  }
  ctx.emit("campanato.csv", csv.str());

  // Envelope fit against the transformed oscillation moduli of A and data.
  Timer fit_timer;
  FieldScanner scan_a(field.values);
  FieldScanner scan_g(data);
  std::vector<Point> centers = lattice_centers(g, 8);
  OscillationProfile prof_a =
      profile_from_field(scan_a, centers, r0, 0.0);
  OscillationProfile prof_g =
      profile_from_field(scan_g, centers, r0, 0.0);
  std::vector<double> psi(curve.phi.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double r = curve.radii[j];
    psi[j] = tilde_transform(prof_a, tp, r) + tilde_transform(prof_g, tp, r);
  }
  const double C = fit_decay_constant(curve, psi);
  ctx.manifest["stage_seconds"]["envelope_fit"] = fit_timer.seconds();
  ctx.manifest["metrics"]["fit_C"] = C;
  ctx.manifest["metrics"]["phi_first"] = curve.phi.front();
  ctx.manifest["metrics"]["phi_last"] = curve.phi.back();
  ctx.manifest["metrics"]["solver_method"] = sol.method;

  if (ctx.opts.check) {
    bool nonneg = true;
    for (double v : curve.phi) nonneg = nonneg && v >= 0 && std::isfinite(v);
    ctx.check(nonneg, "phi values finite and nonnegative");
    ctx.check(curve.phi.back() < curve.phi.front() || curve.phi.front() == 0,
              "excess decays from first to last level");
  }
}

void run_freezing(Context& ctx) {
  ctx.cfg.restrict_keys(allowed_keys(
      {kCommonKeys, kFieldKeys, kGridKeys},
      {"data", "form", "centers", "radii", "p", "tol"}));
  const Grid g = build_grid(ctx.cfg, 512);
  const CoefficientField field = build_field(ctx.cfg, g);
  const OperatorForm form = build_form(ctx.cfg);
  const GridFunction data = build_data(ctx.cfg, g, source_rank(form));
  const double p = ctx.cfg.get_double("p", 0.5);
  const double tol = ctx.cfg.get_double("tol", 1e-10);
  const std::vector<Point> centers =
      ctx.cfg.get_points("centers", {{0.0, 0.0}});
  const std::vector<double> radii = ctx.cfg.get_list(
      "radii", {std::pow(2.0, -3), std::pow(2.0, -4), std::pow(2.0, -5)});

  Timer timer;
  DiscreteOperator op = assemble(form, field, g);
  SolveReport sol = solve_form(op, data, tol);
  ctx.manifest["stage_seconds"]["global_solve"] = timer.seconds();

  Csv csv(
      "center_x,center_y,radius,w_quasinorm,bound_rhs,ratio,osc_a,osc_g,"
      "du_sup,config");
  bool finite = true;
  double rmin = 1e300, rmax = 0.0;
  Timer freeze_timer;
  for (const Point& c : centers) {
    for (double r : radii) {
      FreezeReport rep =
          freezing_experiment(field, data, sol.solution, {c, r}, p, form);
      csv.row(c.x, c.y, r, rep.w_quasinorm, rep.bound_rhs, rep.ratio,
              rep.osc_a, rep.osc_g, rep.du_sup, ctx.hash);
      finite = finite && std::isfinite(rep.ratio) && rep.w_quasinorm >= 0;
      if (rep.ratio > 0) {
        rmin = std::min(rmin, rep.ratio);
        rmax = std::max(rmax, rep.ratio);
      }
    }
  }
  ctx.manifest["stage_seconds"]["freezing"] = freeze_timer.seconds();
  ctx.emit("freezing.csv", csv.str());
  ctx.manifest["metrics"]["ratio_min"] = rmin <= rmax ? rmin : 0.0;
  ctx.manifest["metrics"]["ratio_max"] = rmax;
  if (ctx.opts.check)
    ctx.check(finite, "freezing reports finite and nonnegative");
}

void run_weaktype(Context& ctx) {
  ctx.cfg.restrict_keys(allowed_keys(
      {kCommonKeys, kFieldKeys, kGridKeys},
      {"form", "radii", "centers", "bump", "tol"}));
  const Grid g = build_grid(ctx.cfg, 512);
  const CoefficientField field = build_field(ctx.cfg, g);
  const OperatorForm form = build_form(ctx.cfg);
  const std::vector<Point> centers =
      ctx.cfg.get_points("centers", {{0.0, 0.0}});
  const std::vector<double> radii = ctx.cfg.get_list(
      "radii", {std::pow(2.0, -2), std::pow(2.0, -3), std::pow(2.0, -4),
                std::pow(2.0, -5)});
  const BumpKind kind =
      ctx.cfg.has("bump") ? bump_kind_from_name(ctx.cfg.get_string("bump"))
                          : default_bump(form, false);

  Timer timer;
  DiscreteOperator op = assemble(form, field, g);
  std::vector<ConcentrationRow> rows =
      concentration_study(op, radii, centers, kind);
  ctx.manifest["stage_seconds"]["study"] = timer.seconds();

  Csv longcsv("form,field,center_x,center_y,radius,alpha,measure,config");
  Csv sumcsv(
      "form,field,center_x,center_y,radius,constant,alpha_at_max,exact,"
      "config");
  const std::string fname = ctx.cfg.get_string("field", "constant");
  bool ok = true;
  double cmin = 1e300, cmax = 0.0;
  for (const ConcentrationRow& row : rows) {
    for (std::size_t k = 0; k < row.report.alphas.size(); ++k)
      longcsv.row(form_name(form), fname, row.center.x, row.center.y,
                  row.radius, row.report.alphas[k], row.report.measures[k],
                  ctx.hash);
    sumcsv.row(form_name(form), fname, row.center.x, row.center.y, row.radius,
               row.report.constant, row.report.alpha_at_max,
               int(row.report.exact_sup), ctx.hash);
    ok = ok && std::isfinite(row.report.constant) && row.report.constant > 0;
    cmin = std::min(cmin, row.report.constant);
    cmax = std::max(cmax, row.report.constant);
    for (std::size_t k = 0; k + 1 < row.report.measures.size(); ++k)
      ok = ok && row.report.measures[k] >= row.report.measures[k + 1];
  }
  ctx.emit("weaktype_long.csv", longcsv.str());
  ctx.emit("weaktype_summary.csv", sumcsv.str());
  ctx.manifest["metrics"]["constant_min"] = cmin <= cmax ? cmin : 0.0;
  ctx.manifest["metrics"]["constant_max"] = cmax;
  if (ctx.opts.check)
    ctx.check(ok, "weak-type constants finite, positive, measures monotone");
}

void run_hormander(Context& ctx) {
  ctx.cfg.restrict_keys(allowed_keys(
      {kCommonKeys, kFieldKeys, kGridKeys},
      {"form", "c", "radii", "centers", "bump", "tol"}));
  const Grid g = build_grid(ctx.cfg, 512);
  const CoefficientField field = build_field(ctx.cfg, g);
  const OperatorForm form = build_form(ctx.cfg);
  const bool constant_field_p =
      ctx.cfg.get_string("field", "constant") == "constant";
  const double c = ctx.cfg.get_double("c", constant_field_p ? 2.0 : 8.0);
  const double tol = ctx.cfg.get_double("tol", 1e-10);
  std::vector<Point> centers;
  if (ctx.cfg.has("centers")) {
    centers = ctx.cfg.get_points("centers");
  } else {
    for (double y : {-0.2, 0.0, 0.2})
      for (double x : {-0.2, 0.0, 0.2}) centers.push_back({x, y});
  }
  const std::vector<double> radii = ctx.cfg.get_list(
      "radii", {std::pow(2.0, -4), std::pow(2.0, -5), std::pow(2.0, -6)});
  const BumpKind kind =
      ctx.cfg.has("bump") ? bump_kind_from_name(ctx.cfg.get_string("bump"))
                          : default_bump(form, true);

  Timer timer;
  DiscreteOperator op = assemble(form, field, g);
  Csv rcsv("center_x,center_y,radius,ratio,config");
  Csv acsv("center_x,center_y,radius,annulus_r,mass,config");
  double sup_ratio = 0.0;
  for (const Point& center : centers) {
    for (double r : radii) {
      BumpSource bump = make_bump(center, r, kind, g);
      GridFunction q;
      const double ratio = hormander_test(op, bump, c, &q, tol);
      sup_ratio = std::max(sup_ratio, ratio);
      rcsv.row(center.x, center.y, r, ratio, ctx.hash);
      for (const auto& [R, mass] : annulus_masses(q, center, c * r))
        acsv.row(center.x, center.y, r, R, mass, ctx.hash);
    }
  }
  ctx.manifest["stage_seconds"]["sweep"] = timer.seconds();
  ctx.emit("hormander_ratios.csv", rcsv.str());
  ctx.emit("hormander_annuli.csv", acsv.str());
  ctx.manifest["metrics"]["sup_ratio"] = sup_ratio;
  ctx.manifest["metrics"]["c"] = c;
  if (ctx.opts.check)
    ctx.check(std::isfinite(sup_ratio) && sup_ratio > 0,
              "localization ratios finite and positive");
}

void run_convergence(Context& ctx) {
  ctx.cfg.restrict_keys(allowed_keys(
      {kCommonKeys, kFieldKeys},
      {"extent", "forms", "n_values", "tol"}));
  const double extent = ctx.cfg.get_double("extent", 1.0);
  const double tol = ctx.cfg.get_double("tol", 1e-10);
  const std::string field_name = ctx.cfg.get_string("field", "constant");
  if (field_name != "constant")
    throw ConfigError(
        "key 'field': convergence study needs the constant field "
        "(manufactured solutions freeze the coefficients)");
  std::vector<double> n_list =
      ctx.cfg.get_list("n_values", {64, 128, 256, 512});
  std::vector<OperatorForm> forms;
  {
    std::istringstream in(
        ctx.cfg.get_string("forms", "divergence,nondivergence"));
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item == "adjoint")
        throw ConfigError(
            "key 'forms': the adjoint form has no manufactured solution");
      forms.push_back(form_from_name(item));
    }
  }

  const Analytic base = analytic_trig();
  const double s = extent;
  const Analytic target{
      [&base, s](double x, double y) { return base.f(x / s, y / s); },
      [&base, s](double x, double y) { return base.fx(x / s, y / s) / s; },
      [&base, s](double x, double y) { return base.fy(x / s, y / s) / s; },
      [&base, s](double x, double y) { return base.fxx(x / s, y / s) / (s * s); },
      [&base, s](double x, double y) { return base.fxy(x / s, y / s) / (s * s); },
      [&base, s](double x, double y) { return base.fyy(x / s, y / s) / (s * s); }};
  Csv csv("form,n,h,l2_error,order,config");
  double worst_order = 1e300;
  Timer timer;
  for (OperatorForm form : forms) {
    double prev_err = 0.0, prev_h = 0.0;
    for (double nd : n_list) {
      const Grid g(int(nd), extent);
      const CoefficientField field = build_field(ctx.cfg, g);
      const std::array<double, 4> a = field.at(0, 0);
      GridFunction src(g, source_rank(form));
      for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
          const Point pt = g.point(i, j);
          if (form == OperatorForm::nondivergence) {
            src.at(i, j) = a[0] * target.fxx(pt.x, pt.y) +
                           (a[1] + a[2]) * target.fxy(pt.x, pt.y) +
                           a[3] * target.fyy(pt.x, pt.y);
          } else {
            const double fx = target.fx(pt.x, pt.y);
            const double fy = target.fy(pt.x, pt.y);
            src.at(i, j, 0) = a[0] * fx + a[1] * fy;
            src.at(i, j, 1) = a[2] * fx + a[3] * fy;
          }
        }
      }
      DiscreteOperator op = assemble(form, field, g);
      SolveReport sol = solve_form(op, src, tol);
      double err2 = 0.0;
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
          const Point pt = g.point(i, j);
          const double d = sol.solution.at(i, j) - target.f(pt.x, pt.y);
          err2 += d * d;
        }
      const double l2 = std::sqrt(err2 * g.h * g.h);
      double order = 0.0;
      if (prev_err > 0)
        order = std::log(prev_err / l2) / std::log(g.h > 0 ? prev_h / g.h : 2);
      if (prev_err > 0) worst_order = std::min(worst_order, order);
      csv.row(form_name(form), g.n, g.h, l2, order, ctx.hash);
      prev_err = l2;
      prev_h = g.h;
    }
  }
  ctx.manifest["stage_seconds"]["sweep"] = timer.seconds();
  ctx.emit("convergence.csv", csv.str());
  ctx.manifest["metrics"]["worst_order"] =
      worst_order == 1e300 ? 0.0 : worst_order;
  if (ctx.opts.check)
    ctx.check(worst_order >= 1.8, "observed convergence order at least 1.8");
}

} // namespace

RunResult run_experiment(const Config& cfg_in, const RunOptions& opts) {
  Context ctx;
  ctx.cfg = cfg_in;
  ctx.opts = opts;
  if (opts.seed >= 0) ctx.cfg.set("seed", std::to_string(opts.seed));
  ctx.seed = std::uint64_t(ctx.cfg.get_int("seed", 1));
  if (opts.threads >= 0)
    ctx.cfg.set("threads", std::to_string(opts.threads));
  thread_budget() = int(ctx.cfg.get_int("threads", 0));
  ctx.out_dir = !opts.output_dir.empty()
                    ? opts.output_dir
                    : ctx.cfg.get_string("output_dir", ".");
  ctx.hash = hash_of_config(ctx.cfg);
  ctx.manifest["config_hash"] = ctx.hash;
  ctx.manifest["seed"] = ctx.seed;
  ctx.manifest["checks"] = json::array();
  ctx.manifest["versions"] = {
      {"dmolab", "0.1.0"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)}};
  for (const auto& [k, v] : ctx.cfg.entries()) ctx.manifest["config"][k] = v;

  Timer total;
  const std::string experiment = ctx.cfg.get_string("experiment");
  if (experiment == "oscillation") run_oscillation(ctx);
  else if (experiment == "dini") run_dini(ctx);
  else if (experiment == "campanato") run_campanato(ctx);
  else if (experiment == "freezing") run_freezing(ctx);
  else if (experiment == "weaktype") run_weaktype(ctx);
  else if (experiment == "hormander") run_hormander(ctx);
  else if (experiment == "convergence") run_convergence(ctx);
  else
    throw ConfigError("key 'experiment': unknown experiment '" + experiment +
                      "'");
  ctx.manifest["wall_seconds"] = total.seconds();
  {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    ctx.manifest["finished_at"] = buf;
  }

  namespace fs = std::filesystem;
  fs::create_directories(ctx.out_dir);
  for (const auto& [name, content] : ctx.files) {
    const std::string path = ctx.out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    ctx.result.outputs.push_back(path);
  }
  for (const std::string& path : ctx.result.outputs)
    ctx.manifest["outputs"].push_back(path);
  {
    const std::string path = ctx.out_dir + "/manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << ctx.manifest.dump(2) << "\n";
    ctx.result.outputs.push_back(path);
  }
  return ctx.result;
}

std::string list_catalog() {
  return
      "experiments:\n"
      "  oscillation\n"
      "  dini\n"
      "  campanato\n"
      "  freezing\n"
      "  weaktype\n"
      "  hormander\n"
      "  convergence\n"
      "fields:\n"
      "  constant\n"
      "    field.a11: double: 1\n"
      "    field.a12: double: 0\n"
      "    field.a21: double: 0\n"
      "    field.a22: double: 1\n"
      "  log_family\n"
      "    field.gamma: double: 0.25\n"
      "    field.r_cap: double: 9.5e-07\n"
      "  log_power_family\n"
      "    field.sigma: double: 2\n"
      "    field.angular_mode: int: 4\n"
      "    field.nu: double: 0.5\n"
      "    field.r_cap: double: 9.5e-07\n"
      "data:\n"
      "  trig\n"
      "  polynomial\n"
      "moduli:\n"
      "  linear\n"
      "  log_power\n"
      "    modulus.gamma: double: 1.5\n"
      "  shifted_log_sq\n"
      "  constant\n"
      "    modulus.value: double: 1\n"
      "common:\n"
      "  n: int: 512\n"
      "  extent: double: 1\n"
      "  form: string: divergence\n"
      "  kappa: double: 0.25\n"
      "  p: double: 0.5\n"
      "  tol: double: 1e-10\n"
      "  seed: int: 1\n"
      "  threads: int: 0\n"
      "  output_dir: string: .\n";
}

} // namespace dmo
