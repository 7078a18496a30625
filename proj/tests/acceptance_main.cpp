// Acceptance gate for the laboratory: eleven numbered end-to-end checks, one
// per release criterion, each printing a single [PASS]/[FAIL] line with the
// measured quantities and the elapsed time against its runtime budget.
//
//   dmo_acceptance                  runs every criterion
//   dmo_acceptance --criterion N    runs one
//
// Exit code 0 iff every executed criterion passes within budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dmo/errors.hpp"
#include "dmo/fields.hpp"
#include "dmo/grid.hpp"
#include "dmo/oscillation.hpp"
#include "dmo/regularity.hpp"
#include "dmo/solver.hpp"
#include "dmo/util.hpp"
#include "dmo/weaktype.hpp"

namespace {

using namespace dmo;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

double band_of(const std::vector<double>& v) {
  double lo = v.front(), hi = v.front();
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

bool all_finite_positive(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x) || x <= 0.0) return false;
  return !v.empty();
}

// ---------------------------------------------------------------------------
// 1. Oscillation exponent of the logarithmic family.

Outcome criterion_oscillation_exponent() {
  const Grid g(4096, 1.0 / 16);
  const CoefficientField field = log_family(g, 0.25);
  const FieldScanner scanner(field.values);
  const std::vector<Point> centers = zoom_centers(g);
  const OscillationProfile prof = profile_from_field(
      scanner, centers, std::pow(2.0, -4), std::pow(2.0, -14));

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < prof.size(); ++i)
    if (prof.omega[i] > 0.0) {
      lx.push_back(std::log(prof.xs[i]));
      ly.push_back(std::log(prof.omega[i]));
    }
  const LineFit fit = fit_line(lx, ly);

  Outcome out;
  out.pass = lx.size() >= 20 && std::abs(fit.slope + 1.25) <= 0.15;
  out.detail = strf("slope %.4f vs -1.25 +/- 0.15 over %zu radii, n=4096",
                    fit.slope, lx.size());
  return out;
}

// ---------------------------------------------------------------------------
// 2. Quadrature oracle: integral_0^r omega/t dt for omega = (-ln t)^{-3/2}.

Outcome criterion_dini_integral_oracle() {
  const Modulus m = modulus_log_power(1.5);
  const OscillationProfile p = profile_from_modulus(m, 1e-2, 200.0);
  const DiniResult d = dini_integral(p, 1e-2);
  const double exact = 2.0 / std::sqrt(std::log(100.0));

  Outcome out;
  out.pass = !d.divergent && std::abs(d.value - exact) <= 0.02 * exact;
  out.detail = strf("integral %.6f vs closed form %.6f (rel err %.2e)",
                    d.value, exact, std::abs(d.value - exact) / exact);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Dyadic sums track the Dini integral uniformly in the anchor radius.

Outcome criterion_dyadic_sum_band() {
  const std::vector<Modulus> moduli = {modulus_linear(), modulus_log_power(1.5),
                                       modulus_shifted_log_sq()};
  const std::vector<double> radii = {std::pow(2.0, -4), std::pow(2.0, -8),
                                     std::pow(2.0, -12)};
  std::vector<double> ratios;
  std::string names;
  for (const Modulus& m : moduli) {
    const OscillationProfile p = profile_from_modulus(m, 0.5, 300.0);
    for (double r : radii) {
      const DyadicSumResult res = dyadic_sum_check(p, 0.5, r);
      if (res.divergent || !std::isfinite(res.ratio) || res.ratio <= 0.0) {
        Outcome bad;
        bad.detail = strf("%s at r=%.3g came back divergent", m.name.c_str(), r);
        return bad;
      }
      ratios.push_back(res.ratio);
    }
    names += (names.empty() ? "" : ", ") + m.name;
  }
  const double band = band_of(ratios);

  Outcome out;
  out.pass = band <= 10.0;
  out.detail = strf("ratio band %.3f (max %.3f, min %.3f) over {%s} x 3 radii",
                    band, *std::max_element(ratios.begin(), ratios.end()),
                    *std::min_element(ratios.begin(), ratios.end()),
                    names.c_str());
  return out;
}

// ---------------------------------------------------------------------------
// 4. The transformed borderline modulus keeps its logarithmic margin.

Outcome criterion_tilde_integral_band() {
  std::vector<double> r_values;
  for (int k = 2; k <= 20; ++k) r_values.push_back(std::pow(2.0, -k));

  const TildeBandReport rep = tilde_band_check(TildeParams(0.5), r_values);
  const TildeBandReport quarter = tilde_band_check(TildeParams(0.25), r_values);
  const TildeBandReport control =
      tilde_band_check(modulus_log_power(1.0), TildeParams(0.5), r_values);

  Outcome out;
  out.pass = !rep.divergent && std::isfinite(rep.sup) && rep.band < 2.0 &&
             control.divergent;
  out.detail = strf(
      "band %.4f (<2), sup %.4f at kappa=1/2; kappa=1/4 band %.4f; "
      "(-ln t)^{-1} control divergent: %s",
      rep.band, rep.sup, quarter.band, control.divergent ? "yes" : "no");
  return out;
}

// ---------------------------------------------------------------------------
// 5. Manufactured-solution convergence for both primal discretizations.

Outcome criterion_solver_convergence() {
  const Analytic exact = analytic_trig();
  const std::vector<int> sizes = {64, 128, 256, 512};
  double worst = std::numeric_limits<double>::infinity();
  std::string per_form;

  for (OperatorForm form :
       {OperatorForm::divergence, OperatorForm::nondivergence}) {
    std::vector<double> errs;
    for (int n : sizes) {
      const Grid g(n, 1.0);
      const CoefficientField field = constant_field(g, {2.0, 0.5, 0.5, 1.5});
      DiscreteOperator op = assemble(form, field, g);
      GridFunction src(g, form == OperatorForm::nondivergence ? Rank::scalar
                                                              : Rank::vector);
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
          const Point pt = g.point(i, j);
          const auto a = field.at(i, j);
          if (form == OperatorForm::nondivergence) {
            src.at(i, j) = a[0] * exact.fxx(pt.x, pt.y) +
                           (a[1] + a[2]) * exact.fxy(pt.x, pt.y) +
                           a[3] * exact.fyy(pt.x, pt.y);
          } else {
            src.at(i, j, 0) =
                a[0] * exact.fx(pt.x, pt.y) + a[1] * exact.fy(pt.x, pt.y);
            src.at(i, j, 1) =
                a[2] * exact.fx(pt.x, pt.y) + a[3] * exact.fy(pt.x, pt.y);
          }
        }
      const SolveReport rep = solve_form(op, src);
      double sq = 0.0;
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
          const Point pt = g.point(i, j);
          const double d = rep.solution.at(i, j) - exact.f(pt.x, pt.y);
          sq += d * d;
        }
      errs.push_back(std::sqrt(sq) * g.h);
    }
    double form_worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < errs.size(); ++k)
      form_worst = std::min(form_worst, std::log2(errs[k - 1] / errs[k]));
    worst = std::min(worst, form_worst);
    per_form += strf("%s%s %.3f", per_form.empty() ? "" : ", ",
                     form_name(form), form_worst);
  }

  Outcome out;
  out.pass = worst >= 1.8;
  out.detail = strf("min L2 order %s (threshold 1.8), n in {64..512}",
                    per_form.c_str());
  return out;
}

// ---------------------------------------------------------------------------
// 6. Exact discrete duality between the adjoint solve and the primal stencil.

Outcome criterion_adjoint_identity() {
  const Grid g(128, 1.0);
  const CoefficientField field = log_family(g, 0.25);
  const GridFunction G = smooth_data_field(g, DataKind::trig, Rank::matrix);

  DiscreteOperator adj = assemble(OperatorForm::adjoint, field, g);
  DiscreteOperator primal = assemble(OperatorForm::nondivergence, field, g);
  const SolveReport rep = solve_adjoint(adj, G);

  std::mt19937_64 rng = make_rng(1, "acceptance-adjoint");
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    double c[3][3];
    for (auto& row : c)
      for (double& v : row) v = coeff(rng);
    GridFunction v(g, Rank::scalar);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Point pt = g.point(i, j);
        double s = 0.0;
        for (int k = 1; k <= 3; ++k)
          for (int l = 1; l <= 3; ++l)
            s += c[k - 1][l - 1] *
                 std::sin(0.5 * k * M_PI * (pt.x + g.extent) / g.extent) *
                 std::sin(0.5 * l * M_PI * (pt.y + g.extent) / g.extent);
        v.at(i, j) = s;
      }

    const Eigen::VectorXd vvec = Eigen::Map<const Eigen::VectorXd>(
        v.values.data(), Eigen::Index(v.values.size()));
    const Eigen::VectorXd Lv = apply_matrix(primal, vvec);
    const GridFunction Hv = stencil_hessian(g, v);
    double lhs = 0.0;
    for (std::size_t c2 = 0; c2 < g.cells(); ++c2)
      lhs += rep.solution.values[c2] * Lv[Eigen::Index(c2)];
    double rhs = 0.0;
    for (std::size_t c2 = 0; c2 < g.cells(); ++c2)
      for (int comp = 0; comp < 4; ++comp)
        rhs += G.values[c2 * 4 + comp] * Hv.values[c2 * 4 + comp];
    const double rel = std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
    worst = std::max(worst, rel);
  }

  Outcome out;
  out.pass = worst < 1e-10;
  out.detail =
      strf("worst relative defect %.2e over 20 smooth zero-trace probes, "
           "n=128 (threshold 1e-10)",
           worst);
  return out;
}

// ---------------------------------------------------------------------------
// 7. Weak-type constants stay in a band as the bump radius shrinks.

Outcome criterion_weak11_uniformity() {
  const Grid g(1024, 1.0);
  const CoefficientField field = constant_field(g, {1.0, 0.0, 0.0, 1.0});
  std::vector<double> radii;
  for (int k = 2; k <= 6; ++k) radii.push_back(std::pow(2.0, -k));
  const std::vector<Point> centers = {{0.0, 0.0}};

  std::string detail;
  bool pass = true;
  for (OperatorForm form : {OperatorForm::divergence,
                            OperatorForm::nondivergence,
                            OperatorForm::adjoint}) {
    DiscreteOperator op = assemble(form, field, g);
    const std::vector<ConcentrationRow> rows =
        concentration_study(op, radii, centers, BumpKind::nonneg_scalar);
    std::vector<double> constants;
    for (const ConcentrationRow& row : rows)
      constants.push_back(row.report.constant);
    if (!all_finite_positive(constants)) {
      return {false, strf("%s produced a degenerate weak-type constant",
                          form_name(form))};
    }
    const double band = band_of(constants);
    const double limit = form == OperatorForm::divergence ? 2.0 : 3.0;
    pass = pass && band < limit;
    detail += strf("%s%s band %.3f (<%g)", detail.empty() ? "" : ", ",
                   form_name(form), band, limit);
  }

  Outcome out;
  out.pass = pass;
  out.detail = detail + ", radii 2^-2..2^-6, n=1024";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Mean-zero sources: mass localizes and annulus decay follows r/R.

Outcome criterion_hormander_localization() {
  const Grid g(512, 1.0);
  const CoefficientField field = constant_field(g, {1.0, 0.0, 0.0, 1.0});
  DiscreteOperator op = assemble(OperatorForm::divergence, field, g);
  const double c = 2.0;

  std::vector<Point> centers;
  for (double cx : {-0.2, 0.0, 0.2})
    for (double cy : {-0.2, 0.0, 0.2}) centers.push_back({cx, cy});
  const std::vector<double> radii = {std::pow(2.0, -4), std::pow(2.0, -5),
                                     std::pow(2.0, -6)};

  std::vector<double> ratios;
  double slope_lo = 0.0, slope_hi = -10.0, env_worst = 0.0;
  for (const Point& center : centers)
    for (double r : radii) {
      const BumpSource bump =
          make_bump(center, r, BumpKind::mean_zero_vector, g);
      GridFunction q;
      ratios.push_back(hormander_test(op, bump, c, &q));
      if (center.x == 0.0 && center.y == 0.0) {
        const auto masses = annulus_masses(q, center, c * r);
        std::vector<double> lr, lm;
        for (const auto& [R, mass] : masses)
          if (mass > 0.0) {
            lr.push_back(std::log(R));
            lm.push_back(std::log(mass));
          }
        if (lr.size() < 2) return {false, "too few annuli with mass"};
        const LineFit fit = fit_line(lr, lm);
        slope_lo = std::min(slope_lo, fit.slope);
        slope_hi = std::max(slope_hi, fit.slope);
        for (std::size_t i = 0; i < lr.size(); ++i) {
          const double resid =
              std::abs(lm[i] - (fit.intercept + fit.slope * lr[i]));
          env_worst = std::max(env_worst, std::exp(resid));
        }
      }
    }

  if (!all_finite_positive(ratios))
    return {false, "a localization ratio came back non-finite"};
  const double band = band_of(ratios);

  Outcome out;
  out.pass = band < 2.0 && slope_lo >= -2.0 && slope_hi <= -0.5 &&
             env_worst <= 2.0;
  out.detail = strf(
      "ratio band %.3f (<2) over 9 centers x 3 radii; annulus slopes "
      "[%.2f, %.2f] vs -1, envelope factor %.2f (<=2)",
      band, slope_lo, slope_hi, env_worst);
  return out;
}

// ---------------------------------------------------------------------------
// 9. Uniform constants for the rough angular family in divergence form.

Outcome criterion_concentration_log_power() {
  const Grid g(512, 1.0);
  const CoefficientField field = log_power_family(g, 2.0);
  DiscreteOperator op = assemble(OperatorForm::divergence, field, g);

  std::vector<double> radii;
  for (int k = 2; k <= 5; ++k) radii.push_back(std::pow(2.0, -k));
  const std::vector<ConcentrationRow> rows = concentration_study(
      op, radii, {{0.0, 0.0}}, BumpKind::nonneg_scalar);

  std::vector<double> constants;
  for (const ConcentrationRow& row : rows)
    constants.push_back(row.report.constant);
  if (!all_finite_positive(constants))
    return {false, "a weak-type constant came back non-finite"};
  const double band = band_of(constants);

  Outcome out;
  out.pass = band < 3.0;
  out.detail = strf(
      "constant band %.3f (<3) over radii 2^-2..2^-5, sigma=2 angular "
      "family, n=512",
      band);
  return out;
}

// ---------------------------------------------------------------------------
// 10. Multiscale excess decay and a mesh-stable envelope constant.

Outcome criterion_campanato_decay() {
  const TildeParams tp(0.25);
  const double p = 0.5;
  const double r0 = 0.5;
  const Point center{0.25, 0.25};

  double fitC[2] = {0.0, 0.0};
  double ratioJ[2] = {0.0, 0.0};
  double phi0[2] = {0.0, 0.0};
  int J_used[2] = {0, 0};
  const int sizes[2] = {512, 1024};

  for (int s = 0; s < 2; ++s) {
    const Grid g(sizes[s], 1.0);
    const CoefficientField field = log_family(g, 0.25);
    const GridFunction data = smooth_data_field(g, DataKind::trig, Rank::vector);
    DiscreteOperator op = assemble(OperatorForm::divergence, field, g);
    const SolveReport rep = solve_form(op, data);
    const GridFunction f = form_quantity(op, rep.solution);

    int J = 0;
    while (r0 * std::pow(tp.kappa, J + 1) >= 2.0 * g.h) ++J;
    const CampanatoCurve curve = campanato_decay(f, center, r0, tp, J, p);

    const FieldScanner sa(field.values);
    const FieldScanner sg(data);
    const std::vector<Point> cs = lattice_centers(g, g.n / 64);
    const double r_bot = r0 * std::pow(tp.kappa, J);
    const OscillationProfile pa =
        profile_from_field(sa, cs, r0, r_bot, tp.kappa);
    const OscillationProfile pg =
        profile_from_field(sg, cs, r0, r_bot, tp.kappa);
    std::vector<double> psi;
    for (double r : curve.radii)
      psi.push_back(tilde_transform(pa, tp, r) + tilde_transform(pg, tp, r));

    fitC[s] = fit_decay_constant(curve, psi);
    ratioJ[s] = curve.phi.back() / curve.phi.front();
    phi0[s] = curve.phi.front();
    J_used[s] = J;
  }

  const double c_lo = std::min(fitC[0], fitC[1]);
  const double c_hi = std::max(fitC[0], fitC[1]);
  const bool both_positive = c_lo > 0.0;
  const bool stable = both_positive ? (c_hi <= 2.0 * c_lo)
                                    : std::abs(fitC[1] - fitC[0]) <=
                                          0.1 * std::max(phi0[0], phi0[1]);

  Outcome out;
  out.pass = ratioJ[0] < 0.1 && ratioJ[1] < 0.1 && stable;
  out.detail = strf(
      "phi_J/phi_0 = %.4f / %.4f at J=%d (<0.1), fitted C %.4g -> %.4g "
      "under n doubling (%s)",
      ratioJ[0], ratioJ[1], J_used[1], fitC[0], fitC[1],
      stable ? "stable" : "unstable");
  return out;
}

// ---------------------------------------------------------------------------
// 11. Quasinorm property suites.

Outcome criterion_quasinorm_properties() {
  const Grid g(64, 1.0);
  const Ball ball{{0.1, -0.05}, 0.6};
  std::mt19937_64 rng = make_rng(5, "acceptance-properties");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> pexp(0.3, 0.95);

  double worst_hom = 0.0;
  bool triangle_ok = true;
  for (int trial = 0; trial < 10; ++trial) {
    const double p = pexp(rng);
    GridFunction f(g, Rank::vector), q(g, Rank::vector);
    for (double& v : f.values) v = unif(rng);
    for (double& v : q.values) v = unif(rng);

    const double c = 0.5 + 4.0 * std::abs(unif(rng));
    GridFunction cf = f;
    for (double& v : cf.values) v *= c;
    const double nf = lp_quasi_mean(f, ball, p);
    worst_hom = std::max(
        worst_hom, std::abs(lp_quasi_mean(cf, ball, p) - c * nf) / (c * nf));

    GridFunction sum = f;
    for (std::size_t i = 0; i < sum.values.size(); ++i)
      sum.values[i] += q.values[i];
    const double lhs = lp_quasi_mean(sum, ball, p);
    const double rhs = std::pow(2.0, (1.0 - p) / p) *
                       (nf + lp_quasi_mean(q, ball, p));
    triangle_ok = triangle_ok && lhs <= rhs * (1.0 + 1e-12);
  }

  double comp_worst = 1.0;
  bool comp_ok = true;
  for (int trial = 0; trial < 10; ++trial) {
    const double p = pexp(rng);
    const double w1 = 1.0 + 2.0 * std::abs(unif(rng));
    const double w2 = 1.0 + 2.0 * std::abs(unif(rng));
    const double c1 = unif(rng), c2 = unif(rng), c3 = unif(rng);
    GridFunction f(g, Rank::scalar);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Point pt = g.point(i, j);
        f.at(i, j) = c1 * std::sin(w1 * pt.x + c3) + c2 * std::cos(w2 * pt.y - c3);
      }
    const auto [phi, qbar] = campanato_phi(f, ball, p);
    double inf_grid = std::numeric_limits<double>::infinity();
    for (int k = -200; k <= 200; ++k) {
      const double shift = qbar[0] + 3.0 * phi * k / 200.0;
      inf_grid = std::min(inf_grid,
                          lp_quasi_mean_shifted(f, ball, p, {shift}));
    }
    comp_ok = comp_ok && inf_grid <= phi * (1.0 + 1e-9) &&
              phi <= std::pow(2.0, 1.0 / p) * inf_grid * (1.0 + 1e-9);
    if (inf_grid > 0.0) comp_worst = std::max(comp_worst, phi / inf_grid);
  }

  GridFunction f(g, Rank::scalar);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Point pt = g.point(i, j);
      f.at(i, j) = std::exp(-3.0 * (pt.x * pt.x + pt.y * pt.y));
    }
  std::vector<double> vals;
  for_each_ball_cell(g, ball, [&](int i, int j) {
    vals.push_back(std::abs(f.at(i, j)));
  });
  std::sort(vals.begin(), vals.end());
  double meas_worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double alpha = (k + 0.5) / 200.0 * vals.back();
    const double exact =
        double(vals.end() -
               std::upper_bound(vals.begin(), vals.end(), alpha)) *
        g.h * g.h;
    meas_worst = std::max(
        meas_worst, std::abs(distribution_measure(f, alpha, ball) - exact));
  }
  const double pcake = 0.5;
  double lhs_cake = 0.0;
  for (double v : vals) lhs_cake += std::pow(v, pcake) * g.h * g.h;
  double rhs_cake = vals.size() * g.h * g.h * std::pow(vals[0], pcake);
  for (std::size_t i = 1; i < vals.size(); ++i)
    rhs_cake += double(vals.size() - i) * g.h * g.h *
                (std::pow(vals[i], pcake) - std::pow(vals[i - 1], pcake));
  const bool cake_ok = meas_worst <= 1e-12 &&
                       std::abs(lhs_cake - rhs_cake) <= 1e-10 * lhs_cake;

  Outcome out;
  out.pass = worst_hom <= 1e-12 && triangle_ok && comp_ok && cake_ok;
  out.detail = strf(
      "homogeneity defect %.1e, quasi-triangle %s, comparability factor "
      "%.3f (cap 2^{1/p}), layer-cake defect %.1e",
      worst_hom, triangle_ok ? "ok" : "violated", comp_worst, meas_worst);
  return out;
}

// ---------------------------------------------------------------------------

struct Entry {
  int num;
  const char* slug;
  double budget_s;
  std::function<Outcome()> fn;
};

const Entry kEntries[] = {
    {1, "oscillation_exponent", 120.0, criterion_oscillation_exponent},
    {2, "dini_integral_oracle", 1.0, criterion_dini_integral_oracle},
    {3, "dyadic_sum_band", 1.0, criterion_dyadic_sum_band},
    {4, "tilde_integral_band", 1.0, criterion_tilde_integral_band},
    {5, "solver_convergence", 120.0, criterion_solver_convergence},
    {6, "adjoint_identity", 30.0, criterion_adjoint_identity},
    {7, "weak11_uniformity", 600.0, criterion_weak11_uniformity},
    {8, "hormander_localization", 300.0, criterion_hormander_localization},
    {9, "concentration_log_power", 600.0, criterion_concentration_log_power},
    {10, "campanato_decay", 300.0, criterion_campanato_decay},
    {11, "quasinorm_properties", 30.0, criterion_quasinorm_properties},
};

}  // namespace

int main(int argc, char** argv) {
  int which = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: dmo_acceptance [--criterion N]\n");
      return 2;
    }
  }
  if (which < 0 || which > 11) {
    std::fprintf(stderr, "criterion number must be 1..11\n");
    return 2;
  }

  bool all_ok = true;
  bool ran_any = false;
  for (const Entry& e : kEntries) {
    if (which != 0 && e.num != which) continue;
    ran_any = true;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail = strf("exception: %s", ex.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool in_budget = secs <= e.budget_s;
    const bool ok = out.pass && in_budget;
    std::printf("[%s] criterion %d %s: %s%s (%.1f s, budget %.0f s)\n",
                ok ? "PASS" : "FAIL", e.num, e.slug, out.detail.c_str(),
                in_budget ? "" : " [over budget]", secs, e.budget_s);
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  if (!ran_any) {
    std::fprintf(stderr, "no such criterion\n");
    return 2;
  }
  return all_ok ? 0 : 1;
}
