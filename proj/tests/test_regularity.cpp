#include <cmath>
#include <random>
#include <vector>

#include "dmo/errors.hpp"
#include "dmo/fields.hpp"
#include "dmo/grid.hpp"
#include "dmo/oscillation.hpp"
#include "dmo/regularity.hpp"
#include "dmo/solver.hpp"
#include "dmo/util.hpp"
#include "doctest.h"

using namespace dmo;

namespace {

GridFunction scalar_field(const Grid& g,
                          const std::function<double(double, double)>& fn) {
  GridFunction f(g, Rank::scalar);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Point p = g.point(i, j);
      f.at(i, j) = fn(p.x, p.y);
    }
  return f;
}

} // namespace

TEST_CASE("centered excess of a constant is zero with the constant recovered") {
  Grid g(64, 1.0);
  GridFunction f(g, Rank::vector);
  for (std::size_t cell = 0; cell < g.cells(); ++cell) {
    f.at(cell, 0) = 1.5;
    f.at(cell, 1) = -2.0;
  }
  auto [phi, q] = campanato_phi(f, Ball{{0.1, 0.1}, 0.5}, 0.5);
  CHECK(phi == doctest::Approx(0.0));
  REQUIRE(q.size() == 2);
  CHECK(q[0] == doctest::Approx(1.5));
  CHECK(q[1] == doctest::Approx(-2.0));
}

TEST_CASE("centered excess of the coordinate field matches quadrature") {
  Grid g(512, 1.0);
  GridFunction f(g, Rank::vector);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) f.at(i, j, 0) = g.point(i, j).x;
  auto [phi, q] = campanato_phi(f, Ball{{0.0, 0.0}, 1.0}, 0.5);
  CHECK(std::abs(q[0]) < 1e-12);
  CHECK(std::abs(q[1]) < 1e-12);
  CHECK(phi == doctest::Approx(0.37235357).epsilon(0.02));
}

TEST_CASE("centered excess is comparable to the best shift") {
  Grid g(96, 1.0);
  Ball b{{-0.1, 0.2}, 0.55};
  std::mt19937_64 rng = make_rng(23, "campanato-comparability");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double c1 = unif(rng), c2 = unif(rng), c3 = unif(rng);
    const double w1 = 1.0 + std::abs(unif(rng)), w2 = 1.0 + std::abs(unif(rng));
    GridFunction f = scalar_field(g, [&](double x, double y) {
      return c1 * std::sin(w1 * x + c3) + c2 * std::cos(w2 * y - c3);
    });
    const double p = 0.35 + 0.6 * std::abs(unif(rng));
    auto [phi, q] = campanato_phi(f, b, p);

    double inf_grid = phi;
    for (int k = -200; k <= 200; ++k) {
      const double shift = q[0] + 3.0 * phi * double(k) / 200.0;
      inf_grid = std::min(inf_grid, lp_quasi_mean_shifted(f, b, p, {shift}));
    }
    CHECK(inf_grid <= phi * (1 + 1e-12));
    CHECK(phi <= std::pow(2.0, 1.0 / p) * inf_grid * (1 + 1e-9));
  }

  CHECK_THROWS_AS(campanato_phi(GridFunction(g, Rank::scalar),
                                Ball{{0, 0}, 0.3}, 1.5),
                  InvalidExponent);
  CHECK_THROWS_AS(campanato_phi(GridFunction(g, Rank::scalar),
                                Ball{{0, 0}, 0.5 * g.h}, 0.5),
                  EmptyBall);
}

TEST_CASE("decay curve of a linear field contracts at rate kappa") {
  Grid g(512, 1.0);
  GridFunction f = scalar_field(
      g, [](double x, double y) { return 2.0 * x - 1.0 * y + 0.3; });
  TildeParams tp(0.5);
  CampanatoCurve curve = campanato_decay(f, {0.05, -0.05}, 0.5, tp, 4, 0.5);
  REQUIRE(curve.phi.size() == 5);
  REQUIRE(curve.contraction.size() == 4);
  for (double c : curve.contraction)
    CHECK(c == doctest::Approx(0.5).epsilon(0.05));

  // the recovered centers converge to the field value at the center point
  const double at_center = 2.0 * 0.05 - 1.0 * (-0.05) + 0.3;
  CHECK(std::abs(curve.q.back()[0] - at_center) <=
        3.0 * curve.radii.back());

  CHECK_THROWS_AS(campanato_decay(f, {0.0, 0.0}, 0.5, tp, 12, 0.5),
                  ScaleUnderflow);
}

TEST_CASE("successive excess centers obey the chaining bound") {
  Grid g(256, 1.0);
  GridFunction f = scalar_field(g, [](double x, double y) {
    return std::sin(3.0 * x) * std::cos(2.0 * y) + 0.5 * x;
  });
  const double p = 0.5;
  TildeParams tp(0.5);
  CampanatoCurve curve = campanato_decay(f, {0.1, 0.0}, 0.4, tp, 3, p);
  for (std::size_t j = 0; j + 1 < curve.phi.size(); ++j) {
    const double dq = std::abs(curve.q[j + 1][0] - curve.q[j][0]);
    const double area_ratio =
        double(curve.cell_counts[j]) / double(curve.cell_counts[j + 1]);
    const double bound =
        std::pow(2.0, 1.0 / p) *
        (curve.phi[j] * std::pow(area_ratio, 1.0 / p) + curve.phi[j + 1]);
    CHECK(dq <= bound * (1 + 1e-9));
  }
}

TEST_CASE("decay constant fit recovers a planted envelope coefficient") {
  CampanatoCurve curve;
  curve.p = 0.5;
  std::vector<double> psi;
  const double planted = 0.37;
  for (int j = 0; j <= 5; ++j) {
    const double psi_j = std::pow(0.8, j);
    curve.radii.push_back(std::pow(0.5, j));
    curve.phi.push_back(std::ldexp(1.0, -j) * 2.0 + planted * psi_j);
    psi.push_back(psi_j);
  }
  // phi[0] also carries the envelope term, so the residuals see
  // phi[j] - 2^{-j} phi[0] = planted (psi_j - 2^{-j} psi_0)
  std::vector<double> effective;
  for (int j = 0; j <= 5; ++j)
    effective.push_back(psi[j] - std::ldexp(psi[0], -j));
  double num = 0.0, den = 0.0;
  for (int j = 1; j <= 5; ++j) {
    num += planted * effective[j] * psi[j];
    den += psi[j] * psi[j];
  }
  CHECK(fit_decay_constant(curve, psi) ==
        doctest::Approx(num / den).epsilon(1e-12));

  CampanatoCurve pure;
  pure.phi = {2.0, 1.0, 0.5, 0.25};
  CHECK(fit_decay_constant(pure, {1.0, 0.5, 0.25, 0.125}) ==
        doctest::Approx(0.0));
}

TEST_CASE("freezing a constant field with constant data gives zero correction") {
  Grid g(128, 1.0);
  CoefficientField field = constant_field(g, {1.2, 0.0, 0.0, 0.8});
  GridFunction data(g, Rank::vector);
  for (std::size_t cell = 0; cell < g.cells(); ++cell) {
    data.at(cell, 0) = 0.3;
    data.at(cell, 1) = -0.7;
  }
  DiscreteOperator op = assemble(OperatorForm::divergence, field, g);
  SolveReport sol = solve_divergence(op, data);

  FreezeReport rep = freezing_experiment(field, data, sol.solution,
                                         Ball{{0.0, 0.0}, 0.25}, 0.5,
                                         OperatorForm::divergence);
  CHECK(rep.osc_a == doctest::Approx(0.0));
  CHECK(rep.osc_g == doctest::Approx(0.0));
  CHECK(rep.w_quasinorm == doctest::Approx(0.0));
  CHECK(rep.ratio == doctest::Approx(0.0));

  CHECK_THROWS_AS(freezing_experiment(field, data, sol.solution,
                                      Ball{{0.0, 0.0}, 3.0 * g.h}, 0.5,
                                      OperatorForm::divergence),
                  BallTooSmall);
}

TEST_CASE("freezing corrections track the oscillation bound across scales") {
  Grid g(512, 1.0);
  CoefficientField field = log_family(g, 0.25);
  GridFunction data = smooth_data_field(g, DataKind::trig, Rank::vector);
  DiscreteOperator op = assemble(OperatorForm::divergence, field, g);
  SolveReport sol = solve_divergence(op, data);

  std::vector<double> ratios;
  for (double r : {0.125, 0.0625, 0.03125}) {
    FreezeReport rep = freezing_experiment(field, data, sol.solution,
                                           Ball{{0.1, 0.1}, r}, 0.5,
                                           OperatorForm::divergence);
    CHECK(rep.bound_rhs > 0.0);
    CHECK(rep.w_quasinorm > 0.0);
    ratios.push_back(rep.ratio);
  }
  double lo = 1e300, hi = 0.0;
  for (double r : ratios) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi / lo < 4.0);
}

TEST_CASE("modulus of continuity on exact samples") {
  Grid g(128, 1.0);
  Ball region{{0.0, 0.0}, 0.7};

  GridFunction c(g, Rank::scalar);
  for (double& v : c.values) v = 4.2;
  for (double m : modulus_of_continuity(c, region, {0.1, 0.2}))
    CHECK(m == doctest::Approx(0.0));

  GridFunction lin = scalar_field(g, [](double x, double) { return x; });
  const double r1 = 8.0 * g.h, r2 = 16.0 * g.h;
  std::vector<double> m = modulus_of_continuity(lin, region, {r1, r2});
  REQUIRE(m.size() == 2);
  CHECK(m[0] == doctest::Approx(r1));
  CHECK(m[1] == doctest::Approx(r2));
  CHECK(m[0] <= r1 * (1 + 1e-12));
  CHECK(m[1] <= r2 * (1 + 1e-12));
}
