#include <cmath>

#include "dmo/errors.hpp"
#include "dmo/fields.hpp"
#include "dmo/grid.hpp"
#include "doctest.h"

using namespace dmo;

TEST_CASE("constant field carries its matrix everywhere") {
  Grid g(32, 1.0);
  CoefficientField f = constant_field(g, {2.0, 0.5, 0.5, 3.0});
  CHECK(f.symmetric);
  CHECK(f.lambda > 1.0);
  CHECK(f.Lambda >= f.lambda);
  auto a = f.at(7, 21);
  CHECK(a[0] == 2.0);
  CHECK(a[1] == 0.5);
  CHECK(a[2] == 0.5);
  CHECK(a[3] == 3.0);
}

TEST_CASE("non-elliptic fields are rejected") {
  Grid g(16, 1.0);
  CHECK_THROWS_AS(constant_field(g, {1.0, 3.0, 3.0, 1.0}), NotElliptic);
  CHECK_THROWS_AS(constant_field(g, {0.0, 0.0, 0.0, 1.0}), NotElliptic);

  GridFunction values(g, Rank::matrix);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      values.at(i, j, 0) = 1.0;
      values.at(i, j, 3) = 1.0;
    }
  values.at(5, 5, 0) = -0.5;
  CHECK_THROWS_AS(finalize_field(std::move(values)), NotElliptic);
}

TEST_CASE("asymmetric fields are flagged") {
  Grid g(16, 1.0);
  CoefficientField f = constant_field(g, {2.0, 0.4, 0.1, 2.0});
  CHECK_FALSE(f.symmetric);
  CHECK(f.lambda > 0.0);
}

TEST_CASE("log family is a bounded diagonal perturbation of the identity") {
  Grid g(128, 1.0);
  CoefficientField f = log_family(g, 0.25);
  CHECK(f.symmetric);
  CHECK(f.lambda >= 1.0);
  for (std::size_t cell = 0; cell < g.cells(); cell += 97) {
    auto a = f.at(cell);
    CHECK(a[0] == a[3]);
    CHECK(a[1] == 0.0);
    CHECK(a[2] == 0.0);
    CHECK(a[0] > 1.0);
    CHECK(a[0] < 3.0);
  }

  // the perturbation vanishes toward the origin, so the steep part of the
  // profile (and the slowly decaying oscillation) lives at small radii
  const int mid = g.n / 2;
  CHECK(f.at(mid, mid)[0] < f.at(g.n - 1, g.n - 1)[0]);
}

TEST_CASE("log power family oscillates only in a11") {
  Grid g(128, 1.0);
  CoefficientField f = log_power_family(g, 2.0, 4, 0.5);
  CHECK(f.symmetric);
  CHECK(f.lambda >= 0.4);
  double lo = 1e300, hi = -1e300;
  for (std::size_t cell = 0; cell < g.cells(); ++cell) {
    auto a = f.at(cell);
    CHECK(a[3] == 1.0);
    CHECK(a[1] == 0.0);
    lo = std::min(lo, a[0]);
    hi = std::max(hi, a[0]);
  }
  CHECK(lo < 1.0);
  CHECK(hi > 1.0);
}

TEST_CASE("analytic catalog derivatives match difference quotients") {
  for (DataKind kind : {DataKind::trig, DataKind::polynomial}) {
    Analytic a = analytic_catalog(kind);
    const double eps = 1e-5;
    for (Point p : {Point{0.3, -0.2}, Point{-0.7, 0.55}}) {
      const double fx = (a.f(p.x + eps, p.y) - a.f(p.x - eps, p.y)) / (2 * eps);
      const double fy = (a.f(p.x, p.y + eps) - a.f(p.x, p.y - eps)) / (2 * eps);
      CHECK(a.fx(p.x, p.y) == doctest::Approx(fx).epsilon(1e-6));
      CHECK(a.fy(p.x, p.y) == doctest::Approx(fy).epsilon(1e-6));
      const double fxx =
          (a.fx(p.x + eps, p.y) - a.fx(p.x - eps, p.y)) / (2 * eps);
      const double fxy =
          (a.fx(p.x, p.y + eps) - a.fx(p.x, p.y - eps)) / (2 * eps);
      const double fyy =
          (a.fy(p.x, p.y + eps) - a.fy(p.x, p.y - eps)) / (2 * eps);
      CHECK(a.fxx(p.x, p.y) == doctest::Approx(fxx).epsilon(1e-5));
      CHECK(a.fxy(p.x, p.y) == doctest::Approx(fxy).epsilon(1e-5));
      CHECK(a.fyy(p.x, p.y) == doctest::Approx(fyy).epsilon(1e-5));
    }
  }
}

TEST_CASE("smooth data field picks the rank-appropriate payload") {
  Grid g(32, 1.0);
  Analytic a = analytic_trig();
  const Point p = g.point(10, 20);

  GridFunction s = smooth_data_field(g, DataKind::trig, Rank::scalar);
  CHECK(s.ncomp() == 1);
  CHECK(s.at(10, 20) == doctest::Approx(a.f(p.x, p.y)));

  GridFunction v = smooth_data_field(g, DataKind::trig, Rank::vector);
  CHECK(v.ncomp() == 2);
  CHECK(v.at(10, 20, 0) == doctest::Approx(a.fx(p.x, p.y)));
  CHECK(v.at(10, 20, 1) == doctest::Approx(a.fy(p.x, p.y)));

  GridFunction m = smooth_data_field(g, DataKind::trig, Rank::matrix);
  CHECK(m.ncomp() == 4);
  CHECK(m.at(10, 20, 0) == doctest::Approx(a.f(p.x, p.y)));
  CHECK(m.at(10, 20, 1) == 0.0);
  CHECK(m.at(10, 20, 2) == 0.0);
  CHECK(m.at(10, 20, 3) == doctest::Approx(a.f(p.x, p.y)));
}
