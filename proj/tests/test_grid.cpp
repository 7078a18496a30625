#include <cmath>
#include <cstdio>
#include <random>

#include "dmo/errors.hpp"
#include "dmo/grid.hpp"
#include "dmo/util.hpp"
#include "doctest.h"

using namespace dmo;

namespace {

GridFunction sampled(const Grid& g, Rank rank,
                     const std::function<double(double, double, int)>& fn) {
  GridFunction f(g, rank);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      for (int c = 0; c < f.ncomp(); ++c) {
        const Point p = g.point(i, j);
        f.at(i, j, c) = fn(p.x, p.y, c);
      }
  return f;
}

} // namespace

TEST_CASE("grid geometry and indexing") {
  Grid g(16, 2.0);
  CHECK(g.h == doctest::Approx(0.25));
  CHECK(g.coord(0) == doctest::Approx(-2.0 + 0.125));
  CHECK(g.coord(15) == doctest::Approx(2.0 - 0.125));
  CHECK(g.cells() == 256);
  CHECK(g.index(3, 2) == 2 * 16 + 3);
  CHECK_THROWS_AS(Grid(4, 1.0), Error);
  CHECK_THROWS_AS(Grid(16, -1.0), Error);
}

TEST_CASE("ball cell count tracks the continuum area") {
  Grid g(256, 1.0);
  Ball b{{0.1, -0.2}, 0.5};
  const double area = double(ball_cell_count(g, b)) * g.h * g.h;
  CHECK(area == doctest::Approx(M_PI * 0.25).epsilon(0.01));
}

TEST_CASE("sub-resolution balls are rejected") {
  Grid g(64, 1.0);
  GridFunction f(g, Rank::scalar);
  CHECK_THROWS_AS(ball_average(f, Ball{{0, 0}, 0.5 * g.h}), EmptyBall);
  CHECK_THROWS_AS(lp_quasi_mean(f, Ball{{0, 0}, 1.9 * g.h}, 0.5), EmptyBall);
}

TEST_CASE("ball average of centered odd components vanishes") {
  Grid g(128, 1.0);
  GridFunction f = sampled(g, Rank::vector, [](double x, double y, int c) {
    return c == 0 ? x : x * y;
  });
  auto avg = ball_average(f, Ball{{0, 0}, 0.75});
  CHECK(std::abs(avg[0]) < 1e-13);
  CHECK(std::abs(avg[1]) < 1e-13);
}

TEST_CASE("quadrature oracles on the unit ball") {
  Grid g(512, 1.0);
  GridFunction x1 = sampled(g, Rank::scalar,
                            [](double x, double, int) { return x; });
  Ball b{{0, 0}, 1.0};

  SUBCASE("mean of |x1| equals 4 / (3 pi)") {
    CHECK(lp_quasi_mean(x1, b, 1.0) ==
          doctest::Approx(0.42441318).epsilon(0.01));
  }
  SUBCASE("quadratic mean of x1 equals r / 2") {
    GridFunction sq = sampled(g, Rank::scalar,
                              [](double x, double, int) { return x * x; });
    CHECK(lp_quasi_mean(sq, b, 1.0) == doctest::Approx(0.25).epsilon(0.01));
  }
  SUBCASE("half-exponent quasi-mean of x1") {
    CHECK(lp_quasi_mean(x1, b, 0.5) ==
          doctest::Approx(0.37235357).epsilon(0.02));
  }
  SUBCASE("scaling in the radius") {
    Ball half{{0, 0}, 0.5};
    CHECK(lp_quasi_mean(x1, half, 1.0) ==
          doctest::Approx(0.5 * 0.42441318).epsilon(0.01));
  }
}

TEST_CASE("quasi-mean properties on random fields") {
  Grid g(64, 1.0);
  Ball b{{0.05, -0.1}, 0.6};
  std::mt19937_64 rng = make_rng(11, "grid-property");
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    GridFunction f(g, Rank::vector), fg(g, Rank::vector);
    for (double& v : f.values) v = unif(rng);
    for (double& v : fg.values) v = unif(rng);
    const double p = 0.25 + 0.7 * std::abs(unif(rng));

    const double nf = lp_quasi_mean(f, b, p);
    const double ng = lp_quasi_mean(fg, b, p);
    GridFunction sum = f;
    for (std::size_t k = 0; k < sum.values.size(); ++k)
      sum.values[k] += fg.values[k];
    const double ns = lp_quasi_mean(sum, b, p);
    CHECK(ns <= std::pow(2.0, (1.0 - p) / p) * (nf + ng) * (1 + 1e-12));

    const double c = 1.0 + 2.0 * std::abs(unif(rng));
    GridFunction scaled = f;
    for (double& v : scaled.values) v *= c;
    CHECK(lp_quasi_mean(scaled, b, p) == doctest::Approx(c * nf));
  }
  CHECK_THROWS_AS(lp_quasi_mean(GridFunction(g, Rank::scalar), b, 0.0),
                  InvalidExponent);
  CHECK_THROWS_AS(lp_quasi_mean(GridFunction(g, Rank::scalar), b, 1.5),
                  InvalidExponent);
}

TEST_CASE("distribution measure layer cake") {
  Grid g(128, 1.0);
  GridFunction f = sampled(g, Rank::scalar, [](double x, double y, int) {
    return std::exp(-(x * x + y * y));
  });
  Ball region{{0, 0}, 0.9};

  double prev = 1e300;
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double m = distribution_measure(f, alpha, region);
    CHECK(m <= prev);
    prev = m;
  }

  double integral = 0.0, l1 = 0.0;
  const int steps = 4000;
  const double da = 1.0 / steps;
  for (int k = 0; k < steps; ++k)
    integral += distribution_measure(f, (k + 0.5) * da, region) * da;
  for_each_ball_cell(g, region, [&](int i, int j) {
    l1 += std::abs(f.at(i, j)) * g.h * g.h;
  });
  CHECK(integral == doctest::Approx(l1).epsilon(1e-3));
}

TEST_CASE("finite differences are exact on polynomials") {
  Grid g(64, 1.0);
  GridFunction u = sampled(g, Rank::scalar, [](double x, double y, int) {
    return 2.0 * x - 3.0 * y + 0.5;
  });
  GridFunction du = finite_difference_gradient(u);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      CHECK(du.at(i, j, 0) == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(du.at(i, j, 1) == doctest::Approx(-3.0).epsilon(1e-12));
    }

  GridFunction q = sampled(g, Rank::scalar, [](double x, double y, int) {
    return x * x + 3.0 * x * y - 2.0 * y * y;
  });
  GridFunction h = finite_difference_hessian(q);
  for (int j = 1; j < g.n - 1; ++j)
    for (int i = 1; i < g.n - 1; ++i) {
      CHECK(h.at(i, j, 0) == doctest::Approx(2.0).epsilon(1e-10));
      CHECK(h.at(i, j, 1) == doctest::Approx(3.0).epsilon(1e-10));
      CHECK(h.at(i, j, 2) == doctest::Approx(3.0).epsilon(1e-10));
      CHECK(h.at(i, j, 3) == doctest::Approx(-4.0).epsilon(1e-10));
    }
}

TEST_CASE("field io roundtrips") {
  Grid g(16, 0.5);
  GridFunction f(g, Rank::matrix);
  std::mt19937_64 rng = make_rng(3, "grid-io");
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (double& v : f.values) v = unif(rng);

  const std::string bin = "/tmp/dmo_test_field.bin";
  const std::string csv = "/tmp/dmo_test_field.csv";
  save_binary(f, bin);
  GridFunction fb = load_binary(bin);
  REQUIRE(fb.values.size() == f.values.size());
  CHECK(fb.grid == g);
  for (std::size_t k = 0; k < f.values.size(); ++k)
    CHECK(fb.values[k] == f.values[k]);

  save_csv(f, csv);
  GridFunction fc = load_csv(csv);
  REQUIRE(fc.values.size() == f.values.size());
  for (std::size_t k = 0; k < f.values.size(); ++k)
    CHECK(fc.values[k] == doctest::Approx(f.values[k]).epsilon(1e-14));

  CHECK_THROWS_AS(load_binary("/tmp/dmo_does_not_exist.bin"), IoError);
  std::remove(bin.c_str());
  std::remove(csv.c_str());
}
