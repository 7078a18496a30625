#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dmo/errors.hpp"

namespace dmo {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Uniform cell-centered grid on the square [-extent, extent]^2.
struct Grid {
  int n = 0;
  double extent = 0.0;
  double h = 0.0;

  Grid() = default;
  Grid(int n_, double extent_);

  std::size_t cells() const { return std::size_t(n) * std::size_t(n); }
  std::size_t index(int i, int j) const { return std::size_t(j) * n + i; }
  double coord(int k) const { return -extent + (k + 0.5) * h; }
  Point point(int i, int j) const { return {coord(i), coord(j)}; }
  bool operator==(const Grid& o) const {
    return n == o.n && extent == o.extent;
  }
};

struct Ball {
  Point center;
  double radius = 0.0;
};

enum class Rank { scalar, vector, matrix };

inline int components(Rank r) {
  switch (r) {
    case Rank::scalar: return 1;
    case Rank::vector: return 2;
    default: return 4;
  }
}

std::string rank_name(Rank r);
Rank rank_from_name(const std::string& s);

// Field values stored row-major by cell index with components interleaved.
// Matrix components are ordered (a11, a12, a21, a22).
struct GridFunction {
  Grid grid;
  Rank rank = Rank::scalar;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(const Grid& g, Rank r)
      : grid(g), rank(r), values(g.cells() * components(r), 0.0) {}

  int ncomp() const { return components(rank); }
  double& at(std::size_t cell, int c) { return values[cell * ncomp() + c]; }
  double at(std::size_t cell, int c) const { return values[cell * ncomp() + c]; }
  double& at(int i, int j, int c = 0) { return at(grid.index(i, j), c); }
  double at(int i, int j, int c = 0) const { return at(grid.index(i, j), c); }

  // Euclidean norm over components at one cell.
  double norm_at(std::size_t cell) const;
};

// Inclusive i-range of cells in row j whose centers lie inside the ball,
// or an empty range. Membership is strict: |x - center| < radius.
struct RowSpan {
  int lo = 0;
  int hi = -1;
  bool empty() const { return hi < lo; }
};
RowSpan ball_row_span(const Grid& g, const Ball& b, int j);

// Visits every cell center inside ball-intersect-domain. Throws EmptyBall for
// radius < 2h (sub-grid balls carry no oscillation information) or when no
// center qualifies.
template <class F>
void for_each_ball_cell(const Grid& g, const Ball& b, F&& fn) {
  if (b.radius < 2.0 * g.h)
    throw EmptyBall("ball radius " + std::to_string(b.radius) +
                    " below resolvable scale 2h = " + std::to_string(2.0 * g.h));
  bool any = false;
  int jlo = int((b.center.y - b.radius + g.extent) / g.h - 0.5) - 1;
  int jhi = int((b.center.y + b.radius + g.extent) / g.h - 0.5) + 1;
  if (jlo < 0) jlo = 0;
  if (jhi > g.n - 1) jhi = g.n - 1;
  for (int j = jlo; j <= jhi; ++j) {
    RowSpan s = ball_row_span(g, b, j);
    if (s.empty()) continue;
    any = true;
    for (int i = s.lo; i <= s.hi; ++i) fn(i, j);
  }
  if (!any) throw EmptyBall("no cell center inside ball");
}

std::size_t ball_cell_count(const Grid& g, const Ball& b);

// Arithmetic mean over cell centers inside the ball, one value per component.
std::vector<double> ball_average(const GridFunction& f, const Ball& b);

// (mean of |f|^p over the ball)^(1/p) with |.| the Euclidean component norm.
double lp_quasi_mean(const GridFunction& f, const Ball& b, double p);

// As above for f shifted by a constant per component.
double lp_quasi_mean_shifted(const GridFunction& f, const Ball& b, double p,
                             const std::vector<double>& shift);

// h^2 * #\{cells in region : |f| > alpha\}.
double distribution_measure(const GridFunction& f, double alpha, const Ball& region);

// Centered second-order differences inside, one-sided second-order at the
// boundary layer. The Hessian is symmetric by construction.
GridFunction finite_difference_gradient(const GridFunction& u);
GridFunction finite_difference_hessian(const GridFunction& u);

void save_binary(const GridFunction& f, const std::string& path);
GridFunction load_binary(const std::string& path);
void save_csv(const GridFunction& f, const std::string& path);
GridFunction load_csv(const std::string& path);

}  // namespace dmo
