#include "dmo/fields.hpp"

#include <cmath>

namespace dmo {

CoefficientField finalize_field(GridFunction values) {
  if (values.rank != Rank::matrix)
    throw Error("coefficient field requires a matrix-valued grid function");
  CoefficientField f;
  f.lambda = 1e300;
  f.Lambda = 0.0;
  f.symmetric = true;
  const std::size_t cells = values.grid.cells();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const double a11 = values.at(cell, 0), a12 = values.at(cell, 1);
    const double a21 = values.at(cell, 2), a22 = values.at(cell, 3);
    const double s12 = 0.5 * (a12 + a21);
    const double mean = 0.5 * (a11 + a22);
    const double disc = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + s12 * s12);
    f.lambda = std::min(f.lambda, mean - disc);
    f.Lambda = std::max(f.Lambda,
                        std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22));
    if (a12 != a21) f.symmetric = false;
  }
  if (!(f.lambda > 0.0))
    throw NotElliptic("coefficient field has minimum symmetric-part eigenvalue " +
                      std::to_string(f.lambda));
  f.values = std::move(values);
  return f;
}

CoefficientField constant_field(const Grid& g, const std::array<double, 4>& A0) {
  GridFunction v(g, Rank::matrix);
  const std::size_t cells = g.cells();
  for (std::size_t cell = 0; cell < cells; ++cell)
    for (int c = 0; c < 4; ++c) v.at(cell, c) = A0[c];
  return finalize_field(std::move(v));
}

CoefficientField log_family(const Grid& g, double gamma, double r_cap) {
  if (!(gamma > 0.0))
    throw InvalidExponent("log_family: gamma must be positive, got " + std::to_string(gamma));
  if (!(r_cap > 0.0) || r_cap >= g.extent / 4.0)
    throw Error("log_family: r_cap must lie in (0, extent/4)");
  const double s = std::max(1.0, 4.0 * g.extent);
  GridFunction v(g, Rank::matrix);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Point x = g.point(i, j);
      const double rho = std::max(std::hypot(x.x, x.y) / s, r_cap);
      const double a = 1.0 + std::pow(-std::log(rho), -gamma);
      const std::size_t cell = g.index(i, j);
      v.at(cell, 0) = a;
      v.at(cell, 3) = a;
    }
  return finalize_field(std::move(v));
}

CoefficientField log_power_family(const Grid& g, double sigma, int angular_mode,
                                  double nu, double r_cap) {
  if (!(sigma > 0.0))
    throw InvalidExponent("log_power_family: sigma must be positive, got " +
                          std::to_string(sigma));
  const double s = std::max(1.0, 4.0 * g.extent);
  GridFunction v(g, Rank::matrix);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Point x = g.point(i, j);
      const double rho = std::max(std::hypot(x.x, x.y) / s, r_cap);
      const double theta = std::atan2(x.y, x.x);
      const double bump = nu * std::pow(-std::log(rho), -sigma) *
                          std::cos(double(angular_mode) * theta);
      const std::size_t cell = g.index(i, j);
      v.at(cell, 0) = 1.0 + bump;
      v.at(cell, 3) = 1.0;
    }
  return finalize_field(std::move(v));
}

Analytic analytic_trig() {
  const double pi = 3.14159265358979323846;
  Analytic a;
  a.f = [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  a.fx = [pi](double x, double y) { return pi * std::cos(pi * x) * std::sin(pi * y); };
  a.fy = [pi](double x, double y) { return pi * std::sin(pi * x) * std::cos(pi * y); };
  a.fxx = [pi](double x, double y) { return -pi * pi * std::sin(pi * x) * std::sin(pi * y); };
  a.fxy = [pi](double x, double y) { return pi * pi * std::cos(pi * x) * std::cos(pi * y); };
  a.fyy = [pi](double x, double y) { return -pi * pi * std::sin(pi * x) * std::sin(pi * y); };
  return a;
}

Analytic analytic_polynomial() {
  Analytic a;
  a.f = [](double x, double y) { return x * x * x - 3.0 * x * y * y; };
  a.fx = [](double x, double y) { return 3.0 * x * x - 3.0 * y * y; };
  a.fy = [](double x, double y) { return -6.0 * x * y; };
  a.fxx = [](double x, double) { return 6.0 * x; };
  a.fxy = [](double, double y) { return -6.0 * y; };
  a.fyy = [](double x, double) { return -6.0 * x; };
  return a;
}

Analytic analytic_catalog(DataKind kind) {
  return kind == DataKind::trig ? analytic_trig() : analytic_polynomial();
}

GridFunction sample_scalar(const Grid& g, const Analytic& a) {
  GridFunction out(g, Rank::scalar);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Point x = g.point(i, j);
      out.at(i, j) = a.f(x.x, x.y);
    }
  return out;
}

GridFunction sample_gradient(const Grid& g, const Analytic& a) {
  GridFunction out(g, Rank::vector);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Point x = g.point(i, j);
      out.at(i, j, 0) = a.fx(x.x, x.y);
      out.at(i, j, 1) = a.fy(x.x, x.y);
    }
  return out;
}

GridFunction smooth_data_field(const Grid& g, DataKind kind, Rank rank) {
  const Analytic a = analytic_catalog(kind);
  if (rank == Rank::scalar) return sample_scalar(g, a);
  if (rank == Rank::vector) return sample_gradient(g, a);
  GridFunction out(g, Rank::matrix);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      const Point x = g.point(i, j);
      const double v = a.f(x.x, x.y);
      out.at(i, j, 0) = v;
      out.at(i, j, 3) = v;
    }
  return out;
}

}  // namespace dmo
