#pragma once

#include <array>
#include <functional>
#include <string>

#include "dmo/grid.hpp"

namespace dmo {

// 2x2 coefficient field A(x) with its ellipticity envelope: lambda is the
// grid minimum of the smallest eigenvalue of the symmetric part, Lambda the
// grid maximum of the Frobenius norm.
struct CoefficientField {
  GridFunction values;
  double lambda = 0.0;
  double Lambda = 0.0;
  bool symmetric = true;

  std::array<double, 4> at(std::size_t cell) const {
    return {values.at(cell, 0), values.at(cell, 1), values.at(cell, 2),
            values.at(cell, 3)};
  }
  std::array<double, 4> at(int i, int j) const {
    return at(values.grid.index(i, j));
  }
};

// Computes lambda/Lambda/symmetric and rejects non-elliptic fields.
CoefficientField finalize_field(GridFunction values);

CoefficientField constant_field(const Grid& g, const std::array<double, 4>& A0);

// a_ij = delta_ij (1 + (-ln rho)^(-gamma)) with rho = max(|x|/s, r_cap) and
// s = max(1, 4 extent): the field keeps its unscaled form whenever the domain
// already sits inside the unit disc, and is rescaled only when needed to keep
// -ln rho positive.
CoefficientField log_family(const Grid& g, double gamma, double r_cap = 9.5e-7);

// Diagonal field a11 = 1 + nu (-ln rho)^(-sigma) cos(m theta), a22 = 1, whose
// measured mean oscillation tracks (-ln r)^(-sigma). angular_mode = 0
// degenerates to a radial field whose oscillation decays one power faster.
CoefficientField log_power_family(const Grid& g, double sigma, int angular_mode = 4,
                                  double nu = 0.5, double r_cap = 9.5e-7);

// Closed-form scalar with all derivatives, for manufactured solutions.
struct Analytic {
  std::function<double(double, double)> f, fx, fy, fxx, fxy, fyy;
};

Analytic analytic_trig();        // sin(pi x) sin(pi y); zero trace at extent 1
Analytic analytic_polynomial();  // x^3 - 3 x y^2, harmonic

enum class DataKind { trig, polynomial };

Analytic analytic_catalog(DataKind kind);

GridFunction sample_scalar(const Grid& g, const Analytic& a);
GridFunction sample_gradient(const Grid& g, const Analytic& a);

// rank scalar: f itself; vector: exact gradient; matrix: f * identity.
GridFunction smooth_data_field(const Grid& g, DataKind kind, Rank rank);

}  // namespace dmo
