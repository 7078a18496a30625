#pragma once

#include <string>
#include <vector>

#include "dmo/fields.hpp"
#include "dmo/grid.hpp"
#include "dmo/solver.hpp"

namespace dmo {

enum class BumpKind {
  mean_zero_vector,
  mean_zero_scalar,
  mean_zero_matrix,
  nonneg_scalar,
};

const char* bump_kind_name(BumpKind kind);
BumpKind bump_kind_from_name(const std::string& name);

// Compactly supported unit-L1 source.  Mean-zero kinds are built as a dipole
// of quartic lobes with the negative lobe rescaled so every component sums
// to zero exactly; discrete_mean records the worst component mean after
// normalization.
struct BumpSource {
  Point center{};
  double radius = 0.0;
  BumpKind kind = BumpKind::nonneg_scalar;
  double l1_norm = 0.0;
  double discrete_mean = 0.0;
  GridFunction values;
};

BumpSource make_bump(Point center, double radius, BumpKind kind,
                     const Grid& grid);

// Adapts a bump to the source rank an operator form expects: scalar bumps
// become e1-directed vector sources for the divergence form and I/sqrt(2)
// multiples for the adjoint form, preserving the unit L1 norm.
GridFunction lift_source(const BumpSource& bump, OperatorForm form);

// Distribution-function statistics of |f|: measures(alpha) = area where
// |f| > alpha and constant = sup_alpha alpha * measure / source_l1.  The sup
// is exact (computed from the sorted value multiset) whenever the grid is
// small enough; the alpha grid is logarithmic with at least 50 points and
// extends itself until the grid maximum is interior.
struct WeakTypeReport {
  std::vector<double> alphas;
  std::vector<double> measures;
  double constant = 0.0;
  double alpha_at_max = 0.0;
  double source_l1 = 1.0;
  bool exact_sup = false;
};

WeakTypeReport weak_type_statistic(const GridFunction& f, double source_l1,
                                   std::vector<double> alphas = {});

// The quantity whose level sets the weak-type statements bound: |Du| for the
// divergence form, |D^2 u| for the non-divergence form, |u| for the adjoint.
GridFunction form_quantity(const DiscreteOperator& op, const GridFunction& u);

// Solves with the bump as source and integrates the form quantity outside
// B(center, c * radius), divided by the unit source norm.  The transformed
// field (the form quantity on the whole grid) is exposed through out when
// given, for annulus decay studies.
double hormander_test(DiscreteOperator& op, const BumpSource& bump, double c,
                      GridFunction* out = nullptr, double tol = 1e-10);

struct HormanderReport {
  double c = 0.0;
  std::vector<double> ratios;
  double sup_ratio = 0.0;
};

HormanderReport hormander_sweep(DiscreteOperator& op,
                                const std::vector<Point>& centers,
                                const std::vector<double>& radii, double c,
                                BumpKind kind);

// Mass of |f| over dyadic annuli R..2R around the center, starting at
// R = r_inner and doubling while 2R <= extent.  Returns (R, mass) pairs.
std::vector<std::pair<double, double>> annulus_masses(const GridFunction& f,
                                                      Point center,
                                                      double r_inner);

struct ConcentrationRow {
  Point center{};
  double radius = 0.0;
  WeakTypeReport report;
};

// Weak-type statistics for bumps at every (center, radius), all solved
// against one cached operator factorization.  Radii must be decreasing and
// resolvable (>= 4h).
std::vector<ConcentrationRow> concentration_study(
    DiscreteOperator& op, const std::vector<double>& radii,
    const std::vector<Point>& centers, BumpKind kind);

} // namespace dmo
