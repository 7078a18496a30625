#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "dmo/fields.hpp"
#include "dmo/grid.hpp"

namespace dmo {

using SparseMat = Eigen::SparseMatrix<double>;

enum class OperatorForm { divergence, nondivergence, adjoint, constant };

const char* form_name(OperatorForm form);
OperatorForm form_from_name(const std::string& name);

// Cached factorizations so repeated solves against one operator pay for
// assembly and factorization once.  The adjoint form shares the LU of the
// non-divergence matrix and solves the transposed system through it.
struct SolverCache;

// Discrete elliptic operator on a Grid.
//
// divergence / constant:
//   Bilinear Galerkin discretization of u -> div(A grad u) on the cell-corner
//   node mesh with a zero Dirichlet ring.  Coefficients are frozen at cell
//   centers, element integrals are exact for that freezing, and the matrix is
//   SPD whenever the field is symmetric.  Unknowns are the (n-1)^2 interior
//   corner nodes.  The constant form additionally requires a spatially
//   constant field and exists so call sites can state that intent and get the
//   cheap assembly path.
//
// nondivergence:
//   Cell-centered 9-point discretization of u -> sum_kl a_kl D_kl u.  Every
//   one of the n^2 cells carries a PDE row; the zero boundary condition on
//   the wall (half a cell outside the outermost centers) enters through ghost
//   elimination that is exact for quadratics vanishing on the wall.
//
// adjoint:
//   Transpose of the nondivergence matrix for the same field, so that
//   <u, L v> = <rhs, v> holds exactly in exact arithmetic.
struct DiscreteOperator {
  OperatorForm form = OperatorForm::divergence;
  Grid grid{8, 1.0};
  CoefficientField field;
  SparseMat matrix;
  bool spd = false;
  std::shared_ptr<SolverCache> cache;

  Eigen::Index dofs() const { return matrix.rows(); }
};

struct SolveReport {
  GridFunction solution;      // always exported at cell centers
  double residual_norm = 0.0; // relative algebraic residual |Mx-b|/|b|
  int iterations = 0;
  double wall_time = 0.0;
  std::string method;
};

DiscreteOperator assemble(OperatorForm form, const CoefficientField& field,
                          const Grid& grid);

// Right sides: divergence takes a vector field g (equation div(A grad u) =
// div g), nondivergence takes a scalar g, adjoint takes a matrix field G
// (functional v -> sum_cells tr(G D^2 v)).
SolveReport solve_divergence(DiscreteOperator& op, const GridFunction& g,
                             double tol = 1e-10);
SolveReport solve_nondivergence(DiscreteOperator& op, const GridFunction& g,
                                double tol = 1e-10);
SolveReport solve_adjoint(DiscreteOperator& op, const GridFunction& g,
                          double tol = 1e-10);

// Dispatches to the solve matching op.form; the source rank must match the
// form (vector, scalar, matrix for divergence/constant, nondivergence,
// adjoint).
SolveReport solve_form(DiscreteOperator& op, const GridFunction& source,
                       double tol = 1e-10);

// Shared low-level entry: solves M x = rhs (or M^T x = rhs for the adjoint
// form) with the operator's cached factorization, building it on first use.
Eigen::VectorXd linear_solve(DiscreteOperator& op, const Eigen::VectorXd& rhs,
                             double tol, int* iterations, std::string* method);

// Applies the operator matrix to cell values (nondivergence/adjoint dof
// layout).  Used by identity and maximum-principle checks.
Eigen::VectorXd apply_matrix(const DiscreteOperator& op,
                             const Eigen::VectorXd& u);

// Per-cell stencil derivatives matching the nondivergence discretization,
// ghost elimination included: returns a matrix-rank function with components
// (D11, D12, D12, D22) of u.  This is the exact discrete Hessian appearing in
// the adjoint pairing, as opposed to finite_difference_hessian which uses
// one-sided boundary formulas and knows nothing about boundary data.
GridFunction stencil_hessian(const Grid& grid, const GridFunction& u);

// Divergence-form solve restricted to the cells of a ball, zero boundary
// data on the rim.  The right side is an element-wise vector field F frozen
// at cell centers (equation div(A0 grad w) = div F on the ball).  Returns
// cell-centered w extended by zero outside the ball.  A0 is a constant
// 2x2 coefficient (row-major a11,a12,a21,a22).
GridFunction solve_on_ball(const Grid& grid, const Ball& ball,
                           const std::array<double, 4>& A0,
                           const GridFunction& F, double tol = 1e-10);

// True when off-diagonal matrix entries are nonnegative nowhere, i.e. the
// negated matrix has the sign pattern of an M-matrix (positive diagonal,
// nonpositive off-diagonal after negation).
bool m_matrix_sign_pattern(const SparseMat& m);

void save_matrix_coo(const SparseMat& m, const std::string& path);
void save_report_json(const SolveReport& report, const DiscreteOperator& op,
                      const std::string& path);

} // namespace dmo
