#include "dmo/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <set>
#include <unordered_map>

#include "dmo/errors.hpp"
#include "dmo/util.hpp"
#include "json.hpp"

namespace dmo {

namespace {

// Exact integrals of bilinear shape-function derivative products over one
// square element.  Local node order: (0,0), (1,0), (0,1), (1,1).  The h
// factors cancel in two dimensions, so these are dimensionless.
constexpr double kXX[4][4] = {
    {1.0 / 3, -1.0 / 3, 1.0 / 6, -1.0 / 6},
    {-1.0 / 3, 1.0 / 3, -1.0 / 6, 1.0 / 6},
    {1.0 / 6, -1.0 / 6, 1.0 / 3, -1.0 / 3},
    {-1.0 / 6, 1.0 / 6, -1.0 / 3, 1.0 / 3},
};
constexpr double kYY[4][4] = {
    {1.0 / 3, 1.0 / 6, -1.0 / 3, -1.0 / 6},
    {1.0 / 6, 1.0 / 3, -1.0 / 6, -1.0 / 3},
    {-1.0 / 3, -1.0 / 6, 1.0 / 3, 1.0 / 6},
    {-1.0 / 6, -1.0 / 3, 1.0 / 6, 1.0 / 3},
};
// Integral of dx(phi_i) dy(phi_j) equals s_i t_j / 4 where s and t are the
// signs of the node offsets in x and y.
constexpr double kSx[4] = {-1.0, 1.0, -1.0, 1.0};
constexpr double kTy[4] = {-1.0, -1.0, 1.0, 1.0};

double element_entry(const std::array<double, 4>& a, int i, int j) {
  return a[0] * kXX[i][j] + a[3] * kYY[i][j] +
         a[1] * kSx[i] * kTy[j] * 0.25 + a[2] * kSx[j] * kTy[i] * 0.25;
}

// Emits the matrix row of a11*Dxx + a22*Dyy + (a12+a21)*Dxy at cell (i, j)
// as (ii, jj, weight) triples.  Out-of-range references are ghost cells half
// a step beyond the wall; the zero boundary value on the wall eliminates
// them through u_ghost = (u_inner - 6 u_border) / 3, which reproduces any
// quadratic that vanishes on the wall.  Corner ghosts resolve by applying
// the rule once per direction.
template <class Emit>
void scatter_ghost(const Grid& g, int ii, int jj, double w, Emit&& emit) {
  if (ii < 0) {
    scatter_ghost(g, 1, jj, w / 3.0, emit);
    scatter_ghost(g, 0, jj, -2.0 * w, emit);
  } else if (ii >= g.n) {
    scatter_ghost(g, g.n - 2, jj, w / 3.0, emit);
    scatter_ghost(g, g.n - 1, jj, -2.0 * w, emit);
  } else if (jj < 0) {
    scatter_ghost(g, ii, 1, w / 3.0, emit);
    scatter_ghost(g, ii, 0, -2.0 * w, emit);
  } else if (jj >= g.n) {
    scatter_ghost(g, ii, g.n - 2, w / 3.0, emit);
    scatter_ghost(g, ii, g.n - 1, -2.0 * w, emit);
  } else {
    emit(ii, jj, w);
  }
}

template <class Emit>
void nondiv_row(const Grid& g, int i, int j, const std::array<double, 4>& a,
                Emit&& emit) {
  const double inv_h2 = 1.0 / (g.h * g.h);
  const double cxx = a[0] * inv_h2;
  const double cyy = a[3] * inv_h2;
  const double cxy = (a[1] + a[2]) * inv_h2 * 0.25;
  scatter_ghost(g, i - 1, j, cxx, emit);
  scatter_ghost(g, i + 1, j, cxx, emit);
  scatter_ghost(g, i, j - 1, cyy, emit);
  scatter_ghost(g, i, j + 1, cyy, emit);
  emit(i, j, -2.0 * (cxx + cyy));
  if (cxy != 0.0) {
    scatter_ghost(g, i + 1, j + 1, cxy, emit);
    scatter_ghost(g, i - 1, j - 1, cxy, emit);
    scatter_ghost(g, i + 1, j - 1, -cxy, emit);
    scatter_ghost(g, i - 1, j + 1, -cxy, emit);
  }
}

SparseMat assemble_divergence_matrix(const CoefficientField& field,
                                     const Grid& g) {
  const int n = g.n;
  const int m = n - 1;
  auto dof = [&](int I, int J) -> int {
    if (I < 1 || I > m || J < 1 || J > m) return -1;
    return (J - 1) * m + (I - 1);
  };
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(16) * g.cells());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::array<double, 4> a = field.at(i, j);
      int nodes[4];
      for (int loc = 0; loc < 4; ++loc)
        nodes[loc] = dof(i + (loc & 1), j + (loc >> 1));
      for (int r = 0; r < 4; ++r) {
        if (nodes[r] < 0) continue;
        for (int c = 0; c < 4; ++c) {
          if (nodes[c] < 0) continue;
          trips.emplace_back(nodes[r], nodes[c], element_entry(a, r, c));
        }
      }
    }
  }
  SparseMat mat(m * m, m * m);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return mat;
}

SparseMat assemble_nondivergence_matrix(const CoefficientField& field,
                                        const Grid& g) {
  const int n = g.n;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(std::size_t(12) * g.cells());
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int row = int(g.index(i, j));
      nondiv_row(g, i, j, field.at(i, j),
                 [&](int ii, int jj, double w) {
                   trips.emplace_back(row, int(g.index(ii, jj)), w);
                 });
    }
  }
  SparseMat mat(n * n, n * n);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  return mat;
}

void check_grid_match(const CoefficientField& field, const Grid& g) {
  if (!(field.values.grid == g))
    throw Error("coefficient field grid does not match operator grid");
}

constexpr Eigen::Index kDirectCap = 1400000;
constexpr double kResidualAccept = 1e-6;

} // namespace

struct SolverCache {
  std::mutex mu;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMat>> ldlt;
  std::unique_ptr<Eigen::SparseLU<SparseMat>> lu;
  using CG = Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper,
                                      Eigen::IncompleteCholesky<double>>;
  using BiCG = Eigen::BiCGSTAB<SparseMat, Eigen::IncompleteLUT<double>>;
  std::unique_ptr<CG> cg;
  std::unique_ptr<BiCG> bicg;
  const double* bound_values = nullptr;
};

const char* form_name(OperatorForm form) {
  switch (form) {
    case OperatorForm::divergence: return "divergence";
    case OperatorForm::nondivergence: return "nondivergence";
    case OperatorForm::adjoint: return "adjoint";
    case OperatorForm::constant: return "constant";
  }
  return "unknown";
}

OperatorForm form_from_name(const std::string& name) {
  if (name == "divergence") return OperatorForm::divergence;
  if (name == "nondivergence") return OperatorForm::nondivergence;
  if (name == "adjoint") return OperatorForm::adjoint;
  if (name == "constant") return OperatorForm::constant;
  throw ConfigError("unknown operator form: " + name);
}

DiscreteOperator assemble(OperatorForm form, const CoefficientField& field,
                          const Grid& grid) {
  check_grid_match(field, grid);
  DiscreteOperator op;
  op.form = form;
  op.grid = grid;
  op.field = field;
  op.cache = std::make_shared<SolverCache>();
  switch (form) {
    case OperatorForm::constant: {
      const std::array<double, 4> a0 = field.at(0, 0);
      for (std::size_t c = 0; c < grid.cells(); ++c)
        if (field.at(c) != a0)
          throw Error("constant form requires a spatially constant field");
      [[fallthrough]];
    }
    case OperatorForm::divergence:
      op.matrix = assemble_divergence_matrix(field, grid);
      op.spd = field.symmetric;
      break;
    case OperatorForm::nondivergence:
      if (!field.symmetric)
        throw NotSymmetric("nondivergence form requires a12 == a21");
      op.matrix = assemble_nondivergence_matrix(field, grid);
      op.spd = false;
      break;
    case OperatorForm::adjoint: {
      if (!field.symmetric)
        throw NotSymmetric("adjoint form requires a12 == a21");
      SparseMat primal = assemble_nondivergence_matrix(field, grid);
      op.matrix = primal.transpose();
      op.matrix.makeCompressed();
      op.spd = false;
      break;
    }
  }
  return op;
}

Eigen::VectorXd linear_solve(DiscreteOperator& op, const Eigen::VectorXd& rhs,
                             double tol, int* iterations,
                             std::string* method) {
  if (!op.cache) op.cache = std::make_shared<SolverCache>();
  SolverCache& c = *op.cache;
  std::lock_guard<std::mutex> lock(c.mu);
  if (c.bound_values != op.matrix.valuePtr()) {
    c.ldlt.reset();
    c.lu.reset();
    c.cg.reset();
    c.bicg.reset();
    c.bound_values = op.matrix.valuePtr();
  }

  auto run_cg = [&]() -> Eigen::VectorXd {
    if (!c.cg) {
      c.cg = std::make_unique<SolverCache::CG>();
      c.cg->setMaxIterations(20000);
      c.cg->compute(op.matrix);
    }
    c.cg->setTolerance(tol);
    Eigen::VectorXd x = c.cg->solve(rhs);
    if (iterations) *iterations = int(c.cg->iterations());
    if (method) *method = "cg+ic";
    return x;
  };
  auto run_bicg = [&]() -> Eigen::VectorXd {
    if (!c.bicg) {
      c.bicg = std::make_unique<SolverCache::BiCG>();
      c.bicg->preconditioner().setDroptol(1e-6);
      c.bicg->preconditioner().setFillfactor(24);
      c.bicg->setMaxIterations(20000);
      c.bicg->compute(op.matrix);
    }
    c.bicg->setTolerance(tol);
    Eigen::VectorXd x = c.bicg->solve(rhs);
    if (iterations) *iterations = int(c.bicg->iterations());
    if (method) *method = "bicgstab+ilut";
    return x;
  };

  if (op.spd) {
    if (op.dofs() <= kDirectCap) {
      if (!c.ldlt) {
        c.ldlt = std::make_unique<Eigen::SimplicialLDLT<SparseMat>>();
        c.ldlt->compute(op.matrix);
      }
      if (c.ldlt->info() == Eigen::Success) {
        Eigen::VectorXd x = c.ldlt->solve(rhs);
        if (iterations) *iterations = 1;
        if (method) *method = "ldlt";
        return x;
      }
    }
    return run_cg();
  }
  if (op.dofs() <= kDirectCap) {
    if (!c.lu) {
      c.lu = std::make_unique<Eigen::SparseLU<SparseMat>>();
      c.lu->compute(op.matrix);
    }
    if (c.lu->info() == Eigen::Success) {
      Eigen::VectorXd x = c.lu->solve(rhs);
      if (iterations) *iterations = 1;
      if (method) *method = "sparselu";
      return x;
    }
  }
  return run_bicg();
}

namespace {

SolveReport finish_solve(DiscreteOperator& op, const Eigen::VectorXd& rhs,
                         double tol, const Timer& timer,
                         GridFunction (*export_fn)(const DiscreteOperator&,
                                                   const Eigen::VectorXd&)) {
  SolveReport rep;
  Eigen::VectorXd x = linear_solve(op, rhs, tol, &rep.iterations, &rep.method);
  const double rhs_norm = rhs.norm();
  const double res = (op.matrix * x - rhs).norm();
  rep.residual_norm = rhs_norm > 0 ? res / rhs_norm : res;
  if (!std::isfinite(rep.residual_norm) || rep.residual_norm > kResidualAccept)
    throw SolverDiverged("linear solve failed: method=" + rep.method +
                         " iterations=" + std::to_string(rep.iterations) +
                         " relative residual=" +
                         std::to_string(rep.residual_norm));
  rep.solution = export_fn(op, x);
  rep.wall_time = timer.seconds();
  return rep;
}

GridFunction export_corner_dofs(const DiscreteOperator& op,
                                const Eigen::VectorXd& x) {
  const Grid& g = op.grid;
  const int n = g.n;
  const int m = n - 1;
  auto node = [&](int I, int J) -> double {
    if (I < 1 || I > m || J < 1 || J > m) return 0.0;
    return x[(J - 1) * m + (I - 1)];
  };
  GridFunction u(g, Rank::scalar);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      u.at(i, j) = 0.25 * (node(i, j) + node(i + 1, j) + node(i, j + 1) +
                           node(i + 1, j + 1));
  return u;
}

GridFunction export_cell_dofs(const DiscreteOperator& op,
                              const Eigen::VectorXd& x) {
  GridFunction u(op.grid, Rank::scalar);
  for (std::size_t k = 0; k < op.grid.cells(); ++k) u.values[k] = x[k];
  return u;
}

void require_rank(const GridFunction& f, Rank r, const char* what) {
  if (f.rank != r)
    throw Error(std::string(what) + " expects a " + rank_name(r) + " field");
}

} // namespace

SolveReport solve_divergence(DiscreteOperator& op, const GridFunction& g,
                             double tol) {
  if (op.form != OperatorForm::divergence && op.form != OperatorForm::constant)
    throw Error("solve_divergence called on a non-divergence operator");
  require_rank(g, Rank::vector, "solve_divergence");
  if (!(g.grid == op.grid)) throw Error("right side grid mismatch");
  Timer timer;
  const Grid& gr = op.grid;
  const int n = gr.n;
  const int m = n - 1;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(m) * m);
  const double half_h = 0.5 * gr.h;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::size_t cell = gr.index(i, j);
      const double gx = g.at(cell, 0), gy = g.at(cell, 1);
      for (int loc = 0; loc < 4; ++loc) {
        const int I = i + (loc & 1), J = j + (loc >> 1);
        if (I < 1 || I > m || J < 1 || J > m) continue;
        b[(J - 1) * m + (I - 1)] += half_h * (gx * kSx[loc] + gy * kTy[loc]);
      }
    }
  }
  return finish_solve(op, b, tol, timer, &export_corner_dofs);
}

SolveReport solve_nondivergence(DiscreteOperator& op, const GridFunction& g,
                                double tol) {
  if (op.form != OperatorForm::nondivergence)
    throw Error("solve_nondivergence called on the wrong operator form");
  require_rank(g, Rank::scalar, "solve_nondivergence");
  if (!(g.grid == op.grid)) throw Error("right side grid mismatch");
  Timer timer;
  Eigen::VectorXd b(Eigen::Index(op.grid.cells()));
  for (std::size_t k = 0; k < op.grid.cells(); ++k) b[k] = g.values[k];
  return finish_solve(op, b, tol, timer, &export_cell_dofs);
}

SolveReport solve_adjoint(DiscreteOperator& op, const GridFunction& g,
                          double tol) {
  if (op.form != OperatorForm::adjoint)
    throw Error("solve_adjoint called on the wrong operator form");
  require_rank(g, Rank::matrix, "solve_adjoint");
  if (!(g.grid == op.grid)) throw Error("right side grid mismatch");
  Timer timer;
  const Grid& gr = op.grid;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(gr.cells()));
  for (int j = 0; j < gr.n; ++j) {
    for (int i = 0; i < gr.n; ++i) {
      const std::size_t cell = gr.index(i, j);
      const std::array<double, 4> gv = {g.at(cell, 0), g.at(cell, 1),
                                        g.at(cell, 2), g.at(cell, 3)};
      nondiv_row(gr, i, j, gv, [&](int ii, int jj, double w) {
        b[Eigen::Index(gr.index(ii, jj))] += w;
      });
    }
  }
  return finish_solve(op, b, tol, timer, &export_cell_dofs);
}

SolveReport solve_form(DiscreteOperator& op, const GridFunction& source,
                       double tol) {
  switch (op.form) {
    case OperatorForm::divergence:
    case OperatorForm::constant:
      return solve_divergence(op, source, tol);
    case OperatorForm::nondivergence:
      return solve_nondivergence(op, source, tol);
    case OperatorForm::adjoint:
      return solve_adjoint(op, source, tol);
  }
  throw Error("unreachable operator form");
}

Eigen::VectorXd apply_matrix(const DiscreteOperator& op,
                             const Eigen::VectorXd& u) {
  if (u.size() != op.matrix.cols())
    throw Error("apply_matrix size mismatch");
  return op.matrix * u;
}

GridFunction stencil_hessian(const Grid& grid, const GridFunction& u) {
  require_rank(u, Rank::scalar, "stencil_hessian");
  if (!(u.grid == grid)) throw Error("stencil_hessian grid mismatch");
  const int n = grid.n;
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  std::function<double(int, int)> val = [&](int i, int j) -> double {
    if (i < 0) return (val(1, j) - 6.0 * val(0, j)) / 3.0;
    if (i >= n) return (val(n - 2, j) - 6.0 * val(n - 1, j)) / 3.0;
    if (j < 0) return (val(i, 1) - 6.0 * val(i, 0)) / 3.0;
    if (j >= n) return (val(i, n - 2) - 6.0 * val(i, n - 1)) / 3.0;
    return u.at(i, j);
  };
  GridFunction out(grid, Rank::matrix);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double c = u.at(i, j);
      const double dxx = (val(i + 1, j) - 2.0 * c + val(i - 1, j)) * inv_h2;
      const double dyy = (val(i, j + 1) - 2.0 * c + val(i, j - 1)) * inv_h2;
      const double dxy = (val(i + 1, j + 1) + val(i - 1, j - 1) -
                          val(i + 1, j - 1) - val(i - 1, j + 1)) *
                         inv_h2 * 0.25;
      out.at(i, j, 0) = dxx;
      out.at(i, j, 1) = dxy;
      out.at(i, j, 2) = dxy;
      out.at(i, j, 3) = dyy;
    }
  }
  return out;
}

GridFunction solve_on_ball(const Grid& grid, const Ball& ball,
                           const std::array<double, 4>& A0,
                           const GridFunction& F, double tol) {
  require_rank(F, Rank::vector, "solve_on_ball");
  if (!(F.grid == grid)) throw Error("solve_on_ball grid mismatch");

  std::set<std::pair<int, int>> cells;
  for_each_ball_cell(grid, ball, [&](int i, int j) { cells.insert({i, j}); });

  // A corner node is an unknown only when all four surrounding cells belong
  // to the ball; every other node carries the zero boundary value.
  std::unordered_map<long long, int> dof;
  auto node_key = [&](int I, int J) { return (long long)J * (grid.n + 1) + I; };
  auto is_dof_node = [&](int I, int J) {
    return cells.count({I, J}) && cells.count({I - 1, J}) &&
           cells.count({I, J - 1}) && cells.count({I - 1, J - 1});
  };
  for (const auto& [i, j] : cells) {
    for (int loc = 0; loc < 4; ++loc) {
      const int I = i + (loc & 1), J = j + (loc >> 1);
      if (is_dof_node(I, J) && !dof.count(node_key(I, J)))
        dof.emplace(node_key(I, J), int(dof.size()));
    }
  }

  const int ndof = int(dof.size());
  GridFunction w(grid, Rank::scalar);
  if (ndof == 0) return w;

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(ndof);
  const double half_h = 0.5 * grid.h;
  for (const auto& [i, j] : cells) {
    const std::size_t cell = grid.index(i, j);
    const double fx = F.at(cell, 0), fy = F.at(cell, 1);
    int ids[4];
    for (int loc = 0; loc < 4; ++loc) {
      const int I = i + (loc & 1), J = j + (loc >> 1);
      auto it = dof.find(node_key(I, J));
      ids[loc] = it == dof.end() ? -1 : it->second;
      if (ids[loc] >= 0)
        b[ids[loc]] += half_h * (fx * kSx[loc] + fy * kTy[loc]);
    }
    for (int r = 0; r < 4; ++r) {
      if (ids[r] < 0) continue;
      for (int c = 0; c < 4; ++c)
        if (ids[c] >= 0)
          trips.emplace_back(ids[r], ids[c], element_entry(A0, r, c));
    }
  }
  SparseMat mat(ndof, ndof);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();

  Eigen::VectorXd x;
  double res;
  if (A0[1] == A0[2]) {
    Eigen::SimplicialLDLT<SparseMat> ldlt(mat);
    if (ldlt.info() != Eigen::Success)
      throw SolverDiverged("ball solve factorization failed");
    x = ldlt.solve(b);
  } else {
    Eigen::SparseLU<SparseMat> lu(mat);
    if (lu.info() != Eigen::Success)
      throw SolverDiverged("ball solve factorization failed");
    x = lu.solve(b);
  }
  const double bn = b.norm();
  res = (mat * x - b).norm() / (bn > 0 ? bn : 1.0);
  if (!std::isfinite(res) || res > std::max(tol * 1e4, kResidualAccept))
    throw SolverDiverged("ball solve residual " + std::to_string(res));

  auto node_val = [&](int I, int J) -> double {
    auto it = dof.find(node_key(I, J));
    return it == dof.end() ? 0.0 : x[it->second];
  };
  for (const auto& [i, j] : cells)
    w.at(i, j) = 0.25 * (node_val(i, j) + node_val(i + 1, j) +
                         node_val(i, j + 1) + node_val(i + 1, j + 1));
  return w;
}

bool m_matrix_sign_pattern(const SparseMat& m) {
  double diag_sign = 0.0;
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(m, k); it; ++it) {
      if (it.row() == it.col()) {
        if (it.value() == 0.0) return false;
        const double s = it.value() > 0 ? 1.0 : -1.0;
        if (diag_sign == 0.0) diag_sign = s;
        else if (s != diag_sign) return false;
      }
    }
  }
  if (diag_sign == 0.0) return false;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it)
      if (it.row() != it.col() && it.value() * diag_sign > 1e-14)
        return false;
  return true;
}

void save_matrix_coo(const SparseMat& m, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path + " for writing");
  std::fprintf(f, "%ld %ld %ld\n", long(m.rows()), long(m.cols()),
               long(m.nonZeros()));
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it)
      std::fprintf(f, "%ld %ld %.17g\n", long(it.row()), long(it.col()),
                   it.value());
  std::fclose(f);
}

void save_report_json(const SolveReport& report, const DiscreteOperator& op,
                      const std::string& path) {
  nlohmann::json j;
  j["form"] = form_name(op.form);
  j["n"] = op.grid.n;
  j["extent"] = op.grid.extent;
  j["dofs"] = long(op.dofs());
  j["nonzeros"] = long(op.matrix.nonZeros());
  j["method"] = report.method;
  j["iterations"] = report.iterations;
  j["residual_norm"] = report.residual_norm;
  j["wall_time"] = report.wall_time;
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open " + path + " for writing");
  const std::string text = j.dump(2);
  std::fwrite(text.data(), 1, text.size(), f);
  std::fputc('\n', f);
  std::fclose(f);
}

} // namespace dmo
