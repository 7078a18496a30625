#include "dmo/regularity.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "dmo/errors.hpp"

namespace dmo {

std::pair<double, std::vector<double>> campanato_phi(const GridFunction& f,
                                                     const Ball& ball,
                                                     double p) {
  std::vector<double> q = ball_average(f, ball);
  double value = lp_quasi_mean_shifted(f, ball, p, q);
  return {value, std::move(q)};
}

CampanatoCurve campanato_decay(const GridFunction& f, Point center, double r0,
                               const TildeParams& params, int J, double p) {
  if (J < 0) throw Error("campanato_decay needs J >= 0");
  const Grid& g = f.grid;
  const double r_last = r0 * std::pow(params.kappa, J);
  if (r_last < 2.0 * g.h)
    throw ScaleUnderflow("radius kappa^J r0 = " + std::to_string(r_last) +
                         " below resolvable scale 2h = " +
                         std::to_string(2.0 * g.h));
  CampanatoCurve curve;
  curve.center = center;
  curve.r0 = r0;
  curve.kappa = params.kappa;
  curve.beta = params.beta;
  curve.p = p;
  double r = r0;
  for (int j = 0; j <= J; ++j, r *= params.kappa) {
    Ball b{center, r};
    auto [phi, q] = campanato_phi(f, b, p);
    curve.radii.push_back(r);
    curve.phi.push_back(phi);
    curve.q.push_back(std::move(q));
    curve.cell_counts.push_back(ball_cell_count(g, b));
  }
  for (int j = 0; j + 1 <= J; ++j)
    curve.contraction.push_back(
        curve.phi[j] > 0 ? curve.phi[j + 1] / curve.phi[j]
                         : (curve.phi[j + 1] > 0
                                ? std::numeric_limits<double>::infinity()
                                : 1.0));
  return curve;
}

namespace {

// Mean Euclidean deviation of f from its ball average.
double ball_mean_deviation(const GridFunction& f, const Ball& b,
                           const std::vector<double>& avg) {
  const int nc = f.ncomp();
  double sum = 0.0;
  std::size_t count = 0;
  for_each_ball_cell(f.grid, b, [&](int i, int j) {
    const std::size_t cell = f.grid.index(i, j);
    double s2 = 0.0;
    for (int c = 0; c < nc; ++c) {
      const double d = f.at(cell, c) - avg[c];
      s2 += d * d;
    }
    sum += std::sqrt(s2);
    ++count;
  });
  return sum / double(count);
}

// Cell-indexed constant-coefficient operator restricted to the ball with the
// solution extended by zero outside: stencil entries leaving the ball are
// dropped.  Returns the sparse matrix and the cell -> dof map.
void ball_cell_system(const Grid& g, const Ball& ball,
                      const std::array<double, 4>& A0,
                      std::unordered_map<std::size_t, int>& dof,
                      SparseMat& mat) {
  std::vector<std::size_t> cells;
  for_each_ball_cell(g, ball, [&](int i, int j) {
    dof.emplace(g.index(i, j), int(dof.size()));
    cells.push_back(g.index(i, j));
  });
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(cells.size() * 9);
  for (std::size_t cell : cells) {
    const int i = int(cell % g.n), j = int(cell / g.n);
    const int row = dof.at(cell);
    const double inv_h2 = 1.0 / (g.h * g.h);
    const double cxx = A0[0] * inv_h2;
    const double cyy = A0[3] * inv_h2;
    const double cxy = (A0[1] + A0[2]) * inv_h2 * 0.25;
    auto add = [&](int ii, int jj, double w) {
      if (ii < 0 || ii >= g.n || jj < 0 || jj >= g.n) return;
      auto it = dof.find(g.index(ii, jj));
      if (it != dof.end()) trips.emplace_back(row, it->second, w);
    };
    add(i - 1, j, cxx);
    add(i + 1, j, cxx);
    add(i, j - 1, cyy);
    add(i, j + 1, cyy);
    add(i, j, -2.0 * (cxx + cyy));
    if (cxy != 0.0) {
      add(i + 1, j + 1, cxy);
      add(i - 1, j - 1, cxy);
      add(i + 1, j - 1, -cxy);
      add(i - 1, j + 1, -cxy);
    }
  }
  mat.resize(int(dof.size()), int(dof.size()));
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
}

Eigen::VectorXd solve_small(const SparseMat& mat, const Eigen::VectorXd& b,
                            bool symmetric) {
  Eigen::VectorXd x;
  if (symmetric) {
    Eigen::SimplicialLDLT<SparseMat> ldlt(mat);
    if (ldlt.info() != Eigen::Success)
      throw SolverDiverged("ball system factorization failed");
    x = ldlt.solve(b);
  } else {
    Eigen::SparseLU<SparseMat> lu(mat);
    if (lu.info() != Eigen::Success)
      throw SolverDiverged("ball system factorization failed");
    x = lu.solve(b);
  }
  const double bn = b.norm();
  const double res = (mat * x - b).norm() / (bn > 0 ? bn : 1.0);
  if (!std::isfinite(res) || res > 1e-6)
    throw SolverDiverged("ball system residual " + std::to_string(res));
  return x;
}

} // namespace

FreezeReport freezing_experiment(const CoefficientField& field,
                                 const GridFunction& data,
                                 const GridFunction& u, const Ball& ball,
                                 double p, OperatorForm form) {
  const Grid& g = field.values.grid;
  if (!(data.grid == g) || !(u.grid == g))
    throw Error("freezing_experiment grid mismatch");
  if (ball.radius < 4.0 * g.h)
    throw BallTooSmall("freezing ball radius " + std::to_string(ball.radius) +
                       " below 4h = " + std::to_string(4.0 * g.h));
  if (std::fabs(ball.center.x) + ball.radius >= g.extent ||
      std::fabs(ball.center.y) + ball.radius >= g.extent)
    throw Error("freezing ball extends outside the domain");

  FreezeReport rep;
  rep.ball = ball;
  rep.form = form;

  const std::vector<double> a_bar = ball_average(field.values, ball);
  const std::vector<double> g_bar = ball_average(data, ball);
  const std::array<double, 4> A0 = {a_bar[0], a_bar[1], a_bar[2], a_bar[3]};
  rep.osc_a = ball_mean_deviation(field.values, ball, a_bar);
  rep.osc_g = ball_mean_deviation(data, ball, g_bar);

  GridFunction du = finite_difference_gradient(u);
  for_each_ball_cell(g, ball, [&](int i, int j) {
    const std::size_t cell = g.index(i, j);
    rep.du_sup = std::max(rep.du_sup, du.norm_at(cell));
  });
  rep.bound_rhs = rep.osc_a * rep.du_sup + rep.osc_g;

  switch (form) {
    case OperatorForm::divergence:
    case OperatorForm::constant: {
      if (data.rank != Rank::vector)
        throw Error("divergence freezing expects vector data");
      GridFunction F(g, Rank::vector);
      for_each_ball_cell(g, ball, [&](int i, int j) {
        const std::size_t cell = g.index(i, j);
        const std::array<double, 4> a = field.at(cell);
        const double dx = du.at(cell, 0), dy = du.at(cell, 1);
        F.at(cell, 0) = (data.at(cell, 0) - g_bar[0]) -
                        ((a[0] - A0[0]) * dx + (a[1] - A0[1]) * dy);
        F.at(cell, 1) = (data.at(cell, 1) - g_bar[1]) -
                        ((a[2] - A0[2]) * dx + (a[3] - A0[3]) * dy);
      });
      GridFunction w = solve_on_ball(g, ball, A0, F);
      GridFunction dw = finite_difference_gradient(w);
      rep.w_quasinorm = lp_quasi_mean(dw, ball, p);
      break;
    }
    case OperatorForm::nondivergence: {
      if (data.rank != Rank::scalar)
        throw Error("nondivergence freezing expects scalar data");
      GridFunction hess = stencil_hessian(g, u);
      std::unordered_map<std::size_t, int> dof;
      SparseMat mat;
      ball_cell_system(g, ball, A0, dof, mat);
      Eigen::VectorXd b(Eigen::Index(dof.size()));
      for (const auto& [cell, id] : dof) {
        const std::array<double, 4> a = field.at(cell);
        double commut = 0.0;
        for (int c = 0; c < 4; ++c)
          commut += (a[c] - A0[c]) * hess.at(cell, c);
        b[id] = -commut + (data.values[cell] - g_bar[0]);
      }
      Eigen::VectorXd x = solve_small(mat, b, A0[1] == A0[2]);
      GridFunction w(g, Rank::scalar);
      for (const auto& [cell, id] : dof) w.values[cell] = x[id];
      GridFunction d2w = stencil_hessian(g, w);
      rep.w_quasinorm = lp_quasi_mean(d2w, ball, p);
      break;
    }
    case OperatorForm::adjoint: {
      if (data.rank != Rank::matrix)
        throw Error("adjoint freezing expects matrix data");
      std::unordered_map<std::size_t, int> dof;
      SparseMat mat;
      ball_cell_system(g, ball, A0, dof, mat);
      SparseMat matT = SparseMat(mat.transpose());
      // Source pairing <w_src, v> = <u, sum_kl (abar-a)_kl D_kl v> +
      // <sum_kl D_kl^T (g-gbar)_kl, v>: scatter through the same stencils,
      // one ring beyond the ball contributes.
      Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(dof.size()));
      const int pad = 2;
      const int ilo = std::max(0, int((ball.center.x - ball.radius + g.extent) / g.h) - pad);
      const int ihi = std::min(g.n - 1, int((ball.center.x + ball.radius + g.extent) / g.h) + pad);
      const int jlo = std::max(0, int((ball.center.y - ball.radius + g.extent) / g.h) - pad);
      const int jhi = std::min(g.n - 1, int((ball.center.y + ball.radius + g.extent) / g.h) + pad);
      const double inv_h2 = 1.0 / (g.h * g.h);
      for (int j = jlo; j <= jhi; ++j) {
        for (int i = ilo; i <= ihi; ++i) {
          const std::size_t cell = g.index(i, j);
          const std::array<double, 4> a = field.at(cell);
          std::array<double, 4> payload;
          for (int c = 0; c < 4; ++c)
            payload[c] = (A0[c] - a[c]) * u.values[cell] +
                         (data.at(cell, c) - g_bar[c]);
          const double cxx = payload[0] * inv_h2;
          const double cyy = payload[3] * inv_h2;
          const double cxy = (payload[1] + payload[2]) * inv_h2 * 0.25;
          auto add = [&](int ii, int jj, double w) {
            if (ii < 0 || ii >= g.n || jj < 0 || jj >= g.n) return;
            auto it = dof.find(g.index(ii, jj));
            if (it != dof.end()) b[it->second] += w;
          };
          add(i - 1, j, cxx);
          add(i + 1, j, cxx);
          add(i, j - 1, cyy);
          add(i, j + 1, cyy);
          add(i, j, -2.0 * (cxx + cyy));
          if (cxy != 0.0) {
            add(i + 1, j + 1, cxy);
            add(i - 1, j - 1, cxy);
            add(i + 1, j - 1, -cxy);
            add(i - 1, j + 1, -cxy);
          }
        }
      }
      Eigen::VectorXd x = solve_small(matT, b, A0[1] == A0[2]);
      GridFunction w(g, Rank::scalar);
      for (const auto& [cell, id] : dof) w.values[cell] = x[id];
      rep.w_quasinorm = lp_quasi_mean(w, ball, p);
      break;
    }
  }
  rep.ratio = rep.bound_rhs > 0 ? rep.w_quasinorm / rep.bound_rhs : 0.0;
  return rep;
}

double fit_decay_constant(const CampanatoCurve& curve,
                          const std::vector<double>& psi) {
  if (psi.size() != curve.phi.size())
    throw Error("fit_decay_constant envelope length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t j = 1; j < curve.phi.size(); ++j) {
    const double resid = curve.phi[j] - std::ldexp(curve.phi[0], -int(j));
    num += resid * psi[j];
    den += psi[j] * psi[j];
  }
  if (den == 0.0) throw Error("fit_decay_constant needs a nonzero envelope");
  return num / den;
}

std::vector<double> modulus_of_continuity(
    const GridFunction& f, const Ball& region,
    const std::vector<double>& r_values) {
  const Grid& g = f.grid;
  std::vector<std::pair<int, int>> base;
  for_each_ball_cell(g, region, [&](int i, int j) { base.push_back({i, j}); });
  const std::size_t cap = 4096;
  const std::size_t stride = std::max<std::size_t>(1, base.size() / cap);
  auto inside = [&](int i, int j) {
    if (i < 0 || i >= g.n || j < 0 || j >= g.n) return false;
    const Point pt = g.point(i, j);
    const double dx = pt.x - region.center.x, dy = pt.y - region.center.y;
    return dx * dx + dy * dy < region.radius * region.radius;
  };
  std::vector<double> out;
  out.reserve(r_values.size());
  for (double r : r_values) {
    const int k = int(r / g.h);
    const int kd = int(r / (g.h * std::sqrt(2.0)));
    double m = 0.0;
    for (std::size_t idx = 0; idx < base.size(); idx += stride) {
      const auto [i, j] = base[idx];
      const std::size_t c1 = g.index(i, j);
      auto probe = [&](int ii, int jj) {
        if (!inside(ii, jj)) return;
        const std::size_t c2 = g.index(ii, jj);
        double d2 = 0.0;
        for (int c = 0; c < f.ncomp(); ++c) {
          const double d = f.at(c1, c) - f.at(c2, c);
          d2 += d * d;
        }
        m = std::max(m, std::sqrt(d2));
      };
      if (k > 0) {
        probe(i + k, j);
        probe(i - k, j);
        probe(i, j + k);
        probe(i, j - k);
      }
      if (kd > 0) {
        probe(i + kd, j + kd);
        probe(i - kd, j - kd);
        probe(i + kd, j - kd);
        probe(i - kd, j + kd);
      }
    }
    out.push_back(m);
  }
  return out;
}

} // namespace dmo
