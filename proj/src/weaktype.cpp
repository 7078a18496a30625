#include "dmo/weaktype.hpp"

#include <algorithm>
#include <cmath>

#include "dmo/errors.hpp"

namespace dmo {

namespace {

constexpr double kMeanTol = 1e-12;
constexpr std::size_t kExactSortCap = 4u << 20;

double quartic(double d2, double r2) {
  if (d2 >= r2) return 0.0;
  const double s = 1.0 - d2 / r2;
  return s * s;
}

// Accumulates one quartic lobe of the given radius; returns the sum of the
// written values.
double add_lobe(GridFunction& v, int comp, Point c, double radius,
                double sign) {
  const Grid& g = v.grid;
  const double r2 = radius * radius;
  const int ilo = std::max(0, int((c.x - radius + g.extent) / g.h - 0.5));
  const int ihi = std::min(g.n - 1, int((c.x + radius + g.extent) / g.h + 0.5));
  const int jlo = std::max(0, int((c.y - radius + g.extent) / g.h - 0.5));
  const int jhi = std::min(g.n - 1, int((c.y + radius + g.extent) / g.h + 0.5));
  double sum = 0.0;
  for (int j = jlo; j <= jhi; ++j) {
    for (int i = ilo; i <= ihi; ++i) {
      const Point pt = g.point(i, j);
      const double dx = pt.x - c.x, dy = pt.y - c.y;
      const double w = quartic(dx * dx + dy * dy, r2);
      if (w == 0.0) continue;
      v.at(i, j, comp) += sign * w;
      sum += sign * w;
    }
  }
  return sum;
}

// Dipole profile with exact zero sum: positive and negative quartic lobes
// along the x axis, negative lobe rescaled to cancel the positive sum, then
// the rounding residue spread over the support.
void fill_dipole(GridFunction& v, int comp, Point center, double radius) {
  const double off = 0.5 * radius;
  const double lobe = 0.45 * radius;
  const double sp =
      add_lobe(v, comp, {center.x + off, center.y}, lobe, 1.0);
  GridFunction neg(v.grid, v.rank);
  const double sn =
      add_lobe(neg, comp, {center.x - off, center.y}, lobe, 1.0);
  if (sp <= 0.0 || sn <= 0.0)
    throw Error("dipole lobe support clipped away by the domain boundary");
  const double scale = sp / sn;
  const int nc = v.ncomp();
  std::vector<std::size_t> support;
  for (std::size_t cell = 0; cell < v.grid.cells(); ++cell) {
    if (neg.values[cell * nc + comp] != 0.0)
      v.values[cell * nc + comp] -= scale * neg.values[cell * nc + comp];
    if (v.values[cell * nc + comp] != 0.0) support.push_back(cell);
  }
  double residue = 0.0;
  for (std::size_t cell : support) residue += v.values[cell * nc + comp];
  const double shift = residue / double(support.size());
  for (std::size_t cell : support) v.values[cell * nc + comp] -= shift;
}

double l1_norm(const GridFunction& v) {
  double s = 0.0;
  for (std::size_t cell = 0; cell < v.grid.cells(); ++cell)
    s += v.norm_at(cell);
  return s * v.grid.h * v.grid.h;
}

double worst_component_mean(const GridFunction& v) {
  const int nc = v.ncomp();
  double worst = 0.0;
  for (int c = 0; c < nc; ++c) {
    double s = 0.0;
    for (std::size_t cell = 0; cell < v.grid.cells(); ++cell)
      s += v.at(cell, c);
    worst = std::max(worst, std::fabs(s) * v.grid.h * v.grid.h);
  }
  return worst;
}

} // namespace

const char* bump_kind_name(BumpKind kind) {
  switch (kind) {
    case BumpKind::mean_zero_vector: return "mean_zero_vector";
    case BumpKind::mean_zero_scalar: return "mean_zero_scalar";
    case BumpKind::mean_zero_matrix: return "mean_zero_matrix";
    case BumpKind::nonneg_scalar: return "nonneg_scalar";
  }
  return "unknown";
}

BumpKind bump_kind_from_name(const std::string& name) {
  if (name == "mean_zero_vector") return BumpKind::mean_zero_vector;
  if (name == "mean_zero_scalar") return BumpKind::mean_zero_scalar;
  if (name == "mean_zero_matrix") return BumpKind::mean_zero_matrix;
  if (name == "nonneg_scalar") return BumpKind::nonneg_scalar;
  throw ConfigError("unknown bump kind: " + name);
}

BumpSource make_bump(Point center, double radius, BumpKind kind,
                     const Grid& grid) {
  if (radius < 4.0 * grid.h)
    throw RadiusTooSmall("bump radius " + std::to_string(radius) +
                         " below 4h = " + std::to_string(4.0 * grid.h));
  BumpSource bump;
  bump.center = center;
  bump.radius = radius;
  bump.kind = kind;
  switch (kind) {
    case BumpKind::nonneg_scalar: {
      bump.values = GridFunction(grid, Rank::scalar);
      if (add_lobe(bump.values, 0, center, radius, 1.0) <= 0.0)
        throw Error("bump support clipped away by the domain boundary");
      break;
    }
    case BumpKind::mean_zero_scalar: {
      bump.values = GridFunction(grid, Rank::scalar);
      fill_dipole(bump.values, 0, center, radius);
      break;
    }
    case BumpKind::mean_zero_vector: {
      bump.values = GridFunction(grid, Rank::vector);
      fill_dipole(bump.values, 0, center, radius);
      break;
    }
    case BumpKind::mean_zero_matrix: {
      bump.values = GridFunction(grid, Rank::matrix);
      fill_dipole(bump.values, 0, center, radius);
      const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
      for (std::size_t cell = 0; cell < grid.cells(); ++cell) {
        const double d = bump.values.at(cell, 0) * inv_sqrt2;
        bump.values.at(cell, 0) = d;
        bump.values.at(cell, 3) = d;
      }
      break;
    }
  }
  const double norm = l1_norm(bump.values);
  if (norm <= 0.0) throw Error("bump has empty support");
  for (double& x : bump.values.values) x /= norm;
  bump.l1_norm = l1_norm(bump.values);
  bump.discrete_mean =
      kind == BumpKind::nonneg_scalar ? bump.l1_norm
                                      : worst_component_mean(bump.values);
  if (kind != BumpKind::nonneg_scalar && bump.discrete_mean > kMeanTol)
    throw Error("mean-zero projection left residue " +
                std::to_string(bump.discrete_mean));
  return bump;
}

GridFunction lift_source(const BumpSource& bump, OperatorForm form) {
  const Rank want = (form == OperatorForm::nondivergence) ? Rank::scalar
                    : (form == OperatorForm::adjoint)     ? Rank::matrix
                                                          : Rank::vector;
  if (bump.values.rank == want) return bump.values;
  if (bump.values.rank != Rank::scalar)
    throw Error("cannot lift a " + std::string(rank_name(bump.values.rank)) +
                " bump to a " + rank_name(want) + " source");
  GridFunction out(bump.values.grid, want);
  if (want == Rank::vector) {
    for (std::size_t cell = 0; cell < out.grid.cells(); ++cell)
      out.at(cell, 0) = bump.values.values[cell];
  } else {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t cell = 0; cell < out.grid.cells(); ++cell) {
      out.at(cell, 0) = bump.values.values[cell] * inv_sqrt2;
      out.at(cell, 3) = bump.values.values[cell] * inv_sqrt2;
    }
  }
  return out;
}

WeakTypeReport weak_type_statistic(const GridFunction& f, double source_l1,
                                   std::vector<double> alphas) {
  if (source_l1 <= 0.0) throw Error("weak_type_statistic needs source_l1 > 0");
  for (std::size_t k = 0; k + 1 < alphas.size(); ++k)
    if (!(alphas[k] > 0.0) || alphas[k] >= alphas[k + 1])
      throw Error("alpha grid must be positive and increasing");

  WeakTypeReport rep;
  rep.source_l1 = source_l1;
  const double h2 = f.grid.h * f.grid.h;

  std::vector<double> norms(f.grid.cells());
  for (std::size_t cell = 0; cell < f.grid.cells(); ++cell)
    norms[cell] = f.norm_at(cell);
  const double fmax = *std::max_element(norms.begin(), norms.end());
  if (fmax <= 0.0) {
    rep.alphas = alphas.empty() ? std::vector<double>{1.0} : alphas;
    rep.measures.assign(rep.alphas.size(), 0.0);
    return rep;
  }

  std::sort(norms.begin(), norms.end());
  auto measure_above = [&](double alpha) {
    const auto it = std::upper_bound(norms.begin(), norms.end(), alpha);
    return double(norms.end() - it) * h2;
  };

  if (norms.size() <= kExactSortCap) {
    rep.exact_sup = true;
    for (std::size_t k = 0; k < norms.size(); ++k) {
      const double v = norms[norms.size() - 1 - k];
      if (v <= 0.0) break;
      const double cand = v * double(k + 1) * h2;
      if (cand > rep.constant) {
        rep.constant = cand;
        rep.alpha_at_max = v;
      }
    }
    rep.constant /= source_l1;
  }

  if (alphas.empty()) {
    const int pts = 60;
    const double lo = 1e-2 * fmax, hi = fmax;
    for (int k = 0; k < pts; ++k)
      alphas.push_back(lo * std::pow(hi / lo, double(k) / (pts - 1)));
  }
  for (int rounds = 0; rounds < 6; ++rounds) {
    std::vector<double> measures(alphas.size());
    std::size_t best = 0;
    double grid_sup = -1.0;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      measures[k] = measure_above(alphas[k]);
      const double cand = alphas[k] * measures[k] / source_l1;
      if (cand > grid_sup) {
        grid_sup = cand;
        best = k;
      }
    }
    rep.alphas = alphas;
    rep.measures = std::move(measures);
    if (!rep.exact_sup && grid_sup > rep.constant) {
      rep.constant = grid_sup;
      rep.alpha_at_max = alphas[best];
    }
    const bool at_low = best == 0 && rep.alphas.size() > 1;
    const bool at_high =
        best + 1 == rep.alphas.size() && rep.measures[best] > 0.0;
    if (at_low) {
      std::vector<double> ext;
      const double step = alphas[1] / alphas[0];
      double a = alphas[0];
      for (int k = 0; k < 20; ++k) ext.insert(ext.begin(), a /= step);
      alphas.insert(alphas.begin(), ext.begin(), ext.end());
    } else if (at_high) {
      const double step = alphas[alphas.size() - 1] / alphas[alphas.size() - 2];
      double a = alphas.back();
      for (int k = 0; k < 20; ++k) alphas.push_back(a *= step);
    } else {
      break;
    }
  }
  return rep;
}

GridFunction form_quantity(const DiscreteOperator& op, const GridFunction& u) {
  switch (op.form) {
    case OperatorForm::divergence:
    case OperatorForm::constant:
      return finite_difference_gradient(u);
    case OperatorForm::nondivergence:
      return stencil_hessian(op.grid, u);
    case OperatorForm::adjoint:
      return u;
  }
  return u;
}

namespace {

SolveReport solve_with_bump(DiscreteOperator& op, const BumpSource& bump,
                            double tol) {
  const GridFunction src = lift_source(bump, op.form);
  return solve_form(op, src, tol);
}

} // namespace

double hormander_test(DiscreteOperator& op, const BumpSource& bump, double c,
                      GridFunction* out, double tol) {
  if (bump.kind == BumpKind::nonneg_scalar)
    throw Error("hormander_test needs a mean-zero bump");
  if (c * bump.radius >= op.grid.extent)
    throw Error("separation c * radius = " + std::to_string(c * bump.radius) +
                " reaches the domain half-width");
  SolveReport sol = solve_with_bump(op, bump, tol);
  GridFunction q = form_quantity(op, sol.solution);
  const Grid& g = op.grid;
  const double cr2 = c * bump.radius * c * bump.radius;
  double mass = 0.0;
  for (int j = 0; j < g.n; ++j) {
    for (int i = 0; i < g.n; ++i) {
      const Point pt = g.point(i, j);
      const double dx = pt.x - bump.center.x, dy = pt.y - bump.center.y;
      if (dx * dx + dy * dy >= cr2) mass += q.norm_at(g.index(i, j));
    }
  }
  if (out) *out = std::move(q);
  return mass * g.h * g.h / bump.l1_norm;
}

HormanderReport hormander_sweep(DiscreteOperator& op,
                                const std::vector<Point>& centers,
                                const std::vector<double>& radii, double c,
                                BumpKind kind) {
  HormanderReport rep;
  rep.c = c;
  for (const Point& center : centers) {
    for (double r : radii) {
      BumpSource bump = make_bump(center, r, kind, op.grid);
      rep.ratios.push_back(hormander_test(op, bump, c));
      rep.sup_ratio = std::max(rep.sup_ratio, rep.ratios.back());
    }
  }
  return rep;
}

std::vector<std::pair<double, double>> annulus_masses(const GridFunction& f,
                                                      Point center,
                                                      double r_inner) {
  const Grid& g = f.grid;
  std::vector<std::pair<double, double>> out;
  for (double R = r_inner; 2.0 * R <= g.extent; R *= 2.0)
    out.push_back({R, 0.0});
  if (out.empty()) return out;
  const double h2 = g.h * g.h;
  for (int j = 0; j < g.n; ++j) {
    for (int i = 0; i < g.n; ++i) {
      const Point pt = g.point(i, j);
      const double dx = pt.x - center.x, dy = pt.y - center.y;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < r_inner || d >= 2.0 * out.back().first) continue;
      const int k = int(std::floor(std::log2(d / r_inner)));
      if (k >= 0 && k < int(out.size()))
        out[std::size_t(k)].second += f.norm_at(g.index(i, j)) * h2;
    }
  }
  return out;
}

std::vector<ConcentrationRow> concentration_study(
    DiscreteOperator& op, const std::vector<double>& radii,
    const std::vector<Point>& centers, BumpKind kind) {
  if (radii.empty()) throw Error("concentration_study needs radii");
  for (std::size_t k = 0; k + 1 < radii.size(); ++k)
    if (radii[k] <= radii[k + 1])
      throw Error("concentration_study radii must be decreasing");
  if (radii.back() < 4.0 * op.grid.h)
    throw RadiusTooSmall("smallest study radius " +
                         std::to_string(radii.back()) + " below 4h");
  std::vector<ConcentrationRow> rows;
  for (const Point& center : centers) {
    for (double r : radii) {
      BumpSource bump = make_bump(center, r, kind, op.grid);
      SolveReport sol = solve_with_bump(op, bump, 1e-10);
      GridFunction q = form_quantity(op, sol.solution);
      ConcentrationRow row;
      row.center = center;
      row.radius = r;
      row.report = weak_type_statistic(q, bump.l1_norm);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

} // namespace dmo
