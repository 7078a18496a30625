#pragma once

#include <utility>
#include <vector>

#include "dmo/fields.hpp"
#include "dmo/grid.hpp"
#include "dmo/oscillation.hpp"
#include "dmo/solver.hpp"

namespace dmo {

// Multiscale excess decay record: phi[j] is the centered p-quasi-mean of f
// over B(center, kappa^j r0) and q[j] the matching ball average.  The
// contraction entries are phi[j+1] / phi[j].
struct CampanatoCurve {
  Point center{};
  double r0 = 0.0;
  double kappa = 0.0;
  double beta = 0.0;
  double p = 0.0;
  std::vector<double> radii;
  std::vector<double> phi;
  std::vector<std::vector<double>> q;
  std::vector<std::size_t> cell_counts;
  std::vector<double> contraction;
};

// Centered excess functional: returns (phi_hat, q_bar) where q_bar is the
// ball average of f and phi_hat = (mean of |f - q_bar|^p)^(1/p).  phi_hat is
// within the factor 2^(1/p) * 2 of the true infimum over shifts; the exact
// minimizer is never needed, only this comparability.
std::pair<double, std::vector<double>> campanato_phi(const GridFunction& f,
                                                     const Ball& ball,
                                                     double p);

// Evaluates campanato_phi at radii kappa^j r0 for j = 0..J around one
// center.  Throws ScaleUnderflow when the smallest requested radius falls
// below the resolvable scale 2h.
CampanatoCurve campanato_decay(const GridFunction& f, Point center, double r0,
                               const TildeParams& params, int J, double p);

// Outcome of one coefficient-freezing correction solve on a ball.
struct FreezeReport {
  Ball ball{};
  OperatorForm form = OperatorForm::divergence;
  double w_quasinorm = 0.0;
  double bound_rhs = 0.0;
  double ratio = 0.0;
  double osc_a = 0.0;  // mean deviation of A from its ball average
  double osc_g = 0.0;  // same for the data
  double du_sup = 0.0; // max |Du| over the ball
};

// Freezes the coefficients at their ball average, solves the correction
// problem for w on the ball with zero boundary data and the commutator right
// side, and reports the p-quasi-mean of the form's natural quantity (|Dw|,
// |D^2 w|, or |w|) against osc_a * du_sup + osc_g.  The global solution u
// for (field, data) must be precomputed on the full grid.
FreezeReport freezing_experiment(const CoefficientField& field,
                                 const GridFunction& data,
                                 const GridFunction& u, const Ball& ball,
                                 double p, OperatorForm form);

// Least-squares constant C through the origin for the residuals
// phi[j] - 2^{-j} phi[0] against the envelope values psi[j], j >= 1:
// C = sum resid * psi / sum psi^2.  Negative values mean the curve decays
// faster than the pure 2^{-j} part everywhere.
double fit_decay_constant(const CampanatoCurve& curve,
                          const std::vector<double>& psi);

// m(r) = max |f(x) - f(y)| over sampled pairs inside the region with
// |x - y| <= r.  Pairs are axis-aligned and diagonal offsets at the largest
// grid multiples fitting under r, taken from a subsampled set of base
// points, so Lipschitz examples evaluate exactly on axis pairs.
std::vector<double> modulus_of_continuity(const GridFunction& f,
                                          const Ball& region,
                                          const std::vector<double>& r_values);

} // namespace dmo
