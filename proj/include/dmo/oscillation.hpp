#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dmo/fields.hpp"
#include "dmo/grid.hpp"

namespace dmo {

// Oscillation moduli are handled in the coordinate x = -ln t, where geometric
// radius sequences become uniform grids and deep tails stay representable.
struct Modulus {
  std::string name;
  std::function<double(double)> a;  // a(x) = omega(e^{-x})
  double operator()(double x) const { return a(x); }
};

Modulus modulus_linear();                    // omega(t) = t
Modulus modulus_log_power(double gamma);     // omega(t) = (-ln t)^{-gamma}
Modulus modulus_shifted_log_sq();            // omega(t) = (ln(t/4))^{-2}
Modulus modulus_constant(double c);

enum class DiniFlag { dini, non_dini, undetermined };
std::string dini_flag_name(DiniFlag f);

constexpr double kDefaultProfileRatio = 0.84089641525371454;  // 2^(-1/4)

struct OscillationProfile {
  std::vector<double> radii;  // strictly decreasing geometric sequence
  std::vector<double> xs;     // -ln(radii), uniform step
  std::vector<double> omega;
  double step = 0.0;
  DiniFlag flag = DiniFlag::undetermined;

  std::size_t size() const { return radii.size(); }
  // Piecewise-linear in x, clamped beyond the sampled range.
  double omega_at_x(double x) const;
  double omega_at_r(double r) const { return omega_at_x(-std::log(r)); }
};

OscillationProfile profile_from_modulus(const Modulus& m, double r_top,
                                        double x_max,
                                        double ratio = kDefaultProfileRatio);

struct TildeParams {
  double kappa = 0.25;
  double beta = 0.5;  // ln(1/2) / ln(kappa)

  TildeParams() = default;
  explicit TildeParams(double kappa_);
};

// Cached row-prefix sums over one grid function, for repeated ball scans.
// Components that are constant across the grid contribute exactly zero to
// every oscillation and are skipped.
class FieldScanner {
 public:
  explicit FieldScanner(const GridFunction& f);

  const GridFunction& field() const { return *f_; }
  std::vector<double> ball_mean(const Ball& b) const;
  // Mean over the ball of the Euclidean norm of (f - ball mean of f).
  double oscillation(const Ball& b) const;

 private:
  const GridFunction* f_;
  int nc_;
  std::vector<int> varying_;
  std::vector<double> constant_value_;
  std::vector<std::vector<double>> prefix_;  // per varying comp, n*(n+1)
};

// sup over centers of the ball oscillation at radius r. Centers must lie in
// the concentric sub-square of half-width (3/4) extent.
double mean_oscillation(const FieldScanner& s, double r,
                        const std::vector<Point>& centers);
double mean_oscillation(const GridFunction& f, double r,
                        const std::vector<Point>& centers);

// Every stride-th cell center inside the central 3/4 sub-square.
std::vector<Point> lattice_centers(const Grid& g, int stride = 4);

// Concentric 5x5 offset rings with half-widths (3/4) extent, halving down to
// the resolvable scale: a small center set that tracks where the oscillation
// sup of radially concentrated fields lives.
std::vector<Point> zoom_centers(const Grid& g);

OscillationProfile profile_from_field(const FieldScanner& s,
                                      const std::vector<Point>& centers,
                                      double r_top, double r_bottom,
                                      double ratio = kDefaultProfileRatio);

struct DiniResult {
  double value = 0.0;
  bool divergent = false;
  double tail_exponent = 0.0;  // fitted m in omega ~ (-ln t)^{-m} at depth
};

// integral_0^r omega(t)/t dt: geometric-midpoint sums over the sampled
// profile plus a fitted power-law tail below the deepest sample. Divergent
// when the fitted tail exponent is <= 1.02, when the extrapolated tail
// dwarfs the partial sum, or when partial sums pass the cap.
DiniResult dini_integral(const OscillationProfile& p, double r);

// Sets p.flag from the same tail diagnostics.
void classify_dini(OscillationProfile& p);

// omega_tilde(t) = sum_{i>=1} 2^{-i} (omega(kappa^{-i} t) if kappa^{-i} t <=
// r_ref else omega(r_ref)); the all-reference tail is added in closed form.
double tilde_transform(const Modulus& m, const TildeParams& tp, double t,
                       double r_ref = 1.0);
double tilde_transform(const OscillationProfile& p, const TildeParams& tp,
                       double t);

struct MonotoneConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  bool ok = false;
};

// Tightest constants with c1 omega(t) <= omega(s) <= c2 omega(t) over all
// sampled windows kappa t <= s <= t. ok = false when omega vanishes on part
// of a window while positive elsewhere in it.
MonotoneConstants almost_monotone_constants(const OscillationProfile& p,
                                            double kappa);

struct DyadicSumResult {
  double dyadic_sum = 0.0;  // sum_{i>=0} omega(kappa^i r), tail-extrapolated
  double integral = 0.0;    // fine-quadrature integral_0^r omega/t dt
  double ratio = 0.0;
  bool divergent = false;
};

DyadicSumResult dyadic_sum_check(const OscillationProfile& p, double kappa,
                                 double r);

struct TildeBandReport {
  std::vector<double> r_values;
  std::vector<double> products;  // dini_integral(omega_tilde, r) * ln(4/r)
  double sup = 0.0;
  double band = 0.0;  // max/min over finite products
  bool divergent = false;
};

// Products of the transformed-modulus integral against ln(4/r); a bounded
// band certifies that the transform preserves the integrability margin.
// Defaults to the borderline modulus (ln(t/4))^{-2}.
TildeBandReport tilde_band_check(const TildeParams& tp,
                                 const std::vector<double>& r_values);
TildeBandReport tilde_band_check(const Modulus& base, const TildeParams& tp,
                                 const std::vector<double>& r_values);

// Columns: r, omega, omega_tilde, dini_partial_sum.
void save_profile_csv(const OscillationProfile& p, const TildeParams& tp,
                      const std::string& path);

}  // namespace dmo
