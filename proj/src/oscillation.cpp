#include "dmo/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "dmo/util.hpp"

namespace dmo {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSumCap = 1e6;
constexpr double kDivergentExponent = 1.02;  // integrand x^{-m} diverges at m = 1
constexpr double kDiniExponent = 1.15;
constexpr double kTailDominanceFactor = 50.0;
const double kLn4 = std::log(4.0);
}  // namespace

Modulus modulus_linear() {
  return {"linear", [](double x) { return std::exp(-x); }};
}

Modulus modulus_log_power(double gamma) {
  if (!(gamma > 0.0))
    throw InvalidExponent("modulus_log_power: gamma must be positive");
  char name[48];
  std::snprintf(name, sizeof name, "log_power_%g", gamma);
  return {name, [gamma](double x) {
            return x > 0.0 ? std::pow(x, -gamma) : kInf;
          }};
}

Modulus modulus_shifted_log_sq() {
  return {"shifted_log_sq", [](double x) {
            const double s = x + kLn4;
            return 1.0 / (s * s);
          }};
}

Modulus modulus_constant(double c) {
  return {"constant", [c](double) { return c; }};
}

std::string dini_flag_name(DiniFlag f) {
  switch (f) {
    case DiniFlag::dini: return "dini";
    case DiniFlag::non_dini: return "non_dini";
    default: return "undetermined";
  }
}

double OscillationProfile::omega_at_x(double x) const {
  if (x <= xs.front()) return omega.front();
  if (x >= xs.back()) return omega.back();
  auto k = std::size_t((x - xs.front()) / step);
  if (k >= xs.size() - 1) k = xs.size() - 2;
  const double frac = (x - xs[k]) / step;
  return omega[k] + frac * (omega[k + 1] - omega[k]);
}

OscillationProfile profile_from_modulus(const Modulus& m, double r_top,
                                        double x_max, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw Error("profile_from_modulus: ratio must lie in (0,1)");
  OscillationProfile p;
  p.step = -std::log(ratio);
  const double x0 = -std::log(r_top);
  if (x_max < x0 + p.step)
    throw Error("profile_from_modulus: empty sampling range");
  for (std::size_t k = 0;; ++k) {
    const double x = x0 + double(k) * p.step;
    if (x > x_max + 1e-12) break;
    p.xs.push_back(x);
    p.radii.push_back(std::exp(-x));
    p.omega.push_back(m(x));
  }
  if (p.size() >= 12) classify_dini(p);
  return p;
}

TildeParams::TildeParams(double kappa_) : kappa(kappa_) {
  if (!(kappa > 0.0 && kappa <= 0.5))
    throw Error("tilde params: kappa must lie in (0, 1/2], got " +
                std::to_string(kappa));
  beta = std::log(0.5) / std::log(kappa);
}

FieldScanner::FieldScanner(const GridFunction& f) : f_(&f), nc_(f.ncomp()) {
  const std::size_t cells = f.grid.cells();
  constant_value_.assign(nc_, 0.0);
  for (int c = 0; c < nc_; ++c) {
    double lo = f.values[c], hi = f.values[c];
    for (std::size_t cell = 1; cell < cells; ++cell) {
      const double v = f.values[cell * nc_ + c];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) {
      constant_value_[c] = lo;
    } else {
      varying_.push_back(c);
    }
  }
  const int n = f.grid.n;
  prefix_.resize(varying_.size());
  for (std::size_t v = 0; v < varying_.size(); ++v) {
    const int c = varying_[v];
    auto& pre = prefix_[v];
    pre.assign(std::size_t(n) * (n + 1), 0.0);
    for (int j = 0; j < n; ++j) {
      const std::size_t row = std::size_t(j) * (n + 1);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += f.values[(f.grid.index(i, j)) * nc_ + c];
        pre[row + i + 1] = acc;
      }
    }
  }
}

std::vector<double> FieldScanner::ball_mean(const Ball& b) const {
  const Grid& g = f_->grid;
  if (b.radius < 2.0 * g.h)
    throw EmptyBall("ball radius below resolvable scale 2h");
  std::vector<double> mean = constant_value_;
  std::vector<double> sums(varying_.size(), 0.0);
  std::size_t count = 0;
  int jlo = int((b.center.y - b.radius + g.extent) / g.h - 0.5) - 1;
  int jhi = int((b.center.y + b.radius + g.extent) / g.h - 0.5) + 1;
  jlo = std::max(jlo, 0);
  jhi = std::min(jhi, g.n - 1);
  for (int j = jlo; j <= jhi; ++j) {
    const RowSpan s = ball_row_span(g, b, j);
    if (s.empty()) continue;
    count += std::size_t(s.hi - s.lo + 1);
    const std::size_t row = std::size_t(j) * (g.n + 1);
    for (std::size_t v = 0; v < varying_.size(); ++v)
      sums[v] += prefix_[v][row + s.hi + 1] - prefix_[v][row + s.lo];
  }
  if (count == 0) throw EmptyBall("no cell center inside ball");
  for (std::size_t v = 0; v < varying_.size(); ++v)
    mean[varying_[v]] = sums[v] / double(count);
  return mean;
}

double FieldScanner::oscillation(const Ball& b) const {
  const Grid& g = f_->grid;
  const std::vector<double> mean = ball_mean(b);
  if (varying_.empty()) return 0.0;
  const std::size_t nv = varying_.size();
  double acc = 0.0;
  std::size_t count = 0;
  int jlo = int((b.center.y - b.radius + g.extent) / g.h - 0.5) - 1;
  int jhi = int((b.center.y + b.radius + g.extent) / g.h - 0.5) + 1;
  jlo = std::max(jlo, 0);
  jhi = std::min(jhi, g.n - 1);
  const double* vals = f_->values.data();
  for (int j = jlo; j <= jhi; ++j) {
    const RowSpan s = ball_row_span(g, b, j);
    if (s.empty()) continue;
    count += std::size_t(s.hi - s.lo + 1);
    if (nv == 1) {
      const int c = varying_[0];
      const double m0 = mean[c];
      const double* p = vals + (g.index(s.lo, j)) * nc_ + c;
      for (int i = s.lo; i <= s.hi; ++i, p += nc_) acc += std::abs(*p - m0);
    } else {
      for (int i = s.lo; i <= s.hi; ++i) {
        const double* p = vals + (g.index(i, j)) * nc_;
        double q = 0.0;
        for (std::size_t v = 0; v < nv; ++v) {
          const double d = p[varying_[v]] - mean[varying_[v]];
          q += d * d;
        }
        acc += std::sqrt(q);
      }
    }
  }
  return acc / double(count);
}

static void check_centers_in_b3(const Grid& g, const std::vector<Point>& centers) {
  if (centers.empty()) throw Error("mean_oscillation: empty center set");
  const double lim = 0.75 * g.extent * (1.0 + 1e-9);
  for (const Point& c : centers)
    if (std::abs(c.x) > lim || std::abs(c.y) > lim)
      throw Error("mean_oscillation: center outside the central sub-square");
}

double mean_oscillation(const FieldScanner& s, double r,
                        const std::vector<Point>& centers) {
  check_centers_in_b3(s.field().grid, centers);
  std::vector<double> vals(centers.size(), 0.0);
  parallel_for(centers.size(), [&](std::size_t i) {
    vals[i] = s.oscillation(Ball{centers[i], r});
  });
  return *std::max_element(vals.begin(), vals.end());
}

double mean_oscillation(const GridFunction& f, double r,
                        const std::vector<Point>& centers) {
  FieldScanner s(f);
  return mean_oscillation(s, r, centers);
}

std::vector<Point> lattice_centers(const Grid& g, int stride) {
  if (stride < 1) throw Error("lattice_centers: stride must be >= 1");
  std::vector<Point> pts;
  const double lim = 0.75 * g.extent;
  for (int j = stride / 2; j < g.n; j += stride)
    for (int i = stride / 2; i < g.n; i += stride) {
      const Point p = g.point(i, j);
      if (std::abs(p.x) <= lim && std::abs(p.y) <= lim) pts.push_back(p);
    }
  return pts;
}

std::vector<Point> zoom_centers(const Grid& g) {
  std::vector<Point> pts;
  std::set<std::pair<int, int>> seen;
  const double lim = 0.75 * g.extent;
  const int ilo = int(std::ceil((-lim + g.extent) / g.h - 0.5));
  const int ihi = int(std::floor((lim + g.extent) / g.h - 0.5));
  auto push = [&](double x, double y) {
    int i = int(std::lround((x + g.extent) / g.h - 0.5));
    int j = int(std::lround((y + g.extent) / g.h - 0.5));
    i = std::clamp(i, ilo, ihi);
    j = std::clamp(j, ilo, ihi);
    if (seen.insert({i, j}).second) pts.push_back(g.point(i, j));
  };
  const double offs[5] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  for (double w = lim; w >= 4.0 * g.h; w *= 0.5)
    for (double fy : offs)
      for (double fx : offs) push(fx * w, fy * w);
  if (pts.empty()) push(0.0, 0.0);
  return pts;
}

OscillationProfile profile_from_field(const FieldScanner& s,
                                      const std::vector<Point>& centers,
                                      double r_top, double r_bottom,
                                      double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw Error("profile_from_field: ratio must lie in (0,1)");
  const Grid& g = s.field().grid;
  const double rb = std::max(r_bottom, 2.0 * g.h);
  OscillationProfile p;
  p.step = -std::log(ratio);
  for (double r = r_top; r >= rb * (1.0 - 1e-12); r *= ratio) {
    const double rr = std::max(r, rb);
    p.radii.push_back(rr);
    p.xs.push_back(-std::log(rr));
    p.omega.push_back(mean_oscillation(s, rr, centers));
  }
  if (p.size() < 2) throw InsufficientSamples("profile_from_field: radius range too narrow");
  if (p.size() >= 12) classify_dini(p);
  return p;
}

namespace {

struct TailFit {
  double m_hat = std::numeric_limits<double>::quiet_NaN();
  bool usable = false;
};

// Exponent of omega ~ x^{-m} over the last e-fold of sampled depth.
TailFit fit_tail_exponent(const std::vector<double>& xs,
                          const std::vector<double>& omega) {
  TailFit tf;
  const double x_deep = xs.back();
  if (!(x_deep > 0.5)) return tf;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (xs[k] >= x_deep / 2.718281828459045 && xs[k] > 0.0 && omega[k] > 0.0) {
      lx.push_back(std::log(xs[k]));
      ly.push_back(std::log(omega[k]));
    }
  if (lx.size() < 5) {
    lx.clear();
    ly.clear();
    for (std::size_t k = xs.size() >= 5 ? xs.size() - 5 : 0; k < xs.size(); ++k)
      if (xs[k] > 0.0 && omega[k] > 0.0) {
        lx.push_back(std::log(xs[k]));
        ly.push_back(std::log(omega[k]));
      }
  }
  if (lx.size() < 2) return tf;
  tf.m_hat = -fit_line(lx, ly).slope;
  tf.usable = true;
  return tf;
}

}  // namespace

DiniResult dini_integral(const OscillationProfile& p, double r) {
  const double x_r = -std::log(r);
  if (x_r < p.xs.front() - 1e-9)
    throw InsufficientSamples("dini_integral: profile does not reach up to r");
  long i0 = long(std::ceil((x_r - p.xs.front()) / p.step - 1e-9));
  if (i0 < 0) i0 = 0;
  const long last = long(p.size()) - 1;
  if (last - i0 < 10)
    throw InsufficientSamples("dini_integral: fewer than 10 dyadic levels below r");
  DiniResult res;
  double s = 0.0;
  for (long k = i0; k < last; ++k) {
    const double a = p.omega[k], b = p.omega[k + 1];
    const double mid = (a > 0.0 && b > 0.0) ? std::sqrt(a * b) : 0.5 * (a + b);
    s += p.step * mid;
    if (s > kSumCap) {
      res.divergent = true;
      res.value = kInf;
      return res;
    }
  }
  const TailFit tf = fit_tail_exponent(p.xs, p.omega);
  res.tail_exponent = tf.m_hat;
  const double a_deep = p.omega.back();
  double tail = 0.0;
  if (a_deep > 0.0 && tf.usable) {
    if (tf.m_hat <= kDivergentExponent) {
      res.divergent = true;
      res.value = kInf;
      return res;
    }
    tail = a_deep * p.xs.back() / (tf.m_hat - 1.0);
    if (tail > kTailDominanceFactor * (s + 1e-300)) {
      res.divergent = true;
      res.value = kInf;
      return res;
    }
  }
  res.value = s + tail;
  return res;
}

void classify_dini(OscillationProfile& p) {
  if (p.size() < 12) {
    p.flag = DiniFlag::undetermined;
    return;
  }
  const DiniResult d = dini_integral(p, p.radii.front());
  if (d.divergent) {
    p.flag = DiniFlag::non_dini;
  } else if (d.value == 0.0 || d.tail_exponent >= kDiniExponent) {
    p.flag = DiniFlag::dini;
  } else {
    p.flag = DiniFlag::undetermined;
  }
}

namespace {

// Core of the transform in x = -ln t coordinates; x_ref = -ln r_ref.
double tilde_core(const std::function<double(double)>& a, double kappa,
                  double x, double x_ref) {
  const double lk = std::log(1.0 / kappa);
  if (x < x_ref - 1e-12)
    throw Error("tilde_transform: t must not exceed the reference radius");
  long N = long(std::floor((x - x_ref) / lk * (1.0 + 1e-15) + 1e-12));
  if (N < 0) N = 0;
  double s = 0.0, w = 1.0;
  for (long i = 1; i <= N; ++i) {
    w *= 0.5;
    s += w * a(x - double(i) * lk);
    if (w < 1e-14) return s;  // geometric remainder below truncation threshold
  }
  return s + w * a(x_ref);  // all deeper terms sit at the reference radius
}

}  // namespace

double tilde_transform(const Modulus& m, const TildeParams& tp, double t,
                       double r_ref) {
  return tilde_core(m.a, tp.kappa, -std::log(t), -std::log(r_ref));
}

double tilde_transform(const OscillationProfile& p, const TildeParams& tp,
                       double t) {
  auto a = [&p](double x) { return p.omega_at_x(x); };
  return tilde_core(a, tp.kappa, -std::log(t), p.xs.front());
}

MonotoneConstants almost_monotone_constants(const OscillationProfile& p,
                                            double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw Error("almost_monotone_constants: kappa must lie in (0,1)");
  const double lk = std::log(1.0 / kappa);
  MonotoneConstants mc;
  mc.c1 = kInf;
  mc.c2 = 0.0;
  bool vanishing_conflict = false;
  std::size_t windows = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double x_t = p.xs[k];
    if (x_t + lk > p.xs.back() + 1e-9) break;
    const auto jhi =
        std::size_t((x_t + lk - p.xs.front()) / p.step + 1e-9);
    if (jhi - k + 1 < 3)
      throw InsufficientSamples(
          "almost_monotone_constants: window holds fewer than 3 samples");
    const double base = p.omega[k];
    if (base == 0.0) {
      for (std::size_t j = k; j <= jhi; ++j)
        if (p.omega[j] != 0.0) vanishing_conflict = true;
      continue;
    }
    ++windows;
    for (std::size_t j = k; j <= jhi; ++j) {
      const double ratio = p.omega[j] / base;
      mc.c1 = std::min(mc.c1, ratio);
      mc.c2 = std::max(mc.c2, ratio);
    }
  }
  if (vanishing_conflict) return {0.0, 0.0, false};
  if (windows == 0) return {1.0, 1.0, true};
  mc.ok = true;
  return mc;
}

DyadicSumResult dyadic_sum_check(const OscillationProfile& p, double kappa,
                                 double r) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw Error("dyadic_sum_check: kappa must lie in (0,1)");
  DyadicSumResult res;
  const DiniResult den = dini_integral(p, r);
  if (den.divergent) {
    res.divergent = true;
    return res;
  }
  const double lk = std::log(1.0 / kappa);
  const double x_r = -std::log(r);
  double s = 0.0;
  for (long i = 0;; ++i) {
    const double x = x_r + double(i) * lk;
    if (x > p.xs.back() + 1e-9) break;
    s += p.omega_at_x(x);
    if (s > kSumCap) {
      res.divergent = true;
      return res;
    }
  }
  const TailFit tf = fit_tail_exponent(p.xs, p.omega);
  if (p.omega.back() > 0.0 && tf.usable && tf.m_hat > kDivergentExponent)
    s += p.omega.back() * p.xs.back() / ((tf.m_hat - 1.0) * lk);
  res.dyadic_sum = s;
  res.integral = den.value;
  res.ratio = (den.value > 0.0) ? s / den.value : (s == 0.0 ? 1.0 : kInf);
  return res;
}

TildeBandReport tilde_band_check(const Modulus& base, const TildeParams& tp,
                                   const std::vector<double>& r_values) {
  if (r_values.empty()) throw Error("tilde_band_check: no radii given");
  double x_deepest = 0.0;
  for (double r : r_values) x_deepest = std::max(x_deepest, -std::log(r));
  const double x_max = std::max(160.0, x_deepest + 80.0);
  Modulus transformed{"tilde_" + base.name, [&base, &tp](double x) {
                        return tilde_core(base.a, tp.kappa, x, 0.0);
                      }};
  const double r_top = std::exp(-0.02);
  const OscillationProfile prof =
      profile_from_modulus(transformed, r_top, x_max);
  TildeBandReport rep;
  double lo = kInf, hi = 0.0;
  for (double r : r_values) {
    const DiniResult d = dini_integral(prof, r);
    const double product =
        d.divergent ? kInf : d.value * (-std::log(r) + kLn4);
    rep.r_values.push_back(r);
    rep.products.push_back(product);
    if (d.divergent) {
      rep.divergent = true;
    } else {
      lo = std::min(lo, product);
      hi = std::max(hi, product);
    }
  }
  rep.sup = rep.divergent ? kInf : hi;
  rep.band = rep.divergent ? kInf : hi / lo;
  return rep;
}

TildeBandReport tilde_band_check(const TildeParams& tp,
                                   const std::vector<double>& r_values) {
  return tilde_band_check(modulus_shifted_log_sq(), tp, r_values);
}

void save_profile_csv(const OscillationProfile& p, const TildeParams& tp,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "r,omega,omega_tilde,dini_partial_sum\n";
  double partial = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k > 0) {
      const double a = p.omega[k - 1], b = p.omega[k];
      partial +=
          p.step * ((a > 0.0 && b > 0.0) ? std::sqrt(a * b) : 0.5 * (a + b));
    }
    const double tilde = tilde_transform(p, tp, p.radii[k]);
    out << fmt_g17(p.radii[k]) << ',' << fmt_g17(p.omega[k]) << ','
        << fmt_g17(tilde) << ',' << fmt_g17(partial) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace dmo
