#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace dmo {

// Ordinary least squares y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = double(n) * sxx - sx * sx;
  LineFit f;
  if (denom != 0.0) {
    f.slope = (double(n) * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / double(n);
  }
  return f;
}

inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t seed = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// Named splittable generator: every consumer derives its stream from
// (seed, name), so adding consumers never perturbs existing streams.
inline std::mt19937_64 make_rng(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = fnv1a(name);
  h = fnv1a(&seed, sizeof seed, h);
  return std::mt19937_64(h);
}

class Timer {
 public:
  Timer() : start_(clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

// Global worker budget for parallel sweeps; 0 means use hardware_concurrency.
int& thread_budget();

// Runs fn(i) for i in [0, count). Work is split into contiguous chunks so
// results written to per-index slots are independent of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

}  // namespace dmo
