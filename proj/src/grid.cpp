#include "dmo/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dmo {

Grid::Grid(int n_, double extent_) : n(n_), extent(extent_) {
  if (n < 8) throw Error("grid: n must be >= 8, got " + std::to_string(n));
  if (!(extent > 0.0)) throw Error("grid: extent must be positive");
  h = 2.0 * extent / n;
}

std::string rank_name(Rank r) {
  switch (r) {
    case Rank::scalar: return "scalar";
    case Rank::vector: return "vector";
    default: return "matrix";
  }
}

Rank rank_from_name(const std::string& s) {
  if (s == "scalar") return Rank::scalar;
  if (s == "vector") return Rank::vector;
  if (s == "matrix") return Rank::matrix;
  throw Error("unknown rank name: " + s);
}

double GridFunction::norm_at(std::size_t cell) const {
  const int nc = ncomp();
  if (nc == 1) return std::abs(values[cell]);
  double s = 0.0;
  for (int c = 0; c < nc; ++c) {
    const double v = values[cell * nc + c];
    s += v * v;
  }
  return std::sqrt(s);
}

RowSpan ball_row_span(const Grid& g, const Ball& b, int j) {
  RowSpan span;
  const double dy = g.coord(j) - b.center.y;
  const double dx2 = b.radius * b.radius - dy * dy;
  if (dx2 <= 0.0) return span;
  const double half = std::sqrt(dx2);
  auto inside = [&](int i) {
    if (i < 0 || i >= g.n) return false;
    const double dx = g.coord(i) - b.center.x;
    return dx * dx + dy * dy < b.radius * b.radius;
  };
  int lo = int(std::floor((b.center.x - half + g.extent) / g.h - 0.5));
  int hi = int(std::ceil((b.center.x + half + g.extent) / g.h - 0.5));
  while (lo <= hi && !inside(lo)) ++lo;
  while (inside(lo - 1)) --lo;
  while (hi >= lo && !inside(hi)) --hi;
  while (inside(hi + 1)) ++hi;
  if (lo < 0) lo = 0;
  if (hi > g.n - 1) hi = g.n - 1;
  span.lo = lo;
  span.hi = hi;
  return span;
}

std::size_t ball_cell_count(const Grid& g, const Ball& b) {
  std::size_t count = 0;
  for_each_ball_cell(g, b, [&](int, int) { ++count; });
  return count;
}

std::vector<double> ball_average(const GridFunction& f, const Ball& b) {
  const int nc = f.ncomp();
  std::vector<double> sum(nc, 0.0);
  std::size_t count = 0;
  for_each_ball_cell(f.grid, b, [&](int i, int j) {
    const std::size_t cell = f.grid.index(i, j);
    for (int c = 0; c < nc; ++c) sum[c] += f.at(cell, c);
    ++count;
  });
  for (int c = 0; c < nc; ++c) sum[c] /= double(count);
  return sum;
}

static double quasi_mean_impl(const GridFunction& f, const Ball& b, double p,
                              const double* shift) {
  if (!(p > 0.0) || p > 1.0)
    throw InvalidExponent("lp_quasi_mean: p must lie in (0,1], got " + std::to_string(p));
  const int nc = f.ncomp();
  double acc = 0.0;
  std::size_t count = 0;
  for_each_ball_cell(f.grid, b, [&](int i, int j) {
    const std::size_t cell = f.grid.index(i, j);
    double s = 0.0;
    for (int c = 0; c < nc; ++c) {
      const double v = f.at(cell, c) - (shift ? shift[c] : 0.0);
      s += v * v;
    }
    const double a = std::sqrt(s);
    acc += (p == 1.0) ? a : std::pow(a, p);
    ++count;
  });
  const double mean = acc / double(count);
  return (p == 1.0) ? mean : std::pow(mean, 1.0 / p);
}

double lp_quasi_mean(const GridFunction& f, const Ball& b, double p) {
  return quasi_mean_impl(f, b, p, nullptr);
}

double lp_quasi_mean_shifted(const GridFunction& f, const Ball& b, double p,
                             const std::vector<double>& shift) {
  if (int(shift.size()) != f.ncomp())
    throw Error("lp_quasi_mean_shifted: shift size does not match components");
  return quasi_mean_impl(f, b, p, shift.data());
}

double distribution_measure(const GridFunction& f, double alpha, const Ball& region) {
  std::size_t count = 0;
  for_each_ball_cell(f.grid, region, [&](int i, int j) {
    if (f.norm_at(f.grid.index(i, j)) > alpha) ++count;
  });
  return double(count) * f.grid.h * f.grid.h;
}

namespace {

// One-dimensional second-order first derivative along direction `axis`.
double d1(const GridFunction& u, int i, int j, int axis, double h) {
  const int n = u.grid.n;
  auto v = [&](int di) {
    return (axis == 0) ? u.at(i + di, j) : u.at(i, j + di);
  };
  const int k = (axis == 0) ? i : j;
  if (k == 0) return (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h);
  if (k == n - 1) return (3.0 * v(0) - 4.0 * v(-1) + v(-2)) / (2.0 * h);
  return (v(1) - v(-1)) / (2.0 * h);
}

double d2(const GridFunction& u, int i, int j, int axis, double h) {
  const int n = u.grid.n;
  auto v = [&](int di) {
    return (axis == 0) ? u.at(i + di, j) : u.at(i, j + di);
  };
  const int k = (axis == 0) ? i : j;
  if (k == 0) return (2.0 * v(0) - 5.0 * v(1) + 4.0 * v(2) - v(3)) / (h * h);
  if (k == n - 1) return (2.0 * v(0) - 5.0 * v(-1) + 4.0 * v(-2) - v(-3)) / (h * h);
  return (v(1) - 2.0 * v(0) + v(-1)) / (h * h);
}

}  // namespace

GridFunction finite_difference_gradient(const GridFunction& u) {
  if (u.rank != Rank::scalar) throw Error("finite_difference_gradient: scalar input required");
  GridFunction g(u.grid, Rank::vector);
  const int n = u.grid.n;
  const double h = u.grid.h;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      g.at(i, j, 0) = d1(u, i, j, 0, h);
      g.at(i, j, 1) = d1(u, i, j, 1, h);
    }
  return g;
}

GridFunction finite_difference_hessian(const GridFunction& u) {
  if (u.rank != Rank::scalar) throw Error("finite_difference_hessian: scalar input required");
  const int n = u.grid.n;
  const double h = u.grid.h;
  GridFunction gx(u.grid, Rank::scalar);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) gx.at(i, j) = d1(u, i, j, 0, h);
  GridFunction out(u.grid, Rank::matrix);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double uxx = d2(u, i, j, 0, h);
      const double uyy = d2(u, i, j, 1, h);
      const double uxy = d1(gx, i, j, 1, h);
      out.at(i, j, 0) = uxx;
      out.at(i, j, 1) = uxy;
      out.at(i, j, 2) = uxy;
      out.at(i, j, 3) = uyy;
    }
  return out;
}

static const char kMagic[8] = {'D', 'M', 'O', 'G', 'F', 'N', '1', '\n'};

void save_binary(const GridFunction& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kMagic, 8);
  const std::int32_t n = f.grid.n;
  const std::int32_t r = int(f.rank);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&f.grid.extent), 8);
  out.write(reinterpret_cast<const char*>(&r), 4);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            std::streamsize(f.values.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path);
}

GridFunction load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("bad field file header: " + path);
  std::int32_t n = 0, r = 0;
  double extent = 0.0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&extent), 8);
  in.read(reinterpret_cast<char*>(&r), 4);
  if (!in || r < 0 || r > 2) throw IoError("bad field header fields: " + path);
  GridFunction f(Grid(n, extent), Rank(r));
  in.read(reinterpret_cast<char*>(f.values.data()),
          std::streamsize(f.values.size() * sizeof(double)));
  if (!in) throw IoError("truncated field file: " + path);
  return f;
}

void save_csv(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  char buf[64];
  out << "n,extent,rank\n";
  std::snprintf(buf, sizeof buf, "%.17g", f.grid.extent);
  out << f.grid.n << ',' << buf << ',' << rank_name(f.rank) << '\n';
  const int nc = f.ncomp();
  out << "i,j";
  for (int c = 0; c < nc; ++c) out << ",v" << c;
  out << '\n';
  for (int j = 0; j < f.grid.n; ++j)
    for (int i = 0; i < f.grid.n; ++i) {
      out << i << ',' << j;
      for (int c = 0; c < nc; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", f.at(i, j, c));
        out << ',' << buf;
      }
      out << '\n';
    }
  if (!out) throw IoError("write failed: " + path);
}

GridFunction load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "n,extent,rank")
    throw IoError("bad csv header: " + path);
  if (!std::getline(in, line)) throw IoError("truncated csv: " + path);
  std::istringstream meta(line);
  std::string tok;
  std::getline(meta, tok, ',');
  const int n = std::stoi(tok);
  std::getline(meta, tok, ',');
  const double extent = std::stod(tok);
  std::getline(meta, tok, ',');
  GridFunction f(Grid(n, extent), rank_from_name(tok));
  if (!std::getline(in, line)) throw IoError("truncated csv: " + path);
  const int nc = f.ncomp();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::getline(row, tok, ',');
    const int i = std::stoi(tok);
    std::getline(row, tok, ',');
    const int j = std::stoi(tok);
    for (int c = 0; c < nc; ++c) {
      if (!std::getline(row, tok, ',')) throw IoError("short csv row: " + path);
      f.at(i, j, c) = std::stod(tok);
    }
  }
  return f;
}

}  // namespace dmo
