#pragma once

#include <cmath>
#include <vector>

namespace wkam {

/// nx nodes x_i = i/nx on the circle, nt substeps t_r = r/nt per unit time.
struct GridSpec {
  int nx = 400;
  int nt = 64;
  double dx() const { return 1.0 / nx; }
  double dt() const { return 1.0 / nt; }
};

/// Nearest node index of x on an nx-point circle grid, and the signed offset x - x_node in cells.
struct NodeLookup {
  int index = 0;
  double offset_cells = 0.0;
};

inline NodeLookup nearest_node(double x, int nx) {
  const double s = (x - std::floor(x)) * nx;
  int i = static_cast<int>(std::lround(s));
  const double off = s - i;
  i %= nx;
  if (i < 0) i += nx;
  return {i, off};
}

inline int wrap_index(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

/// A scalar field over (x-node, substep layer), stored layer-major.
struct GridField {
  int nx = 0;
  int nt = 0;
  std::vector<double> values;

  GridField() = default;
  GridField(int nx_, int nt_, double fill = 0.0) : nx(nx_), nt(nt_), values(std::size_t(nx_) * nt_, fill) {}

  double& at(int i, int r) { return values[std::size_t(r) * nx + i]; }
  double at(int i, int r) const { return values[std::size_t(r) * nx + i]; }
  const double* layer(int r) const { return values.data() + std::size_t(r) * nx; }
  double* layer(int r) { return values.data() + std::size_t(r) * nx; }

  /// Periodic bilinear interpolation in (x, t).
  double sample(double x, double t) const {
    const double sx = (x - std::floor(x)) * nx;
    const double st = (t - std::floor(t)) * nt;
    const int i0 = static_cast<int>(sx) % nx;
    const int r0 = static_cast<int>(st) % nt;
    const double fx = sx - std::floor(sx);
    const double ft = st - std::floor(st);
    const int i1 = (i0 + 1) % nx;
    const int r1 = (r0 + 1) % nt;
    const double a = (1.0 - fx) * at(i0, r0) + fx * at(i1, r0);
    const double b = (1.0 - fx) * at(i0, r1) + fx * at(i1, r1);
    return (1.0 - ft) * a + ft * b;
  }
};

}  // namespace wkam
