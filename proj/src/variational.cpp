#include "wkam/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "wkam/error.hpp"
#include "wkam/parallel.hpp"

namespace wkam {

ActionKernelSet build_kernels(const HamiltonianModel& model, const GridSpec& grid, double vmax) {
  if (grid.nx < 2 || grid.nt < 2) throw ConfigurationError("grid needs nx >= 2 and nt >= 2");
  if (!(vmax > 0.0)) throw ConfigurationError("vmax must be positive");
  const int band = static_cast<int>(std::floor(vmax / grid.nt * grid.nx + 1e-9));
  if (band < 2) {
    std::ostringstream msg;
    msg << "vmax " << vmax << " too small for nx=" << grid.nx << ", nt=" << grid.nt
        << " (need vmax/nt >= 2/nx)";
    throw ConfigurationError(msg.str());
  }
  if (2 * band + 1 > grid.nx) throw ConfigurationError("vmax/nt exceeds half a turn per substep");
  ActionKernelSet k;
  k.grid_ = grid;
  k.vmax_ = vmax;
  k.band_ = band;
  const int width = 2 * band + 1;
  k.costs_.resize(std::size_t(grid.nt) * grid.nx * width);
  const double inv_nt = 1.0 / grid.nt;
  parallel_for(std::size_t(grid.nt), [&](std::size_t j) {
    const double t = (j + 0.5) * inv_nt;
    for (int a = 0; a < grid.nx; ++a) {
      double* row = k.costs_.data() + (j * grid.nx + a) * width;
      for (int d = -band; d <= band; ++d) {
        const double x_mid = (a + 0.5 * d) / grid.nx;
        const double v = double(d) * grid.nt / grid.nx;
        row[d + band] = model.lagrangian(x_mid, v, t).L * inv_nt;
      }
    }
  });
  return k;
}

ActionKernelSet ActionKernelSet::shifted(double a) const {
  ActionKernelSet k = *this;
  const double add = a / grid_.nt;
  for (double& v : k.costs_) v += add;
  return k;
}

PeriodMatrix compose_period(const ActionKernelSet& kernels) {
  const int n = kernels.nx();
  const int nt = kernels.nt();
  const int band = kernels.band();
  PeriodMatrix W;
  W.n = n;
  W.w.assign(std::size_t(n) * n, 0.0);
  W.reached.assign(std::size_t(n) * n, 0);
  parallel_blocks(std::size_t(n), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> cur(n), next(n);
    std::vector<std::uint8_t> cur_ok(n), next_ok(n);
    for (std::size_t src = lo; src < hi; ++src) {
      std::fill(cur_ok.begin(), cur_ok.end(), 0);
      cur[src] = 0.0;
      cur_ok[src] = 1;
      for (int j = 0; j < nt; ++j) {
        std::fill(next_ok.begin(), next_ok.end(), 0);
        for (int a = 0; a < n; ++a) {
          if (!cur_ok[a]) continue;
          const double base = cur[a];
          const double* row = kernels.row(j, a);
          for (int d = -band; d <= band; ++d) {
            int b = a + d;
            if (b < 0) b += n;
            else if (b >= n) b -= n;
            const double v = base + row[d + band];
            if (!next_ok[b] || v < next[b]) {
              next[b] = v;
              next_ok[b] = 1;
            }
          }
        }
        std::swap(cur, next);
        std::swap(cur_ok, next_ok);
      }
      std::copy(cur.begin(), cur.end(), W.w.begin() + src * n);
      std::copy(cur_ok.begin(), cur_ok.end(), W.reached.begin() + src * n);
    }
  });
  return W;
}

namespace {

bool dense(const PeriodMatrix& W) {
  return std::all_of(W.reached.begin(), W.reached.end(), [](std::uint8_t r) { return r != 0; });
}

// One min-plus product out = u (x) W with reachability flags.
void minplus_row(const PeriodMatrix& W, const std::vector<double>& u, const std::vector<std::uint8_t>& u_ok,
                 std::vector<double>& out, std::vector<std::uint8_t>& out_ok, bool all_reached) {
  const int n = W.n;
  std::fill(out_ok.begin(), out_ok.end(), 0);
  bool first = true;
  for (int a = 0; a < n; ++a) {
    if (!u_ok[a]) continue;
    const double base = u[a];
    const double* row = W.w.data() + std::size_t(a) * n;
    if (all_reached) {
      if (first) {
        for (int b = 0; b < n; ++b) out[b] = base + row[b];
        std::fill(out_ok.begin(), out_ok.end(), 1);
        first = false;
      } else {
        for (int b = 0; b < n; ++b) out[b] = std::min(out[b], base + row[b]);
      }
    } else {
      const std::uint8_t* ok = W.reached.data() + std::size_t(a) * n;
      for (int b = 0; b < n; ++b) {
        if (!ok[b]) continue;
        const double v = base + row[b];
        if (!out_ok[b] || v < out[b]) {
          out[b] = v;
          out_ok[b] = 1;
        }
      }
    }
  }
}

void check_connected(const PeriodMatrix& W) {
  const int n = W.n;
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < n; ++b) {
        const bool edge = dir == 0 ? W.ok(a, b) : W.ok(b, a);
        if (edge && !seen[b]) {
          seen[b] = 1;
          ++count;
          stack.push_back(b);
        }
      }
    }
    if (count != n) throw ConfigurationError("reachability graph of the period map is not strongly connected");
  }
}

}  // namespace

double karp_min_cycle_mean(const PeriodMatrix& W) {
  const int n = W.n;
  const bool all = dense(W);
  // D[k][v]: minimal weight of a k-edge walk ending at v, from a virtual source joined to every node at cost 0
  std::vector<std::vector<double>> D(n + 1, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::uint8_t>> ok(n + 1, std::vector<std::uint8_t>(n, 0));
  std::fill(ok[0].begin(), ok[0].end(), 1);
  for (int k = 1; k <= n; ++k) minplus_row(W, D[k - 1], ok[k - 1], D[k], ok[k], all);
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int v = 0; v < n; ++v) {
    if (!ok[n][v]) continue;
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      if (!ok[k][v]) continue;
      worst = std::max(worst, (D[n][v] - D[k][v]) / (n - k));
    }
    best = std::min(best, worst);
    found = true;
  }
  if (!found) throw ConfigurationError("period graph has no cycle");
  return best;
}

PowerIterationResult minplus_power_iteration(const PeriodMatrix& W, int max_iterations, int max_cyclicity) {
  const int n = W.n;
  const bool all = dense(W);
  const int smax = max_cyclicity > 0 ? max_cyclicity : n;
  const int slots = smax + 1;
  std::vector<std::vector<double>> hist(slots, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::uint8_t>> hist_ok(slots, std::vector<std::uint8_t>(n, 1));
  PowerIterationResult r;
  int last_sigma = 0;
  double last_mean = 0.0;
  for (int k = 1; k <= max_iterations; ++k) {
    const auto& prev = hist[(k - 1) % slots];
    const auto& prev_ok = hist_ok[(k - 1) % slots];
    auto& cur = hist[k % slots];
    auto& cur_ok = hist_ok[k % slots];
    minplus_row(W, prev, prev_ok, cur, cur_ok, all);
    r.iterations = k;

    double lo = std::numeric_limits<double>::infinity(), hi = -lo, scale = 1.0;
    bool full = true;
    for (int v = 0; v < n; ++v) {
      if (!cur_ok[v] || !prev_ok[v]) {
        full = false;
        continue;
      }
      const double d = cur[v] - prev[v];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      scale = std::max(scale, std::abs(cur[v]));
    }
    if (!full) continue;
    r.lower = lo;
    r.upper = hi;
    const double tol = 1e-12 * scale;

    int sigma = 0;
    double mean = 0.0;
    for (int s = 1; s <= std::min(k, smax); ++s) {
      const auto& old = hist[(k - s) % slots];
      const auto& old_ok = hist_ok[(k - s) % slots];
      double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
      bool good = true;
      for (int v = 0; v < n && good; ++v) {
        if (!old_ok[v]) {
          good = false;
          break;
        }
        const double d = cur[v] - old[v];
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
        if (dmax - dmin > tol) good = false;
      }
      if (good) {
        sigma = s;
        mean = 0.5 * (dmin + dmax) / s;
        break;
      }
    }
    if (sigma > 0 && sigma == last_sigma && std::abs(mean - last_mean) <= tol) {
      r.mean = mean;
      r.cyclicity = sigma;
      r.exact = true;
      return r;
    }
    last_sigma = sigma;
    last_mean = mean;
  }
  // Cesaro estimate at the last iterate
  const auto& cur = hist[r.iterations % slots];
  r.mean = *std::min_element(cur.begin(), cur.end()) / r.iterations;
  r.mean = std::clamp(r.mean, r.lower, r.upper);
  return r;
}

CriticalValue critical_value(const PeriodMatrix& W) {
  check_connected(W);
  CriticalValue cv;
  cv.c = -karp_min_cycle_mean(W);
  const auto p = minplus_power_iteration(W);
  cv.c_power = -p.mean;
  cv.power_lower = -p.upper;
  cv.power_upper = -p.lower;
  cv.power_exact = p.exact;
  cv.power_iterations = p.iterations;
  cv.cyclicity = p.cyclicity;
  return cv;
}

CriticalValue critical_value(const ActionKernelSet& kernels) { return critical_value(compose_period(kernels)); }

BarrierField anchored_barrier(const ActionKernelSet& kernels, double c, int anchor_node, int anchor_layer,
                              int window, const BarrierOptions& options) {
  const int nx = kernels.nx();
  const int nt = kernels.nt();
  const int band = kernels.band();
  if (window < 1) throw PreconditionError("anchored_barrier: window must be >= 1");
  anchor_node = wrap_index(anchor_node, nx);
  anchor_layer = wrap_index(anchor_layer, nt);
  const double step_c = c / nt;

  BarrierField f;
  f.anchor_node = anchor_node;
  f.anchor_layer = anchor_layer;
  f.window = window;
  f.c_used = c;
  f.h = GridField(nx, nt);
  f.phi_pot = GridField(nx, nt);

  const std::size_t cells = std::size_t(nx) * nt;
  // hist[p] holds, for every layer, the value collected during period p (mod window)
  std::vector<std::vector<double>> hist(window, std::vector<double>(cells, 0.0));
  std::vector<std::vector<std::uint8_t>> hist_ok(window, std::vector<std::uint8_t>(cells, 0));
  std::vector<std::uint8_t> pot_ok(cells, 0);
  GridField prev_min(nx, nt);
  std::vector<std::uint8_t> prev_min_ok(cells, 0);

  std::vector<double> u(nx, 0.0), next(nx, 0.0);
  std::vector<std::uint8_t> u_ok(nx, 0), next_ok(nx, 0);
  u_ok[anchor_node] = 1;
  f.phi_pot.at(anchor_node, anchor_layer) = 0.0;
  pot_ok[std::size_t(anchor_layer) * nx + anchor_node] = 1;

  int layer = anchor_layer;
  for (int period = 0; period < options.max_periods; ++period) {
    auto& slot = hist[period % window];
    auto& slot_ok = hist_ok[period % window];
    std::fill(slot_ok.begin(), slot_ok.end(), 0);
    for (int s = 0; s < nt; ++s) {
      const int j = layer == 0 ? nt - 1 : layer - 1;  // substep from layer j to j+1
      parallel_blocks(std::size_t(nx), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t a = lo; a < hi; ++a) {
          const double* row = kernels.row(j, int(a));
          bool any = false;
          double best = 0.0;
          for (int d = -band; d <= band; ++d) {
            int b = int(a) + d;
            if (b < 0) b += nx;
            else if (b >= nx) b -= nx;
            if (!u_ok[b]) continue;
            const double v = row[d + band] + u[b];
            if (!any || v < best) {
              best = v;
              any = true;
            }
          }
          next_ok[a] = any;
          next[a] = any ? best + step_c : 0.0;
        }
      });
      std::swap(u, next);
      std::swap(u_ok, next_ok);
      layer = j;
      const std::size_t off = std::size_t(layer) * nx;
      for (int i = 0; i < nx; ++i) {
        if (!u_ok[i]) continue;
        slot[off + i] = u[i];
        slot_ok[off + i] = 1;
        double& pot = f.phi_pot.values[off + i];
        if (!pot_ok[off + i] || u[i] < pot) {
          pot = u[i];
          pot_ok[off + i] = 1;
        }
      }
    }
    f.periods = period + 1;
    if (period + 1 < window) continue;

    // trailing-window minimum over the last `window` periods
    bool complete = true;
    double osc = 0.0;
    for (std::size_t q = 0; q < cells; ++q) {
      bool any = false;
      double m = 0.0;
      for (int w = 0; w < window; ++w) {
        if (!hist_ok[w][q]) continue;
        if (!any || hist[w][q] < m) m = hist[w][q];
        any = true;
      }
      if (!any) {
        complete = false;
        continue;
      }
      if (prev_min_ok[q]) osc = std::max(osc, std::abs(m - prev_min.values[q]));
      else if (period + 1 > window) osc = std::numeric_limits<double>::infinity();
      f.h.values[q] = m;
      prev_min.values[q] = m;
      prev_min_ok[q] = 1;
    }
    if (!complete) {
      f.osc_trace.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    if (period + 1 == window) continue;  // first full window: nothing to compare with
    f.osc_trace.push_back(osc);
    f.window_osc = osc;
    if (osc <= options.barrier_tol) return f;
  }
  std::ostringstream msg;
  msg << "anchored barrier did not settle within " << options.max_periods << " periods (window oscillation "
      << f.window_osc << ")";
  throw ConvergenceError(msg.str(), f.osc_trace);
}

BarrierField anchored_barrier(const ActionKernelSet& kernels, double c, double anchor_x, int window,
                              const BarrierOptions& options) {
  const auto node = nearest_node(anchor_x, kernels.nx());
  BarrierField f = anchored_barrier(kernels, c, node.index, 0, window, options);
  f.anchor_offset_cells = node.offset_cells;
  return f;
}

PairValue action_potential_pair(const BarrierField& field_from, const BarrierField& field_to) {
  if (field_from.h.nx != field_to.h.nx || field_from.h.nt != field_to.h.nt)
    throw PreconditionError("action_potential_pair: fields live on different grids");
  if (std::abs(field_from.anchor_offset_cells) > 1.0)
    throw PreconditionError("action_potential_pair: anchor more than one cell off the grid");
  PairValue p;
  p.h = field_to.h.at(field_from.anchor_node, field_from.anchor_layer);
  p.phi = field_to.phi_pot.at(field_from.anchor_node, field_from.anchor_layer);
  p.offset_cells = field_from.anchor_offset_cells;
  return p;
}

std::vector<std::vector<double>> barrier_matrix(const std::vector<BarrierField>& fields) {
  const std::size_t m = fields.size();
  std::vector<std::vector<double>> B(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) B[i][j] = action_potential_pair(fields[i], fields[j]).h;
  return B;
}

double interpolate_x(const GridField& f, double x, int r) {
  const double s = (x - std::floor(x)) * f.nx;
  const int i0 = static_cast<int>(s) % f.nx;
  const double fr = s - std::floor(s);
  return (1.0 - fr) * f.at(i0, r) + fr * f.at((i0 + 1) % f.nx, r);
}

AubryResidual aubry_residual(const BarrierField& field, const PeriodicOrbit& orbit, double aubry_tol) {
  const int nt = field.h.nt;
  AubryResidual out;
  for (const auto& s : orbit.samples) {
    const double layer_pos = (s.t - std::floor(s.t)) * nt;
    // only samples that fall on a grid layer
    if (std::abs(layer_pos - std::round(layer_pos)) > 1e-6) continue;
    const int r = static_cast<int>(std::lround(layer_pos)) % nt;
    out.residual = std::max(out.residual, std::abs(interpolate_x(field.h, s.x, r)));
  }
  out.pass = out.residual <= aubry_tol;
  return out;
}

std::vector<AubryResidual> aubry_verify(const std::vector<BarrierField>& fields,
                                        const std::vector<PeriodicOrbit>& orbits, double aubry_tol) {
  if (fields.size() != orbits.size()) throw PreconditionError("aubry_verify: one field per orbit required");
  std::vector<AubryResidual> out;
  out.reserve(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) out.push_back(aubry_residual(fields[i], orbits[i], aubry_tol));
  return out;
}

}  // namespace wkam
