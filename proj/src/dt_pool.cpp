#include "dpyr/dt_pool.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace dpyr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double penalty(const Deformation1D& def, double r) {
  return def.a * r * r + def.b * r;
}

// Among two maximizing candidates, prefer the larger value; on an exact value
// tie, the smaller |p - q|, then the smaller q.
inline int better_candidate(std::span<const double> f, const Deformation1D& def,
                            int p, int q1, int q2) {
  const double v1 = f[static_cast<size_t>(q1)] - penalty(def, p - q1);
  const double v2 = f[static_cast<size_t>(q2)] - penalty(def, p - q2);
  if (v2 > v1) return q2;
  if (v2 < v1) return q1;
  const int d1 = std::abs(p - q1);
  const int d2 = std::abs(p - q2);
  if (d2 < d1) return q2;
  if (d1 < d2) return q1;
  return std::min(q1, q2);
}

struct EnvelopeWorkspace {
  std::vector<int> v;      // source index of each envelope parabola
  std::vector<double> z;   // domain boundaries, z[i]..z[i+1] for parabola i

  void resize(size_t n) {
    v.resize(n);
    z.resize(n + 1);
  }
};

// Core envelope pass writing into caller-provided storage.
void dt1d_into(std::span<const double> f, const Deformation1D& def,
               double* values, int* argmax, EnvelopeWorkspace& ws) {
  const int n = static_cast<int>(f.size());
  ws.resize(static_cast<size_t>(n));
  int* v = ws.v.data();
  double* z = ws.z.data();

  // shift of every parabola root: q contributes a parabola centered at
  // q - b/(2a) with height f(q) (+ a lift common to all, which cancels).
  const double shift = def.b / (2.0 * def.a);

  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    const double rho_q = q - shift;
    double s;
    for (;;) {
      const int u = v[k];
      const double rho_u = u - shift;
      s = 0.5 * ((f[static_cast<size_t>(u)] - f[static_cast<size_t>(q)]) /
                     (def.a * (rho_q - rho_u)) +
                 rho_u + rho_q);
      // Strict pop keeps parabolas whose domain collapses to a single point;
      // they can still win a tie exactly at that point.
      if (s < z[k]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }

  const int top = k;
  k = 0;
  for (int p = 0; p < n; ++p) {
    while (z[k + 1] < p) ++k;
    int best = v[k];
    // A grid point exactly on a boundary ties all parabolas meeting there.
    for (int j = k; j < top && z[j + 1] == p; ++j) {
      best = better_candidate(f, def, p, best, v[j + 1]);
    }
    argmax[p] = best;
    values[p] = f[static_cast<size_t>(best)] - penalty(def, p - best);
  }
}

void check_def(const Deformation1D& def, const char* axis) {
  if (!(def.a > 0.0)) {
    throw ParamError(std::string("deformation ") + axis +
                     ".a must be > 0 (quadratic penalty not convex)");
  }
}

}  // namespace

DtResult1D dt1d(std::span<const double> f, const Deformation1D& def) {
  if (f.empty()) throw DomainError("dt1d: empty input");
  check_def(def, "");
  DtResult1D out;
  out.values.resize(f.size());
  out.argmax.resize(f.size());
  EnvelopeWorkspace ws;
  dt1d_into(f, def, out.values.data(), out.argmax.data(), ws);
  return out;
}

DtResult2D dt2d(const Grid2D& g, const Deformation2D& def) {
  if (g.empty()) throw DomainError("dt2d: empty input");
  check_def(def.x, "x");
  check_def(def.y, "y");

  const int rows = g.rows;
  const int cols = g.cols;

  // Pass 1: every row with (ax, bx).
  Grid2D row_vals(rows, cols);
  IndexGrid row_arg(rows, cols);
  EnvelopeWorkspace ws;
  for (int y = 0; y < rows; ++y) {
    dt1d_into(std::span<const double>(&g.data[g.index(y, 0)],
                                      static_cast<size_t>(cols)),
              def.x, &row_vals.data[row_vals.index(y, 0)],
              &row_arg.data[row_arg.index(y, 0)], ws);
  }

  // Pass 2: every column of the row result with (ay, by).
  DtResult2D out;
  out.values = Grid2D(rows, cols);
  out.argmax_y = IndexGrid(rows, cols);
  out.argmax_x = IndexGrid(rows, cols);
  std::vector<double> col(static_cast<size_t>(rows));
  std::vector<double> col_vals(static_cast<size_t>(rows));
  std::vector<int> col_arg(static_cast<size_t>(rows));
  for (int x = 0; x < cols; ++x) {
    for (int y = 0; y < rows; ++y) col[static_cast<size_t>(y)] = row_vals.at(y, x);
    dt1d_into(col, def.y, col_vals.data(), col_arg.data(), ws);
    for (int y = 0; y < rows; ++y) {
      const int qy = col_arg[static_cast<size_t>(y)];
      out.values.at(y, x) = col_vals[static_cast<size_t>(y)];
      out.argmax_y.at(y, x) = qy;
      out.argmax_x.at(y, x) = row_arg.at(qy, x);
    }
  }
  return out;
}

std::vector<double> max_pool_1d(std::span<const double> f, int k) {
  if (f.empty()) throw DomainError("max_pool_1d: empty input");
  if (k < 0) throw ParamError("max_pool_1d: window half-length must be >= 0");
  const int n = static_cast<int>(f.size());
  std::vector<double> out(f.size());
  for (int p = 0; p < n; ++p) {
    const int lo = std::max(0, p - k);
    const int hi = std::min(n - 1, p + k);
    double m = f[static_cast<size_t>(lo)];
    for (int q = lo + 1; q <= hi; ++q) m = std::max(m, f[static_cast<size_t>(q)]);
    out[static_cast<size_t>(p)] = m;
  }
  return out;
}

FeatureMap max_filter_2d(const FeatureMap& m, int k, int stride) {
  if (m.empty() || m.channels <= 0) throw DomainError("max_filter_2d: empty map");
  if (k < 0) throw ParamError("max_filter_2d: window half-length must be >= 0");
  if (stride < 1) throw ParamError("max_filter_2d: stride must be >= 1");

  const int out_rows = (m.rows + stride - 1) / stride;
  const int out_cols = (m.cols + stride - 1) / stride;
  FeatureMap out(out_rows, out_cols, m.channels);
  for (int oy = 0; oy < out_rows; ++oy) {
    const int cy = oy * stride;
    const int y0 = std::max(0, cy - k);
    const int y1 = std::min(m.rows - 1, cy + k);
    for (int ox = 0; ox < out_cols; ++ox) {
      const int cx = ox * stride;
      const int x0 = std::max(0, cx - k);
      const int x1 = std::min(m.cols - 1, cx + k);
      for (int c = 0; c < m.channels; ++c) {
        float best = m.at(y0, x0, c);
        for (int y = y0; y <= y1; ++y) {
          for (int x = x0; x <= x1; ++x) {
            best = std::max(best, m.at(y, x, c));
          }
        }
        out.at(oy, ox, c) = best;
      }
    }
  }
  return out;
}

}  // namespace dpyr
