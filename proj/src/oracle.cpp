#include "dpyr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dpyr::oracle {

DtResult1D naive_dt1d(std::span<const double> f, const Deformation1D& def) {
  if (f.empty()) throw DomainError("naive_dt1d: empty input");
  if (!(def.a > 0.0))
    throw ParamError("naive_dt1d: a must be > 0, got " +
                     std::to_string(def.a));

  const int n = static_cast<int>(f.size());
  DtResult1D out;
  out.values.resize(n);
  out.argmax.resize(n);
  for (int p = 0; p < n; ++p) {
    double best = kNegInf;
    int best_q = 0;
    for (int q = 0; q < n; ++q) {
      const double r = static_cast<double>(p - q);
      const double v = f[q] - (def.a * r * r + def.b * r);
      bool take = v > best;
      if (v == best) {  // tie: smaller |p-q|, then smaller q
        const int da = std::abs(p - q), db = std::abs(p - best_q);
        take = da < db || (da == db && q < best_q);
      }
      if (take) {
        best = v;
        best_q = q;
      }
    }
    out.values[p] = best;
    out.argmax[p] = best_q;
  }
  return out;
}

DtResult2D naive_dt2d(const Grid2D& g, const Deformation2D& def) {
  if (g.empty()) throw DomainError("naive_dt2d: empty input");
  if (!(def.x.a > 0.0) || !(def.y.a > 0.0))
    throw ParamError("naive_dt2d: a must be > 0 on both axes");

  DtResult2D out;
  out.values = Grid2D(g.rows, g.cols);
  out.argmax_y = IndexGrid(g.rows, g.cols);
  out.argmax_x = IndexGrid(g.rows, g.cols);
  for (int py = 0; py < g.rows; ++py) {
    for (int px = 0; px < g.cols; ++px) {
      double best = kNegInf;
      int by = 0, bx = 0;
      for (int qy = 0; qy < g.rows; ++qy) {
        for (int qx = 0; qx < g.cols; ++qx) {
          const double rx = static_cast<double>(px - qx);
          const double ry = static_cast<double>(py - qy);
          // Same association order as the separable passes: x first.
          const double v = (g.at(qy, qx) -
                            (def.x.a * rx * rx + def.x.b * rx)) -
                           (def.y.a * ry * ry + def.y.b * ry);
          bool take = v > best;
          if (v == best) {
            // Composed tie chain of the two 1D passes: the column pass
            // settles (|dy|, qy) first, the row pass (|dx|, qx) within it.
            const int day = std::abs(py - qy), dby = std::abs(py - by);
            const int dax = std::abs(px - qx), dbx = std::abs(px - bx);
            if (day != dby) take = day < dby;
            else if (qy != by) take = qy < by;
            else if (dax != dbx) take = dax < dbx;
            else take = qx < bx;
          }
          if (take) {
            best = v;
            by = qy;
            bx = qx;
          }
        }
      }
      out.values.at(py, px) = best;
      out.argmax_y.at(py, px) = by;
      out.argmax_x.at(py, px) = bx;
    }
  }
  return out;
}

std::vector<double> naive_max_pool_1d(std::span<const double> f, int k) {
  if (f.empty()) throw DomainError("naive_max_pool_1d: empty input");
  if (k < 0) throw ParamError("naive_max_pool_1d: k must be >= 0");
  const int n = static_cast<int>(f.size());
  std::vector<double> out(n);
  for (int p = 0; p < n; ++p) {
    double best = kNegInf;
    for (int q = std::max(0, p - k); q <= std::min(n - 1, p + k); ++q)
      best = std::max(best, f[q]);
    out[p] = best;
  }
  return out;
}

FeatureMap naive_max_filter_2d(const FeatureMap& m, int k, int stride) {
  if (m.empty()) throw DomainError("naive_max_filter_2d: empty input");
  if (k < 0 || stride < 1)
    throw ParamError("naive_max_filter_2d: need k >= 0 and stride >= 1");
  const int out_rows = (m.rows + stride - 1) / stride;
  const int out_cols = (m.cols + stride - 1) / stride;
  FeatureMap out(out_rows, out_cols, m.channels);
  for (int oy = 0; oy < out_rows; ++oy) {
    for (int ox = 0; ox < out_cols; ++ox) {
      const int cy = oy * stride, cx = ox * stride;
      for (int c = 0; c < m.channels; ++c) {
        float best = -std::numeric_limits<float>::infinity();
        for (int y = std::max(0, cy - k); y <= std::min(m.rows - 1, cy + k);
             ++y)
          for (int x = std::max(0, cx - k); x <= std::min(m.cols - 1, cx + k);
               ++x)
            best = std::max(best, m.at(y, x, c));
        out.at(oy, ox, c) = best;
      }
    }
  }
  return out;
}

namespace {

/// Dot product of a filter against the map window rooted at (sy, sx).
double window_dot(const FeatureMap& level, const Filter& f, int sy, int sx) {
  double acc = 0.0;
  for (int dy = 0; dy < f.rows; ++dy)
    for (int dx = 0; dx < f.cols; ++dx)
      for (int c = 0; c < f.channels; ++c)
        acc += static_cast<double>(level.at(sy + dy, sx + dx, c)) *
               static_cast<double>(f.at(dy, dx, c));
  return acc;
}

}  // namespace

double naive_window_score(const FeatureMap& level, const Component& comp,
                          int sy, int sx) {
  double total = window_dot(level, comp.root, sy, sx);
  for (const Part& part : comp.parts) {
    // Placement domain of this part's correlation map.
    const int dom_rows = level.rows - part.filter.rows + 1;
    const int dom_cols = level.cols - part.filter.cols + 1;
    const int ay = sy + part.anchor.dy;  // where the gather reads the DT
    const int ax = sx + part.anchor.dx;
    if (ay >= dom_rows || ax >= dom_cols) return kNegInf;

    double best = kNegInf;
    for (int qy = 0; qy < dom_rows; ++qy) {
      for (int qx = 0; qx < dom_cols; ++qx) {
        const double rx = static_cast<double>(ax - qx);
        const double ry = static_cast<double>(ay - qy);
        const double v =
            (window_dot(level, part.filter, qy, qx) -
             (part.deformation.x.a * rx * rx + part.deformation.x.b * rx)) -
            (part.deformation.y.a * ry * ry + part.deformation.y.b * ry);
        best = std::max(best, v);
      }
    }
    total += best;
  }
  return total + comp.bias;
}

Grid2D dense_geometry_score(const Grid2D& root_scores,
                            const std::vector<Grid2D>& part_dts,
                            const std::vector<Anchor>& anchors, double bias) {
  if (part_dts.size() != anchors.size())
    throw ShapeError("dense_geometry_score: " +
                     std::to_string(part_dts.size()) + " part maps vs " +
                     std::to_string(anchors.size()) + " anchors");
  for (const Grid2D& dt : part_dts)
    if (dt.rows != root_scores.rows || dt.cols != root_scores.cols)
      throw ShapeError("dense_geometry_score: stacked maps must share the "
                       "root dimensions");

  const int num_parts = static_cast<int>(part_dts.size());

  // Materialize the object-geometry filter: (P+1) channels, one 1 each —
  // channel 0 at the upper-left corner, channel p at its anchor.
  int fh = 1, fw = 1;
  for (const Anchor& a : anchors) {
    fh = std::max(fh, a.dy + 1);
    fw = std::max(fw, a.dx + 1);
  }
  std::vector<Grid2D> filter(static_cast<size_t>(num_parts) + 1,
                             Grid2D(fh, fw, 0.0));
  filter[0].at(0, 0) = 1.0;
  for (int p = 0; p < num_parts; ++p)
    filter[p + 1].at(anchors[p].dy, anchors[p].dx) = 1.0;

  Grid2D out(root_scores.rows, root_scores.cols, kNegInf);
  for (int y = 0; y + fh <= root_scores.rows; ++y) {
    for (int x = 0; x + fw <= root_scores.cols; ++x) {
      double acc = 0.0;
      for (int c = 0; c <= num_parts; ++c) {
        const Grid2D& map = c == 0 ? root_scores : part_dts[c - 1];
        for (int dy = 0; dy < fh; ++dy)
          for (int dx = 0; dx < fw; ++dx)
            acc += filter[c].at(dy, dx) * map.at(y + dy, x + dx);
      }
      out.at(y, x) = acc + bias;
    }
  }
  return out;
}

HogReference hog31_reference(const Image& img, int cell) {
  if (cell < 1) throw ParamError("hog31_reference: cell must be >= 1");
  const int min_side = 3 * cell;
  if (img.rows < min_side || img.cols < min_side)
    throw DomainError("hog31_reference: image must be at least " +
                      std::to_string(min_side) + "x" +
                      std::to_string(min_side));

  HogReference ref;
  ref.cell_rows = static_cast<int>(
      std::lround(static_cast<double>(img.rows) / cell));
  ref.cell_cols = static_cast<int>(
      std::lround(static_cast<double>(img.cols) / cell));

  // Step (1): per-pixel centered-difference gradient, strongest color
  // channel, over the histogram grid's pixel extent (edge reads clamped).
  const int vis_rows = ref.cell_rows * cell;
  const int vis_cols = ref.cell_cols * cell;
  struct Gradient {
    double mag = 0.0;
    double theta = 0.0;
  };
  std::vector<Gradient> grad(static_cast<size_t>(vis_rows) * vis_cols);
  for (int y = 1; y < vis_rows - 1; ++y) {
    for (int x = 1; x < vis_cols - 1; ++x) {
      const int yy = std::min(y, img.rows - 2);
      const int xx = std::min(x, img.cols - 2);
      double bdx = 0.0, bdy = 0.0, bv = -1.0;
      for (int c = 0; c < 3; ++c) {
        const double dx = static_cast<double>(img.at(yy, xx + 1, c)) -
                          static_cast<double>(img.at(yy, xx - 1, c));
        const double dy = static_cast<double>(img.at(yy + 1, xx, c)) -
                          static_cast<double>(img.at(yy - 1, xx, c));
        const double v = dx * dx + dy * dy;
        if (v > bv) {
          bv = v;
          bdx = dx;
          bdy = dy;
        }
      }
      Gradient& g = grad[static_cast<size_t>(y) * vis_cols + x];
      g.mag = std::sqrt(bv);
      double theta = std::atan2(bdy, bdx);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      g.theta = theta;
    }
  }

  // Steps (2)+(3), written as gathers: each cell's bin collects every
  // pixel's magnitude weighted by a spatial bilinear hat centered on the
  // cell and a linear hat over the two nearest orientation bins.
  ref.hist.assign(static_cast<size_t>(ref.cell_rows) * ref.cell_cols * 18,
                  0.0);
  const double bin_width = 2.0 * std::numbers::pi / 18.0;
  for (int cy = 0; cy < ref.cell_rows; ++cy) {
    for (int cx = 0; cx < ref.cell_cols; ++cx) {
      for (int y = 1; y < vis_rows - 1; ++y) {
        for (int x = 1; x < vis_cols - 1; ++x) {
          const Gradient& g = grad[static_cast<size_t>(y) * vis_cols + x];
          if (g.mag == 0.0) continue;
          const double yp = (y + 0.5) / cell - 0.5;
          const double xp = (x + 0.5) / cell - 0.5;
          const double wy = 1.0 - std::abs(yp - cy);
          const double wx = 1.0 - std::abs(xp - cx);
          if (wy <= 0.0 || wx <= 0.0) continue;
          double ob = g.theta / bin_width;
          if (ob >= 18.0) ob = 0.0;
          const int o0 = static_cast<int>(ob);
          const int o1 = (o0 + 1) % 18;
          const double fo = ob - o0;
          double* bins =
              &ref.hist[(static_cast<size_t>(cy) * ref.cell_cols + cx) * 18];
          bins[o0] += wy * wx * (1.0 - fo) * g.mag;
          bins[o1] += wy * wx * fo * g.mag;
        }
      }
    }
  }

  // Step (4): cell energy over the 9 contrast-insensitive sums.
  Grid2D energy(ref.cell_rows, ref.cell_cols, 0.0);
  for (int cy = 0; cy < ref.cell_rows; ++cy) {
    for (int cx = 0; cx < ref.cell_cols; ++cx) {
      double e = 0.0;
      for (int o = 0; o < 9; ++o) {
        const double s = ref.hist_at(cy, cx, o) + ref.hist_at(cy, cx, o + 9);
        e += s * s;
      }
      energy.at(cy, cx) = e;
    }
  }

  // Steps (5)+(6): normalize, clip, and assemble the 31 channels.
  const double eps = 1e-4;
  const int out_rows = ref.cell_rows - 2;
  const int out_cols = ref.cell_cols - 2;
  ref.features = FeatureMap(out_rows, out_cols, 31);
  for (int oy = 0; oy < out_rows; ++oy) {
    for (int ox = 0; ox < out_cols; ++ox) {
      const int cy = oy + 1, cx = ox + 1;
      auto block = [&](int y0, int x0) {
        return energy.at(y0, x0) + energy.at(y0, x0 + 1) +
               energy.at(y0 + 1, x0) + energy.at(y0 + 1, x0 + 1);
      };
      const double norms[4] = {1.0 / std::sqrt(block(cy - 1, cx - 1) + eps),
                               1.0 / std::sqrt(block(cy - 1, cx) + eps),
                               1.0 / std::sqrt(block(cy, cx - 1) + eps),
                               1.0 / std::sqrt(block(cy, cx) + eps)};
      double texture[4] = {0.0, 0.0, 0.0, 0.0};
      for (int o = 0; o < 18; ++o) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) {
          const double h =
              std::min(ref.hist_at(cy, cx, o) * norms[j], 0.2);
          acc += h;
          texture[j] += h;
        }
        ref.features.at(oy, ox, o) = static_cast<float>(acc / 4.0);
      }
      for (int o = 0; o < 9; ++o) {
        const double folded =
            ref.hist_at(cy, cx, o) + ref.hist_at(cy, cx, o + 9);
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += std::min(folded * norms[j], 0.2);
        ref.features.at(oy, ox, 18 + o) = static_cast<float>(acc / 4.0);
      }
      for (int j = 0; j < 4; ++j)
        ref.features.at(oy, ox, 27 + j) =
            static_cast<float>(0.2357 * texture[j]);
    }
  }
  return ref;
}

DpmModel random_model(Rng& rng, const ModelLimits& limits) {
  DpmModel model;
  model.class_name = "random";
  model.feature.kind = FeatureKind::external;
  model.feature.channels = rng.uniform_int(1, limits.max_channels);
  model.feature.stride = 8;

  const int num_components = rng.uniform_int(1, limits.max_components);
  for (int c = 0; c < num_components; ++c) {
    Component comp;
    comp.bias = rng.uniform(-1.0, 1.0);
    const int rh = rng.uniform_int(1, limits.max_root);
    const int rw = rng.uniform_int(1, limits.max_root);
    comp.root = Filter(rh, rw, model.feature.channels);
    for (float& w : comp.root.weights)
      w = static_cast<float>(rng.uniform(-1.0, 1.0));

    const int num_parts = rng.uniform_int(0, limits.max_parts);
    for (int p = 0; p < num_parts; ++p) {
      Part part;
      const int ph = rng.uniform_int(1, limits.max_part);
      const int pw = rng.uniform_int(1, limits.max_part);
      part.filter = Filter(ph, pw, model.feature.channels);
      for (float& w : part.filter.weights)
        w = static_cast<float>(rng.uniform(-1.0, 1.0));
      part.anchor.dx = rng.uniform_int(0, 2);
      part.anchor.dy = rng.uniform_int(0, 2);
      part.deformation.x.a = rng.uniform(0.01, 10.0);
      part.deformation.x.b = rng.uniform(-5.0, 5.0);
      part.deformation.y.a = rng.uniform(0.01, 10.0);
      part.deformation.y.b = rng.uniform(-5.0, 5.0);
      comp.parts.push_back(std::move(part));
    }
    model.components.push_back(std::move(comp));
  }
  return model;
}

FeatureMap random_map(Rng& rng, int rows, int cols, int channels) {
  FeatureMap m(rows, cols, channels);
  for (float& v : m.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return m;
}

Grid2D random_grid(Rng& rng, int rows, int cols, double lo, double hi) {
  Grid2D g(rows, cols);
  for (double& v : g.data) v = rng.uniform(lo, hi);
  return g;
}

}  // namespace dpyr::oracle
