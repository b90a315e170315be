#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dpyr/feature_frontend.hpp"

namespace dpyr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNormEps = 1e-4;   // regularizer under the block sqrt
constexpr double kClip = 0.2;       // normalized-value clip
constexpr double kTexture = 0.2357; // texture-channel weight, ~1/sqrt(18)

inline int round_half_away(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

FeatureMap hog31(const Image& img, int cell) {
  if (cell < 1)
    throw ParamError("hog31: cell must be >= 1, got " + std::to_string(cell));
  const int min_side = 3 * cell;
  if (img.rows < min_side || img.cols < min_side)
    throw DomainError("hog31: image must be at least " +
                      std::to_string(min_side) + "x" +
                      std::to_string(min_side) + " for cell " +
                      std::to_string(cell) + ", got " +
                      std::to_string(img.rows) + "x" +
                      std::to_string(img.cols));

  const int hist_rows = round_half_away(static_cast<double>(img.rows) / cell);
  const int hist_cols = round_half_away(static_cast<double>(img.cols) / cell);
  const int out_rows = hist_rows - 2;
  const int out_cols = hist_cols - 2;

  // 18 contrast-sensitive orientation histograms per cell.
  std::vector<double> hist(static_cast<size_t>(hist_rows) * hist_cols * 18,
                           0.0);
  auto hist_at = [&](int y, int x, int o) -> double& {
    return hist[(static_cast<size_t>(y) * hist_cols + x) * 18 + o];
  };

  // The gradient pass covers the full histogram grid (hist_dims * cell
  // pixels); reads past the image edge are clamped to the last interior
  // pixel so grids whose size is not a multiple of `cell` still fill their
  // border cells.
  const int visible_rows = hist_rows * cell;
  const int visible_cols = hist_cols * cell;
  for (int y = 1; y < visible_rows - 1; ++y) {
    const int yy = std::min(y, img.rows - 2);
    for (int x = 1; x < visible_cols - 1; ++x) {
      const int xx = std::min(x, img.cols - 2);

      // Centered differences per color channel; keep the strongest.
      double best_dx = 0.0, best_dy = 0.0, best_v = -1.0;
      for (int c = 0; c < 3; ++c) {
        const double dx = static_cast<double>(img.at(yy, xx + 1, c)) -
                          static_cast<double>(img.at(yy, xx - 1, c));
        const double dy = static_cast<double>(img.at(yy + 1, xx, c)) -
                          static_cast<double>(img.at(yy - 1, xx, c));
        const double v = dx * dx + dy * dy;
        if (v > best_v) {
          best_v = v;
          best_dx = dx;
          best_dy = dy;
        }
      }
      const double mag = std::sqrt(best_v);
      if (mag == 0.0) continue;

      // Orientation in [0, 2pi), split linearly across the two nearest of
      // 18 contrast-sensitive bins.
      double theta = std::atan2(best_dy, best_dx);
      if (theta < 0.0) theta += kTwoPi;
      double ob = theta * (18.0 / kTwoPi);
      if (ob >= 18.0) ob = 0.0;
      const int o0 = static_cast<int>(ob);
      const int o1 = (o0 + 1) % 18;
      const double fo = ob - o0;

      // Bilinear vote into the four nearest cells.
      const double xp = (x + 0.5) / cell - 0.5;
      const double yp = (y + 0.5) / cell - 0.5;
      const int ixp = static_cast<int>(std::floor(xp));
      const int iyp = static_cast<int>(std::floor(yp));
      const double fx = xp - ixp;
      const double fy = yp - iyp;

      const double vote[2] = {mag * (1.0 - fo), mag * fo};
      const int bins[2] = {o0, o1};
      for (int k = 0; k < 2; ++k) {
        if (iyp >= 0 && ixp >= 0)
          hist_at(iyp, ixp, bins[k]) += (1.0 - fy) * (1.0 - fx) * vote[k];
        if (iyp >= 0 && ixp + 1 < hist_cols)
          hist_at(iyp, ixp + 1, bins[k]) += (1.0 - fy) * fx * vote[k];
        if (iyp + 1 < hist_rows && ixp >= 0)
          hist_at(iyp + 1, ixp, bins[k]) += fy * (1.0 - fx) * vote[k];
        if (iyp + 1 < hist_rows && ixp + 1 < hist_cols)
          hist_at(iyp + 1, ixp + 1, bins[k]) += fy * fx * vote[k];
      }
    }
  }

  // Per-cell gradient energy over the 9 contrast-insensitive orientations.
  std::vector<double> energy(static_cast<size_t>(hist_rows) * hist_cols, 0.0);
  for (int y = 0; y < hist_rows; ++y) {
    for (int x = 0; x < hist_cols; ++x) {
      double e = 0.0;
      for (int o = 0; o < 9; ++o) {
        const double s = hist_at(y, x, o) + hist_at(y, x, o + 9);
        e += s * s;
      }
      energy[static_cast<size_t>(y) * hist_cols + x] = e;
    }
  }
  auto energy_at = [&](int y, int x) {
    return energy[static_cast<size_t>(y) * hist_cols + x];
  };

  FeatureMap out(out_rows, out_cols, 31);
  for (int oy = 0; oy < out_rows; ++oy) {
    for (int ox = 0; ox < out_cols; ++ox) {
      const int cy = oy + 1, cx = ox + 1;  // interior histogram cell

      // Four normalizers, one per diagonal 2x2 energy block around the cell
      // (NW, NE, SW, SE).
      const double n[4] = {
          1.0 / std::sqrt(energy_at(cy - 1, cx - 1) + energy_at(cy - 1, cx) +
                          energy_at(cy, cx - 1) + energy_at(cy, cx) +
                          kNormEps),
          1.0 / std::sqrt(energy_at(cy - 1, cx) + energy_at(cy - 1, cx + 1) +
                          energy_at(cy, cx) + energy_at(cy, cx + 1) +
                          kNormEps),
          1.0 / std::sqrt(energy_at(cy, cx - 1) + energy_at(cy, cx) +
                          energy_at(cy + 1, cx - 1) + energy_at(cy + 1, cx) +
                          kNormEps),
          1.0 / std::sqrt(energy_at(cy, cx) + energy_at(cy, cx + 1) +
                          energy_at(cy + 1, cx) + energy_at(cy + 1, cx + 1) +
                          kNormEps)};

      double texture[4] = {0.0, 0.0, 0.0, 0.0};
      for (int o = 0; o < 18; ++o) {
        const double v = hist_at(cy, cx, o);
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) {
          const double h = std::min(v * n[j], kClip);
          acc += h;
          texture[j] += h;
        }
        out.at(oy, ox, o) = static_cast<float>(0.25 * acc);
      }
      for (int o = 0; o < 9; ++o) {
        const double v = hist_at(cy, cx, o) + hist_at(cy, cx, o + 9);
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += std::min(v * n[j], kClip);
        out.at(oy, ox, 18 + o) = static_cast<float>(0.25 * acc);
      }
      for (int j = 0; j < 4; ++j)
        out.at(oy, ox, 27 + j) = static_cast<float>(kTexture * texture[j]);
    }
  }
  return out;
}

}  // namespace dpyr
