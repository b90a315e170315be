#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dpyr/core_types.hpp"
#include "dpyr/dpm_model.hpp"
#include "dpyr/dt_pool.hpp"
#include "dpyr/image.hpp"

// Slow, obviously-correct reference implementations and the random-instance
// generators that anchor every fast path. Nothing here calls the code it
// validates; the selftest and acceptance suites diff the two worlds.

namespace dpyr::oracle {

/// Reproducible random source. The algorithm is pinned so instances
/// reproduce anywhere: std::mt19937_64 (bit-exact per the C++ standard)
/// seeded directly; uniform reals map the top 53 bits of one draw onto
/// [0, 1) as u = (next() >> 11) * 2^-53, then lo + u * (hi - lo);
/// uniform integers map one draw as lo + next() % (hi - lo + 1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(engine_() %
                                 static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

/// O(n^2) distance transform: for every p, scan every q and keep the best
/// f(q) - a(p-q)^2 - b(p-q) under the tie rule (value, then smaller |p-q|,
/// then smaller q). Same errors as dt1d.
DtResult1D naive_dt1d(std::span<const double> f, const Deformation1D& def);

/// O(n^2 m^2) 2D distance transform: quadruple loop over output p and
/// source q, value g(q) - dx(px-qx) - dy(py-qy) with the composed tie chain
/// (value, |py-qy|, qy, |px-qx|, qx).
DtResult2D naive_dt2d(const Grid2D& g, const Deformation2D& def);

/// Window-max oracle for max_pool_1d: brute-force max of f over
/// [p-k, p+k] clipped to the grid.
std::vector<double> naive_max_pool_1d(std::span<const double> f, int k);

/// Per-channel window-max oracle for max_filter_2d.
FeatureMap naive_max_filter_2d(const FeatureMap& m, int k, int stride);

/// Direct evaluation of one component score at root location (sy, sx):
/// root dot product at s, plus for every part the max over all placements q
/// of (part dot product at q) - dx((sx+vx)-qx) - dy((sy+vy)-qy), plus bias;
/// -inf when s + anchor escapes a part's placement domain. Every dot product
/// is its own loop here; nothing is shared with the fast path.
double naive_window_score(const FeatureMap& level, const Component& comp,
                          int sy, int sx);

/// Dense realization of the object-geometry step: materializes the sparse
/// (P+1)-channel one-hot filter over its full extent and correlates it with
/// the stacked root+part maps in f64, zeros and all. Stacking requires every
/// map to share the root's dimensions (ShapeError otherwise). Cells where
/// the dense filter does not fit (where the sparse gather would read out of
/// bounds) are -inf.
Grid2D dense_geometry_score(const Grid2D& root_scores,
                            const std::vector<Grid2D>& part_dts,
                            const std::vector<Anchor>& anchors, double bias);

/// Literal transcription of the 31-channel HOG definition, one step at a
/// time, with the per-cell orientation histograms kept for inspection.
struct HogReference {
  int cell_rows = 0;  // histogram grid (output is the interior)
  int cell_cols = 0;
  std::vector<double> hist;  // cell_rows x cell_cols x 18
  FeatureMap features;       // (cell_rows-2) x (cell_cols-2) x 31

  double hist_at(int y, int x, int o) const {
    return hist[(static_cast<size_t>(y) * cell_cols + x) * 18 + o];
  }
};
HogReference hog31_reference(const Image& img, int cell);

/// Limits for random model generation (kept small so the O(n^2) oracles
/// stay fast).
struct ModelLimits {
  int max_components = 3;
  int max_parts = 4;
  int max_root = 5;  // root filter side, 1..max_root
  int max_part = 3;  // part filter side, 1..max_part
  int max_channels = 8;
};

/// A random valid model: deformation a in [0.01, 10], b in [-5, 5],
/// weights in [-1, 1], anchors within the gather range of the root.
DpmModel random_model(Rng& rng, const ModelLimits& limits);

/// A random feature map with values in [-1, 1].
FeatureMap random_map(Rng& rng, int rows, int cols, int channels);

/// A random score grid with values in [lo, hi].
Grid2D random_grid(Rng& rng, int rows, int cols, double lo = -10.0,
                   double hi = 10.0);

}  // namespace dpyr::oracle
