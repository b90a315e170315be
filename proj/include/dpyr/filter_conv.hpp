#pragma once

#include "dpyr/core_types.hpp"

namespace dpyr {

/// A correlation template (root or part filter). Same layout as FeatureMap;
/// weights are stored in correlation orientation (no kernel flip).
struct Filter {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  std::vector<float> weights;

  Filter() = default;
  Filter(int r, int c, int ch)
      : rows(r), cols(c), channels(ch),
        weights(static_cast<size_t>(r) * c * ch, 0.0f) {}

  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * cols + x) * channels + c;
  }
  float at(int y, int x, int c) const { return weights[index(y, x, c)]; }
  float& at(int y, int x, int c) { return weights[index(y, x, c)]; }
};

/// Multi-channel valid cross-correlation:
///   out(y, x) = sum over (dy, dx, c) of m(y+dy, x+dx, c) * f(dy, dx, c)
/// accumulated in 64-bit, output (m.rows - f.rows + 1) x (m.cols - f.cols + 1).
/// No padding here; the feature front-end owns padding.
/// Throws ShapeError on channel mismatch or a filter larger than the map.
Grid2D cross_correlate(const FeatureMap& m, const Filter& f);

}  // namespace dpyr
