#pragma once

#include <span>
#include <vector>

#include "dpyr/core_types.hpp"

namespace dpyr {

/// Convex quadratic displacement penalty along one axis:
///   d(r) = a*r^2 + b*r,  a > 0.
/// Positive b penalizes positive displacement. d(0) = 0 always, so a
/// distance transform never scores below the untransformed input.
struct Deformation1D {
  double a = 1.0;
  double b = 0.0;
};

/// Separable 2D penalty: d(rx, ry) = dx(rx) + dy(ry).
struct Deformation2D {
  Deformation1D x;
  Deformation1D y;
};

/// Result of a 1D distance transform. For every p,
///   values[p] = f(argmax[p]) - d(p - argmax[p])
/// exactly as computed, so values can be reproduced bit-for-bit from argmax.
struct DtResult1D {
  std::vector<double> values;
  std::vector<int> argmax;
};

/// Result of a separable 2D distance transform. The maximizing source cell
/// for output (y, x) is (argmax_y(y,x), argmax_x(y,x)).
struct DtResult2D {
  Grid2D values;
  IndexGrid argmax_y;
  IndexGrid argmax_x;
};

/// Generalized distance transform of a sampled function (maximization form):
///   values[p] = max_q f(q) - d(p - q)
/// over the whole grid, in O(n) via the lower-envelope parabola algorithm.
/// Completing the square absorbs the linear term: every q contributes a
/// parabola of curvature a rooted at q - b/(2a) with a constant lift
/// b^2/(4a) common to all of them.
///
/// Argmax ties are broken toward the smallest |p - q|, then the smaller q.
/// Throws DomainError on empty input, ParamError if a <= 0.
DtResult1D dt1d(std::span<const double> f, const Deformation1D& def);

/// Separable 2D distance transform: a 1D pass along every row with def.x,
/// then along every column with def.y. Argmax grids compose the two passes.
DtResult2D dt2d(const Grid2D& g, const Deformation2D& def);

/// Classic max pooling with window half-length k: M[p] = max f on
/// [p-k, p+k] intersected with the grid. This is the distance transform
/// under the d_max penalty (zero on {-k..k}, infinite elsewhere); positions
/// outside the grid simply do not exist.
std::vector<double> max_pool_1d(std::span<const double> f, int k);

/// Per-channel (2k+1)x(2k+1) windowed max over a feature map, window clipped
/// at the borders, sampled every `stride` cells. Stride 1 preserves the
/// spatial dimensions.
FeatureMap max_filter_2d(const FeatureMap& m, int k, int stride);

}  // namespace dpyr
