#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpyr {

// Score sentinel for "undefined at this location". NaN is forbidden everywhere.
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Degenerate or empty input (empty vector, zero-sized image, ...).
struct DomainError : Error {
  using Error::Error;
};

// Parameter outside its legal range (a <= 0, stride < 1, bad threshold, ...).
struct ParamError : Error {
  using Error::Error;
};

// Dimension or channel-count mismatch between two objects.
struct ShapeError : Error {
  using Error::Error;
};

// Binary/file format violation (bad magic, truncation, inconsistent sizes).
struct FormatError : Error {
  using Error::Error;
};

// Structured-document parse failure, with path context.
struct ParseError : Error {
  using Error::Error;
};

// A model failed validation where a valid one is required.
struct ValidationError : Error {
  using Error::Error;
};

// Two otherwise-valid objects do not fit together (pyramid vs model, ...).
struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Grids

/// One feature-pyramid level: rows x cols cells of `channels` 32-bit values,
/// row-major with the channel index fastest-varying.
struct FeatureMap {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  std::vector<float> data;  // size rows*cols*channels

  FeatureMap() = default;
  FeatureMap(int r, int c, int ch)
      : rows(r), cols(c), channels(ch),
        data(static_cast<size_t>(r) * c * ch, 0.0f) {}

  bool empty() const { return rows == 0 || cols == 0; }

  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * cols + x) * channels + c;
  }
  float at(int y, int x, int c) const { return data[index(y, x, c)]; }
  float& at(int y, int x, int c) { return data[index(y, x, c)]; }
};

/// A 2D score grid (64-bit). Values may be -inf (score undefined there) but
/// never NaN. The empty state (0x0) records a level too small to score.
struct Grid2D {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // size rows*cols, row-major

  Grid2D() = default;
  Grid2D(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  bool empty() const { return rows == 0 || cols == 0; }

  size_t index(int y, int x) const { return static_cast<size_t>(y) * cols + x; }
  double at(int y, int x) const { return data[index(y, x)]; }
  double& at(int y, int x) { return data[index(y, x)]; }
};

/// Companion integer grid (argmax indices, winner components).
struct IndexGrid {
  int rows = 0;
  int cols = 0;
  std::vector<int> data;

  IndexGrid() = default;
  IndexGrid(int r, int c, int fill = 0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  bool empty() const { return rows == 0 || cols == 0; }

  size_t index(int y, int x) const { return static_cast<size_t>(y) * cols + x; }
  int at(int y, int x) const { return data[index(y, x)]; }
  int& at(int y, int x) { return data[index(y, x)]; }
};

// ---------------------------------------------------------------------------
// Boxes and detections

/// Image-space box. Inclusive zero-based pixel coordinates, x right, y down;
/// area = (x2-x1+1)*(y2-y1+1).
struct BBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  bool valid() const { return x2 >= x1 && y2 >= y1; }
  std::int64_t area() const {
    return static_cast<std::int64_t>(x2 - x1 + 1) * (y2 - y1 + 1);
  }
  bool operator==(const BBox&) const = default;
};

/// Intersection-over-union overlap of two valid boxes, in [0, 1].
double iou(const BBox& a, const BBox& b);

/// Intersection area under the inclusive-coordinate convention (0 if disjoint).
std::int64_t intersection_area(const BBox& a, const BBox& b);

/// One scored object hypothesis, with the winning component's part placements.
struct Detection {
  BBox box;
  double score = 0.0;
  int component = 0;
  int level = 0;
  int cell_y = 0;  // root cell in the (padded) level grid
  int cell_x = 0;
  std::vector<BBox> part_boxes;
  // Part boxes are not clipped; this flags the ones that leave the image.
  std::vector<bool> part_in_bounds;
};

// Feature provenance, shared by models and pyramids.
enum class FeatureKind { hog31, external };

inline const char* to_string(FeatureKind k) {
  return k == FeatureKind::hog31 ? "hog31" : "external";
}

}  // namespace dpyr
