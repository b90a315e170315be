#include "dpyr/filter_conv.hpp"

#include <string>

namespace dpyr {

Grid2D cross_correlate(const FeatureMap& m, const Filter& f) {
  if (f.channels != m.channels) {
    throw ShapeError("cross_correlate: filter has " + std::to_string(f.channels) +
                     " channels, map has " + std::to_string(m.channels));
  }
  if (f.rows > m.rows || f.cols > m.cols) {
    throw ShapeError("cross_correlate: filter " + std::to_string(f.rows) + "x" +
                     std::to_string(f.cols) + " exceeds map " +
                     std::to_string(m.rows) + "x" + std::to_string(m.cols));
  }
  if (f.rows < 1 || f.cols < 1) throw ShapeError("cross_correlate: empty filter");

  const int out_rows = m.rows - f.rows + 1;
  const int out_cols = m.cols - f.cols + 1;
  const int span = f.cols * f.channels;  // contiguous (dx, c) run per filter row
  Grid2D out(out_rows, out_cols);

  for (int y = 0; y < out_rows; ++y) {
    for (int x = 0; x < out_cols; ++x) {
      double acc = 0.0;
      for (int dy = 0; dy < f.rows; ++dy) {
        const float* mp = &m.data[m.index(y + dy, x, 0)];
        const float* fp = &f.weights[f.index(dy, 0, 0)];
        for (int i = 0; i < span; ++i) {
          acc += static_cast<double>(mp[i]) * static_cast<double>(fp[i]);
        }
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

}  // namespace dpyr
