#include "dpyr/core_types.hpp"

#include <algorithm>

namespace dpyr {

std::int64_t intersection_area(const BBox& a, const BBox& b) {
  const int ix1 = std::max(a.x1, b.x1);
  const int iy1 = std::max(a.y1, b.y1);
  const int ix2 = std::min(a.x2, b.x2);
  const int iy2 = std::min(a.y2, b.y2);
  if (ix2 < ix1 || iy2 < iy1) return 0;
  return static_cast<std::int64_t>(ix2 - ix1 + 1) * (iy2 - iy1 + 1);
}

double iou(const BBox& a, const BBox& b) {
  const std::int64_t inter = intersection_area(a, b);
  if (inter == 0) return 0.0;
  const std::int64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace dpyr
