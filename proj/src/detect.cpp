#include "dpyr/detect.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace dpyr {

NmsPolicy::Kind NmsPolicy::kind_from_string(const std::string& s) {
  if (s == "iou") return Kind::iou;
  if (s == "legacy-dpm") return Kind::legacy_dpm;
  throw ParamError("unknown NMS kind: \"" + s +
                   "\" (expected \"iou\" or \"legacy-dpm\")");
}

const char* NmsPolicy::kind_to_string(Kind k) {
  return k == Kind::iou ? "iou" : "legacy-dpm";
}

PyrMeta make_meta(const FeaturePyramid& pyr) {
  PyrMeta meta;
  meta.stride = pyr.stride;
  meta.pad_y = pyr.pad_y;
  meta.pad_x = pyr.pad_x;
  meta.scales = pyr.scales;
  meta.image_rows = pyr.image_rows;
  meta.image_cols = pyr.image_cols;
  if ((meta.image_rows <= 0 || meta.image_cols <= 0) && !pyr.levels.empty() &&
      !pyr.scales.empty()) {
    // Imported pyramids do not carry the source image size; reconstruct
    // nominal bounds from the level-0 unpadded cell counts.
    const int rows_cells = pyr.levels[0].rows - 2 * pyr.pad_y;
    const int cols_cells = pyr.levels[0].cols - 2 * pyr.pad_x;
    meta.image_rows = static_cast<int>(
        std::lround(rows_cells * pyr.stride / pyr.scales[0]));
    meta.image_cols = static_cast<int>(
        std::lround(cols_cells * pyr.stride / pyr.scales[0]));
  }
  return meta;
}

namespace {

/// Maps a cell-space rectangle (upper-left cell, h x w cells) at scale s
/// back to inclusive image pixels.
BBox cell_rect_to_box(int cell_x, int cell_y, int w_cells, int h_cells,
                      const PyrMeta& meta, double scale) {
  const double k = meta.stride / scale;
  BBox b;
  b.x1 = static_cast<int>(std::lround((cell_x - meta.pad_x) * k));
  b.y1 = static_cast<int>(std::lround((cell_y - meta.pad_y) * k));
  b.x2 = static_cast<int>(std::lround((cell_x - meta.pad_x + w_cells) * k - 1));
  b.y2 = static_cast<int>(std::lround((cell_y - meta.pad_y + h_cells) * k - 1));
  return b;
}

BBox clip_box(BBox b, int rows, int cols) {
  b.x1 = std::clamp(b.x1, 0, cols - 1);
  b.y1 = std::clamp(b.y1, 0, rows - 1);
  b.x2 = std::clamp(b.x2, 0, cols - 1);
  b.y2 = std::clamp(b.y2, 0, rows - 1);
  return b;
}

bool in_bounds(const BBox& b, int rows, int cols) {
  return b.x1 >= 0 && b.y1 >= 0 && b.x2 < cols && b.y2 < rows;
}

}  // namespace

std::vector<Detection> extract_detections(const PyramidScores& scores,
                                          const PyrMeta& meta,
                                          const DpmModel& model,
                                          double score_threshold) {
  if (scores.levels.size() != meta.scales.size())
    throw ConfigError("scores have " + std::to_string(scores.levels.size()) +
                      " levels but metadata lists " +
                      std::to_string(meta.scales.size()) + " scales");
  if (meta.image_rows < 1 || meta.image_cols < 1)
    throw ConfigError("metadata has no image bounds to clip against");

  std::vector<Detection> dets;
  for (size_t l = 0; l < scores.levels.size(); ++l) {
    const LevelScores& ls = scores.levels[l];
    const double scale = meta.scales[l];
    for (int y = 0; y < ls.combined.rows; ++y) {
      for (int x = 0; x < ls.combined.cols; ++x) {
        const double score = ls.combined.at(y, x);
        if (!(score >= score_threshold) || std::isinf(score)) continue;

        const int c = ls.winner.at(y, x);
        const Component& comp = model.components[c];
        const ComponentScore& cs = ls.per_component[c];

        Detection det;
        det.score = score;
        det.component = c;
        det.level = static_cast<int>(l);
        det.cell_y = y;
        det.cell_x = x;
        det.box = clip_box(
            cell_rect_to_box(x, y, comp.root.cols, comp.root.rows, meta,
                             scale),
            meta.image_rows, meta.image_cols);

        det.part_boxes.reserve(comp.parts.size());
        det.part_in_bounds.reserve(comp.parts.size());
        for (size_t p = 0; p < comp.parts.size(); ++p) {
          const Part& part = comp.parts[p];
          // The gather accessed the part's DT at s + anchor; the stored
          // argmax there is the chosen placement in part-correlation cells.
          const int ay = y + part.anchor.dy;
          const int ax = x + part.anchor.dx;
          const int qy = cs.part_argmax_y[p].at(ay, ax);
          const int qx = cs.part_argmax_x[p].at(ay, ax);
          const BBox pb = cell_rect_to_box(qx, qy, part.filter.cols,
                                           part.filter.rows, meta, scale);
          det.part_boxes.push_back(pb);
          det.part_in_bounds.push_back(
              in_bounds(pb, meta.image_rows, meta.image_cols));
        }
        dets.push_back(std::move(det));
      }
    }
  }

  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.level != b.level) return a.level < b.level;
    if (a.cell_y != b.cell_y) return a.cell_y < b.cell_y;
    if (a.cell_x != b.cell_x) return a.cell_x < b.cell_x;
    return a.component < b.component;
  });
  return dets;
}

std::vector<Detection> nms(const std::vector<Detection>& dets,
                           const NmsPolicy& policy) {
  if (!(policy.threshold > 0.0 && policy.threshold < 1.0))
    throw ParamError("NMS threshold must be in (0, 1), got " +
                     std::to_string(policy.threshold));

  // Stable sort keeps the extract_detections tie order among equal scores.
  std::vector<const Detection*> order;
  order.reserve(dets.size());
  for (const Detection& d : dets) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(),
                   [](const Detection* a, const Detection* b) {
                     return a->score > b->score;
                   });

  auto overlap = [&](const BBox& kept, const BBox& cand) {
    if (policy.kind == NmsPolicy::Kind::iou) return iou(kept, cand);
    // Legacy convention: how much of the candidate the kept box covers.
    return static_cast<double>(intersection_area(kept, cand)) / cand.area();
  };

  std::vector<Detection> kept;
  std::vector<bool> suppressed(order.size(), false);
  for (size_t i = 0; i < order.size(); ++i) {
    if (suppressed[i]) continue;
    if (policy.max_detections >= 0 &&
        static_cast<int>(kept.size()) >= policy.max_detections)
      break;
    kept.push_back(*order[i]);
    for (size_t j = i + 1; j < order.size(); ++j) {
      if (!suppressed[j] &&
          overlap(order[i]->box, order[j]->box) > policy.threshold)
        suppressed[j] = true;
    }
  }
  return kept;
}

std::string detections_document(const std::vector<Detection>& dets,
                                const std::string& class_name,
                                const NmsPolicy& policy,
                                double score_threshold) {
  nlohmann::ordered_json doc;
  doc["format"] = "dpyr-detections/1";
  doc["class_name"] = class_name;
  doc["nms"] = {{"kind", NmsPolicy::kind_to_string(policy.kind)},
                {"threshold", policy.threshold}};
  if (policy.max_detections >= 0)
    doc["nms"]["max_detections"] = policy.max_detections;
  doc["score_threshold"] = score_threshold;

  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const Detection& d : dets) {
    nlohmann::ordered_json e;
    e["box"] = {d.box.x1, d.box.y1, d.box.x2, d.box.y2};
    e["score"] = d.score;
    e["component"] = d.component;
    e["level"] = d.level;
    nlohmann::ordered_json parts = nlohmann::ordered_json::array();
    nlohmann::ordered_json flags = nlohmann::ordered_json::array();
    for (size_t p = 0; p < d.part_boxes.size(); ++p) {
      const BBox& pb = d.part_boxes[p];
      parts.push_back({pb.x1, pb.y1, pb.x2, pb.y2});
      flags.push_back(static_cast<bool>(d.part_in_bounds[p]));
    }
    e["parts"] = std::move(parts);
    e["parts_in_bounds"] = std::move(flags);
    list.push_back(std::move(e));
  }
  doc["detections"] = std::move(list);
  return doc.dump(2) + "\n";
}

}  // namespace dpyr
