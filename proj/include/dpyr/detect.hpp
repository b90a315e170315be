#pragma once

#include <string>
#include <vector>

#include "dpyr/core_types.hpp"
#include "dpyr/dpm_cnn.hpp"
#include "dpyr/dpm_model.hpp"
#include "dpyr/feature_frontend.hpp"

namespace dpyr {

/// Non-maximum suppression policy. "iou" suppresses on intersection-over-
/// union; "legacy-dpm" on intersection over the candidate's own area.
struct NmsPolicy {
  enum class Kind { iou, legacy_dpm };
  Kind kind = Kind::iou;
  double threshold = 0.3;   // overlap above this suppresses; in (0, 1)
  int max_detections = -1;  // < 0: unlimited

  static Kind kind_from_string(const std::string& s);
  static const char* kind_to_string(Kind k);
};

/// The pyramid geometry needed to map score cells back to image pixels.
struct PyrMeta {
  int stride = 8;
  int pad_y = 0;
  int pad_x = 0;
  std::vector<double> scales;
  int image_rows = 0;  // clip bounds for detection boxes
  int image_cols = 0;
};

/// Extracts the mapping metadata from a pyramid. When the pyramid does not
/// know its source image size (imports), nominal bounds are reconstructed
/// from the level-0 unpadded cell counts.
PyrMeta make_meta(const FeaturePyramid& pyr);

/// Thresholds the combined score maps and maps every surviving cell to an
/// image-space detection. The root box for cell (x, y) at level l is
///   ((x-pad_x)*stride/s_l, (y-pad_y)*stride/s_l,
///    (x-pad_x+w)*stride/s_l - 1, (y-pad_y+h)*stride/s_l - 1)
/// rounded to nearest and clipped to the image; part boxes come from the
/// stored DT argmax placements, unclipped but flagged when out of bounds.
/// Results are sorted by descending score, ties by (level, y, x, component).
/// Throws ConfigError when scores and meta disagree on level count.
std::vector<Detection> extract_detections(const PyramidScores& scores,
                                          const PyrMeta& meta,
                                          const DpmModel& model,
                                          double score_threshold);

/// Greedy non-maximum suppression: repeatedly keep the highest-scoring
/// remaining detection and drop every detection overlapping it above the
/// policy threshold. Output is score-descending, a subset of the input, and
/// idempotent. Throws ParamError on a threshold outside (0, 1).
std::vector<Detection> nms(const std::vector<Detection>& dets,
                           const NmsPolicy& policy);

/// The detections output document: a JSON object with a header (model class,
/// NMS policy, thresholds) and one entry per detection. Deterministic
/// serialization; running the pipeline twice yields byte-identical text.
std::string detections_document(const std::vector<Detection>& dets,
                                const std::string& class_name,
                                const NmsPolicy& policy,
                                double score_threshold);

}  // namespace dpyr
