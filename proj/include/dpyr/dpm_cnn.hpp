#pragma once

#include <vector>

#include "dpyr/core_types.hpp"
#include "dpyr/dpm_model.hpp"
#include "dpyr/feature_frontend.hpp"

namespace dpyr {

/// One component's score map on one level, indexed by root upper-left
/// location, plus the DT argmax grids needed to trace part placements back.
/// -inf marks root locations whose part accesses fell outside a part map.
/// Empty (0x0) when the level is too small for the component's filters.
struct ComponentScore {
  Grid2D scores;
  // Per part: DT argmax over the part-correlation domain. The placement for
  // a detection rooted at s is read at s + anchor.
  std::vector<IndexGrid> part_argmax_y;
  std::vector<IndexGrid> part_argmax_x;
};

/// Combined (maxout) scores for one level, with per-component maps retained
/// for traceback.
struct LevelScores {
  Grid2D combined;
  IndexGrid winner;
  std::vector<ComponentScore> per_component;
};

/// Detection scores for every pyramid level.
struct PyramidScores {
  std::vector<LevelScores> levels;
};

/// The object-geometry combination step: the dense equivalent of correlating
/// the stacked (P+1)-channel root+part map with a sparse filter holding a
/// single one per channel (root at the upper-left corner, part p at its
/// anchor).
///   out(s) = root_scores(s) + sum_p part_dts[p](s + anchor[p]) + bias
/// wherever every access is in bounds; -inf otherwise.
Grid2D geometry_gather(const Grid2D& root_scores,
                       const std::vector<Grid2D>& part_dts,
                       const std::vector<Anchor>& anchors, double bias);

/// Scores one component on one level: root and part correlations, a distance
/// transform over each part map, then the geometry gather.
ComponentScore score_component(const FeatureMap& level, const Component& comp);

/// Component competition: element-wise max over score maps aligned at their
/// upper-left, smaller maps padded with -inf. Winner ties go to the lowest
/// component index. Throws DomainError on an empty list.
void maxout_combine(const std::vector<ComponentScore>& per_component,
                    Grid2D& combined, IndexGrid& winner);

/// Every stride-th cell: out(y, x) = g(y*stride, x*stride),
/// dims ceil(rows/stride) x ceil(cols/stride).
Grid2D subsample(const Grid2D& g, int stride);

/// True when every filter of the component fits inside the level.
bool component_fits(const FeatureMap& level, const Component& comp);

/// Full multi-component scoring over a pyramid: score_component per
/// (level, component) pair, then maxout per level. Levels too small for a
/// component yield empty maps for it (recorded, not errors). The thread hint
/// bounds worker parallelism across pairs; output is schedule-independent.
/// Throws ConfigError when the pyramid's channels or stride do not match the
/// model's feature spec.
PyramidScores score_pyramid(const FeaturePyramid& pyr, const DpmModel& model,
                            int threads = 1);

}  // namespace dpyr
