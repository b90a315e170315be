#include "dpyr/dpm_cnn.hpp"

#include <string>

#include "dpyr/dt_pool.hpp"
#include "dpyr/filter_conv.hpp"
#include "dpyr/parallel.hpp"

namespace dpyr {

Grid2D geometry_gather(const Grid2D& root_scores,
                       const std::vector<Grid2D>& part_dts,
                       const std::vector<Anchor>& anchors, double bias) {
  if (part_dts.size() != anchors.size())
    throw ShapeError("geometry_gather: " + std::to_string(part_dts.size()) +
                     " part maps vs " + std::to_string(anchors.size()) +
                     " anchors");
  const int num_parts = static_cast<int>(part_dts.size());
  Grid2D out(root_scores.rows, root_scores.cols);
  for (int y = 0; y < out.rows; ++y) {
    for (int x = 0; x < out.cols; ++x) {
      double acc = root_scores.at(y, x);
      bool ok = true;
      for (int p = 0; p < num_parts; ++p) {
        const Grid2D& dt = part_dts[p];
        const int py = y + anchors[p].dy;
        const int px = x + anchors[p].dx;
        if (py >= dt.rows || px >= dt.cols) {  // anchors are non-negative
          ok = false;
          break;
        }
        acc += dt.at(py, px);
      }
      out.at(y, x) = ok ? acc + bias : kNegInf;
    }
  }
  return out;
}

bool component_fits(const FeatureMap& level, const Component& comp) {
  auto fits = [&](const Filter& f) {
    return f.rows <= level.rows && f.cols <= level.cols;
  };
  if (!fits(comp.root)) return false;
  for (const Part& part : comp.parts)
    if (!fits(part.filter)) return false;
  return true;
}

namespace {

/// Placeholder for a component that does not fit the level: empty score
/// grid, one empty argmax grid per part so traceback code can index safely.
ComponentScore empty_component_score(const Component& comp) {
  ComponentScore cs;
  cs.part_argmax_y.resize(comp.parts.size());
  cs.part_argmax_x.resize(comp.parts.size());
  return cs;
}

}  // namespace

ComponentScore score_component(const FeatureMap& level,
                               const Component& comp) {
  if (!component_fits(level, comp)) return empty_component_score(comp);

  Grid2D root_scores = cross_correlate(level, comp.root);

  ComponentScore cs;
  std::vector<Grid2D> part_dts;
  std::vector<Anchor> anchors;
  part_dts.reserve(comp.parts.size());
  anchors.reserve(comp.parts.size());
  for (const Part& part : comp.parts) {
    Grid2D part_scores = cross_correlate(level, part.filter);
    DtResult2D dt = dt2d(part_scores, part.deformation);
    part_dts.push_back(std::move(dt.values));
    cs.part_argmax_y.push_back(std::move(dt.argmax_y));
    cs.part_argmax_x.push_back(std::move(dt.argmax_x));
    anchors.push_back(part.anchor);
  }

  cs.scores = geometry_gather(root_scores, part_dts, anchors, comp.bias);
  return cs;
}

void maxout_combine(const std::vector<ComponentScore>& per_component,
                    Grid2D& combined, IndexGrid& winner) {
  if (per_component.empty())
    throw DomainError("maxout_combine: no components");

  int rows = 0, cols = 0;
  for (const ComponentScore& cs : per_component) {
    rows = std::max(rows, cs.scores.rows);
    cols = std::max(cols, cs.scores.cols);
  }
  if (rows == 0 || cols == 0) {  // every component missed this level
    combined = Grid2D();
    winner = IndexGrid();
    return;
  }

  combined = Grid2D(rows, cols, kNegInf);
  winner = IndexGrid(rows, cols, 0);
  for (int c = 0; c < static_cast<int>(per_component.size()); ++c) {
    const Grid2D& s = per_component[c].scores;
    for (int y = 0; y < s.rows; ++y) {
      for (int x = 0; x < s.cols; ++x) {
        if (s.at(y, x) > combined.at(y, x)) {  // strict: ties keep lowest c
          combined.at(y, x) = s.at(y, x);
          winner.at(y, x) = c;
        }
      }
    }
  }
}

Grid2D subsample(const Grid2D& g, int stride) {
  if (stride < 1)
    throw ParamError("subsample: stride must be >= 1, got " +
                     std::to_string(stride));
  if (g.rows == 0 || g.cols == 0) return Grid2D();
  const int out_rows = (g.rows + stride - 1) / stride;
  const int out_cols = (g.cols + stride - 1) / stride;
  Grid2D out(out_rows, out_cols);
  for (int y = 0; y < out_rows; ++y)
    for (int x = 0; x < out_cols; ++x)
      out.at(y, x) = g.at(y * stride, x * stride);
  return out;
}

PyramidScores score_pyramid(const FeaturePyramid& pyr, const DpmModel& model,
                            int threads) {
  if (pyr.stride != model.feature.stride)
    throw ConfigError("pyramid stride " + std::to_string(pyr.stride) +
                      " does not match model stride " +
                      std::to_string(model.feature.stride));
  for (size_t l = 0; l < pyr.levels.size(); ++l) {
    if (pyr.levels[l].channels != model.feature.channels)
      throw ConfigError("pyramid level " + std::to_string(l) + " has " +
                        std::to_string(pyr.levels[l].channels) +
                        " channels, model expects " +
                        std::to_string(model.feature.channels));
  }

  const int num_levels = static_cast<int>(pyr.levels.size());
  const int num_comps = static_cast<int>(model.components.size());

  PyramidScores out;
  out.levels.resize(num_levels);
  for (LevelScores& ls : out.levels) ls.per_component.resize(num_comps);

  // Each (level, component) pair is independent and writes only its own
  // slot, so the thread schedule cannot affect the result.
  parallel_for(num_levels * num_comps, threads, [&](int i) {
    const int li = i / num_comps;
    const int ci = i % num_comps;
    out.levels[li].per_component[ci] =
        score_component(pyr.levels[li], model.components[ci]);
  });

  for (LevelScores& ls : out.levels)
    maxout_combine(ls.per_component, ls.combined, ls.winner);
  return out;
}

}  // namespace dpyr
