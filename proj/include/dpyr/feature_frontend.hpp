#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dpyr/core_types.hpp"
#include "dpyr/image.hpp"

namespace dpyr {

/// Geometry of a multi-scale pyramid.
struct PyramidConfig {
  int max_dim = 1713;  // longest side of level 0, in pixels
  int levels = 7;      // number of scales
  int interval = 2;    // scale step is 2^(-1/interval)
  int pad_y = 0;       // feature-map padding (cells) added on every side
  int pad_x = 0;
};

/// A stack of feature maps at decreasing scales. `scales[l]` is the resize
/// factor applied to the input image before computing `levels[l]`.
struct FeaturePyramid {
  std::vector<FeatureMap> levels;
  std::vector<double> scales;
  int stride = 8;  // pixels per feature cell
  int pad_y = 0;
  int pad_x = 0;
  std::string source;   // "hog31", "stub", "external", ...
  int image_rows = 0;   // original image size; 0 when unknown
  int image_cols = 0;
};

/// Maps an image to a single feature map. `cell` is the pixel stride.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual FeatureMap extract(const Image& img, int cell) const = 0;
  virtual int channels() const = 0;
  virtual std::string name() const = 0;
  /// Smallest image side (pixels) the extractor can featurize.
  virtual int min_pixels(int cell) const { return cell; }
};

/// 31-channel histogram-of-oriented-gradients features.
class Hog31Extractor : public FeatureExtractor {
 public:
  FeatureMap extract(const Image& img, int cell) const override;
  int channels() const override { return 31; }
  std::string name() const override { return "hog31"; }
  int min_pixels(int cell) const override { return 3 * cell; }
};

/// Deterministic placeholder features for plumbing tests: channel 0 carries
/// the mean image intensity of the cell, the rest a fixed ramp.
class StubExtractor : public FeatureExtractor {
 public:
  explicit StubExtractor(int channels) : channels_(channels) {}
  FeatureMap extract(const Image& img, int cell) const override;
  int channels() const override { return channels_; }
  std::string name() const override { return "stub"; }

 private:
  int channels_;
};

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name,
                                                 int stub_channels = 31);

/// Per-level scale factors: scales[l] = (max_dim / max(rows, cols)) *
/// 2^(-l/interval). Throws ParamError on a degenerate config or image.
std::vector<double> pyramid_scales(int rows, int cols,
                                   const PyramidConfig& cfg);

/// One resized level together with its scale factor.
struct ImagePyramidLevel {
  Image image;
  double scale;
};

/// Resized copies of `img`, one per scale. Levels whose shorter side would
/// fall below `min_level_px` pixels are dropped from the tail; a note is
/// appended to `warnings` when that happens.
std::vector<ImagePyramidLevel> build_image_pyramid(
    const Image& img, const PyramidConfig& cfg, int min_level_px = 8,
    std::vector<std::string>* warnings = nullptr);

/// 31-channel HOG of an RGB image with the given cell size. Output is
/// (round(rows/cell) - 2) x (round(cols/cell) - 2) cells; throws DomainError
/// if the image is too small for even one output cell.
FeatureMap hog31(const Image& img, int cell);

/// Full front end: image pyramid -> per-level features -> padding. Levels
/// too small to featurize are dropped (with a warning), so the result may
/// have fewer levels than `cfg.levels`.
FeaturePyramid build_feature_pyramid(const Image& img,
                                     const FeatureExtractor& ext,
                                     const PyramidConfig& cfg, int stride,
                                     std::vector<std::string>* warnings =
                                         nullptr);

/// Writes the binary pyramid container (magic "DPYR", version 1,
/// little-endian f32 payload). Throws Error on I/O failure, ValidationError
/// if the pyramid has no levels or non-finite scales.
void export_pyramid(const FeaturePyramid& pyr, const std::string& path);

/// Reads the binary container back. Errors carry the byte offset of the
/// failure; the payload is scanned for NaN and the scales checked for
/// strict monotone decrease. Imported pyramids have source "external" and
/// unknown image size.
FeaturePyramid import_pyramid(const std::string& path);

}  // namespace dpyr
