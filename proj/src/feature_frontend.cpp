#include "dpyr/feature_frontend.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "dpyr/image.hpp"

namespace dpyr {

namespace {

inline int round_half_away(double v) { return static_cast<int>(std::lround(v)); }

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

std::vector<double> pyramid_scales(int rows, int cols,
                                   const PyramidConfig& cfg) {
  if (cfg.levels < 1 || cfg.interval < 1 || cfg.max_dim < 1 ||
      cfg.pad_y < 0 || cfg.pad_x < 0)
    throw ParamError("pyramid config: need levels >= 1, interval >= 1, "
                     "max_dim >= 1, pads >= 0");
  if (rows < 1 || cols < 1) throw DomainError("pyramid: zero-sized image");

  const double sigma0 =
      static_cast<double>(cfg.max_dim) / std::max(rows, cols);
  std::vector<double> scales(cfg.levels);
  // Computed per level (not accumulated) so sigma_{interval} = sigma0/2
  // exactly: exp2 of an integer is exact.
  for (int l = 0; l < cfg.levels; ++l)
    scales[l] = sigma0 * std::exp2(-static_cast<double>(l) / cfg.interval);
  return scales;
}

std::vector<ImagePyramidLevel> build_image_pyramid(
    const Image& img, const PyramidConfig& cfg, int min_level_px,
    std::vector<std::string>* warnings) {
  const std::vector<double> scales = pyramid_scales(img.rows, img.cols, cfg);

  std::vector<ImagePyramidLevel> levels;
  levels.reserve(scales.size());
  for (size_t l = 0; l < scales.size(); ++l) {
    const int rows = round_half_away(img.rows * scales[l]);
    const int cols = round_half_away(img.cols * scales[l]);
    if (rows < min_level_px || cols < min_level_px) {
      // Scales only shrink, so every later level is too small as well.
      if (warnings)
        warnings->push_back("dropping pyramid levels " + std::to_string(l) +
                            ".." + std::to_string(scales.size() - 1) +
                            ": scaled image " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " is below " +
                            std::to_string(min_level_px) + " px");
      break;
    }
    levels.push_back({resize_bilinear(img, rows, cols), scales[l]});
  }
  return levels;
}

FeatureMap StubExtractor::extract(const Image& img, int cell) const {
  if (cell < 1) throw ParamError("stub extract: cell must be >= 1");
  if (img.empty()) throw DomainError("stub extract: empty image");
  const int rows = ceil_div(img.rows, cell);
  const int cols = ceil_div(img.cols, cell);
  FeatureMap out(rows, cols, channels_);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      // Channel 0: mean intensity of the (clipped) cell window.
      double sum = 0.0;
      int count = 0;
      for (int py = y * cell; py < std::min((y + 1) * cell, img.rows); ++py) {
        for (int px = x * cell; px < std::min((x + 1) * cell, img.cols);
             ++px) {
          sum += img.at(py, px, 0) + img.at(py, px, 1) + img.at(py, px, 2);
          count += 3;
        }
      }
      out.at(y, x, 0) = static_cast<float>(sum / (255.0 * count));
      for (int c = 1; c < channels_; ++c)
        out.at(y, x, c) = static_cast<float>(c) / channels_;
    }
  }
  return out;
}

FeatureMap Hog31Extractor::extract(const Image& img, int cell) const {
  return hog31(img, cell);
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name,
                                                 int stub_channels) {
  if (name == "hog31") return std::make_unique<Hog31Extractor>();
  if (name == "stub") return std::make_unique<StubExtractor>(stub_channels);
  throw ConfigError("unknown feature extractor: " + name);
}

namespace {

FeatureMap pad_map(const FeatureMap& m, int pad_y, int pad_x) {
  if (pad_y == 0 && pad_x == 0) return m;
  FeatureMap out(m.rows + 2 * pad_y, m.cols + 2 * pad_x, m.channels);
  for (int y = 0; y < m.rows; ++y) {
    const size_t row_len = static_cast<size_t>(m.cols) * m.channels;
    std::copy_n(m.data.begin() + m.index(y, 0, 0), row_len,
                out.data.begin() + out.index(y + pad_y, pad_x, 0));
  }
  return out;
}

}  // namespace

FeaturePyramid build_feature_pyramid(const Image& img,
                                     const FeatureExtractor& ext,
                                     const PyramidConfig& cfg, int stride,
                                     std::vector<std::string>* warnings) {
  if (stride < 1) throw ParamError("build_feature_pyramid: stride must be >= 1");
  std::vector<ImagePyramidLevel> images =
      build_image_pyramid(img, cfg, ext.min_pixels(stride), warnings);
  if (images.empty())
    throw DomainError("build_feature_pyramid: image too small for even one "
                      "pyramid level");

  FeaturePyramid pyr;
  pyr.stride = stride;
  pyr.pad_y = cfg.pad_y;
  pyr.pad_x = cfg.pad_x;
  pyr.source = ext.name();
  pyr.image_rows = img.rows;
  pyr.image_cols = img.cols;
  pyr.levels.reserve(images.size());
  pyr.scales.reserve(images.size());
  for (const ImagePyramidLevel& lvl : images) {
    pyr.levels.push_back(pad_map(ext.extract(lvl.image, stride),
                                 cfg.pad_y, cfg.pad_x));
    pyr.scales.push_back(lvl.scale);
  }
  return pyr;
}

// ---------------------------------------------------------------------------
// Binary container. All integers little-endian.

namespace {

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& buf, float v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::string& buf, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

/// Sequential big-buffer reader that reports the byte offset of failures.
class ByteReader {
 public:
  explicit ByteReader(std::string bytes) : bytes_(std::move(bytes)) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }

  void need(size_t n, const std::string& what) {
    if (remaining() < n)
      throw FormatError("pyramid file truncated at byte " +
                        std::to_string(pos_) + ": " + what + " needs " +
                        std::to_string(n) + " bytes, " +
                        std::to_string(remaining()) + " remain");
  }

  std::uint32_t get_u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    pos_ += 4;
    return v;
  }

  double get_f64(const std::string& what) {
    need(8, what);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<std::uint64_t>(
                  static_cast<unsigned char>(bytes_[pos_ + i]))
              << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  void get_f32_array(float* dst, size_t count, const std::string& what) {
    need(count * 4, what);
    for (size_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(
                    static_cast<unsigned char>(bytes_[pos_ + 4 * i + b]))
                << (8 * b);
      dst[i] = std::bit_cast<float>(bits);
    }
    pos_ += count * 4;
  }

  std::string get_bytes(size_t n, const std::string& what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string bytes_;
  size_t pos_ = 0;
};

}  // namespace

void export_pyramid(const FeaturePyramid& pyr, const std::string& path) {
  if (pyr.levels.empty())
    throw ValidationError("export_pyramid: pyramid has no levels");
  if (pyr.scales.size() != pyr.levels.size())
    throw ValidationError("export_pyramid: " +
                          std::to_string(pyr.levels.size()) + " levels vs " +
                          std::to_string(pyr.scales.size()) + " scales");
  for (double s : pyr.scales)
    if (!std::isfinite(s) || s <= 0.0)
      throw ValidationError("export_pyramid: non-finite or non-positive scale");

  std::string buf;
  buf += "DPYR";
  put_u32(buf, 1);  // version
  put_u32(buf, static_cast<std::uint32_t>(pyr.stride));
  put_u32(buf, static_cast<std::uint32_t>(pyr.pad_y));
  put_u32(buf, static_cast<std::uint32_t>(pyr.pad_x));
  put_u32(buf, static_cast<std::uint32_t>(pyr.levels.size()));
  for (size_t l = 0; l < pyr.levels.size(); ++l) {
    const FeatureMap& m = pyr.levels[l];
    put_f64(buf, pyr.scales[l]);
    put_u32(buf, static_cast<std::uint32_t>(m.rows));
    put_u32(buf, static_cast<std::uint32_t>(m.cols));
    put_u32(buf, static_cast<std::uint32_t>(m.channels));
    for (float v : m.data) put_f32(buf, v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for write: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("write failed: " + path);
}

FeaturePyramid import_pyramid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open pyramid file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  ByteReader r(std::move(bytes));

  if (r.get_bytes(4, "magic") != "DPYR")
    throw FormatError("bad magic at byte 0: expected \"DPYR\"");
  const std::uint32_t version = r.get_u32("version");
  if (version != 1)
    throw FormatError("unsupported version " + std::to_string(version) +
                      " at byte 4 (expected 1)");

  FeaturePyramid pyr;
  pyr.source = "external";
  pyr.stride = static_cast<int>(r.get_u32("stride"));
  pyr.pad_y = static_cast<int>(r.get_u32("pad_y"));
  pyr.pad_x = static_cast<int>(r.get_u32("pad_x"));
  if (pyr.stride < 1)
    throw FormatError("stride must be >= 1, got " + std::to_string(pyr.stride));
  const std::uint32_t num_levels = r.get_u32("num_levels");
  if (num_levels == 0) throw FormatError("pyramid file declares zero levels");

  for (std::uint32_t l = 0; l < num_levels; ++l) {
    const std::string lvl = "level " + std::to_string(l);
    const size_t header_at = r.offset();
    const double scale = r.get_f64(lvl + " scale");
    if (!std::isfinite(scale) || scale <= 0.0)
      throw FormatError(lvl + " scale is not a positive finite number (byte " +
                        std::to_string(header_at) + ")");
    if (!pyr.scales.empty() && scale >= pyr.scales.back())
      throw FormatError("non-monotone scales: " + lvl + " scale " +
                        std::to_string(scale) + " >= previous " +
                        std::to_string(pyr.scales.back()));
    const std::uint32_t rows = r.get_u32(lvl + " rows");
    const std::uint32_t cols = r.get_u32(lvl + " cols");
    const std::uint32_t channels = r.get_u32(lvl + " channels");
    if (rows == 0 || cols == 0 || channels == 0)
      throw FormatError(lvl + " has zero dimension (byte " +
                        std::to_string(header_at) + ")");
    const std::uint64_t count =
        static_cast<std::uint64_t>(rows) * cols * channels;
    if (count > (1ull << 31))
      throw FormatError(lvl + " is implausibly large (byte " +
                        std::to_string(header_at) + ")");

    FeatureMap m(static_cast<int>(rows), static_cast<int>(cols),
                 static_cast<int>(channels));
    r.get_f32_array(m.data.data(), static_cast<size_t>(count), lvl + " data");
    for (float v : m.data)
      if (std::isnan(v))
        throw FormatError(lvl + " contains NaN feature values");
    pyr.levels.push_back(std::move(m));
    pyr.scales.push_back(scale);
  }
  if (r.remaining() != 0)
    throw FormatError("trailing data: " + std::to_string(r.remaining()) +
                      " unexpected bytes at byte " +
                      std::to_string(r.offset()));
  return pyr;
}

}  // namespace dpyr
