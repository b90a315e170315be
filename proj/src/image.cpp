#include "dpyr/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

namespace dpyr {

Image load_image(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error("cannot read image: " + path);
  Image img(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(y, x, 0) = row[x][2];
      img.at(y, x, 1) = row[x][1];
      img.at(y, x, 2) = row[x][0];
    }
  }
  return img;
}

void save_image(const Image& img, const std::string& path) {
  if (img.empty()) throw Error("cannot save empty image: " + path);
  cv::Mat bgr(img.rows, img.cols, CV_8UC3);
  for (int y = 0; y < img.rows; ++y) {
    cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.cols; ++x) {
      row[x][2] = img.at(y, x, 0);
      row[x][1] = img.at(y, x, 1);
      row[x][0] = img.at(y, x, 2);
    }
  }
  if (!cv::imwrite(path, bgr)) throw Error("cannot write image: " + path);
}

Image resize_bilinear(const Image& img, int out_rows, int out_cols) {
  if (img.empty()) throw ParamError("resize_bilinear: empty input");
  if (out_rows < 1 || out_cols < 1)
    throw ParamError("resize_bilinear: output must be at least 1x1");

  Image out(out_rows, out_cols);
  const double sy = static_cast<double>(img.rows) / out_rows;
  const double sx = static_cast<double>(img.cols) / out_cols;
  for (int y = 0; y < out_rows; ++y) {
    // Pixel centers aligned: output center (y+0.5) maps to input (y+0.5)*s.
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.rows - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.rows - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_cols; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.cols - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.cols - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * img.at(y0, x0, c) +
                           wx * img.at(y0, x1, c);
        const double bot = (1.0 - wx) * img.at(y1, x0, c) +
                           wx * img.at(y1, x1, c);
        const double v = (1.0 - wy) * top + wy * bot;
        out.at(y, x, c) =
            static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
      }
    }
  }
  return out;
}

void draw_box(Image& img, const BBox& box, std::uint8_t r, std::uint8_t g,
              std::uint8_t b, int thickness) {
  if (img.empty() || thickness < 1) return;
  for (int t = 0; t < thickness; ++t) {
    const int y1 = box.y1 + t, y2 = box.y2 - t;
    const int x1 = box.x1 + t, x2 = box.x2 - t;
    if (y1 > y2 || x1 > x2) break;
    auto put = [&](int y, int x) {
      if (y < 0 || y >= img.rows || x < 0 || x >= img.cols) return;
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    };
    for (int x = x1; x <= x2; ++x) {
      put(y1, x);
      put(y2, x);
    }
    for (int y = y1; y <= y2; ++y) {
      put(y, x1);
      put(y, x2);
    }
  }
}

}  // namespace dpyr
